use super::instance::{AgentId, Instance, ObjectId, ObjectSet};
use crate::error::{Error, Result};

/// A weak order over objects, read through the rank of each object's
/// indifference class (0 = best).
pub trait RankOrder {
    fn rank(&self, object: ObjectId) -> usize;

    /// `a` is weakly preferred to `b`.
    fn weakly_prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.rank(a) <= self.rank(b)
    }
}

/// A marginal preference stored as indifference classes, best first.
/// Empty classes are kept so that class indices line up with domain ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalPreference {
    classes: Vec<ObjectSet>,
    rank: Vec<usize>,
}

impl MarginalPreference {
    /// `classes` must partition the object universe of size `num_objects`.
    pub fn new(num_objects: usize, classes: Vec<ObjectSet>) -> Result<Self> {
        let mut rank = vec![usize::MAX; num_objects];
        for (k, class) in classes.iter().enumerate() {
            for &o in class {
                if o.0 >= num_objects {
                    return Err(invalid(format!("unknown object {o}")));
                }
                if rank[o.0] != usize::MAX {
                    return Err(invalid(format!("object {o} appears in two classes")));
                }
                rank[o.0] = k;
            }
        }
        if let Some(k) = rank.iter().position(|&r| r == usize::MAX) {
            return Err(invalid(format!("object @{k} is not ranked")));
        }
        Ok(MarginalPreference { classes, rank })
    }

    pub fn from_names<S: AsRef<str>>(instance: &Instance, classes: &[&[S]]) -> Result<Self> {
        let sets = classes
            .iter()
            .map(|names| instance.object_set(names))
            .collect::<Result<Vec<_>>>()?;
        MarginalPreference::new(instance.num_objects(), sets)
    }

    /// Like [`from_names`](Self::from_names), but every object not listed is
    /// placed in one extra bottom class.
    pub fn from_names_with_rest<S: AsRef<str>>(instance: &Instance, classes: &[&[S]]) -> Result<Self> {
        let mut sets = classes
            .iter()
            .map(|names| instance.object_set(names))
            .collect::<Result<Vec<_>>>()?;
        let listed: ObjectSet = sets.iter().flatten().copied().collect();
        let rest: ObjectSet = instance.objects().filter(|o| !listed.contains(o)).collect();
        if !rest.is_empty() {
            sets.push(rest);
        }
        MarginalPreference::new(instance.num_objects(), sets)
    }

    pub fn classes(&self) -> &[ObjectSet] {
        &self.classes
    }

    pub fn class(&self, k: usize) -> Option<&ObjectSet> {
        self.classes.get(k)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

impl RankOrder for MarginalPreference {
    fn rank(&self, object: ObjectId) -> usize {
        self.rank[object.0]
    }
}

fn invalid(reason: String) -> Error {
    Error::InvalidPreference {
        agent: "?".into(),
        reason,
    }
}

/// A trichotomous marginal preference: attractive objects, then bearable
/// ones, then everything else (unacceptable).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrichotomousPreference {
    attractive: ObjectSet,
    bearable: ObjectSet,
}

impl TrichotomousPreference {
    /// Requires `A ∩ B = ∅` and `endowment ⊆ A ∪ B`.
    pub fn new(endowment: &ObjectSet, attractive: ObjectSet, bearable: ObjectSet) -> Result<Self> {
        if let Some(o) = attractive.intersection(&bearable).next() {
            return Err(invalid(format!("object {o} is both attractive and bearable")));
        }
        if let Some(o) = endowment
            .iter()
            .find(|o| !attractive.contains(o) && !bearable.contains(o))
        {
            return Err(invalid(format!("endowed object {o} is unacceptable")));
        }
        Ok(TrichotomousPreference { attractive, bearable })
    }

    pub fn from_names<S: AsRef<str>>(
        instance: &Instance,
        agent: AgentId,
        attractive: &[S],
        bearable: &[S],
    ) -> Result<Self> {
        Self::new(
            instance.endowment(agent),
            instance.object_set(attractive)?,
            instance.object_set(bearable)?,
        )
        .map_err(|e| name_agent(e, instance, agent))
    }

    /// Strongly trichotomous preference: the bearable set is exactly the
    /// non-attractive part of the endowment.
    pub fn strongly(endowment: &ObjectSet, attractive: ObjectSet) -> Self {
        let bearable = endowment.difference(&attractive).copied().collect();
        TrichotomousPreference { attractive, bearable }
    }

    pub fn attractive(&self) -> &ObjectSet {
        &self.attractive
    }

    pub fn bearable(&self) -> &ObjectSet {
        &self.bearable
    }

    pub fn is_attractive(&self, o: ObjectId) -> bool {
        self.attractive.contains(&o)
    }

    pub fn is_acceptable(&self, o: ObjectId) -> bool {
        self.attractive.contains(&o) || self.bearable.contains(&o)
    }

    pub fn acceptable(&self) -> ObjectSet {
        self.attractive.union(&self.bearable).copied().collect()
    }

    /// Number of attractive objects in `bundle`, the agent's welfare index.
    pub fn welfare(&self, bundle: &ObjectSet) -> usize {
        bundle.iter().filter(|o| self.attractive.contains(o)).count()
    }

    pub fn with_bearable(&self, bearable: ObjectSet) -> Self {
        TrichotomousPreference {
            attractive: self.attractive.clone(),
            bearable,
        }
    }

    /// Whether no non-endowed object is bearable.
    pub fn is_strongly(&self, endowment: &ObjectSet) -> bool {
        self.bearable.is_subset(endowment)
    }

    /// Three-class encoding `[A, B, O \ (A ∪ B)]`.
    pub fn to_marginal(&self, num_objects: usize) -> MarginalPreference {
        let rest = (0..num_objects)
            .map(ObjectId)
            .filter(|o| !self.is_acceptable(*o))
            .collect();
        MarginalPreference::new(
            num_objects,
            vec![self.attractive.clone(), self.bearable.clone(), rest],
        )
        .expect("A, B and rest partition the universe")
    }
}

impl RankOrder for TrichotomousPreference {
    fn rank(&self, object: ObjectId) -> usize {
        if self.attractive.contains(&object) {
            0
        } else if self.bearable.contains(&object) {
            1
        } else {
            2
        }
    }
}

pub(crate) fn name_agent(err: Error, instance: &Instance, agent: AgentId) -> Error {
    match err {
        Error::InvalidPreference { reason, .. } => Error::InvalidPreference {
            agent: instance.agent_name(agent).to_string(),
            reason,
        },
        other => other,
    }
}

fn deep_endowed(pref: &MarginalPreference, endowment: &ObjectSet) -> Option<(ObjectId, usize)> {
    endowment
        .iter()
        .map(|&o| (o, pref.rank(o)))
        .find(|&(_, class)| class >= 2)
}

/// Reads a marginal preference as trichotomous: class 1 becomes the
/// attractive set, class 2 the bearable set, and lower classes collapse into
/// the unacceptable tier. Fails if an endowed object sits below class 2.
pub fn to_trichotomous(pref: &MarginalPreference, endowment: &ObjectSet) -> Result<TrichotomousPreference> {
    if let Some((o, class)) = deep_endowed(pref, endowment) {
        return Err(Error::NotTrichotomous {
            agent: "?".into(),
            object: o.to_string(),
            class: class + 1,
        });
    }
    let empty = ObjectSet::new();
    let attractive = pref.class(0).unwrap_or(&empty).clone();
    let bearable = pref.class(1).unwrap_or(&empty).clone();
    Ok(TrichotomousPreference { attractive, bearable })
}

/// Converts a whole marginal profile, naming the offending agent and object on failure.
pub fn trichotomous_profile(
    instance: &Instance,
    prefs: &[MarginalPreference],
) -> Result<Vec<TrichotomousPreference>> {
    instance
        .agents()
        .map(|a| {
            if let Some((o, class)) = deep_endowed(&prefs[a.0], instance.endowment(a)) {
                return Err(Error::NotTrichotomous {
                    agent: instance.agent_name(a).to_string(),
                    object: instance.object_name(o).to_string(),
                    class: class + 1,
                });
            }
            to_trichotomous(&prefs[a.0], instance.endowment(a))
        })
        .collect()
}

pub fn marginal_profile(instance: &Instance, prefs: &[TrichotomousPreference]) -> Vec<MarginalPreference> {
    prefs.iter().map(|p| p.to_marginal(instance.num_objects())).collect()
}
