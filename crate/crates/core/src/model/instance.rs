use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Position of an agent in the priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

/// Position of an object in the lexicographic order of object identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// Sets iterate in ascending id order, so `Ord` on a set is the
/// lexicographic order of its sorted elements.
pub type ObjectSet = BTreeSet<ObjectId>;

/// Unvalidated instance data, as read from a file.
#[derive(Clone, Debug, Default)]
pub struct RawInstance {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    pub endowments: Vec<(String, Vec<String>)>,
}

/// A validated exchange market: agents in priority order, the object
/// universe, and pairwise disjoint non-empty endowments covering it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    objects: Vec<String>,
    endowments: Vec<ObjectSet>,
    owner: Vec<AgentId>,
    agent_index: HashMap<String, AgentId>,
    object_index: HashMap<String, ObjectId>,
}

pub fn validate_instance(raw: &RawInstance) -> Result<Instance> {
    let invalid = |msg: String| Error::InvalidInstance(msg);
    if raw.agents.is_empty() {
        return Err(invalid("no agents".into()));
    }

    let mut agent_index = HashMap::new();
    for (i, name) in raw.agents.iter().enumerate() {
        if agent_index.insert(name.clone(), AgentId(i)).is_some() {
            return Err(invalid(format!("duplicate agent `{name}`")));
        }
    }

    let mut objects = raw.objects.clone();
    objects.sort();
    if let Some(w) = objects.windows(2).find(|w| w[0] == w[1]) {
        return Err(invalid(format!("duplicate object `{}`", w[0])));
    }
    let object_index: HashMap<String, ObjectId> = objects
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), ObjectId(k)))
        .collect();

    let mut endowments: Vec<Option<ObjectSet>> = vec![None; raw.agents.len()];
    let mut owner: Vec<Option<AgentId>> = vec![None; objects.len()];
    for (agent_name, bundle) in &raw.endowments {
        let agent = *agent_index
            .get(agent_name)
            .ok_or_else(|| invalid(format!("endowment for unknown agent `{agent_name}`")))?;
        if endowments[agent.0].is_some() {
            return Err(invalid(format!("agent `{agent_name}` has two endowment entries")));
        }
        let mut set = ObjectSet::new();
        for obj_name in bundle {
            let obj = *object_index
                .get(obj_name)
                .ok_or_else(|| invalid(format!("unknown object `{obj_name}`")))?;
            if let Some(prev) = owner[obj.0] {
                return Err(invalid(format!(
                    "overlapping endowments: `{obj_name}` is endowed to both `{}` and `{agent_name}`",
                    raw.agents[prev.0]
                )));
            }
            owner[obj.0] = Some(agent);
            set.insert(obj);
        }
        if set.is_empty() {
            return Err(invalid(format!("agent `{agent_name}` has an empty endowment")));
        }
        endowments[agent.0] = Some(set);
    }

    let endowments = endowments
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| invalid(format!("agent `{}` has an empty endowment", raw.agents[i]))))
        .collect::<Result<Vec<_>>>()?;
    let owner = owner
        .into_iter()
        .enumerate()
        .map(|(k, o)| o.ok_or_else(|| invalid(format!("object `{}` is owned by nobody", objects[k]))))
        .collect::<Result<Vec<_>>>()?;

    Ok(Instance {
        agents: raw.agents.clone(),
        objects,
        endowments,
        owner,
        agent_index,
        object_index,
    })
}

impl Instance {
    /// Builds an instance whose object universe is the union of the given
    /// endowments. Agents keep the listed (priority) order.
    pub fn from_endowments<A, O>(endowments: &[(A, &[O])]) -> Result<Self>
    where
        A: AsRef<str>,
        O: AsRef<str>,
    {
        let raw = RawInstance {
            agents: endowments.iter().map(|(a, _)| a.as_ref().to_string()).collect(),
            objects: endowments
                .iter()
                .flat_map(|(_, objs)| objs.iter().map(|o| o.as_ref().to_string()))
                .collect(),
            endowments: endowments
                .iter()
                .map(|(a, objs)| {
                    (
                        a.as_ref().to_string(),
                        objs.iter().map(|o| o.as_ref().to_string()).collect(),
                    )
                })
                .collect(),
        };
        validate_instance(&raw)
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = AgentId> + Clone {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = ObjectId> + Clone {
        (0..self.objects.len()).map(ObjectId)
    }

    pub fn agent_name(&self, agent: AgentId) -> &str {
        &self.agents[agent.0]
    }

    pub fn object_name(&self, object: ObjectId) -> &str {
        &self.objects[object.0]
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn object_names(&self) -> &[String] {
        &self.objects
    }

    pub fn agent(&self, name: &str) -> Option<AgentId> {
        self.agent_index.get(name).copied()
    }

    pub fn object(&self, name: &str) -> Option<ObjectId> {
        self.object_index.get(name).copied()
    }

    pub fn endowment(&self, agent: AgentId) -> &ObjectSet {
        &self.endowments[agent.0]
    }

    pub fn endowment_size(&self, agent: AgentId) -> usize {
        self.endowments[agent.0].len()
    }

    pub fn owner(&self, object: ObjectId) -> AgentId {
        self.owner[object.0]
    }

    pub fn universe(&self) -> ObjectSet {
        self.objects().collect()
    }

    /// Resolves object names into a set, failing on unknown names.
    pub fn object_set<S: AsRef<str>>(&self, names: &[S]) -> Result<ObjectSet> {
        names
            .iter()
            .map(|n| {
                self.object(n.as_ref())
                    .ok_or_else(|| Error::InvalidInstance(format!("unknown object `{}`", n.as_ref())))
            })
            .collect()
    }

    pub fn set_names(&self, set: &ObjectSet) -> Vec<String> {
        set.iter().map(|&o| self.object_name(o).to_string()).collect()
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            agents: self.agents.clone(),
            objects: self.objects.clone(),
            endowments: self
                .agents()
                .map(|a| (self.agent_name(a).to_string(), self.set_names(self.endowment(a))))
                .collect(),
        }
    }

    /// The same market with agents listed in a different priority order.
    /// Returns the permutation `new position -> old position` alongside.
    pub fn with_priority<S: AsRef<str>>(&self, order: &[S]) -> Result<(Instance, Vec<AgentId>)> {
        if order.len() != self.num_agents() {
            return Err(Error::InvalidInstance(format!(
                "priority lists {} agents, instance has {}",
                order.len(),
                self.num_agents()
            )));
        }
        let mut perm = Vec::with_capacity(order.len());
        let mut seen = vec![false; self.num_agents()];
        for name in order {
            let a = self
                .agent(name.as_ref())
                .ok_or_else(|| Error::InvalidInstance(format!("unknown agent `{}` in priority", name.as_ref())))?;
            if std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::InvalidInstance(format!(
                    "agent `{}` listed twice in priority",
                    name.as_ref()
                )));
            }
            perm.push(a);
        }
        let raw = self.to_raw();
        let reordered = RawInstance {
            agents: perm.iter().map(|a| raw.agents[a.0].clone()).collect(),
            objects: raw.objects,
            endowments: perm.iter().map(|a| raw.endowments[a.0].clone()).collect(),
        };
        Ok((validate_instance(&reordered)?, perm))
    }
}
