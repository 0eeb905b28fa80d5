use std::fmt;

use super::instance::{AgentId, Instance, ObjectId, ObjectSet};
use crate::error::{Error, Result};

/// An assignment of bundles to agents. Validated matchings give every agent
/// as many objects as it is endowed with, and no object twice.
///
/// The derived order compares agents in priority order and, per agent, the
/// sorted bundle lexicographically. This is the canonical order used for
/// every tie-break in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    bundles: Vec<ObjectSet>,
}

impl Matching {
    pub fn new(instance: &Instance, bundles: Vec<ObjectSet>) -> Result<Self> {
        let m = Matching { bundles };
        m.validate(instance)?;
        Ok(m)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_bundles_unchecked(bundles: Vec<ObjectSet>) -> Self {
        Matching { bundles }
    }

    pub fn endowment(instance: &Instance) -> Self {
        Matching {
            bundles: instance.agents().map(|a| instance.endowment(a).clone()).collect(),
        }
    }

    /// Builds a matching from object names, one slice per agent in priority order.
    pub fn from_names<S: AsRef<str>>(instance: &Instance, bundles: &[&[S]]) -> Result<Self> {
        let sets = bundles
            .iter()
            .map(|names| instance.object_set(names))
            .collect::<Result<Vec<_>>>()?;
        Matching::new(instance, sets)
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.bundles.len() != instance.num_agents() {
            return Err(Error::InvalidMatching(format!(
                "{} bundles for {} agents",
                self.bundles.len(),
                instance.num_agents()
            )));
        }
        let mut seen = vec![false; instance.num_objects()];
        for agent in instance.agents() {
            let bundle = &self.bundles[agent.0];
            if bundle.len() != instance.endowment_size(agent) {
                return Err(Error::InvalidMatching(format!(
                    "agent `{}` receives {} objects but is endowed with {}",
                    instance.agent_name(agent),
                    bundle.len(),
                    instance.endowment_size(agent)
                )));
            }
            for &o in bundle {
                if o.0 >= seen.len() {
                    return Err(Error::InvalidMatching(format!("unknown object {o}")));
                }
                if std::mem::replace(&mut seen[o.0], true) {
                    return Err(Error::InvalidMatching(format!(
                        "object `{}` assigned twice",
                        instance.object_name(o)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bundle(&self, agent: AgentId) -> &ObjectSet {
        &self.bundles[agent.0]
    }

    pub(crate) fn bundle_mut(&mut self, agent: AgentId) -> &mut ObjectSet {
        &mut self.bundles[agent.0]
    }

    pub fn bundles(&self) -> &[ObjectSet] {
        &self.bundles
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }

    /// The agent holding `object`, if any.
    pub fn holder(&self, object: ObjectId) -> Option<AgentId> {
        self.bundles
            .iter()
            .position(|b| b.contains(&object))
            .map(AgentId)
    }

    /// Object-indexed holder table.
    pub fn holders(&self, num_objects: usize) -> Vec<Option<AgentId>> {
        let mut out = vec![None; num_objects];
        for (i, b) in self.bundles.iter().enumerate() {
            for &o in b {
                out[o.0] = Some(AgentId(i));
            }
        }
        out
    }

    pub fn display<'a>(&'a self, instance: &'a Instance) -> MatchingDisplay<'a> {
        MatchingDisplay { matching: self, instance }
    }
}

pub struct MatchingDisplay<'a> {
    matching: &'a Matching,
    instance: &'a Instance,
}

impl fmt::Display for MatchingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, bundle) in self.matching.bundles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let names = self.instance.set_names(bundle);
            if names.len() == 1 {
                write!(f, "{}", names[0])?;
            } else {
                write!(f, "{{{}}}", names.join(","))?;
            }
        }
        write!(f, ")")
    }
}
