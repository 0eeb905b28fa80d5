//! JSON instance files.
//!
//! ```json
//! {
//!   "agents": ["1", "2"],
//!   "objects": ["o1", "o2", "p1", "p2"],
//!   "endowments": { "1": ["o1", "o2"], "2": ["p1", "p2"] },
//!   "preferences": {
//!     "1": { "classes": [["o1"], ["p1"], ["p2"], ["o2"]] },
//!     "2": { "attractive": ["o1"], "bearable": ["p1", "p2"] }
//!   },
//!   "meta": { "seed": 7 }
//! }
//! ```
//!
//! `agents` lists the priority order. `classes` must partition the objects;
//! in the `attractive`/`bearable` form every other object is unacceptable.
//! `preferences` and `meta` are optional; any other field is rejected.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::instance::{validate_instance, AgentId, Instance, RawInstance};
use super::matching::Matching;
use super::preference::{name_agent, MarginalPreference, TrichotomousPreference};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    pub endowments: IndexMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub preferences: IndexMap<String, PreferenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum PreferenceSpec {
    Classes(ClassesSpec),
    Trichotomous(TrichotomousSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ClassesSpec {
    pub classes: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TrichotomousSpec {
    pub attractive: Vec<String>,
    pub bearable: Vec<String>,
}

/// A parsed instance file.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub instance: Instance,
    /// One marginal preference per agent in priority order, when the file
    /// specifies preferences for every agent.
    pub preferences: Option<Vec<MarginalPreference>>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(&self) -> Result<LoadedInstance> {
        let raw = RawInstance {
            agents: self.agents.clone(),
            objects: self.objects.clone(),
            endowments: self.endowments.iter().map(|(a, os)| (a.clone(), os.clone())).collect(),
        };
        let instance = validate_instance(&raw)?;
        if self.preferences.is_empty() {
            return Ok(LoadedInstance {
                instance,
                preferences: None,
            });
        }
        if let Some(name) = self.preferences.keys().find(|n| instance.agent(n).is_none()) {
            return Err(Error::InvalidPreference {
                agent: name.clone(),
                reason: "unknown agent".into(),
            });
        }
        let prefs = instance
            .agents()
            .map(|a| {
                let name = instance.agent_name(a);
                let spec = self.preferences.get(name).ok_or_else(|| Error::InvalidPreference {
                    agent: name.to_string(),
                    reason: "missing preference".into(),
                })?;
                spec.resolve(&instance, a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedInstance {
            instance,
            preferences: Some(prefs),
        })
    }

    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            agents: instance.agent_names().to_vec(),
            objects: instance.object_names().to_vec(),
            endowments: instance
                .agents()
                .map(|a| (instance.agent_name(a).to_string(), instance.set_names(instance.endowment(a))))
                .collect(),
            preferences: IndexMap::new(),
            meta: None,
        }
    }

    pub fn with_trichotomous(mut self, instance: &Instance, prefs: &[TrichotomousPreference]) -> Self {
        self.preferences = instance
            .agents()
            .map(|a| {
                let p = &prefs[a.0];
                (
                    instance.agent_name(a).to_string(),
                    PreferenceSpec::Trichotomous(TrichotomousSpec {
                        attractive: instance.set_names(p.attractive()),
                        bearable: instance.set_names(p.bearable()),
                    }),
                )
            })
            .collect();
        self
    }

    pub fn with_marginal(mut self, instance: &Instance, prefs: &[MarginalPreference]) -> Self {
        self.preferences = instance
            .agents()
            .map(|a| {
                (
                    instance.agent_name(a).to_string(),
                    PreferenceSpec::Classes(ClassesSpec {
                        classes: prefs[a.0].classes().iter().map(|c| instance.set_names(c)).collect(),
                    }),
                )
            })
            .collect();
        self
    }
}

impl PreferenceSpec {
    fn resolve(&self, instance: &Instance, agent: AgentId) -> Result<MarginalPreference> {
        match self {
            PreferenceSpec::Classes(c) => {
                let refs: Vec<&[String]> = c.classes.iter().map(|v| v.as_slice()).collect();
                MarginalPreference::from_names(instance, &refs).map_err(|e| name_agent(e, instance, agent))
            }
            PreferenceSpec::Trichotomous(t) => {
                let tri = TrichotomousPreference::from_names(instance, agent, &t.attractive, &t.bearable)?;
                Ok(tri.to_marginal(instance.num_objects()))
            }
        }
    }
}

/// Matching as a map from agent name to object names, in priority order.
pub fn matching_to_json(instance: &Instance, matching: &Matching) -> IndexMap<String, Vec<String>> {
    instance
        .agents()
        .map(|a| (instance.agent_name(a).to_string(), instance.set_names(matching.bundle(a))))
        .collect()
}

pub fn matching_from_json(instance: &Instance, map: &IndexMap<String, Vec<String>>) -> Result<Matching> {
    if let Some(name) = map.keys().find(|n| instance.agent(n).is_none()) {
        return Err(Error::InvalidMatching(format!("unknown agent `{name}`")));
    }
    let bundles = instance
        .agents()
        .map(|a| {
            let names = map
                .get(instance.agent_name(a))
                .ok_or_else(|| Error::InvalidMatching(format!("no bundle for `{}`", instance.agent_name(a))))?;
            instance
                .object_set(names)
                .map_err(|e| Error::InvalidMatching(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Matching::new(instance, bundles)
}
