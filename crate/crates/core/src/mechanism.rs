//! The individually rational priority mechanism.
//!
//! A serial dictatorship over component-wise individually rational
//! matchings that weakly improve a baseline, wrapped in an elicitation
//! loop: bearable sets are read only from agents whose attractive count can
//! no longer rise, whatever the others find bearable.

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching, ObjectSet, TrichotomousPreference};
use crate::optimize::flow::FlowNetwork;
use crate::optimize::WelfareConstraints;
use crate::responsive::cir_trichotomous;

/// Result of one serial dictatorship pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub matching: Matching,
    /// Promised attractive count per agent, in priority order.
    pub promises: Vec<usize>,
    /// Flow queries spent.
    pub queries: usize,
}

/// Runs the dictatorship in priority order over the individually rational
/// matchings at `profile` that weakly improve `mu`, and returns the
/// canonical survivor: objects each agent holds under `mu` are preferred,
/// then lower identifiers.
pub fn serial_refine(instance: &Instance, profile: &[TrichotomousPreference], mu: &Matching) -> Result<Refinement> {
    if !cir_trichotomous(instance, mu, profile) {
        return Err(Error::NotComponentwiseIr);
    }
    let mut net = improvement_network(instance, profile, mu)?;
    let promises = instance
        .agents()
        .map(|a| {
            let k = net.maximize(a);
            net.lock_attractive(a);
            k
        })
        .collect();
    let matching = net.canonicalize(Some(mu));
    Ok(Refinement {
        matching,
        promises,
        queries: net.queries(),
    })
}

fn improvement_network(instance: &Instance, profile: &[TrichotomousPreference], mu: &Matching) -> Result<FlowNetwork> {
    let bearable: Vec<ObjectSet> = profile.iter().map(|p| p.bearable().clone()).collect();
    let constraints = WelfareConstraints::improving(instance, profile, &bearable, mu);
    let mut net = FlowNetwork::new(instance, &constraints);
    if !net.seed(instance, mu) {
        return Err(Error::Invariant("baseline matching violates its own constraints".into()));
    }
    Ok(net)
}

/// Agents whose attractive count no individually rational matching at
/// `profile` that weakly improves `mu` can raise. Also returns the number
/// of flow queries used.
pub fn non_improvable_set(
    instance: &Instance,
    profile: &[TrichotomousPreference],
    mu: &Matching,
) -> Result<(Vec<AgentId>, usize)> {
    if !cir_trichotomous(instance, mu, profile) {
        return Err(Error::NotComponentwiseIr);
    }
    let mut net = improvement_network(instance, profile, mu)?;
    let agents = instance.agents().filter(|&a| !net.can_increase(a)).collect();
    Ok((agents, net.queries()))
}

/// State after round `t` of the elicitation loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundState {
    pub round: usize,
    pub matching: Matching,
    /// Promises of the pass that produced `matching`; empty for round 0.
    pub promises: Vec<usize>,
    pub non_improvable: Vec<AgentId>,
    /// Bearable sets used by the next pass.
    pub bearable: Vec<ObjectSet>,
    /// Largest bearable sets consistent with what has been elicited.
    pub bearable_max: Vec<ObjectSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismTrace {
    pub rounds: Vec<RoundState>,
    pub final_promises: Vec<usize>,
    pub final_matching: Matching,
    /// Round in which each agent's bearable set was first read.
    pub elicited_at: Vec<Option<usize>>,
    pub flow_queries: usize,
}

impl MechanismTrace {
    /// Index of the last round, at which every agent is non-improvable.
    pub fn last_round(&self) -> usize {
        self.rounds.last().map_or(0, |r| r.round)
    }
}

/// Runs the mechanism on a trichotomous profile, agents in priority order.
///
/// Fails with [`Error::Invariant`] if a round adds no agent to the
/// non-improvable set before it covers everyone.
pub fn run_ir_priority(instance: &Instance, prefs: &[TrichotomousPreference]) -> Result<(Matching, MechanismTrace)> {
    let n = instance.num_agents();
    let universe = instance.universe();
    let minimal: Vec<ObjectSet> = instance
        .agents()
        .map(|a| instance.endowment(a).difference(prefs[a.0].attractive()).copied().collect())
        .collect();
    let maximal: Vec<ObjectSet> = prefs
        .iter()
        .map(|p| universe.difference(p.attractive()).copied().collect())
        .collect();

    let mut mu = Matching::endowment(instance);
    let mut bearable = minimal.clone();
    let mut bearable_max = maximal.clone();
    let mut previous: Vec<AgentId> = Vec::new();
    let mut elicited_at = vec![None; n];
    let mut queries = 0;
    let mut rounds = vec![RoundState {
        round: 0,
        matching: mu.clone(),
        promises: Vec::new(),
        non_improvable: Vec::new(),
        bearable: bearable.clone(),
        bearable_max: bearable_max.clone(),
    }];

    for t in 1.. {
        let refined = serial_refine(instance, &with_bearable(prefs, &bearable), &mu)?;
        queries += refined.queries;
        mu = refined.matching;
        let (stuck, q) = non_improvable_set(instance, &with_bearable(prefs, &bearable_max), &mu)?;
        queries += q;
        if stuck.len() < n && stuck.iter().all(|a| previous.contains(a)) {
            return Err(Error::Invariant(format!(
                "round {t}: non-improvable set {:?} did not grow from {:?}",
                names(instance, &stuck),
                names(instance, &previous)
            )));
        }
        for a in instance.agents() {
            let known = stuck.contains(&a);
            if known && elicited_at[a.0].is_none() {
                elicited_at[a.0] = Some(t);
            }
            bearable[a.0] = if known { prefs[a.0].bearable().clone() } else { minimal[a.0].clone() };
            bearable_max[a.0] = if known { prefs[a.0].bearable().clone() } else { maximal[a.0].clone() };
        }
        rounds.push(RoundState {
            round: t,
            matching: mu.clone(),
            promises: refined.promises,
            non_improvable: stuck.clone(),
            bearable: bearable.clone(),
            bearable_max: bearable_max.clone(),
        });
        if stuck.len() == n {
            break;
        }
        previous = stuck;
    }

    let last = serial_refine(instance, prefs, &mu)?;
    queries += last.queries;
    let trace = MechanismTrace {
        rounds,
        final_promises: last.promises,
        final_matching: last.matching.clone(),
        elicited_at,
        flow_queries: queries,
    };
    Ok((last.matching, trace))
}

fn with_bearable(prefs: &[TrichotomousPreference], bearable: &[ObjectSet]) -> Vec<TrichotomousPreference> {
    prefs.iter().zip(bearable).map(|(p, b)| p.with_bearable(b.clone())).collect()
}

fn names(instance: &Instance, agents: &[AgentId]) -> Vec<String> {
    agents.iter().map(|&a| instance.agent_name(a).to_string()).collect()
}

/// Runs the mechanism with agents taken in `order` instead of listed order.
/// The returned matching and trace refer to the reordered instance, which
/// is returned alongside.
pub fn run_with_priority<S: AsRef<str>>(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    order: &[S],
) -> Result<(Instance, Matching, MechanismTrace)> {
    let (reordered, perm) = instance.with_priority(order)?;
    let permuted: Vec<TrichotomousPreference> = perm.iter().map(|a| prefs[a.0].clone()).collect();
    let (mu, trace) = run_ir_priority(&reordered, &permuted)?;
    Ok((reordered, mu, trace))
}

type Bundles = IndexMap<String, Vec<String>>;

#[derive(Serialize)]
struct RoundReport {
    round: usize,
    matching: Bundles,
    promises: IndexMap<String, usize>,
    non_improvable: Vec<String>,
    bearable: Bundles,
    bearable_max: Bundles,
}

#[derive(Serialize)]
struct TraceReport {
    rounds: Vec<RoundReport>,
    final_promises: IndexMap<String, usize>,
    final_matching: Bundles,
    elicited_at: IndexMap<String, Option<usize>>,
    flow_queries: usize,
}

impl MechanismTrace {
    /// JSON document with agent and object names. Field order is fixed.
    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        let per_agent_sets = |sets: &[ObjectSet]| -> Bundles {
            instance
                .agents()
                .map(|a| (instance.agent_name(a).to_string(), instance.set_names(&sets[a.0])))
                .collect()
        };
        let per_agent_counts = |counts: &[usize]| -> IndexMap<String, usize> {
            counts
                .iter()
                .enumerate()
                .map(|(i, &k)| (instance.agent_name(AgentId(i)).to_string(), k))
                .collect()
        };
        let report = TraceReport {
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundReport {
                    round: r.round,
                    matching: per_agent_sets(r.matching.bundles()),
                    promises: per_agent_counts(&r.promises),
                    non_improvable: names(instance, &r.non_improvable),
                    bearable: per_agent_sets(&r.bearable),
                    bearable_max: per_agent_sets(&r.bearable_max),
                })
                .collect(),
            final_promises: per_agent_counts(&self.final_promises),
            final_matching: per_agent_sets(self.final_matching.bundles()),
            elicited_at: instance
                .agents()
                .map(|a| (instance.agent_name(a).to_string(), self.elicited_at[a.0]))
                .collect(),
            flow_queries: self.flow_queries,
        };
        serde_json::to_value(report).expect("trace report serializes")
    }
}
