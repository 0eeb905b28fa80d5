//! Maximizing attractive counts over matchings with per-agent allowed sets
//! and bounds on attractive counts, solved exactly as integer flow.

mod brute;
pub(crate) mod flow;

pub use brute::{brute_force_max, brute_force_max_bounded, DEFAULT_ENUMERATION_BOUND};

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching, ObjectSet, TrichotomousPreference};
use flow::FlowNetwork;

/// Bounds for one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentConstraint {
    /// Objects counted toward the agent's welfare.
    pub attractive: ObjectSet,
    /// Objects the agent may receive.
    pub allowed: ObjectSet,
    pub min_attractive: usize,
    /// Fixes the attractive count when set.
    pub exact_attractive: Option<usize>,
}

impl AgentConstraint {
    pub fn admits(&self, bundle: &ObjectSet) -> bool {
        if !bundle.is_subset(&self.allowed) {
            return false;
        }
        let k = bundle.intersection(&self.attractive).count();
        match self.exact_attractive {
            Some(e) => k == e && k >= self.min_attractive,
            None => k >= self.min_attractive,
        }
    }
}

/// Per-agent constraints, indexed by priority position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WelfareConstraints {
    agents: Vec<AgentConstraint>,
}

impl WelfareConstraints {
    pub fn new(instance: &Instance, agents: Vec<AgentConstraint>) -> Result<Self> {
        if agents.len() != instance.num_agents() {
            return Err(Error::InvalidInstance(format!(
                "{} constraints for {} agents",
                agents.len(),
                instance.num_agents()
            )));
        }
        for a in instance.agents() {
            let c = &agents[a.0];
            let size = instance.endowment_size(a);
            if c.min_attractive > size || c.exact_attractive.is_some_and(|e| e < c.min_attractive || e > size) {
                return Err(Error::InvalidInstance(format!(
                    "attractive bounds for `{}` exceed the endowment size",
                    instance.agent_name(a)
                )));
            }
        }
        Ok(WelfareConstraints { agents })
    }

    /// Component-wise individually rational matchings at `(A, bearable)`
    /// that give every agent at least its attractive count under `baseline`.
    pub fn improving(
        instance: &Instance,
        prefs: &[TrichotomousPreference],
        bearable: &[ObjectSet],
        baseline: &Matching,
    ) -> Self {
        let agents = instance
            .agents()
            .map(|a| {
                let p = &prefs[a.0];
                let allowed = p.attractive().union(&bearable[a.0]).copied().collect();
                AgentConstraint {
                    attractive: p.attractive().clone(),
                    allowed,
                    min_attractive: p.welfare(baseline.bundle(a)).max(p.welfare(instance.endowment(a))),
                    exact_attractive: None,
                }
            })
            .collect();
        WelfareConstraints { agents }
    }

    pub fn agent(&self, a: AgentId) -> &AgentConstraint {
        &self.agents[a.0]
    }

    pub fn agent_mut(&mut self, a: AgentId) -> &mut AgentConstraint {
        &mut self.agents[a.0]
    }

    pub fn agents(&self) -> &[AgentConstraint] {
        &self.agents
    }

    pub fn admits(&self, mu: &Matching) -> bool {
        self.agents.iter().zip(mu.bundles()).all(|(c, b)| c.admits(b))
    }
}

/// Some matching satisfying the constraints, the least one in canonical order.
pub fn feasible(instance: &Instance, constraints: &WelfareConstraints) -> Option<Matching> {
    let mut net = FlowNetwork::new(instance, constraints);
    net.make_feasible().then(|| net.canonicalize(None))
}

/// Maximum attractive count for `target` over the constraint set, with the
/// least maximizing matching in canonical order.
pub fn max_attractive(
    instance: &Instance,
    constraints: &WelfareConstraints,
    target: AgentId,
) -> Result<(usize, Matching)> {
    let mut net = FlowNetwork::new(instance, constraints);
    if !net.make_feasible() {
        return Err(Error::Infeasible);
    }
    let k = net.maximize(target);
    net.lock_attractive(target);
    Ok((k, net.canonicalize(None)))
}

/// Flow network for the constraints in a line-oriented text format:
/// `supply <node> <amount>` lines, then `<from> -> <to> [<lower>, <cap>] <flow>`
/// lines. Nodes are `a<i>` (agent), `A<i>` and `B<i>` (attractive and other
/// tiers) and `o<k>` (object), with zero-based indices.
pub fn dump_network(instance: &Instance, constraints: &WelfareConstraints) -> String {
    FlowNetwork::new(instance, constraints).dump()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matching;

    fn competing() -> (Instance, Vec<TrichotomousPreference>) {
        let inst = Instance::from_endowments(&[
            ("1", &["o"][..]),
            ("2", &["p"][..]),
            ("3", &["q1", "q2"][..]),
            ("4", &["r"][..]),
        ])
        .unwrap();
        let prefs = vec![
            TrichotomousPreference::from_names(&inst, AgentId(0), &["q1"], &["o", "r"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(1), &["q1"], &["p", "r"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(2), &["o", "p"], &["q1", "q2"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(3), &["q2"], &["r"]).unwrap(),
        ];
        (inst, prefs)
    }

    fn minimal_bearable(inst: &Instance, prefs: &[TrichotomousPreference]) -> Vec<ObjectSet> {
        inst.agents()
            .map(|a| inst.endowment(a).difference(prefs[a.0].attractive()).copied().collect())
            .collect()
    }

    #[test]
    fn endowment_only_is_unique() {
        let (inst, prefs) = competing();
        let agents = inst
            .agents()
            .map(|a| AgentConstraint {
                attractive: prefs[a.0].attractive().clone(),
                allowed: inst.endowment(a).clone(),
                min_attractive: 0,
                exact_attractive: None,
            })
            .collect();
        let cons = WelfareConstraints::new(&inst, agents).unwrap();
        assert_eq!(feasible(&inst, &cons).unwrap(), Matching::endowment(&inst));
    }

    #[test]
    fn round_zero_is_feasible() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let cons = WelfareConstraints::improving(&inst, &prefs, &minimal_bearable(&inst, &prefs), &omega);
        assert!(cons.admits(&omega));
        assert!(cons.admits(&feasible(&inst, &cons).unwrap()));
    }

    #[test]
    fn exact_promises_pin_the_matching() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let bearable: Vec<ObjectSet> = prefs.iter().map(|p| p.bearable().clone()).collect();
        let mut cons = WelfareConstraints::improving(&inst, &prefs, &bearable, &omega);
        for (a, k) in [(0, 1), (1, 0), (2, 2), (3, 1)] {
            cons.agent_mut(AgentId(a)).exact_attractive = Some(k);
        }
        let mu = feasible(&inst, &cons).unwrap();
        assert_eq!(mu, Matching::from_names(&inst, &[&["q1"][..], &["r"], &["o", "p"], &["q2"]]).unwrap());
    }

    #[test]
    fn round_zero_promises() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let mut cons = WelfareConstraints::improving(&inst, &prefs, &minimal_bearable(&inst, &prefs), &omega);
        let (k, _) = max_attractive(&inst, &cons, AgentId(0)).unwrap();
        assert_eq!(k, 1);
        cons.agent_mut(AgentId(0)).exact_attractive = Some(1);
        cons.agent_mut(AgentId(1)).exact_attractive = Some(0);
        let (k, _) = max_attractive(&inst, &cons, AgentId(2)).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn infeasible_is_an_error() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let mut cons = WelfareConstraints::improving(&inst, &prefs, &minimal_bearable(&inst, &prefs), &omega);
        cons.agent_mut(AgentId(3)).min_attractive = 1;
        cons.agent_mut(AgentId(2)).min_attractive = 2;
        cons.agent_mut(AgentId(0)).min_attractive = 1;
        assert!(matches!(max_attractive(&inst, &cons, AgentId(0)), Err(Error::Infeasible)));
        assert!(feasible(&inst, &cons).is_none());
    }

    #[test]
    fn dump_lists_every_edge() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let cons = WelfareConstraints::improving(&inst, &prefs, &minimal_bearable(&inst, &prefs), &omega);
        let text = dump_network(&inst, &cons);
        assert!(text.contains("supply a0 1"));
        assert!(text.contains("A0 -> o2 [0, 1] 0"));
    }
}
