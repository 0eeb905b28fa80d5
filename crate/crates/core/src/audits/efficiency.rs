use std::ops::ControlFlow;

use serde::Serialize;

use super::enumerate::{check_bound, search_matchings};
use crate::cycles::{find_cir_pareto_improving_cycle, Cycle};
use crate::error::{Error, Result};
use crate::model::{Instance, Matching, RankOrder, TrichotomousPreference};
use crate::optimize::DEFAULT_ENUMERATION_BOUND;
use crate::responsive::{dominates, strictly_dominates};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfficiencyMode {
    /// Search for an improving cycle. Needs trichotomous preferences and a
    /// component-wise individually rational matching.
    Cycle,
    /// Enumerate every matching.
    Brute,
}

/// Why a matching fails unambiguous efficiency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Improvement {
    Cycle(Cycle),
    Matching(Matching),
}

impl Improvement {
    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        match self {
            Improvement::Cycle(c) => serde_json::json!({
                "cycle": c.steps().iter().map(|&(a, o)| {
                    serde_json::json!([instance.agent_name(a), instance.object_name(o)])
                }).collect::<Vec<_>>()
            }),
            Improvement::Matching(nu) => serde_json::json!({
                "matching": crate::model::io::matching_to_json(instance, nu)
            }),
        }
    }
}

/// Some matching `ν` that Pareto-improves `mu` for at least one profile of
/// responsive extensions: no agent's `μ(i)` beats `ν(i)` under every
/// extension, and some agent strictly prefers `ν(j)` under some extension.
/// Extensions are chosen per agent, so the two conditions separate.
pub fn brute_force_improvement<P: RankOrder>(
    instance: &Instance,
    mu: &Matching,
    prefs: &[P],
    bound: usize,
) -> Result<Option<Matching>> {
    check_bound(instance, bound)?;
    let found = search_matchings(
        instance,
        |a, bundle| !strictly_dominates(mu.bundle(a), bundle, &prefs[a.0]),
        |bundles| {
            let strict = instance
                .agents()
                .any(|a| !dominates(mu.bundle(a), &bundles[a.0], &prefs[a.0]));
            if strict {
                ControlFlow::Break(bundles.to_vec())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    Ok(found.map(|b| Matching::new(instance, b).expect("enumerated matchings are valid")))
}

/// Improvement witness, or `None` when `mu` is unambiguously efficient.
pub fn efficiency_witness(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
    mode: EfficiencyMode,
) -> Result<Option<Improvement>> {
    match mode {
        EfficiencyMode::Cycle => match find_cir_pareto_improving_cycle(instance, mu, prefs) {
            Ok(c) => Ok(c.map(Improvement::Cycle)),
            Err(Error::NotComponentwiseIr) => Err(Error::ModeScope(
                "cycle mode applies only to component-wise individually rational matchings".into(),
            )),
            Err(e) => Err(e),
        },
        EfficiencyMode::Brute => {
            Ok(brute_force_improvement(instance, mu, prefs, DEFAULT_ENUMERATION_BOUND)?.map(Improvement::Matching))
        }
    }
}

pub fn unambiguously_efficient(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
    mode: EfficiencyMode,
) -> Result<bool> {
    Ok(efficiency_witness(instance, mu, prefs, mode)?.is_none())
}

/// Unambiguous efficiency for arbitrary marginal preferences, by enumeration.
pub fn unambiguously_efficient_general<P: RankOrder>(
    instance: &Instance,
    mu: &Matching,
    prefs: &[P],
    bound: usize,
) -> Result<bool> {
    Ok(brute_force_improvement(instance, mu, prefs, bound)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, MarginalPreference, ObjectSet};
    use crate::responsive::is_component_wise_ir;

    fn example_one() -> (Instance, Vec<MarginalPreference>) {
        let inst = Instance::from_endowments(&[("1", &["o1", "o2"][..]), ("2", &["p1", "p2"][..])]).unwrap();
        let pref = MarginalPreference::from_names(&inst, &[&["o1"][..], &["p1"], &["p2"], &["o2"]]).unwrap();
        (inst, vec![pref.clone(), pref])
    }

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

    #[test]
    fn example_one_has_no_efficient_ir_matching() {
        let (inst, prefs) = example_one();
        let mut cir = Vec::new();
        for mu in crate::audits::enumerate_matchings(&inst).unwrap() {
            if is_component_wise_ir(&inst, &mu, &prefs) {
                cir.push(mu.clone());
            }
        }
        assert_eq!(cir, vec![Matching::endowment(&inst)]);
        let nu = brute_force_improvement(&inst, &cir[0], &prefs, 10).unwrap().unwrap();
        assert_eq!(nu, Matching::from_names(&inst, &[&["p1", "p2"][..], &["o1", "o2"]]).unwrap());
    }

    #[test]
    fn competing_efficient_ir_pair() {
        let (inst, prefs) = competing();
        let mut found = Vec::new();
        for mu in crate::audits::enumerate_matchings(&inst).unwrap() {
            if crate::responsive::cir_trichotomous(&inst, &mu, &prefs) {
                let brute = unambiguously_efficient(&inst, &mu, &prefs, EfficiencyMode::Brute).unwrap();
                let cycle = unambiguously_efficient(&inst, &mu, &prefs, EfficiencyMode::Cycle).unwrap();
                assert_eq!(brute, cycle, "{}", mu.display(&inst));
                if brute {
                    found.push(mu);
                }
            }
        }
        let mu1 = Matching::from_names(&inst, &[&["q1"][..], &["r"], &["o", "p"], &["q2"]]).unwrap();
        let mu2 = Matching::from_names(&inst, &[&["r"][..], &["q1"], &["o", "p"], &["q2"]]).unwrap();
        assert_eq!(found, vec![mu1, mu2]);
    }

    #[test]
    fn nothing_attractive_means_efficient() {
        let (inst, _) = competing();
        let prefs: Vec<_> = inst
            .agents()
            .map(|a| TrichotomousPreference::new(inst.endowment(a), ObjectSet::new(), inst.universe()).unwrap())
            .collect();
        let omega = Matching::endowment(&inst);
        assert!(unambiguously_efficient(&inst, &omega, &prefs, EfficiencyMode::Cycle).unwrap());
        assert!(unambiguously_efficient(&inst, &omega, &prefs, EfficiencyMode::Brute).unwrap());
    }

    #[test]
    fn cycle_mode_scope() {
        let (inst, prefs) = competing();
        let bad = Matching::from_names(&inst, &[&["r"][..], &["o"], &["p", "q1"], &["q2"]]).unwrap();
        assert!(matches!(
            unambiguously_efficient(&inst, &bad, &prefs, EfficiencyMode::Cycle),
            Err(Error::ModeScope(_))
        ));
        assert!(!unambiguously_efficient(&inst, &bad, &prefs, EfficiencyMode::Brute).unwrap());
    }
}
