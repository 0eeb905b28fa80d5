use std::ops::ControlFlow;

use super::efficiency::{efficiency_witness, EfficiencyMode};
use super::enumerate::{check_bound, search_matchings, search_partitions};
use super::incentives::certificate_json;
use crate::error::Result;
use crate::mechanism::run_ir_priority;
use crate::model::{AgentId, Instance, Matching, ObjectId, ObjectSet, TrichotomousPreference};
use crate::optimize::DEFAULT_ENUMERATION_BOUND;
use crate::responsive::{bundle_is_cir_trichotomous, dominates, strict_certificate, AdditiveExtension};
use crate::{ExactExtension, Rational, Utility};

/// A coalition and a reallocation of its own endowments that every member
/// strictly prefers under some admissible extension.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockWitness {
    pub coalition: Vec<AgentId>,
    /// Bundles of the coalition members, in coalition order.
    pub reallocation: Vec<ObjectSet>,
    /// Additive certificate per member. `None` only under strict
    /// acceptability when the new bundle holds an unacceptable object.
    pub certificates: Vec<Option<ExactExtension>>,
}

impl BlockWitness {
    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        let members: Vec<serde_json::Value> = self
            .coalition
            .iter()
            .zip(&self.reallocation)
            .zip(&self.certificates)
            .map(|((&a, bundle), cert)| {
                serde_json::json!({
                    "agent": instance.agent_name(a),
                    "bundle": instance.set_names(bundle),
                    "certificate": cert.as_ref().map(|c| certificate_json(instance, c)),
                })
            })
            .collect();
        serde_json::json!({
            "coalition": self.coalition.iter().map(|&a| instance.agent_name(a)).collect::<Vec<_>>(),
            "members": members,
        })
    }
}

/// Whether some responsive extension of `pref` (also satisfying strict
/// acceptability when `strict_acceptability` is set) ranks `x` strictly
/// above `y`.
///
/// Strict acceptability only adds the constraint that bundles with an
/// unacceptable object fall below the endowment. That forces `y` above
/// `x` exactly when `y` is unambiguously at least the endowment and `x`
/// holds an unacceptable object.
pub fn can_strictly_prefer(
    x: &ObjectSet,
    y: &ObjectSet,
    endowment: &ObjectSet,
    pref: &TrichotomousPreference,
    strict_acceptability: bool,
) -> bool {
    if dominates(y, x, pref) {
        return false;
    }
    !(strict_acceptability && !x.iter().all(|&o| pref.is_acceptable(o)) && dominates(y, endowment, pref))
}

fn certificate(
    x: &ObjectSet,
    y: &ObjectSet,
    pref: &TrichotomousPreference,
    strict_acceptability: bool,
    num_objects: usize,
) -> Option<ExactExtension> {
    let base = strict_certificate::<Rational, _>(x, y, pref, num_objects).ok().flatten()?;
    if !strict_acceptability {
        return Some(base);
    }
    if !x.iter().all(|&o| pref.is_acceptable(o)) {
        return None;
    }
    // Sink unacceptable objects below minus twice the total absolute
    // utility, so every bundle holding one falls below the endowment.
    let total = base.utilities().iter().fold(Rational::from_int(0), |acc, u| acc + num_traits::Signed::abs(u));
    let floor = -(total * Rational::from_int(2) + Rational::from_int(1));
    let utility: Vec<Rational> = (0..num_objects)
        .map(ObjectId)
        .map(|o| if pref.is_acceptable(o) { base.utility(o).clone() } else { floor.clone() })
        .collect();
    let ext = AdditiveExtension::new(utility);
    debug_assert!(ext.strictly_prefers(x, y));
    Some(ext)
}

/// Blocking coalition for `mu`, or `None` when `mu` is in the weak core
/// under every responsive extension (respecting strict acceptability when
/// the flag is set). Coalitions are tried by size, then in index order.
pub fn unambiguously_in_weak_core(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
    strict_acceptability: bool,
) -> Result<Option<BlockWitness>> {
    unambiguously_in_weak_core_bounded(instance, mu, prefs, strict_acceptability, DEFAULT_ENUMERATION_BOUND)
}

pub fn unambiguously_in_weak_core_bounded(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
    strict_acceptability: bool,
    bound: usize,
) -> Result<Option<BlockWitness>> {
    check_bound(instance, bound)?;
    let n = instance.num_agents();
    let mut coalitions: Vec<Vec<AgentId>> = (1..1u64 << n)
        .map(|mask| instance.agents().filter(|a| mask >> a.0 & 1 == 1).collect())
        .collect();
    coalitions.sort_by(|x: &Vec<AgentId>, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    for coalition in coalitions {
        if let Some(bundles) = coalition_block(instance, mu, prefs, strict_acceptability, &coalition) {
            let certificates = coalition
                .iter()
                .zip(&bundles)
                .map(|(&a, x)| {
                    certificate(
                        x,
                        mu.bundle(a),
                        &prefs[a.0],
                        strict_acceptability,
                        instance.num_objects(),
                    )
                })
                .collect();
            return Ok(Some(BlockWitness {
                coalition,
                reallocation: bundles,
                certificates,
            }));
        }
    }
    Ok(None)
}

/// Reallocation of the coalition's endowments that blocks `mu`.
fn coalition_block(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
    strict_acceptability: bool,
    coalition: &[AgentId],
) -> Option<Vec<ObjectSet>> {
    let pool: Vec<ObjectId> = coalition.iter().flat_map(|&a| instance.endowment(a).iter().copied()).collect();
    let sizes: Vec<usize> = coalition.iter().map(|&a| instance.endowment_size(a)).collect();
    search_partitions(
        &sizes,
        &pool,
        |k, bundle| {
            let a = coalition[k.0];
            can_strictly_prefer(bundle, mu.bundle(a), instance.endowment(a), &prefs[a.0], strict_acceptability)
        },
        |bundles| ControlFlow::Break(bundles.to_vec()),
    )
}

/// A matching that is unambiguously efficient and unambiguously in the
/// weak core under strict acceptability. The mechanism outcome is tried
/// first, then every component-wise individually rational matching in
/// canonical order.
pub fn find_efficient_core_matching(instance: &Instance, prefs: &[TrichotomousPreference]) -> Result<Option<Matching>> {
    check_bound(instance, DEFAULT_ENUMERATION_BOUND)?;
    let qualifies = |mu: &Matching| -> Result<bool> {
        Ok(efficiency_witness(instance, mu, prefs, EfficiencyMode::Cycle)?.is_none()
            && unambiguously_in_weak_core(instance, mu, prefs, true)?.is_none())
    };
    let (first, _) = run_ir_priority(instance, prefs)?;
    if qualifies(&first)? {
        return Ok(Some(first));
    }
    let mut result = Ok(None);
    search_matchings(
        instance,
        |a, bundle| bundle_is_cir_trichotomous(bundle, instance.endowment(a), &prefs[a.0]),
        |bundles| {
            let mu = Matching::new(instance, bundles.to_vec()).expect("enumerated matchings are valid");
            match qualifies(&mu) {
                Ok(true) => {
                    result = Ok(Some(mu));
                    ControlFlow::Break(())
                }
                Ok(false) => ControlFlow::Continue(()),
                Err(e) => {
                    result = Err(e);
                    ControlFlow::Break(())
                }
            }
        },
    );
    result
}

/// Every component-wise individually rational matching that is
/// unambiguously efficient, in canonical order.
pub fn efficient_ir_matchings(instance: &Instance, prefs: &[TrichotomousPreference], bound: usize) -> Result<Vec<Matching>> {
    check_bound(instance, bound)?;
    let mut out = Vec::new();
    let mut err = None;
    search_matchings::<()>(
        instance,
        |a, bundle| bundle_is_cir_trichotomous(bundle, instance.endowment(a), &prefs[a.0]),
        |bundles| {
            let mu = Matching::new(instance, bundles.to_vec()).expect("enumerated matchings are valid");
            match efficiency_witness(instance, &mu, prefs, EfficiencyMode::Cycle) {
                Ok(None) => out.push(mu),
                Ok(Some(_)) => {}
                Err(e) => {
                    err = Some(e);
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        },
    );
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_demand() -> (Instance, Vec<TrichotomousPreference>) {
        let inst = Instance::from_endowments(&[("1", &["o"][..]), ("2", &["p"][..]), ("3", &["q"][..])]).unwrap();
        let prefs = vec![
            TrichotomousPreference::from_names(&inst, AgentId(0), &["o", "p", "q"], &[]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(1), &["o"], &["p", "q"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(2), &["o"], &["p", "q"]).unwrap(),
        ];
        (inst, prefs)
    }

    fn no_pe_core() -> (Instance, Vec<TrichotomousPreference>) {
        let inst = Instance::from_endowments(&[
            ("1", &["o1", "o2"][..]),
            ("2", &["p1", "p2"][..]),
            ("3", &["q1", "q2"][..]),
        ])
        .unwrap();
        let prefs = vec![
            TrichotomousPreference::from_names(&inst, AgentId(0), &["p1"], &["o1", "o2"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(1), &["o1", "o2", "q1", "q2"], &["p1", "p2"]).unwrap(),
            TrichotomousPreference::from_names(&inst, AgentId(2), &["p1"], &["q1", "q2"]).unwrap(),
        ];
        (inst, prefs)
    }

    #[test]
    fn unit_demand_endowment_is_in_core_but_inefficient() {
        let (inst, prefs) = unit_demand();
        let omega = Matching::endowment(&inst);
        for sa in [false, true] {
            assert_eq!(unambiguously_in_weak_core(&inst, &omega, &prefs, sa).unwrap(), None);
        }
        assert!(efficiency_witness(&inst, &omega, &prefs, EfficiencyMode::Cycle).unwrap().is_some());
    }

    #[test]
    fn no_pe_core_every_candidate_is_blocked() {
        let (inst, prefs) = no_pe_core();
        let cands = efficient_ir_matchings(&inst, &prefs, 10).unwrap();
        assert_eq!(cands.len(), 4);
        for mu in &cands {
            let w = unambiguously_in_weak_core(&inst, mu, &prefs, false).unwrap().expect("blocked");
            for ((&a, x), cert) in w.coalition.iter().zip(&w.reallocation).zip(&w.certificates) {
                let cert = cert.as_ref().unwrap();
                assert!(cert.strictly_prefers(x, mu.bundle(a)));
                assert!(cert.is_consistent_with(&prefs[a.0]));
            }
            let pooled: ObjectSet = w.coalition.iter().flat_map(|&a| inst.endowment(a).iter().copied()).collect();
            assert!(w.reallocation.iter().all(|b| b.is_subset(&pooled)));
            // With strict acceptability the strongly trichotomous candidates survive.
            assert_eq!(unambiguously_in_weak_core(&inst, mu, &prefs, true).unwrap(), None);
        }
    }

    #[test]
    fn non_ir_matching_is_blocked_by_a_singleton() {
        let (inst, prefs) = no_pe_core();
        let mu = Matching::from_names(&inst, &[&["p1", "p2"][..], &["o1", "o2"], &["q1", "q2"]]).unwrap();
        let w = unambiguously_in_weak_core(&inst, &mu, &prefs, true).unwrap().unwrap();
        assert_eq!(w.coalition, vec![AgentId(0)]);
        assert_eq!(w.reallocation, vec![inst.endowment(AgentId(0)).clone()]);
    }

    #[test]
    fn efficient_core_matching_exists() {
        let (inst, prefs) = unit_demand();
        let mu = find_efficient_core_matching(&inst, &prefs).unwrap().unwrap();
        assert!(efficiency_witness(&inst, &mu, &prefs, EfficiencyMode::Cycle).unwrap().is_none());
        let (inst, prefs) = no_pe_core();
        assert!(find_efficient_core_matching(&inst, &prefs).unwrap().is_some());
    }

    #[test]
    fn single_agent_is_never_blocked() {
        let inst = Instance::from_endowments(&[("1", &["a"][..])]).unwrap();
        let prefs = vec![TrichotomousPreference::from_names(&inst, AgentId(0), &["a"], &[]).unwrap()];
        let omega = Matching::endowment(&inst);
        assert_eq!(unambiguously_in_weak_core(&inst, &omega, &prefs, false).unwrap(), None);
    }

    #[test]
    fn strict_acceptability_characterization() {
        let (inst, prefs) = no_pe_core();
        let p = &prefs[0];
        let s = |names: &[&str]| inst.object_set(names).unwrap();
        let omega = s(&["o1", "o2"]);
        // {p1, p2} holds unacceptable p2: blocked by strict acceptability.
        assert!(can_strictly_prefer(&s(&["p1", "p2"]), &omega, &omega, p, false));
        assert!(!can_strictly_prefer(&s(&["p1", "p2"]), &omega, &omega, p, true));
        assert!(can_strictly_prefer(&s(&["p1", "o2"]), &omega, &omega, p, true));
    }
}
