use super::WelfareConstraints;
use crate::audits::enumerate_matchings_bounded;
use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching};

/// Largest object count accepted by the enumeration oracles by default.
pub const DEFAULT_ENUMERATION_BOUND: usize = 10;

/// Same contract as [`max_attractive`](super::max_attractive), by
/// enumerating every matching.
pub fn brute_force_max(
    instance: &Instance,
    constraints: &WelfareConstraints,
    target: AgentId,
) -> Result<(usize, Matching)> {
    brute_force_max_bounded(instance, constraints, target, DEFAULT_ENUMERATION_BOUND)
}

pub fn brute_force_max_bounded(
    instance: &Instance,
    constraints: &WelfareConstraints,
    target: AgentId,
    bound: usize,
) -> Result<(usize, Matching)> {
    let attractive = &constraints.agent(target).attractive;
    let mut best: Option<(usize, Matching)> = None;
    for mu in enumerate_matchings_bounded(instance, bound)? {
        if !constraints.admits(&mu) {
            continue;
        }
        let k = mu.bundle(target).intersection(attractive).count();
        if best.as_ref().is_none_or(|(b, _)| k > *b) {
            best = Some((k, mu));
        }
    }
    best.ok_or(Error::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::AgentConstraint;

    #[test]
    fn single_agent() {
        let inst = Instance::from_endowments(&[("1", &["a", "b", "c"][..])]).unwrap();
        let cons = WelfareConstraints::new(
            &inst,
            vec![AgentConstraint {
                attractive: inst.object_set(&["a", "c"]).unwrap(),
                allowed: inst.universe(),
                min_attractive: 0,
                exact_attractive: None,
            }],
        )
        .unwrap();
        assert_eq!(brute_force_max(&inst, &cons, AgentId(0)).unwrap().0, 2);
    }

    #[test]
    fn too_small_allowed_set_is_infeasible() {
        let inst = Instance::from_endowments(&[("1", &["a", "b"][..])]).unwrap();
        let cons = WelfareConstraints::new(
            &inst,
            vec![AgentConstraint {
                attractive: Default::default(),
                allowed: inst.object_set(&["a"]).unwrap(),
                min_attractive: 0,
                exact_attractive: None,
            }],
        )
        .unwrap();
        assert!(matches!(brute_force_max(&inst, &cons, AgentId(0)), Err(Error::Infeasible)));
    }

    #[test]
    fn respects_the_bound() {
        let names: Vec<String> = (0..12).map(|k| format!("x{k:02}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let inst = Instance::from_endowments(&[("1", &refs[..6]), ("2", &refs[6..])]).unwrap();
        let agents = inst
            .agents()
            .map(|_| AgentConstraint {
                attractive: Default::default(),
                allowed: inst.universe(),
                min_attractive: 0,
                exact_attractive: None,
            })
            .collect();
        let cons = WelfareConstraints::new(&inst, agents).unwrap();
        let err = brute_force_max(&inst, &cons, AgentId(0)).unwrap_err();
        assert!(matches!(err, Error::TooLarge { objects: 12, bound: 10 }));
    }
}
