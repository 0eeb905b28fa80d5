//! Cycles of a matching.
//!
//! A cycle `(i_1, o_1), ..., (i_L, o_L)` has agent `i_l` receive `o_l`,
//! which agent `i_{l+1}` held (cyclically, `o_L` comes from `i_1`). Each
//! agent gives up the object listed with the previous step.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching, ObjectId, TrichotomousPreference};
use crate::optimize::flow::FlowNetwork;
use crate::optimize::WelfareConstraints;
use crate::responsive::cir_trichotomous;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    steps: Vec<(AgentId, ObjectId)>,
}

impl Cycle {
    /// Validates the cycle against `mu`.
    pub fn new(mu: &Matching, steps: Vec<(AgentId, ObjectId)>) -> Result<Self> {
        let c = Cycle { steps };
        c.validate(mu)?;
        Ok(c)
    }

    pub fn from_names<S: AsRef<str>>(instance: &Instance, mu: &Matching, steps: &[(S, S)]) -> Result<Self> {
        let steps = steps
            .iter()
            .map(|(a, o)| {
                let agent = instance
                    .agent(a.as_ref())
                    .ok_or_else(|| Error::InvalidCycle(format!("unknown agent `{}`", a.as_ref())))?;
                let object = instance
                    .object(o.as_ref())
                    .ok_or_else(|| Error::InvalidCycle(format!("unknown object `{}`", o.as_ref())))?;
                Ok((agent, object))
            })
            .collect::<Result<Vec<_>>>()?;
        Cycle::new(mu, steps)
    }

    pub fn validate(&self, mu: &Matching) -> Result<()> {
        let l = self.steps.len();
        if l < 2 {
            return Err(Error::InvalidCycle("a cycle needs at least two agents".into()));
        }
        let agents: BTreeSet<_> = self.steps.iter().map(|s| s.0).collect();
        let objects: BTreeSet<_> = self.steps.iter().map(|s| s.1).collect();
        if agents.len() != l || objects.len() != l {
            return Err(Error::InvalidCycle("agents and objects must be distinct".into()));
        }
        if let Some(&(a, _)) = self.steps.iter().find(|s| s.0 .0 >= mu.num_agents()) {
            return Err(Error::InvalidCycle(format!("unknown agent {a}")));
        }
        for k in 0..l {
            let (agent, receives) = self.steps[k];
            let (next, _) = self.steps[(k + 1) % l];
            if !mu.bundle(next).contains(&receives) {
                return Err(Error::InvalidCycle(format!(
                    "object {receives} received by {agent} is not held by {next}"
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> &[(AgentId, ObjectId)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.steps.iter().map(|s| s.0)
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.steps.iter().map(|s| s.1)
    }

    /// The same cycle started at its smallest agent.
    fn rotated(mut self) -> Self {
        let k = (0..self.steps.len()).min_by_key(|&k| self.steps[k].0).unwrap_or(0);
        self.steps.rotate_left(k);
        self
    }

    pub fn display<'a>(&'a self, instance: &'a Instance) -> CycleDisplay<'a> {
        CycleDisplay { cycle: self, instance }
    }
}

pub struct CycleDisplay<'a> {
    cycle: &'a Cycle,
    instance: &'a Instance,
}

impl fmt::Display for CycleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .cycle
            .steps
            .iter()
            .map(|&(a, o)| format!("{},{}", self.instance.agent_name(a), self.instance.object_name(o)))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Number of bundle slots filled differently by the two matchings.
pub fn distance(instance: &Instance, mu: &Matching, nu: &Matching) -> usize {
    instance
        .agents()
        .map(|a| instance.endowment_size(a) - mu.bundle(a).intersection(nu.bundle(a)).count())
        .sum()
}

pub fn apply_cycle(mu: &Matching, c: &Cycle) -> Result<Matching> {
    c.validate(mu)?;
    let mut out = mu.clone();
    apply_unchecked(&mut out, c);
    Ok(out)
}

fn apply_unchecked(mu: &mut Matching, c: &Cycle) {
    let l = c.steps.len();
    for k in 0..l {
        let (agent, receives) = c.steps[k];
        let gives = c.steps[(k + l - 1) % l].1;
        let bundle = mu.bundle_mut(agent);
        bundle.remove(&gives);
        bundle.insert(receives);
    }
}

/// Undoes `c`: `apply_cycle(apply_cycle(mu, c), reverse_cycle(c)) == mu`.
pub fn reverse_cycle(c: &Cycle) -> Cycle {
    let l = c.steps.len();
    let mut steps = Vec::with_capacity(l);
    if l > 0 {
        steps.push((c.steps[0].0, c.steps[l - 1].1));
        for k in (1..l).rev() {
            steps.push((c.steps[k].0, c.steps[k - 1].1));
        }
    }
    Cycle { steps }
}

/// Object-disjoint cycles of `mu` whose execution yields `nu`.
pub fn decompose(instance: &Instance, nu: &Matching, mu: &Matching) -> Vec<Cycle> {
    let mut current = mu.clone();
    let mut holder = current.holders(instance.num_objects());
    let mut cycles = Vec::new();
    let wants = |cur: &Matching, a: AgentId| nu.bundle(a).difference(cur.bundle(a)).next().copied();
    for start in instance.agents() {
        while wants(&current, start).is_some() {
            let mut path: Vec<(AgentId, ObjectId)> = Vec::new();
            let mut pos = vec![usize::MAX; instance.num_agents()];
            let mut agent = start;
            let begin = loop {
                if pos[agent.0] != usize::MAX {
                    break pos[agent.0];
                }
                pos[agent.0] = path.len();
                let o = wants(&current, agent).expect("an agent losing an object must gain one");
                path.push((agent, o));
                agent = holder[o.0].expect("every object is held");
            };
            let cycle = Cycle {
                steps: path.split_off(begin),
            };
            apply_unchecked(&mut current, &cycle);
            for &(a, o) in &cycle.steps {
                holder[o.0] = Some(a);
            }
            cycles.push(cycle);
        }
    }
    debug_assert_eq!(&current, nu);
    cycles
}

/// Welfare effects of a cycle under trichotomous preferences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleClass {
    /// Every received object is acceptable to its receiver.
    pub cir: bool,
    pub increases: Vec<AgentId>,
    pub decreases: Vec<AgentId>,
    pub pareto_improving: bool,
}

pub fn classify_cycle(c: &Cycle, mu: &Matching, prefs: &[TrichotomousPreference]) -> Result<CycleClass> {
    c.validate(mu)?;
    let l = c.steps.len();
    let cir = c.steps.iter().all(|&(a, o)| prefs[a.0].is_acceptable(o));
    let mut increases = Vec::new();
    let mut decreases = Vec::new();
    for k in 0..l {
        let (agent, receives) = c.steps[k];
        let gives = c.steps[(k + l - 1) % l].1;
        let p = &prefs[agent.0];
        match (p.is_attractive(receives), p.is_attractive(gives)) {
            (true, false) => increases.push(agent),
            (false, true) => decreases.push(agent),
            _ => {}
        }
    }
    increases.sort();
    decreases.sort();
    let pareto_improving = !increases.is_empty() && decreases.is_empty();
    Ok(CycleClass {
        cir,
        increases,
        decreases,
        pareto_improving,
    })
}

/// A component-wise individually rational, Pareto-improving cycle of `mu`,
/// or `None` when `mu` is unambiguously efficient.
///
/// For each agent in priority order, a flow query decides whether some
/// individually rational matching weakly improves everyone and strictly
/// improves that agent. The first such improvement `ν` is reduced to a
/// single cycle: every agent that changes bundle points at its best object
/// in `ν \ μ`, and every such object points back at its holder in `μ`. The
/// resulting cycle either improves someone, or leaves every welfare count
/// unchanged and can be undone from `ν` without losing the improvement.
pub fn find_cir_pareto_improving_cycle(
    instance: &Instance,
    mu: &Matching,
    prefs: &[TrichotomousPreference],
) -> Result<Option<Cycle>> {
    if !cir_trichotomous(instance, mu, prefs) {
        return Err(Error::NotComponentwiseIr);
    }
    let bearable: Vec<_> = prefs.iter().map(|p| p.bearable().clone()).collect();
    let constraints = WelfareConstraints::improving(instance, prefs, &bearable, mu);
    let mut net = FlowNetwork::new(instance, &constraints);
    if !net.seed(instance, mu) {
        return Err(Error::Invariant("matching does not fit its own improvement network".into()));
    }
    for j in instance.agents() {
        if net.can_increase(j) {
            net.maximize(j);
            let nu = net.matching();
            return reduce_to_cycle(instance, mu, nu, prefs).map(Some);
        }
    }
    Ok(None)
}

fn reduce_to_cycle(
    instance: &Instance,
    mu: &Matching,
    mut nu: Matching,
    prefs: &[TrichotomousPreference],
) -> Result<Cycle> {
    let holder = mu.holders(instance.num_objects());
    loop {
        let start = instance
            .agents()
            .find(|&a| mu.bundle(a) != nu.bundle(a))
            .ok_or_else(|| Error::Invariant("improvement vanished during cycle reduction".into()))?;
        let mut path: Vec<(AgentId, ObjectId)> = Vec::new();
        let mut pos = vec![usize::MAX; instance.num_agents()];
        let mut agent = start;
        let begin = loop {
            if pos[agent.0] != usize::MAX {
                break pos[agent.0];
            }
            pos[agent.0] = path.len();
            let p = &prefs[agent.0];
            let o = nu
                .bundle(agent)
                .difference(mu.bundle(agent))
                .copied()
                .min_by_key(|&o| (!p.is_attractive(o), o))
                .expect("changed bundles differ in both directions");
            path.push((agent, o));
            agent = holder[o.0].expect("every object is held");
        };
        let cycle = Cycle {
            steps: path.split_off(begin),
        };
        let class = classify_cycle(&cycle, mu, prefs)?;
        if class.pareto_improving {
            debug_assert!(class.cir);
            return Ok(cycle.rotated());
        }
        if !class.decreases.is_empty() {
            return Err(Error::Invariant("reduction produced a welfare-decreasing cycle".into()));
        }
        nu = apply_cycle(&nu, &reverse_cycle(&cycle))?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one() -> Instance {
        Instance::from_endowments(&[("1", &["o1", "o2"][..]), ("2", &["p1", "p2"][..])]).unwrap()
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
    fn swap_and_reverse() {
        let inst = example_one();
        let omega = Matching::endowment(&inst);
        let c = Cycle::from_names(&inst, &omega, &[("1", "p1"), ("2", "o1")]).unwrap();
        let mu = apply_cycle(&omega, &c).unwrap();
        assert_eq!(mu, Matching::from_names(&inst, &[&["p1", "o2"][..], &["o1", "p2"]]).unwrap());
        assert_eq!(distance(&inst, &omega, &mu), 2);
        let r = reverse_cycle(&c);
        assert_eq!(r, Cycle::from_names(&inst, &mu, &[("1", "o1"), ("2", "p1")]).unwrap());
        assert_eq!(apply_cycle(&mu, &r).unwrap(), omega);
        assert_eq!(reverse_cycle(&r), c);
    }

    #[test]
    fn three_way_trade() {
        let (inst, _) = competing();
        let omega = Matching::endowment(&inst);
        // 3 gives q2 to 4, 4 gives r to 2, 2 gives p to 3.
        let c = Cycle::from_names(&inst, &omega, &[("3", "p"), ("2", "r"), ("4", "q2")]).unwrap();
        let mu = apply_cycle(&omega, &c).unwrap();
        assert_eq!(mu, Matching::from_names(&inst, &[&["o"][..], &["r"], &["p", "q1"], &["q2"]]).unwrap());
        // Listing the objects given rather than received is not a cycle of the endowment.
        assert!(Cycle::from_names(&inst, &omega, &[("3", "q2"), ("4", "r"), ("2", "p")]).is_err());
    }

    #[test]
    fn invalid_cycles() {
        let inst = example_one();
        let omega = Matching::endowment(&inst);
        assert!(Cycle::from_names(&inst, &omega, &[("1", "p1")]).is_err());
        assert!(Cycle::from_names(&inst, &omega, &[("1", "o1"), ("2", "p1")]).is_err());
        assert!(Cycle::from_names(&inst, &omega, &[("1", "p1"), ("1", "o1")]).is_err());
    }

    #[test]
    fn decompose_swap_of_endowments() {
        let inst = example_one();
        let omega = Matching::endowment(&inst);
        let nu = Matching::from_names(&inst, &[&["p1", "p2"][..], &["o1", "o2"]]).unwrap();
        assert_eq!(distance(&inst, &omega, &nu), 4);
        let cycles = decompose(&inst, &nu, &omega);
        assert_eq!(cycles.len(), 2);
        let mut cur = omega.clone();
        for c in &cycles {
            cur = apply_cycle(&cur, c).unwrap();
        }
        assert_eq!(cur, nu);
        assert!(decompose(&inst, &omega, &omega).is_empty());
    }

    #[test]
    fn classification() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let c = Cycle::from_names(&inst, &omega, &[("1", "q1"), ("3", "o")]).unwrap();
        let class = classify_cycle(&c, &omega, &prefs).unwrap();
        assert!(class.cir && class.pareto_improving);
        assert_eq!(class.increases, vec![AgentId(0), AgentId(2)]);
        let back = classify_cycle(&reverse_cycle(&c), &apply_cycle(&omega, &c).unwrap(), &prefs).unwrap();
        assert_eq!(back.decreases, class.increases);
        assert_eq!(back.increases, class.decreases);

        // 4 receives o, which is unacceptable to agent 4.
        let bad = Cycle::from_names(&inst, &omega, &[("4", "o"), ("1", "r")]).unwrap();
        assert!(!classify_cycle(&bad, &omega, &prefs).unwrap().cir);
        // Two agents swap objects bearable to both.
        let pair = Instance::from_endowments(&[("x", &["a"][..]), ("y", &["b"][..])]).unwrap();
        let both = |a: usize| TrichotomousPreference::from_names(&pair, AgentId(a), &[], &["a", "b"]).unwrap();
        let prefs = vec![both(0), both(1)];
        let omega = Matching::endowment(&pair);
        let swap = Cycle::from_names(&pair, &omega, &[("x", "b"), ("y", "a")]).unwrap();
        let class = classify_cycle(&swap, &omega, &prefs).unwrap();
        assert!(class.cir && class.increases.is_empty() && class.decreases.is_empty());
        assert!(!class.pareto_improving);
    }

    #[test]
    fn improving_cycle_at_endowment() {
        let (inst, prefs) = competing();
        let omega = Matching::endowment(&inst);
        let c = find_cir_pareto_improving_cycle(&inst, &omega, &prefs).unwrap().unwrap();
        let class = classify_cycle(&c, &omega, &prefs).unwrap();
        assert!(class.cir && class.pareto_improving);
    }

    #[test]
    fn efficient_matchings_have_no_cycle() {
        let (inst, prefs) = competing();
        for names in [[&["q1"][..], &["r"], &["o", "p"], &["q2"]], [&["r"][..], &["q1"], &["o", "p"], &["q2"]]] {
            let mu = Matching::from_names(&inst, &names).unwrap();
            assert!(find_cir_pareto_improving_cycle(&inst, &mu, &prefs).unwrap().is_none());
        }
        let single = Instance::from_endowments(&[("1", &["a", "b"][..])]).unwrap();
        let p = TrichotomousPreference::from_names(&single, AgentId(0), &["a"], &["b"]).unwrap();
        assert!(find_cir_pareto_improving_cycle(&single, &Matching::endowment(&single), &[p]).unwrap().is_none());
    }

    #[test]
    fn requires_cir() {
        let (inst, prefs) = competing();
        let mu = Matching::from_names(&inst, &[&["r"][..], &["o"], &["p", "q1"], &["q2"]]).unwrap();
        assert!(matches!(
            find_cir_pareto_improving_cycle(&inst, &mu, &prefs),
            Err(Error::NotComponentwiseIr)
        ));
    }
}
