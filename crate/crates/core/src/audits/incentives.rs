//! Manipulation searches against a mechanism on trichotomous reports.
//!
//! A misreport is profitable when the true marginal admits a responsive
//! extension that ranks the misreport outcome strictly above the truthful
//! one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::run_ir_priority;
use crate::model::{domain_membership, AgentId, DomainSpec, Instance, Matching, ObjectSet, TrichotomousPreference};
use crate::responsive::{dominates, strict_certificate};
use crate::{ExactExtension, Rational};

/// The individually rational priority mechanism, as an allocation function.
pub fn ir_priority(instance: &Instance, prefs: &[TrichotomousPreference]) -> Result<Matching> {
    run_ir_priority(instance, prefs).map(|(mu, _)| mu)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManipulationWitness {
    pub agent: AgentId,
    pub truthful: TrichotomousPreference,
    pub misreport: TrichotomousPreference,
    pub truthful_bundle: ObjectSet,
    pub misreport_bundle: ObjectSet,
    /// Scores the misreport bundle strictly above the truthful one.
    pub certificate: ExactExtension,
}

impl ManipulationWitness {
    fn build(
        instance: &Instance,
        agent: AgentId,
        truthful: &TrichotomousPreference,
        misreport: &TrichotomousPreference,
        truthful_bundle: &ObjectSet,
        misreport_bundle: &ObjectSet,
    ) -> Result<Option<Self>> {
        let cert = strict_certificate::<Rational, _>(misreport_bundle, truthful_bundle, truthful, instance.num_objects())?;
        Ok(cert.map(|certificate| ManipulationWitness {
            agent,
            truthful: truthful.clone(),
            misreport: misreport.clone(),
            truthful_bundle: truthful_bundle.clone(),
            misreport_bundle: misreport_bundle.clone(),
            certificate,
        }))
    }

    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        let report = |p: &TrichotomousPreference| {
            serde_json::json!({
                "attractive": instance.set_names(p.attractive()),
                "bearable": instance.set_names(p.bearable()),
            })
        };
        serde_json::json!({
            "agent": instance.agent_name(self.agent),
            "truthful": report(&self.truthful),
            "misreport": report(&self.misreport),
            "truthful_bundle": instance.set_names(&self.truthful_bundle),
            "misreport_bundle": instance.set_names(&self.misreport_bundle),
            "certificate": certificate_json(instance, &self.certificate),
        })
    }
}

/// Utilities of an exact extension keyed by object name, as decimal or
/// fraction strings.
pub fn certificate_json(instance: &Instance, ext: &ExactExtension) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = instance
        .objects()
        .map(|o| (instance.object_name(o).to_string(), ext.utility(o).to_string().into()))
        .collect();
    serde_json::Value::Object(map)
}

/// Every trichotomous report of `agent` whose three-class encoding lies in
/// `domain`, in a fixed order.
pub fn trichotomous_reports(instance: &Instance, agent: AgentId, domain: &DomainSpec) -> Vec<TrichotomousPreference> {
    let endowment = instance.endowment(agent);
    let m = instance.num_objects();
    let mut out = Vec::new();
    // Endowed objects take one of two tiers, the rest one of three.
    let radix: Vec<usize> = instance.objects().map(|o| if endowment.contains(&o) { 2 } else { 3 }).collect();
    let total: usize = radix.iter().product();
    for code in 0..total {
        let mut c = code;
        let mut attractive = ObjectSet::new();
        let mut bearable = ObjectSet::new();
        for (k, &r) in radix.iter().enumerate() {
            let o = crate::model::ObjectId(k);
            match c % r {
                0 => {
                    attractive.insert(o);
                }
                1 => {
                    bearable.insert(o);
                }
                _ => {}
            }
            c /= r;
        }
        let pref = TrichotomousPreference::new(endowment, attractive, bearable).expect("endowment covered by construction");
        if domain_membership(&pref.to_marginal(m), domain, endowment) {
            out.push(pref);
        }
    }
    out
}

/// Truncations of `pref`: every bearable set between the non-attractive
/// endowment and all non-attractive objects.
pub fn truncations(instance: &Instance, agent: AgentId, pref: &TrichotomousPreference) -> Vec<TrichotomousPreference> {
    let endowment = instance.endowment(agent);
    let base: ObjectSet = endowment.difference(pref.attractive()).copied().collect();
    let free: Vec<_> = instance
        .objects()
        .filter(|o| !pref.is_attractive(*o) && !endowment.contains(o))
        .collect();
    (0..1usize << free.len())
        .map(|mask| {
            let mut b = base.clone();
            b.extend(free.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &o)| o));
            pref.with_bearable(b)
        })
        .collect()
}

/// First profitable misreport from `candidates(agent)` over all agents, in
/// agent order and then candidate order.
fn first_witness<M, C>(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    mechanism: &M,
    candidates: C,
) -> Result<Option<ManipulationWitness>>
where
    M: Fn(&Instance, &[TrichotomousPreference]) -> Result<Matching> + Sync,
    C: Fn(AgentId) -> Vec<TrichotomousPreference>,
{
    let truth = mechanism(instance, prefs)?;
    for agent in instance.agents() {
        let reports = candidates(agent);
        let hit = reports
            .par_iter()
            .map(|report| -> Result<Option<ManipulationWitness>> {
                if report == &prefs[agent.0] {
                    return Ok(None);
                }
                let mut profile = prefs.to_vec();
                profile[agent.0] = report.clone();
                let outcome = mechanism(instance, &profile)?;
                ManipulationWitness::build(
                    instance,
                    agent,
                    &prefs[agent.0],
                    report,
                    truth.bundle(agent),
                    outcome.bundle(agent),
                )
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        if let Some(found) = hit {
            return found;
        }
    }
    Ok(None)
}

/// Strategy-proofness of `mechanism` at `prefs` against every misreport in
/// `domain`.
pub fn check_strategy_proofness_of<M>(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    domain: &DomainSpec,
    mechanism: &M,
) -> Result<Option<ManipulationWitness>>
where
    M: Fn(&Instance, &[TrichotomousPreference]) -> Result<Matching> + Sync,
{
    first_witness(instance, prefs, mechanism, |a| trichotomous_reports(instance, a, domain))
}

pub fn check_strategy_proofness(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    domain: &DomainSpec,
) -> Result<Option<ManipulationWitness>> {
    check_strategy_proofness_of(instance, prefs, domain, &ir_priority)
}

pub fn check_truncation_proofness_of<M>(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    mechanism: &M,
) -> Result<Option<ManipulationWitness>>
where
    M: Fn(&Instance, &[TrichotomousPreference]) -> Result<Matching> + Sync,
{
    first_witness(instance, prefs, mechanism, |a| truncations(instance, a, &prefs[a.0]))
}

pub fn check_truncation_proofness(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
) -> Result<Option<ManipulationWitness>> {
    check_truncation_proofness_of(instance, prefs, &ir_priority)
}

/// Cartesian product of per-agent report lists, indexed in mixed radix with
/// agent 0 as the most significant digit.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    reports: Vec<Vec<TrichotomousPreference>>,
}

impl ProfileSpace {
    pub fn new(reports: Vec<Vec<TrichotomousPreference>>) -> Self {
        ProfileSpace { reports }
    }

    /// Every profile whose reports all lie in `domain`.
    pub fn domain(instance: &Instance, domain: &DomainSpec) -> Self {
        ProfileSpace::new(instance.agents().map(|a| trichotomous_reports(instance, a, domain)).collect())
    }

    pub fn reports(&self, agent: AgentId) -> &[TrichotomousPreference] {
        &self.reports[agent.0]
    }

    pub fn len(&self) -> usize {
        self.reports.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, agent: usize) -> usize {
        self.reports[agent + 1..].iter().map(Vec::len).product()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.reports.len()];
        for a in (0..self.reports.len()).rev() {
            d[a] = index % self.reports[a].len();
            index /= self.reports[a].len();
        }
        d
    }

    pub fn profile(&self, index: usize) -> Vec<TrichotomousPreference> {
        self.digits(index)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.reports[a][k].clone())
            .collect()
    }

    fn with_digit(&self, index: usize, agent: usize, from: usize, to: usize) -> usize {
        index - from * self.stride(agent) + to * self.stride(agent)
    }
}

/// A profile together with a profitable deviation from it.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepWitness {
    pub profile: Vec<TrichotomousPreference>,
    pub witness: ManipulationWitness,
}

/// Runs `mechanism` on every profile of `space` and returns, for the first
/// profile in index order that admits one, the first profitable deviation
/// to another report in the same space.
pub fn sweep_strategy_proofness<M>(instance: &Instance, space: &ProfileSpace, mechanism: &M) -> Result<Option<SweepWitness>>
where
    M: Fn(&Instance, &[TrichotomousPreference]) -> Result<Matching> + Sync,
{
    let outcomes: Vec<Matching> = (0..space.len())
        .into_par_iter()
        .map(|idx| mechanism(instance, &space.profile(idx)))
        .collect::<Result<_>>()?;
    let hit = (0..space.len()).into_par_iter().find_map_first(|idx| {
        let digits = space.digits(idx);
        for agent in instance.agents() {
            let a = agent.0;
            let truth = &space.reports[a][digits[a]];
            let truthful_bundle = outcomes[idx].bundle(agent);
            for k in 0..space.reports[a].len() {
                let alt = space.with_digit(idx, a, digits[a], k);
                let bundle = outcomes[alt].bundle(agent);
                if !dominates(truthful_bundle, bundle, truth) {
                    return Some((idx, agent, k));
                }
            }
        }
        None
    });
    let Some((idx, agent, k)) = hit else {
        return Ok(None);
    };
    let profile = space.profile(idx);
    let misreport = &space.reports[agent.0][k];
    let mut deviated = profile.clone();
    deviated[agent.0] = misreport.clone();
    let witness = ManipulationWitness::build(
        instance,
        agent,
        &profile[agent.0],
        misreport,
        outcomes[idx].bundle(agent),
        outcomes[space.with_digit(idx, agent.0, space.digits(idx)[agent.0], k)].bundle(agent),
    )?
    .ok_or_else(|| Error::Invariant("sweep witness lost its certificate".into()))?;
    debug_assert_eq!(mechanism(instance, &deviated)?.bundle(agent), &witness.misreport_bundle);
    Ok(Some(SweepWitness { profile, witness }))
}

/// Which case of the obvious-manipulation comparison a witness violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmCase {
    /// Some misreport outcome beats every truthful outcome.
    Best,
    /// Some truthful outcome is beaten by every misreport outcome.
    Worst,
}

/// Obvious-manipulation witness.
///
/// The separating preference is responsive but need not be additive, so no
/// utility certificate is attached. `bundle` is the misreport outcome that
/// beats every truthful outcome (best case) or the truthful outcome beaten
/// by every misreport outcome (worst case).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmWitness {
    pub agent: AgentId,
    pub misreport: TrichotomousPreference,
    pub case: OmCase,
    pub bundle: ObjectSet,
}

impl OmWitness {
    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        serde_json::json!({
            "agent": instance.agent_name(self.agent),
            "misreport": {
                "attractive": instance.set_names(self.misreport.attractive()),
                "bearable": instance.set_names(self.misreport.bearable()),
            },
            "case": self.case,
            "bundle": instance.set_names(&self.bundle),
        })
    }
}

/// Opponent profiles over which best and worst cases are taken.
#[derive(Clone, Debug)]
pub enum OpponentUniverse {
    /// Every trichotomous report for every other agent.
    Exhaustive,
    /// `count` profiles drawn uniformly from the exhaustive universe.
    Sampled { count: usize, seed: u64 },
}

/// Obvious manipulability of `mechanism` for agents with true preferences
/// `prefs`.
///
/// On same-size bundles, any weak order extending unambiguous dominance is
/// a responsive extension, so a best-case witness exists iff some
/// misreport outcome is dominated by no truthful outcome, and a worst-case
/// witness iff some truthful outcome dominates no misreport outcome.
pub fn check_obvious_manipulability_of<M>(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    universe: &OpponentUniverse,
    mechanism: &M,
) -> Result<Option<OmWitness>>
where
    M: Fn(&Instance, &[TrichotomousPreference]) -> Result<Matching> + Sync,
{
    let domain = DomainSpec::trichotomous();
    let all: Vec<Vec<TrichotomousPreference>> =
        instance.agents().map(|a| trichotomous_reports(instance, a, &domain)).collect();
    for agent in instance.agents() {
        let mut others = all.clone();
        others[agent.0] = vec![prefs[agent.0].clone()];
        let space = ProfileSpace::new(others);
        let indices: Vec<usize> = match universe {
            OpponentUniverse::Exhaustive => (0..space.len()).collect(),
            OpponentUniverse::Sampled { count, seed } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed ^ agent.0 as u64);
                (0..*count).map(|_| rng.gen_range(0..space.len())).collect()
            }
        };
        let outcomes = |report: &TrichotomousPreference| -> Result<Vec<ObjectSet>> {
            indices
                .par_iter()
                .map(|&idx| {
                    let mut profile = space.profile(idx);
                    profile[agent.0] = report.clone();
                    mechanism(instance, &profile).map(|mu| mu.bundle(agent).clone())
                })
                .collect()
        };
        let truth = &prefs[agent.0];
        let truthful = outcomes(truth)?;
        for report in &all[agent.0] {
            if report == truth {
                continue;
            }
            let lied = outcomes(report)?;
            if let Some(x) = lied.iter().find(|x| truthful.iter().all(|y| !dominates(y, x, truth))) {
                return Ok(Some(OmWitness {
                    agent,
                    misreport: report.clone(),
                    case: OmCase::Best,
                    bundle: x.clone(),
                }));
            }
            if let Some(y) = truthful.iter().find(|y| lied.iter().all(|x| !dominates(y, x, truth))) {
                return Ok(Some(OmWitness {
                    agent,
                    misreport: report.clone(),
                    case: OmCase::Worst,
                    bundle: y.clone(),
                }));
            }
        }
    }
    Ok(None)
}

pub fn check_obvious_manipulability(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    universe: &OpponentUniverse,
) -> Result<Option<OmWitness>> {
    check_obvious_manipulability_of(instance, prefs, universe, &ir_priority)
}
