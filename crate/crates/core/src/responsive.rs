//! Responsive extensions of marginal preferences.
//!
//! Two equal-size bundles `X` and `Y` compare unambiguously when, after
//! sorting both by rank, `X` is weakly better position by position. That
//! is the same as a bijection `Y \ X -> X \ Y` mapping every object to a
//! weakly preferred one. When neither bundle dominates, an additive
//! threshold extension ranks either one strictly above the other.

use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching, ObjectId, ObjectSet, RankOrder, TrichotomousPreference};
use crate::scalar::Utility;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleComparison {
    AlwaysWeaklyBetter,
    AlwaysWeaklyWorse,
    Equivalent,
    Ambiguous,
}

impl fmt::Display for BundleComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BundleComparison::AlwaysWeaklyBetter => "always-weakly-better",
            BundleComparison::AlwaysWeaklyWorse => "always-weakly-worse",
            BundleComparison::Equivalent => "equivalent",
            BundleComparison::Ambiguous => "ambiguous",
        })
    }
}

fn sorted_ranks<P: RankOrder>(bundle: &ObjectSet, pref: &P) -> Vec<usize> {
    let mut r: Vec<usize> = bundle.iter().map(|&o| pref.rank(o)).collect();
    r.sort_unstable();
    r
}

fn check_sizes(x: &ObjectSet, y: &ObjectSet) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::CardinalityMismatch {
            left: x.len(),
            right: y.len(),
        })
    }
}

/// `x` is weakly better than `y` under every responsive extension.
/// Bundles must have equal size.
pub(crate) fn dominates<P: RankOrder>(x: &ObjectSet, y: &ObjectSet, pref: &P) -> bool {
    debug_assert_eq!(x.len(), y.len());
    sorted_ranks(x, pref)
        .iter()
        .zip(sorted_ranks(y, pref).iter())
        .all(|(a, b)| a <= b)
}

/// `x` is strictly better than `y` under every responsive extension.
pub(crate) fn strictly_dominates<P: RankOrder>(x: &ObjectSet, y: &ObjectSet, pref: &P) -> bool {
    dominates(x, y, pref) && !dominates(y, x, pref)
}

pub fn compare_unambiguous<P: RankOrder>(x: &ObjectSet, y: &ObjectSet, pref: &P) -> Result<BundleComparison> {
    check_sizes(x, y)?;
    let better = dominates(x, y, pref);
    let worse = dominates(y, x, pref);
    Ok(match (better, worse) {
        (true, true) => BundleComparison::Equivalent,
        (true, false) => BundleComparison::AlwaysWeaklyBetter,
        (false, true) => BundleComparison::AlwaysWeaklyWorse,
        (false, false) => BundleComparison::Ambiguous,
    })
}

/// Some responsive extension ranks `x` strictly above `y`.
pub fn exists_strict_preference<P: RankOrder>(x: &ObjectSet, y: &ObjectSet, pref: &P) -> Result<bool> {
    check_sizes(x, y)?;
    Ok(!dominates(y, x, pref))
}

/// Additive utility over objects. Bundles are ranked by the sum of their
/// objects' values.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveExtension<S> {
    utility: Vec<S>,
}

impl<S: Utility> AdditiveExtension<S> {
    pub fn new(utility: Vec<S>) -> Self {
        AdditiveExtension { utility }
    }

    pub fn utility(&self, object: ObjectId) -> &S {
        &self.utility[object.0]
    }

    pub fn utilities(&self) -> &[S] {
        &self.utility
    }

    pub fn value(&self, bundle: &ObjectSet) -> S {
        bundle
            .iter()
            .fold(S::zero(), |acc, o| acc + self.utility[o.0].clone())
    }

    /// Values strictly decrease across classes and are equal within a class.
    pub fn is_consistent_with<P: RankOrder>(&self, pref: &P) -> bool {
        let n = self.utility.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                let (ra, rb) = (pref.rank(ObjectId(a)), pref.rank(ObjectId(b)));
                let (ua, ub) = (&self.utility[a], &self.utility[b]);
                match ra.cmp(&rb) {
                    std::cmp::Ordering::Less => ua > ub,
                    std::cmp::Ordering::Equal => ua == ub,
                    std::cmp::Ordering::Greater => ua < ub,
                }
            })
        })
    }

    /// `x` scores strictly above `y`.
    pub fn strictly_prefers(&self, x: &ObjectSet, y: &ObjectSet) -> bool {
        self.value(x) > self.value(y)
    }

    pub fn convert<T: Utility>(&self, f: impl Fn(&S) -> T) -> AdditiveExtension<T> {
        AdditiveExtension {
            utility: self.utility.iter().map(f).collect(),
        }
    }
}

impl<S: Utility> Serialize for AdditiveExtension<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        serializer.collect_seq(self.utility.iter().map(|u| u.to_string()))
    }
}

fn num_ranks<P: RankOrder>(pref: &P, num_objects: usize) -> usize {
    (0..num_objects).map(|o| pref.rank(ObjectId(o)) + 1).max().unwrap_or(1)
}

/// Extension under which `x` scores strictly above `y`, if one exists.
///
/// Picks the first rank `k` where `x` holds more objects of rank at most
/// `k` than `y` does, and gives those objects a bonus large enough to
/// outweigh every other difference.
pub fn strict_certificate<S: Utility, P: RankOrder>(
    x: &ObjectSet,
    y: &ObjectSet,
    pref: &P,
    num_objects: usize,
) -> Result<Option<AdditiveExtension<S>>> {
    if !exists_strict_preference(x, y, pref)? {
        return Ok(None);
    }
    let rx = sorted_ranks(x, pref);
    let ry = sorted_ranks(y, pref);
    // Sorted ranks: y fails to dominate x at the first position p with rx[p] < ry[p].
    let p = (0..rx.len()).find(|&p| rx[p] < ry[p]).expect("no dominance implies a gap");
    let k = rx[p];
    let ranks = num_ranks(pref, num_objects) as i64;
    let bonus = x.len() as i64 + 1;
    let utility = (0..num_objects)
        .map(|o| {
            let r = pref.rank(ObjectId(o)) as i64;
            let top = if r <= k as i64 { S::from_int(bonus) } else { S::zero() };
            top + S::from_ratio(ranks - r, ranks + 1)
        })
        .collect();
    let ext = AdditiveExtension::new(utility);
    debug_assert!(ext.strictly_prefers(x, y));
    Ok(Some(ext))
}

/// The extension from the individual rationality argument: objects weakly
/// above `pivot` get values in `[0, 1)`, objects below get values in
/// `(-size-1, -size)`, strictly decreasing across classes in both tiers.
pub fn build_punishing_extension<S: Utility, P: RankOrder>(
    pref: &P,
    pivot: ObjectId,
    endowment_size: usize,
    num_objects: usize,
) -> AdditiveExtension<S> {
    let rp = pref.rank(pivot) as i64;
    let ranks = num_ranks(pref, num_objects) as i64;
    let t = endowment_size as i64;
    let utility = (0..num_objects)
        .map(|o| {
            let r = pref.rank(ObjectId(o)) as i64;
            if r <= rp {
                S::from_ratio(rp - r, rp + 1)
            } else {
                S::from_int(-t) - S::from_ratio(r - rp, ranks - rp + 1)
            }
        })
        .collect();
    AdditiveExtension::new(utility)
}

/// Random extension consistent with `pref`. Class gaps are drawn on a log
/// scale so that both balanced and lexicographic-like extensions appear.
pub fn sample_extension<S: Utility, P: RankOrder, R: Rng + ?Sized>(
    pref: &P,
    num_objects: usize,
    rng: &mut R,
) -> AdditiveExtension<S> {
    let ranks = num_ranks(pref, num_objects);
    let mut level = vec![0i64; ranks];
    for r in (0..ranks.saturating_sub(1)).rev() {
        let gap = rng.gen_range(1..=64i64) << rng.gen_range(0..16u32);
        level[r] = level[r + 1] + gap;
    }
    let shift = rng.gen_range(0..=level[0].max(1));
    let utility = (0..num_objects)
        .map(|o| S::from_ratio(level[pref.rank(ObjectId(o))] - shift, 64))
        .collect();
    AdditiveExtension::new(utility)
}

/// Per-agent individual rationality violation: `agent` holds fewer objects
/// weakly above `pivot` than in the endowment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CirWitness {
    pub agent: AgentId,
    pub pivot: ObjectId,
}

fn bundle_cir_violation<P: RankOrder>(bundle: &ObjectSet, endowment: &ObjectSet, pref: &P) -> Option<ObjectId> {
    endowment.iter().copied().find(|&w| {
        let held = bundle.iter().filter(|&&o| pref.weakly_prefers(o, w)).count();
        let owned = endowment.iter().filter(|&&o| pref.weakly_prefers(o, w)).count();
        held < owned
    })
}

/// `bundle` satisfies component-wise individual rationality against
/// `endowment`: equivalently, it dominates the endowment.
pub fn bundle_is_cir<P: RankOrder>(bundle: &ObjectSet, endowment: &ObjectSet, pref: &P) -> bool {
    bundle_cir_violation(bundle, endowment, pref).is_none()
}

/// First agent and endowed object at which `mu` violates component-wise
/// individual rationality.
pub fn cir_witness<P: RankOrder>(instance: &Instance, mu: &Matching, prefs: &[P]) -> Option<CirWitness> {
    instance.agents().find_map(|a| {
        bundle_cir_violation(mu.bundle(a), instance.endowment(a), &prefs[a.0])
            .map(|pivot| CirWitness { agent: a, pivot })
    })
}

/// Every violating agent with its first violating pivot.
pub fn cir_violations<P: RankOrder>(instance: &Instance, mu: &Matching, prefs: &[P]) -> Vec<CirWitness> {
    instance
        .agents()
        .filter_map(|a| {
            bundle_cir_violation(mu.bundle(a), instance.endowment(a), &prefs[a.0])
                .map(|pivot| CirWitness { agent: a, pivot })
        })
        .collect()
}

pub fn is_component_wise_ir<P: RankOrder>(instance: &Instance, mu: &Matching, prefs: &[P]) -> bool {
    cir_witness(instance, mu, prefs).is_none()
}

/// Component-wise individual rationality for one agent with trichotomous
/// preferences.
pub fn bundle_is_cir_trichotomous(bundle: &ObjectSet, endowment: &ObjectSet, pref: &TrichotomousPreference) -> bool {
    bundle.iter().all(|&o| pref.is_acceptable(o)) && pref.welfare(bundle) >= pref.welfare(endowment)
}

pub fn cir_trichotomous(instance: &Instance, mu: &Matching, prefs: &[TrichotomousPreference]) -> bool {
    instance
        .agents()
        .all(|a| bundle_is_cir_trichotomous(mu.bundle(a), instance.endowment(a), &prefs[a.0]))
}
