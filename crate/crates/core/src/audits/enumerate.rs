use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching, ObjectId, ObjectSet};
use crate::optimize::DEFAULT_ENUMERATION_BOUND;

/// Every matching of the instance exactly once, in canonical order.
pub struct MatchingIter {
    sizes: Vec<usize>,
    num_objects: usize,
    /// Per agent: positions into the objects left over by earlier agents.
    combos: Vec<Vec<usize>>,
    avail: Vec<Vec<ObjectId>>,
    state: IterState,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum IterState {
    Fresh,
    Running,
    Done,
}

pub fn enumerate_matchings(instance: &Instance) -> Result<MatchingIter> {
    enumerate_matchings_bounded(instance, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_matchings_bounded(instance: &Instance, bound: usize) -> Result<MatchingIter> {
    check_bound(instance, bound)?;
    let sizes: Vec<usize> = instance.agents().map(|a| instance.endowment_size(a)).collect();
    let n = sizes.len();
    let mut it = MatchingIter {
        sizes,
        num_objects: instance.num_objects(),
        combos: vec![Vec::new(); n],
        avail: vec![Vec::new(); n],
        state: IterState::Fresh,
    };
    it.reset_from(0);
    Ok(it)
}

pub(crate) fn check_bound(instance: &Instance, bound: usize) -> Result<()> {
    if instance.num_objects() > bound {
        Err(Error::TooLarge {
            objects: instance.num_objects(),
            bound,
        })
    } else {
        Ok(())
    }
}

impl MatchingIter {
    /// Recomputes availability and first combinations for agents `k..`.
    fn reset_from(&mut self, k: usize) {
        let mut used = vec![false; self.num_objects];
        for j in 0..k {
            for &p in &self.combos[j] {
                used[self.avail[j][p].0] = true;
            }
        }
        for j in k..self.sizes.len() {
            self.avail[j] = (0..self.num_objects).filter(|&o| !used[o]).map(ObjectId).collect();
            self.combos[j] = (0..self.sizes[j]).collect();
            for &p in &self.combos[j] {
                used[self.avail[j][p].0] = true;
            }
        }
    }

    fn advance(combo: &mut [usize], m: usize) -> bool {
        let s = combo.len();
        for i in (0..s).rev() {
            if combo[i] < m - s + i {
                combo[i] += 1;
                for j in i + 1..s {
                    combo[j] = combo[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> Matching {
        let bundles = self
            .combos
            .iter()
            .zip(&self.avail)
            .map(|(c, av)| c.iter().map(|&p| av[p]).collect::<ObjectSet>())
            .collect();
        Matching::from_bundles_unchecked(bundles)
    }
}

impl Iterator for MatchingIter {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        match self.state {
            IterState::Done => return None,
            IterState::Fresh => {
                self.state = IterState::Running;
                return Some(self.current());
            }
            IterState::Running => {}
        }
        for k in (0..self.sizes.len()).rev() {
            let m = self.avail[k].len();
            if Self::advance(&mut self.combos[k], m) {
                self.reset_from(k + 1);
                return Some(self.current());
            }
        }
        self.state = IterState::Done;
        None
    }
}

/// Depth-first search over matchings in canonical order, assigning agents
/// in priority order. `accept` prunes partial assignments agent by agent;
/// `visit` sees each complete matching and may stop the search.
pub(crate) fn search_matchings<B>(
    instance: &Instance,
    accept: impl FnMut(AgentId, &ObjectSet) -> bool,
    visit: impl FnMut(&[ObjectSet]) -> ControlFlow<B>,
) -> Option<B> {
    let sizes: Vec<usize> = instance.agents().map(|a| instance.endowment_size(a)).collect();
    let pool: Vec<ObjectId> = instance.objects().collect();
    search_partitions(&sizes, &pool, accept, visit)
}

/// Splits `pool` into consecutive bundles of the given sizes, in the same
/// order as [`search_matchings`]. Slot `k` is reported as `AgentId(k)`.
pub(crate) fn search_partitions<B>(
    sizes: &[usize],
    pool: &[ObjectId],
    mut accept: impl FnMut(AgentId, &ObjectSet) -> bool,
    mut visit: impl FnMut(&[ObjectSet]) -> ControlFlow<B>,
) -> Option<B> {
    struct Search<'a, A, V> {
        sizes: &'a [usize],
        pool: &'a [ObjectId],
        used: Vec<bool>,
        bundles: Vec<ObjectSet>,
        accept: A,
        visit: V,
    }

    impl<A, V> Search<'_, A, V> {
        fn rec<B>(&mut self, slot: usize) -> ControlFlow<B>
        where
            A: FnMut(AgentId, &ObjectSet) -> bool,
            V: FnMut(&[ObjectSet]) -> ControlFlow<B>,
        {
            if slot == self.sizes.len() {
                return (self.visit)(&self.bundles);
            }
            let free: Vec<usize> = (0..self.pool.len()).filter(|&k| !self.used[k]).collect();
            let size = self.sizes[slot];
            if size > free.len() {
                return ControlFlow::Continue(());
            }
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                let bundle: ObjectSet = combo.iter().map(|&p| self.pool[free[p]]).collect();
                if (self.accept)(AgentId(slot), &bundle) {
                    for &p in &combo {
                        self.used[free[p]] = true;
                    }
                    self.bundles.push(bundle);
                    let r = self.rec(slot + 1);
                    self.bundles.pop();
                    for &p in &combo {
                        self.used[free[p]] = false;
                    }
                    r?;
                }
                if !MatchingIter::advance(&mut combo, free.len()) {
                    return ControlFlow::Continue(());
                }
            }
        }
    }

    let mut pool = pool.to_vec();
    pool.sort();
    let mut search = Search {
        sizes,
        pool: &pool,
        used: vec![false; pool.len()],
        bundles: Vec::with_capacity(sizes.len()),
        accept: &mut accept,
        visit: &mut visit,
    };
    match search.rec(0) {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    }
}
