//! Sorting evolving lists through the comparison oracle.
//!
//! [`QuickSorter`] is randomized quicksort written as a resumable state
//! machine: it hands out one comparison at a time and is fed the answer, so
//! a scheduler can interleave it with other processes one time-step at a
//! time. Answers that became inconsistent because the list moved mid-sort
//! are taken as given.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{EvolvingInstance, QueryTriple};
use crate::model::{AgentId, Permutation};

/// Result of sorting one list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SortOutcome {
    pub owner: AgentId,
    #[serde(skip)]
    pub approx: Permutation,
    pub started_at: u64,
    pub finished_at: u64,
    pub comparisons: u64,
}

#[derive(Clone, Debug)]
struct Partition {
    lo: usize,
    hi: usize,
    pivot_idx: usize,
    pivot: u32,
    cursor: usize,
}

#[derive(Clone, Debug)]
pub struct QuickSorter {
    owner: AgentId,
    items: Vec<u32>,
    stack: Vec<(usize, usize)>,
    part: Option<Partition>,
    less: Vec<u32>,
    greater: Vec<u32>,
    comparisons: u64,
    started_at: u64,
}

impl QuickSorter {
    pub fn new(owner: AgentId, n: usize, started_at: u64) -> Self {
        QuickSorter {
            owner,
            items: (0..n as u32).collect(),
            stack: vec![(0, n)],
            part: None,
            less: Vec::with_capacity(n),
            greater: Vec::with_capacity(n),
            comparisons: 0,
            started_at,
        }
    }

    pub fn owner(&self) -> AgentId {
        self.owner
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// The comparison to ask next, or `None` once the list is sorted.
    ///
    /// Calling this again before [`feed`](Self::feed) returns the same
    /// query.
    pub fn next_query<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<QueryTriple> {
        loop {
            if let Some(part) = self.part.as_mut() {
                if part.cursor == part.pivot_idx {
                    part.cursor += 1;
                }
                if part.cursor < part.hi {
                    let elem = self.items[part.cursor] as usize;
                    return Some(QueryTriple::new(self.owner, elem, part.pivot as usize));
                }
                let Partition { lo, hi, pivot, .. } = *part;
                let split = lo + self.less.len();
                self.items[lo..split].copy_from_slice(&self.less);
                self.items[split] = pivot;
                self.items[split + 1..hi].copy_from_slice(&self.greater);
                self.less.clear();
                self.greater.clear();
                self.part = None;
                self.stack.push((split + 1, hi));
                self.stack.push((lo, split));
                continue;
            }
            let (lo, hi) = self.stack.pop()?;
            if hi - lo < 2 {
                continue;
            }
            let pivot_idx = rng.gen_range(lo..hi);
            self.part = Some(Partition { lo, hi, pivot_idx, pivot: self.items[pivot_idx], cursor: lo });
        }
    }

    /// Answer to the last query: whether the element beats the pivot.
    pub fn feed(&mut self, element_first: bool) {
        let part = self.part.as_mut().expect("feed without a pending query");
        let elem = self.items[part.cursor];
        if element_first {
            self.less.push(elem);
        } else {
            self.greater.push(elem);
        }
        part.cursor += 1;
        self.comparisons += 1;
    }

    pub fn is_finished(&self) -> bool {
        self.part.is_none() && self.stack.iter().all(|&(lo, hi)| hi - lo < 2)
    }

    pub fn finish(self, finished_at: u64) -> SortOutcome {
        debug_assert!(self.is_finished());
        let approx = Permutation::from_order(self.items.iter().map(|&a| a as usize))
            .expect("quicksort keeps a permutation");
        SortOutcome {
            owner: self.owner,
            approx,
            started_at: self.started_at,
            finished_at,
            comparisons: self.comparisons,
        }
    }
}

/// Sorts several lists one after another on a shared clock.
#[derive(Clone, Debug)]
pub struct SequentialSorter {
    n: usize,
    owners: Vec<AgentId>,
    next: usize,
    current: Option<QuickSorter>,
    done: Vec<SortOutcome>,
}

impl SequentialSorter {
    pub fn new(n: usize, owners: Vec<AgentId>) -> Result<Self> {
        if owners.is_empty() {
            return Err(Error::InvalidConfig("no lists to sort".into()));
        }
        let mut seen = BTreeSet::new();
        for &o in &owners {
            o.check(n)?;
            if !seen.insert(o) {
                return Err(Error::DuplicateOwner(o));
            }
        }
        Ok(SequentialSorter { n, owners, next: 0, current: None, done: Vec::new() })
    }

    /// Next comparison, or `None` when every list is sorted. `now` stamps
    /// start and finish times of the individual sorts.
    pub fn next_query<R: Rng + ?Sized>(&mut self, rng: &mut R, now: u64) -> Option<QueryTriple> {
        loop {
            if self.current.is_none() {
                let &owner = self.owners.get(self.next)?;
                self.next += 1;
                self.current = Some(QuickSorter::new(owner, self.n, now));
            }
            let cur = self.current.as_mut().expect("set above");
            if let Some(q) = cur.next_query(rng) {
                return Some(q);
            }
            let finished = self.current.take().expect("set above");
            self.done.push(finished.finish(now));
        }
    }

    pub fn feed(&mut self, answer: bool) {
        self.current.as_mut().expect("feed without a pending query").feed(answer);
    }

    pub fn is_finished(&self) -> bool {
        self.current.is_none() && self.next == self.owners.len()
    }

    pub fn outcomes(&self) -> &[SortOutcome] {
        &self.done
    }

    pub fn into_outcomes(self) -> Vec<SortOutcome> {
        self.done
    }
}

/// Randomized quicksort of `owner`'s live list; every comparison is one
/// time-step.
pub fn evolving_quicksort<R: Rng + ?Sized>(
    inst: &mut EvolvingInstance,
    owner: AgentId,
    rng: &mut R,
) -> Result<SortOutcome> {
    owner.check(inst.n())?;
    let mut sorter = QuickSorter::new(owner, inst.n(), inst.t());
    while let Some(q) = sorter.next_query(rng) {
        let answer = inst.query(q)?;
        sorter.feed(answer);
    }
    Ok(sorter.finish(inst.t()))
}

/// Sorts each owner's list in the given order.
pub fn sequential_sort<R: Rng + ?Sized>(
    inst: &mut EvolvingInstance,
    owners: &[AgentId],
    rng: &mut R,
) -> Result<BTreeMap<AgentId, SortOutcome>> {
    let mut sorter = SequentialSorter::new(inst.n(), owners.to_vec())?;
    while let Some(q) = sorter.next_query(rng, inst.t()) {
        let answer = inst.query(q)?;
        sorter.feed(answer);
    }
    Ok(sorter.into_outcomes().into_iter().map(|o| (o.owner, o)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::EvolutionMode;
    use crate::model::random_profile;
    use crate::rng::{stream, Stream};

    fn instance(n: usize, alpha: u32, seed: u64) -> EvolvingInstance {
        let profile = random_profile(n, &mut stream(seed, Stream::Profile)).unwrap();
        EvolvingInstance::new(profile, alpha, EvolutionMode::TwoSided, stream(seed, Stream::Nature))
    }

    #[test]
    fn static_quicksort_recovers_truth() {
        for seed in 0..30 {
            for n in [1, 2, 3, 10, 37] {
                let mut inst = instance(n, 0, seed);
                let mut rng = stream(seed, Stream::Algorithm);
                let owner = AgentId::b(n / 2);
                let out = evolving_quicksort(&mut inst, owner, &mut rng).unwrap();
                assert_eq!(&out.approx, inst.snapshot().list(owner));
                let pairs = (n * n.saturating_sub(1) / 2) as u64;
                assert!(out.comparisons >= n.saturating_sub(1) as u64 && out.comparisons <= pairs);
                assert_eq!(out.comparisons, inst.query_count());
                assert_eq!(out.finished_at - out.started_at, out.comparisons);
            }
        }
    }

    #[test]
    fn evolving_quicksort_returns_a_permutation() {
        let mut inst = instance(50, 5, 4);
        let out = evolving_quicksort(&mut inst, AgentId::a(3), &mut stream(4, Stream::Algorithm)).unwrap();
        assert_eq!(out.approx.len(), 50);
        assert!(out.comparisons <= 50 * 49 / 2);
    }

    #[test]
    fn sequential_sort_validates_owners() {
        let mut inst = instance(4, 1, 1);
        let mut rng = stream(1, Stream::Algorithm);
        assert!(matches!(
            sequential_sort(&mut inst, &[AgentId::a(0), AgentId::a(0)], &mut rng),
            Err(Error::DuplicateOwner(_))
        ));
        assert!(sequential_sort(&mut inst, &[], &mut rng).is_err());
        assert!(sequential_sort(&mut inst, &[AgentId::b(4)], &mut rng).is_err());
        assert_eq!(inst.t(), 0);
    }

    #[test]
    fn sequential_single_owner_matches_quicksort() {
        let owner = AgentId::b(2);
        let mut i1 = instance(20, 1, 8);
        let single = evolving_quicksort(&mut i1, owner, &mut stream(8, Stream::Algorithm)).unwrap();
        let mut i2 = instance(20, 1, 8);
        let seq = sequential_sort(&mut i2, &[owner], &mut stream(8, Stream::Algorithm)).unwrap();
        assert_eq!(seq[&owner], single);
        assert_eq!(i1.snapshot(), i2.snapshot());
    }

    #[test]
    fn static_sequential_sort_of_all_lists_is_exact() {
        let n = 12;
        let mut inst = instance(n, 0, 21);
        let owners: Vec<AgentId> = inst.snapshot().owners().collect();
        let out = sequential_sort(&mut inst, &owners, &mut stream(21, Stream::Algorithm)).unwrap();
        let truth = inst.snapshot();
        assert_eq!(out.len(), 2 * n);
        let mut prev_finish = 0;
        for owner in &owners {
            let o = &out[owner];
            assert_eq!(&o.approx, truth.list(*owner));
            assert!(o.started_at >= prev_finish);
            prev_finish = o.finished_at;
        }
    }
}
