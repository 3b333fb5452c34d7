//! Static combinatorial objects: permutations, preference profiles and
//! matchings, together with exact measurements over them.
//!
//! Ranks are 0-based in memory (rank 0 is the most preferred entry) and
//! 1-based whenever they are written out.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNMATCHED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// An agent on one side of the market.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub fn a(index: usize) -> Self {
        AgentId { side: Side::A, index }
    }

    pub fn b(index: usize) -> Self {
        AgentId { side: Side::B, index }
    }

    pub fn check(self, n: usize) -> Result<Self> {
        if self.index < n {
            Ok(self)
        } else {
            Err(Error::IndexOutOfRange { index: self.index, n })
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side, self.index)
    }
}

/// A strict total order over `n` agents, kept in both directions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    rank_of: Vec<u32>,
    inverse: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let v: Vec<u32> = (0..n as u32).collect();
        Permutation { rank_of: v.clone(), inverse: v }
    }

    /// Builds a permutation from agents listed in preference order.
    pub fn from_order<I>(order: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let inverse: Vec<u32> = order.into_iter().map(|a| a as u32).collect();
        let n = inverse.len();
        let mut rank_of = vec![UNMATCHED; n];
        for (rank, &agent) in inverse.iter().enumerate() {
            let slot = rank_of.get_mut(agent as usize).ok_or_else(|| {
                Error::InvalidPermutation(format!("agent {agent} out of range for n={n}"))
            })?;
            if *slot != UNMATCHED {
                return Err(Error::InvalidPermutation(format!("agent {agent} listed twice")));
            }
            *slot = rank as u32;
        }
        Ok(Permutation { rank_of, inverse })
    }

    /// Uniform random permutation (Fisher–Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(rng);
        let mut rank_of = vec![0u32; n];
        for (rank, &agent) in order.iter().enumerate() {
            rank_of[agent as usize] = rank as u32;
        }
        Permutation { rank_of, inverse: order }
    }

    pub fn len(&self) -> usize {
        self.inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse.is_empty()
    }

    /// 0-based rank of `agent`.
    #[inline]
    pub fn rank(&self, agent: usize) -> usize {
        self.rank_of[agent] as usize
    }

    /// Agent at 0-based `rank`.
    #[inline]
    pub fn at(&self, rank: usize) -> usize {
        self.inverse[rank] as usize
    }

    /// True when `u` is ranked strictly above `v`.
    #[inline]
    pub fn prefers(&self, u: usize, v: usize) -> bool {
        self.rank_of[u] < self.rank_of[v]
    }

    pub fn order(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.inverse.iter().map(|&a| a as usize)
    }

    pub fn ranks(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.rank_of.iter().map(|&r| r as usize)
    }

    /// Exchanges the occupants of two ranks.
    pub fn swap_ranks(&mut self, r1: usize, r2: usize) {
        let (u, v) = (self.inverse[r1], self.inverse[r2]);
        self.inverse.swap(r1, r2);
        self.rank_of[u as usize] = r2 as u32;
        self.rank_of[v as usize] = r1 as u32;
    }

    /// Swaps ranks `i` and `i + 1`, returning their pre-swap occupants.
    #[inline]
    pub fn swap_adjacent(&mut self, i: usize) -> (usize, usize) {
        let (u, v) = (self.inverse[i] as usize, self.inverse[i + 1] as usize);
        self.swap_ranks(i, i + 1);
        (u, v)
    }

    /// Number of unordered pairs ordered differently by `self` and `other`.
    ///
    /// Counts inversions of `other`'s ranks read in `self`'s order with a
    /// bottom-up merge sort, O(n log n).
    pub fn kendall_tau(&self, other: &Permutation) -> Result<u64> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: other.len() });
        }
        let mut seq: Vec<u32> = self.inverse.iter().map(|&a| other.rank_of[a as usize]).collect();
        Ok(count_inversions(&mut seq))
    }

    /// Number of `v != u` whose order relative to `u` differs between the two.
    pub fn element_disagreements(&self, other: &Permutation, u: usize) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: other.len() });
        }
        if u >= self.len() {
            return Err(Error::IndexOutOfRange { index: u, n: self.len() });
        }
        let (pu, qu) = (self.rank_of[u], other.rank_of[u]);
        Ok((0..self.len())
            .filter(|&v| v != u && (self.rank_of[v] < pu) != (other.rank_of[v] < qu))
            .count())
    }

    /// Largest per-element disagreement over all elements.
    pub fn max_element_disagreement(&self, other: &Permutation) -> Result<usize> {
        (0..self.len())
            .map(|u| self.element_disagreements(other, u))
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }
}

fn count_inversions(seq: &mut [u32]) -> u64 {
    let n = seq.len();
    let mut buf = vec![0u32; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if seq[i] <= seq[j] {
                    buf[k] = seq[i];
                    i += 1;
                } else {
                    buf[k] = seq[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&seq[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&seq[j..hi]);
            lo = hi;
        }
        seq.copy_from_slice(&buf);
        width *= 2;
    }
    inversions
}

/// All `2n` preference lists: A-side lists rank B, B-side lists rank A.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreferenceProfile {
    n: usize,
    a_lists: Vec<Permutation>,
    b_lists: Vec<Permutation>,
}

impl PreferenceProfile {
    pub fn new(a_lists: Vec<Permutation>, b_lists: Vec<Permutation>) -> Result<Self> {
        let n = a_lists.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        if b_lists.len() != n {
            return Err(Error::SizeMismatch { left: n, right: b_lists.len() });
        }
        if let Some(bad) = a_lists.iter().chain(&b_lists).find(|p| p.len() != n) {
            return Err(Error::SizeMismatch { left: n, right: bad.len() });
        }
        Ok(PreferenceProfile { n, a_lists, b_lists })
    }

    /// Every list independently uniform.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let a_lists = (0..n).map(|_| Permutation::random(n, rng)).collect();
        let b_lists = (0..n).map(|_| Permutation::random(n, rng)).collect();
        Ok(PreferenceProfile { n, a_lists, b_lists })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a_lists(&self) -> &[Permutation] {
        &self.a_lists
    }

    pub fn b_lists(&self) -> &[Permutation] {
        &self.b_lists
    }

    #[inline]
    pub fn list(&self, owner: AgentId) -> &Permutation {
        match owner.side {
            Side::A => &self.a_lists[owner.index],
            Side::B => &self.b_lists[owner.index],
        }
    }

    #[inline]
    pub fn list_mut(&mut self, owner: AgentId) -> &mut Permutation {
        match owner.side {
            Side::A => &mut self.a_lists[owner.index],
            Side::B => &mut self.b_lists[owner.index],
        }
    }

    pub fn owners(&self) -> impl Iterator<Item = AgentId> {
        let n = self.n;
        (0..n).map(AgentId::a).chain((0..n).map(AgentId::b))
    }
}

/// Uniform random profile of size `n`.
pub fn random_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PreferenceProfile> {
    PreferenceProfile::random(n, rng)
}

/// The cyclic instance pair showing that approximately sorted lists can
/// still leave a stable-for-the-approximation matching with many blocking
/// pairs.
///
/// Returns `(true_profile, approx_profile)`. In the approximation, A-agent
/// `x` lists `x, x+1, .., n-1, 0, .., x-1` and B-agent `y` lists
/// `y, y-1, .., 0, n-1, .., y+1`; the true lists exchange ranks 1 and `k`.
pub fn adversarial_profile(n: usize, k: usize) -> Result<(PreferenceProfile, PreferenceProfile)> {
    if k < 2 || k > n {
        return Err(Error::SwapRankOutOfRange { k, n });
    }
    let a_approx: Vec<Permutation> = (0..n)
        .map(|x| Permutation::from_order((0..n).map(|j| (x + j) % n)))
        .collect::<Result<_>>()?;
    let b_approx: Vec<Permutation> = (0..n)
        .map(|y| Permutation::from_order((0..n).map(|j| (y + n - j) % n)))
        .collect::<Result<_>>()?;
    let approx = PreferenceProfile::new(a_approx, b_approx)?;
    let mut truth = approx.clone();
    for owner in approx.owners() {
        truth.list_mut(owner).swap_ranks(0, k - 1);
    }
    Ok((truth, approx))
}

/// A perfect matching between A and B.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    a_to_b: Vec<u32>,
    b_to_a: Vec<u32>,
}

impl Matching {
    pub fn identity(n: usize) -> Self {
        let v: Vec<u32> = (0..n as u32).collect();
        Matching { a_to_b: v.clone(), b_to_a: v }
    }

    pub fn from_a_to_b(a_to_b: Vec<usize>) -> Result<Self> {
        let p = Permutation::from_order(a_to_b)
            .map_err(|e| Error::PartialMatching(e.to_string()))?;
        Ok(Matching { a_to_b: p.inverse, b_to_a: p.rank_of })
    }

    pub fn n(&self) -> usize {
        self.a_to_b.len()
    }

    #[inline]
    pub fn partner_of_a(&self, x: usize) -> usize {
        self.a_to_b[x] as usize
    }

    #[inline]
    pub fn partner_of_b(&self, y: usize) -> usize {
        self.b_to_a[y] as usize
    }

    pub fn partner(&self, z: AgentId) -> AgentId {
        match z.side {
            Side::A => AgentId::b(self.partner_of_a(z.index)),
            Side::B => AgentId::a(self.partner_of_b(z.index)),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.a_to_b.iter().enumerate().map(|(x, &y)| (x, y as usize))
    }
}

/// A matching under construction; unmatched agents have no partner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMatching {
    a_to_b: Vec<u32>,
    b_to_a: Vec<u32>,
}

impl PartialMatching {
    pub fn empty(n: usize) -> Self {
        PartialMatching { a_to_b: vec![UNMATCHED; n], b_to_a: vec![UNMATCHED; n] }
    }

    pub fn n(&self) -> usize {
        self.a_to_b.len()
    }

    #[inline]
    pub fn partner_of_a(&self, x: usize) -> Option<usize> {
        match self.a_to_b[x] {
            UNMATCHED => None,
            y => Some(y as usize),
        }
    }

    #[inline]
    pub fn partner_of_b(&self, y: usize) -> Option<usize> {
        match self.b_to_a[y] {
            UNMATCHED => None,
            x => Some(x as usize),
        }
    }

    pub fn partner(&self, z: AgentId) -> Option<AgentId> {
        match z.side {
            Side::A => self.partner_of_a(z.index).map(AgentId::b),
            Side::B => self.partner_of_b(z.index).map(AgentId::a),
        }
    }

    /// Matches `x` with `y`, releasing any previous partners of both.
    pub fn pair(&mut self, x: usize, y: usize) {
        if let Some(old_y) = self.partner_of_a(x) {
            self.b_to_a[old_y] = UNMATCHED;
        }
        if let Some(old_x) = self.partner_of_b(y) {
            self.a_to_b[old_x] = UNMATCHED;
        }
        self.a_to_b[x] = y as u32;
        self.b_to_a[y] = x as u32;
    }

    pub fn matched_count(&self) -> usize {
        self.a_to_b.iter().filter(|&&y| y != UNMATCHED).count()
    }

    pub fn is_perfect(&self) -> bool {
        self.matched_count() == self.n()
    }
}

impl From<&Matching> for PartialMatching {
    fn from(m: &Matching) -> Self {
        PartialMatching { a_to_b: m.a_to_b.clone(), b_to_a: m.b_to_a.clone() }
    }
}

impl TryFrom<&PartialMatching> for Matching {
    type Error = Error;

    fn try_from(m: &PartialMatching) -> Result<Self> {
        if !m.is_perfect() {
            return Err(Error::PartialMatching(format!(
                "{} of {} agents matched",
                m.matched_count(),
                m.n()
            )));
        }
        Ok(Matching { a_to_b: m.a_to_b.clone(), b_to_a: m.b_to_a.clone() })
    }
}

fn check_sizes(profile: &PreferenceProfile, m: &Matching) -> Result<()> {
    if profile.n() != m.n() {
        return Err(Error::SizeMismatch { left: profile.n(), right: m.n() });
    }
    Ok(())
}

/// Every blocking pair `(x, y)` by exhaustive enumeration of all `n²` pairs.
///
/// This is the reference counter; [`blocking_pairs_scan`] is the fast path
/// used while sampling long runs.
pub fn blocking_pairs(profile: &PreferenceProfile, m: &Matching) -> Result<BTreeSet<(usize, usize)>> {
    check_sizes(profile, m)?;
    let n = profile.n();
    let mut out = BTreeSet::new();
    for x in 0..n {
        let px = &profile.a_lists[x];
        let mx = m.partner_of_a(x);
        for y in 0..n {
            let py = &profile.b_lists[y];
            if px.prefers(y, mx) && py.prefers(x, m.partner_of_b(y)) {
                out.insert((x, y));
            }
        }
    }
    Ok(out)
}

/// Blocking pairs found by walking each A-list only down to the current
/// partner. Cost is the sum of the A-side partner ranks, which is far below
/// `n²` for any matching close to stable.
pub fn blocking_pairs_scan(profile: &PreferenceProfile, m: &Matching) -> Result<Vec<(usize, usize)>> {
    check_sizes(profile, m)?;
    let mut out = Vec::new();
    for (x, px) in profile.a_lists.iter().enumerate() {
        let limit = px.rank(m.partner_of_a(x));
        for r in 0..limit {
            let y = px.at(r);
            if profile.b_lists[y].prefers(x, m.partner_of_b(y)) {
                out.push((x, y));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn count_blocking_pairs(profile: &PreferenceProfile, m: &Matching) -> Result<usize> {
    check_sizes(profile, m)?;
    let mut count = 0;
    for (x, px) in profile.a_lists.iter().enumerate() {
        let limit = px.rank(m.partner_of_a(x));
        count += (0..limit)
            .filter(|&r| {
                let y = px.at(r);
                profile.b_lists[y].prefers(x, m.partner_of_b(y))
            })
            .count();
    }
    Ok(count)
}

pub fn is_stable(profile: &PreferenceProfile, m: &Matching) -> Result<bool> {
    Ok(count_blocking_pairs(profile, m)? == 0)
}
