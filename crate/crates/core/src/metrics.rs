//! Measurement over a running simulation: blocking-pair time series,
//! critical-event classification and the per-run critical-event audit.
//!
//! Measurement reads the live lists directly and never spends a time-step.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{CriticalFlags, EvolutionEvent, EvolvingInstance};
use crate::matchers::{MatcherState, ProposedSets, RunInfo};
use crate::model::{blocking_pairs_scan, AgentId, Matching, PartialMatching, PreferenceProfile, Side};

/// What an event is judged against: the live lists just before the swap,
/// the matching under construction and, for proposers, who they have
/// proposed to so far.
#[derive(Clone, Copy, Debug)]
pub struct CriticalityContext<'a> {
    pub t: u64,
    pub profile: &'a PreferenceProfile,
    pub matching: &'a PartialMatching,
    pub proposed: Option<&'a ProposedSets>,
}

/// Best entry of `x`'s live list that `x` has not proposed to.
pub fn best_unproposed(profile: &PreferenceProfile, proposed: &ProposedSets, x: usize) -> Option<usize> {
    let list = &profile.a_lists()[x];
    (0..profile.n()).map(|r| list.at(r)).find(|&y| !proposed.contains(x, y))
}

/// Flags for `event` given the state at event time.
pub fn classify_event(event: &EvolutionEvent, ctx: &CriticalityContext<'_>) -> Result<CriticalFlags> {
    if ctx.t != event.t {
        return Err(Error::StaleContext { context: ctx.t, event: event.t });
    }
    Ok(event_flags(event, ctx.profile, ctx.matching, ctx.proposed))
}

pub(crate) fn event_flags(
    event: &EvolutionEvent,
    profile: &PreferenceProfile,
    matching: &PartialMatching,
    proposed: Option<&ProposedSets>,
) -> CriticalFlags {
    let touches = |w: usize| event.u == w || event.v == w;
    let match_swap = matching.partner(event.owner).is_some_and(|p| touches(p.index));
    let best_unproposed_swap = match (event.owner.side, proposed) {
        (Side::A, Some(proposed)) => {
            best_unproposed(profile, proposed, event.owner.index).is_some_and(touches)
        }
        _ => false,
    };
    CriticalFlags { match_swap, best_unproposed_swap }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub t: u64,
    pub blocking_pairs: u64,
    pub queries: u64,
    pub proposals: u64,
    pub runs_completed: u64,
    pub critical_events: u64,
}

pub const CSV_HEADER: &str = "t,blocking_pairs,queries,proposals,runs_completed,critical_events";

/// Measurements indexed by time-step, strictly increasing in `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimeSeriesRecord {
    samples: Vec<Sample>,
}

impl TimeSeriesRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Appends `s`; a second sample at the same `t` replaces the first.
    pub fn push(&mut self, s: Sample) {
        match self.samples.last_mut() {
            Some(last) if last.t == s.t => *last = s,
            Some(last) => {
                assert!(last.t < s.t, "samples must be pushed in time order");
                self.samples.push(s);
            }
            None => self.samples.push(s),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.samples.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t, s.blocking_pairs, s.queries, s.proposals, s.runs_completed, s.critical_events
            );
        }
        out
    }

    /// Blocking-pair counts of samples taken at or after `warmup_t`.
    pub fn steady_state(&self, warmup_t: u64) -> Vec<u64> {
        self.samples.iter().filter(|s| s.t >= warmup_t).map(|s| s.blocking_pairs).collect()
    }
}

/// Counts blocking pairs of the published matching against the live lists
/// and appends the sample.
pub fn sample_blocking(inst: &EvolvingInstance, state: &MatcherState, record: &mut TimeSeriesRecord) -> Sample {
    let pairs = blocking_pairs_scan(inst.truth(), &state.published).expect("matcher sized to instance");
    record_sample(inst, state, pairs.len(), record)
}

pub(crate) fn record_sample(
    inst: &EvolvingInstance,
    state: &MatcherState,
    blocking: usize,
    record: &mut TimeSeriesRecord,
) -> Sample {
    let s = Sample {
        t: inst.t(),
        blocking_pairs: blocking as u64,
        queries: inst.query_count(),
        proposals: state.proposals,
        runs_completed: state.runs_completed,
        critical_events: inst.critical_log().len() as u64,
    };
    record.push(s);
    s
}

/// Blocking pairs of a fixed matching, kept current as the lists evolve.
///
/// Swapping `u` and `v` on `z`'s list changes only their relative order, so
/// only the pairs joining `z` to `u` and to `v` can change status.
#[derive(Clone, Debug)]
pub struct BlockingTracker {
    n: usize,
    matching: Matching,
    bits: Vec<u64>,
    count: usize,
}

impl BlockingTracker {
    pub fn new(profile: &PreferenceProfile, m: &Matching) -> Result<Self> {
        let n = profile.n();
        let mut tracker =
            BlockingTracker { n, matching: m.clone(), bits: vec![0; (n * n).div_ceil(64)], count: 0 };
        tracker.reset(profile, m)?;
        Ok(tracker)
    }

    /// Switches to matching `m`, recounting from scratch.
    pub fn reset(&mut self, profile: &PreferenceProfile, m: &Matching) -> Result<()> {
        let pairs = blocking_pairs_scan(profile, m)?;
        self.matching.clone_from(m);
        self.bits.iter_mut().for_each(|w| *w = 0);
        for &(x, y) in &pairs {
            let i = x * self.n + y;
            self.bits[i / 64] |= 1 << (i % 64);
        }
        self.count = pairs.len();
        Ok(())
    }

    /// Accounts for `events`, which must already be applied to `profile`.
    pub fn update(&mut self, profile: &PreferenceProfile, events: &[EvolutionEvent]) {
        for e in events {
            for w in [e.u, e.v] {
                let (x, y) = match e.owner.side {
                    Side::A => (e.owner.index, w),
                    Side::B => (w, e.owner.index),
                };
                self.refresh(profile, x, y);
            }
        }
    }

    fn refresh(&mut self, profile: &PreferenceProfile, x: usize, y: usize) {
        let blocking = profile.a_lists()[x].prefers(y, self.matching.partner_of_a(x))
            && profile.b_lists()[y].prefers(x, self.matching.partner_of_b(y));
        let i = x * self.n + y;
        let (word, bit) = (i / 64, 1u64 << (i % 64));
        let was = self.bits[word] & bit != 0;
        if blocking != was {
            self.bits[word] ^= bit;
            if blocking {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    /// Current blocking pairs in `(x, y)` order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.count);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let i = w * 64 + rest.trailing_zeros() as usize;
                out.push((i / self.n, i % self.n));
                rest &= rest - 1;
            }
        }
        out
    }
}

/// A completed matching run and the blocking pairs of its output, taken at
/// completion time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunTrace {
    pub run: RunInfo,
    pub blocking_pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub run: u64,
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub runs: usize,
    pub blocking_pairs: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    /// Fraction of audited blocking pairs with no critical event behind them.
    pub fn violation_rate(&self) -> f64 {
        if self.blocking_pairs == 0 {
            0.0
        } else {
            self.violations.len() as f64 / self.blocking_pairs as f64
        }
    }

    pub fn merge(&mut self, other: &AuditReport) {
        self.runs += other.runs;
        self.blocking_pairs += other.blocking_pairs;
        self.violations.extend(other.violations.iter().cloned());
    }
}

/// Checks that every blocking pair `(x, y)` of each run's output is explained
/// by a critical event on `x`'s or `y`'s list during that run. Events
/// without critical flags are ignored.
pub fn critical_event_audit(runs: &[RunTrace], events: &[EvolutionEvent]) -> AuditReport {
    let mut by_owner: HashMap<AgentId, Vec<u64>> = HashMap::new();
    for e in events.iter().filter(|e| e.critical.is_critical()) {
        by_owner.entry(e.owner).or_default().push(e.t);
    }
    for times in by_owner.values_mut() {
        times.sort_unstable();
    }
    // a run that began at clock value s has its first event at step s + 1
    let hit = |owner: AgentId, run: &RunInfo| {
        by_owner.get(&owner).is_some_and(|times| {
            let i = times.partition_point(|&t| t <= run.started_at);
            times.get(i).is_some_and(|&t| t <= run.finished_at)
        })
    };
    let mut report = AuditReport { runs: runs.len(), ..Default::default() };
    for trace in runs {
        for &(x, y) in &trace.blocking_pairs {
            report.blocking_pairs += 1;
            if !hit(AgentId::a(x), &trace.run) && !hit(AgentId::b(y), &trace.run) {
                report.violations.push(Violation { run: trace.run.index, x, y });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Permutation, PreferenceProfile};

    fn event(t: u64, owner: AgentId, rank: usize, u: usize, v: usize) -> EvolutionEvent {
        EvolutionEvent { t, owner, rank, u, v, critical: CriticalFlags::NONE }
    }

    fn identity_profile(n: usize) -> PreferenceProfile {
        let id = Permutation::identity(n);
        PreferenceProfile::new(vec![id.clone(); n], vec![id; n]).unwrap()
    }

    #[test]
    fn unmatched_owner_with_untouched_best_is_not_critical() {
        let p = identity_profile(5);
        let m = PartialMatching::empty(5);
        let proposed = ProposedSets::new(5);
        let e = event(3, AgentId::a(1), 2, 2, 3);
        let ctx = CriticalityContext { t: 3, profile: &p, matching: &m, proposed: Some(&proposed) };
        assert_eq!(classify_event(&e, &ctx).unwrap(), CriticalFlags::NONE);
    }

    #[test]
    fn swapping_the_partner_is_a_match_swap() {
        let p = identity_profile(5);
        let mut m = PartialMatching::empty(5);
        m.pair(4, 2); // B2's partner is A4, ranked 4th on B2's list
        let e = event(9, AgentId::b(2), 3, 3, 4);
        let ctx = CriticalityContext { t: 9, profile: &p, matching: &m, proposed: None };
        let flags = classify_event(&e, &ctx).unwrap();
        assert!(flags.match_swap && !flags.best_unproposed_swap);
    }

    #[test]
    fn swapping_best_unproposed_is_flagged_for_proposers_only() {
        let p = identity_profile(5);
        let m = PartialMatching::empty(5);
        let mut proposed = ProposedSets::new(5);
        proposed.insert(0, 0);
        proposed.insert(0, 1);
        // A0's best unproposed is B2 at rank 2
        assert_eq!(best_unproposed(&p, &proposed, 0), Some(2));
        let ctx = CriticalityContext { t: 1, profile: &p, matching: &m, proposed: Some(&proposed) };
        let flags = classify_event(&event(1, AgentId::a(0), 1, 1, 2), &ctx).unwrap();
        assert!(flags.best_unproposed_swap && !flags.match_swap);
        let flags = classify_event(&event(1, AgentId::b(0), 1, 1, 2), &ctx).unwrap();
        assert!(!flags.is_critical());
    }

    #[test]
    fn stale_context_is_rejected() {
        let p = identity_profile(3);
        let m = PartialMatching::empty(3);
        let ctx = CriticalityContext { t: 4, profile: &p, matching: &m, proposed: None };
        assert!(matches!(
            classify_event(&event(5, AgentId::a(0), 0, 0, 1), &ctx),
            Err(Error::StaleContext { context: 4, event: 5 })
        ));
    }

    #[test]
    fn time_series_csv_and_dedup() {
        let mut r = TimeSeriesRecord::new();
        let s = |t, b| Sample { t, blocking_pairs: b, queries: t, proposals: 0, runs_completed: 0, critical_events: 0 };
        r.push(s(0, 9));
        r.push(s(4, 3));
        r.push(s(4, 2));
        assert_eq!(r.samples().len(), 2);
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n0,9,0,0,0,0\n4,2,4,0,0,0\n"));
        assert_eq!(r.steady_state(1), vec![2]);
    }

    #[test]
    fn audit_explains_pairs_with_critical_events_inside_the_run() {
        let run = RunInfo { index: 1, started_at: 10, finished_at: 20, proposals: 5, queries: 10 };
        let trace = RunTrace { run, blocking_pairs: vec![(0, 3), (1, 1)] };
        let mut injected = event(15, AgentId::b(3), 0, 0, 2);
        injected.critical.match_swap = true;
        let mut too_early = event(10, AgentId::a(1), 0, 0, 2);
        too_early.critical.match_swap = true;
        let plain = event(16, AgentId::b(1), 0, 0, 2);
        let report = critical_event_audit(&[trace], &[injected, too_early, plain]);
        assert_eq!(report.blocking_pairs, 2);
        assert_eq!(report.violations, vec![Violation { run: 1, x: 1, y: 1 }]);
        assert!((report.violation_rate() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tracker_follows_swaps_of_the_partner() {
        let p = identity_profile(3);
        let m = Matching::from_a_to_b(vec![2, 1, 0]).unwrap();
        let mut live = p.clone();
        let mut tracker = BlockingTracker::new(&live, &m).unwrap();
        assert_eq!(tracker.pairs(), blocking_pairs_scan(&live, &m).unwrap());
        // A0 holds B2 last; moving B2 up past B1 removes (0, 1) as a candidate
        let (u, v) = live.list_mut(AgentId::a(0)).swap_adjacent(1);
        tracker.update(&live, &[event(1, AgentId::a(0), 1, u, v)]);
        assert_eq!(tracker.pairs(), blocking_pairs_scan(&live, &m).unwrap());
        assert_eq!(tracker.count(), tracker.pairs().len());
    }

    #[test]
    fn empty_audit_has_zero_rate() {
        assert_eq!(critical_event_audit(&[], &[]).violation_rate(), 0.0);
    }
}
