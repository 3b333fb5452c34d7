//! Matching procedures.
//!
//! [`gale_shapley_static`] works on a frozen profile. The three dynamic
//! matchers run forever against an [`EvolvingInstance`] and advance exactly
//! one time-step per [`DynamicMatcher::step`]:
//!
//! * [`SimpleMatcher`] sorts all `2n` lists, runs Gale-Shapley on the sorted
//!   copies for free, publishes, and starts over.
//! * [`OneSidedMatcher`] runs Gale-Shapley with free A-side lists and one
//!   live query per acceptance test.
//! * [`InterleavedMatcher`] alternates a perpetual sort of the A-side lists
//!   (even steps) with a windowed Gale-Shapley (odd steps).
//!
//! Each matcher keeps a published matching that only changes when a run
//! completes; before the first completion it is the identity.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolution::{CriticalFlags, EvolutionEvent, EvolutionMode, EvolvingInstance, QueryTriple};
use crate::metrics::event_flags;
use crate::model::{AgentId, Matching, PartialMatching, Permutation, PreferenceProfile};
use crate::rng::SimRng;
use crate::sorting::{SequentialSorter, SortOutcome};

/// Per-A-agent record of B-agents already proposed to in the current run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProposedSets {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl ProposedSets {
    pub fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        ProposedSets { n, words_per_row, bits: vec![0; n * words_per_row] }
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.words_per_row + y / 64] & (1 << (y % 64)) != 0
    }

    /// Marks `(x, y)`; returns false if it was already marked.
    #[inline]
    pub fn insert(&mut self, x: usize, y: usize) -> bool {
        let w = &mut self.bits[x * self.words_per_row + y / 64];
        let bit = 1 << (y % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn count(&self, x: usize) -> usize {
        let row = &self.bits[x * self.words_per_row..(x + 1) * self.words_per_row];
        row.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&y| self.contains(x, y))
    }

    pub fn clear(&mut self) {
        self.bits.iter_mut().for_each(|w| *w = 0);
    }
}

/// Read-only view every dynamic matcher exposes.
#[derive(Clone, Debug)]
pub struct MatcherState {
    /// Output of the last completed run; identity before the first.
    pub published: Matching,
    /// Matching under construction in the current run.
    pub working: PartialMatching,
    pub proposed: ProposedSets,
    /// Approximate A-side lists the current run works from.
    pub approx_a_lists: Arc<Vec<Permutation>>,
    pub runs_completed: u64,
    /// Proposals over all runs.
    pub proposals: u64,
}

impl MatcherState {
    /// Identity published matching, nothing proposed yet.
    pub fn new(n: usize, approx: Arc<Vec<Permutation>>) -> Self {
        MatcherState {
            published: Matching::identity(n),
            working: PartialMatching::empty(n),
            proposed: ProposedSets::new(n),
            approx_a_lists: approx,
            runs_completed: 0,
            proposals: 0,
        }
    }
}

/// Bookkeeping of one completed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct RunInfo {
    pub index: u64,
    /// Clock value when the run began (its first query happens at `started_at + 1`).
    pub started_at: u64,
    pub finished_at: u64,
    pub proposals: u64,
    /// Queries issued by the matching process during the run.
    pub queries: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    /// False for an idle step.
    pub queried: bool,
    pub critical_events: u32,
    /// Set when a run completed and a new matching was published this step.
    pub completed_run: Option<RunInfo>,
}

pub trait DynamicMatcher {
    /// Advances exactly one time-step.
    fn step(&mut self, inst: &mut EvolvingInstance) -> Result<StepReport>;

    fn state(&self) -> &MatcherState;

    fn name(&self) -> &'static str;

    /// Per-list outcomes of the last completed sorting pass, if the matcher sorts.
    fn last_sort_outcomes(&self) -> &[SortOutcome] {
        &[]
    }
}

/// Window of `⌈c_window · log₂ n⌉` candidates, clamped to `[1, n]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowConfig {
    pub c_window: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { c_window: 4.0 }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_window.is_finite() && self.c_window > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("c_window must be positive, got {}", self.c_window)))
        }
    }

    pub fn size(&self, n: usize) -> usize {
        let raw = (self.c_window * (n as f64).log2()).ceil();
        (raw.max(1.0) as usize).min(n.max(1))
    }
}

/// A-proposing deferred acceptance on a frozen profile, in the order
/// "for each x in A, follow the rejection chain". Returns the matching and
/// the number of proposals.
pub fn gale_shapley_static(profile: &PreferenceProfile) -> (Matching, u64) {
    let n = profile.n();
    let mut next_choice = vec![0usize; n];
    let mut m = PartialMatching::empty(n);
    let mut proposals = 0u64;
    for x in 0..n {
        let mut p = x;
        loop {
            let y = profile.a_lists()[p].at(next_choice[p]);
            next_choice[p] += 1;
            proposals += 1;
            match m.partner_of_b(y) {
                None => {
                    m.pair(p, y);
                    break;
                }
                Some(cur) if profile.b_lists()[y].prefers(p, cur) => {
                    m.pair(p, y);
                    p = cur;
                }
                Some(_) => {}
            }
        }
    }
    (Matching::try_from(&m).expect("deferred acceptance ends perfect"), proposals)
}

/// Left-to-right tournament over `candidates` under `x`'s live list:
/// `|candidates| - 1` queries.
pub fn best_of_window(inst: &mut EvolvingInstance, x: AgentId, candidates: &[usize]) -> Result<usize> {
    let (&first, rest) = candidates.split_first().ok_or(Error::EmptyCandidates)?;
    let mut best = first;
    for &c in rest {
        if inst.query(QueryTriple::new(x, c, best))? {
            best = c;
        }
    }
    Ok(best)
}

/// How the next proposal target is chosen.
#[derive(Clone, Debug)]
enum Selection {
    /// True A-side lists are known: first unproposed entry, no queries.
    Known(Arc<Vec<Permutation>>),
    /// Window of top unproposed entries of the approximation, then a live
    /// tournament.
    Window(usize),
}

#[derive(Clone, Debug)]
enum Phase {
    /// Ready to start the next proposer from the outer loop.
    Idle,
    /// Tournament in progress for proposer `p`.
    Choose { p: usize, idx: usize, best: usize },
    /// `p` proposed to matched `y`; waiting for `y`'s verdict.
    Accept { p: usize, y: usize },
}

/// One run of (modified) deferred acceptance as a resumable process.
#[derive(Clone, Debug)]
struct DeferredAcceptance {
    n: usize,
    selection: Selection,
    next_x: usize,
    phase: Phase,
    window: Vec<usize>,
    started_at: u64,
    proposals: u64,
    queries: u64,
}

impl DeferredAcceptance {
    fn new(n: usize, selection: Selection, started_at: u64) -> Self {
        DeferredAcceptance {
            n,
            selection,
            next_x: 0,
            phase: Phase::Idle,
            window: Vec::new(),
            started_at,
            proposals: 0,
            queries: 0,
        }
    }

    /// Performs all free bookkeeping and returns the next live query, or
    /// `None` when the run is complete.
    fn pending(&mut self, st: &mut MatcherState) -> Option<QueryTriple> {
        loop {
            match self.phase {
                Phase::Choose { p, idx, best } => {
                    return Some(QueryTriple::new(AgentId::a(p), self.window[idx], best));
                }
                Phase::Accept { p, y } => {
                    let holder = st.working.partner_of_b(y).expect("accept phase has a holder");
                    return Some(QueryTriple::new(AgentId::b(y), p, holder));
                }
                Phase::Idle => {
                    if self.next_x == self.n {
                        return None;
                    }
                    let x = self.next_x;
                    self.next_x += 1;
                    self.begin_proposal(x, st);
                }
            }
        }
    }

    fn feed(&mut self, answer: bool, st: &mut MatcherState) {
        self.queries += 1;
        match self.phase {
            Phase::Choose { p, idx, best } => {
                let best = if answer { self.window[idx] } else { best };
                if idx + 1 == self.window.len() {
                    self.propose(p, best, st);
                } else {
                    self.phase = Phase::Choose { p, idx: idx + 1, best };
                }
            }
            Phase::Accept { p, y } => {
                if answer {
                    let displaced = st.working.partner_of_b(y).expect("accept phase has a holder");
                    st.working.pair(p, y);
                    self.begin_proposal(displaced, st);
                } else {
                    self.begin_proposal(p, st);
                }
            }
            Phase::Idle => panic!("feed without a pending query"),
        }
    }

    fn begin_proposal(&mut self, p: usize, st: &mut MatcherState) {
        match &self.selection {
            Selection::Known(lists) => {
                let list = &lists[p];
                let y = (0..self.n)
                    .map(|r| list.at(r))
                    .find(|&y| !st.proposed.contains(p, y))
                    .expect("a free proposer always has an unproposed candidate");
                self.propose(p, y, st);
            }
            &Selection::Window(w) => {
                let list = &st.approx_a_lists[p];
                self.window.clear();
                self.window.extend(
                    (0..self.n).map(|r| list.at(r)).filter(|&y| !st.proposed.contains(p, y)).take(w),
                );
                assert!(!self.window.is_empty(), "a free proposer always has an unproposed candidate");
                if self.window.len() == 1 {
                    let y = self.window[0];
                    self.propose(p, y, st);
                } else {
                    self.phase = Phase::Choose { p, idx: 1, best: self.window[0] };
                }
            }
        }
    }

    fn propose(&mut self, p: usize, y: usize, st: &mut MatcherState) {
        let fresh = st.proposed.insert(p, y);
        debug_assert!(fresh, "A{p} proposed to B{y} twice in one run");
        self.proposals += 1;
        st.proposals += 1;
        if st.working.partner_of_b(y).is_none() {
            st.working.pair(p, y);
            self.phase = Phase::Idle;
        } else {
            self.phase = Phase::Accept { p, y };
        }
    }

    /// Publishes the finished run and resets the state for the next one.
    fn complete(&self, st: &mut MatcherState, now: u64) -> RunInfo {
        st.published = Matching::try_from(&st.working).expect("deferred acceptance ends perfect");
        st.runs_completed += 1;
        st.working = PartialMatching::empty(self.n);
        st.proposed.clear();
        RunInfo {
            index: st.runs_completed,
            started_at: self.started_at,
            finished_at: now,
            proposals: self.proposals,
            queries: self.queries,
        }
    }
}

fn observe<'a>(
    st: &'a MatcherState,
    with_proposals: bool,
    critical: &'a mut u32,
) -> impl FnMut(&EvolutionEvent, &PreferenceProfile) -> CriticalFlags + 'a {
    move |e, profile| {
        let proposed = with_proposals.then_some(&st.proposed);
        let flags = event_flags(e, profile, &st.working, proposed);
        if flags.is_critical() {
            *critical += 1;
        }
        flags
    }
}

/// Sort everything, match on the sorted copies, publish, repeat.
#[derive(Clone, Debug)]
pub struct SimpleMatcher {
    st: MatcherState,
    rng: SimRng,
    sorter: SequentialSorter,
    cycle_started_at: u64,
    cycle_queries: u64,
    last_outcomes: Vec<SortOutcome>,
}

impl SimpleMatcher {
    pub fn new(inst: &EvolvingInstance, rng: SimRng) -> Result<Self> {
        let n = inst.n();
        let owners: Vec<AgentId> = (0..n).map(AgentId::a).chain((0..n).map(AgentId::b)).collect();
        let mut st = MatcherState::new(n, Arc::new(Vec::new()));
        st.working = PartialMatching::from(&st.published);
        Ok(SimpleMatcher {
            st,
            rng,
            sorter: SequentialSorter::new(n, owners)?,
            cycle_started_at: inst.t(),
            cycle_queries: 0,
            last_outcomes: Vec::new(),
        })
    }

    fn finish_cycle(&mut self, now: u64) -> RunInfo {
        let n = self.st.published.n();
        let owners = self.sorter_owners();
        let fresh = SequentialSorter::new(n, owners).expect("owners validated at construction");
        let outcomes = std::mem::replace(&mut self.sorter, fresh).into_outcomes();
        let (a, b): (Vec<_>, Vec<_>) = outcomes.iter().partition(|o| o.owner.side == crate::model::Side::A);
        let a_lists: Vec<Permutation> = a.iter().map(|o| o.approx.clone()).collect();
        let b_lists: Vec<Permutation> = b.iter().map(|o| o.approx.clone()).collect();
        let approx = PreferenceProfile::new(a_lists.clone(), b_lists).expect("2n sorted lists");
        let (m, proposals) = gale_shapley_static(&approx);
        self.st.published = m;
        self.st.working = PartialMatching::from(&self.st.published);
        self.st.approx_a_lists = Arc::new(a_lists);
        self.st.runs_completed += 1;
        self.st.proposals += proposals;
        self.last_outcomes = outcomes;
        let info = RunInfo {
            index: self.st.runs_completed,
            started_at: self.cycle_started_at,
            finished_at: now,
            proposals,
            queries: self.cycle_queries,
        };
        self.cycle_started_at = now;
        self.cycle_queries = 0;
        info
    }

    fn sorter_owners(&self) -> Vec<AgentId> {
        let n = self.st.published.n();
        (0..n).map(AgentId::a).chain((0..n).map(AgentId::b)).collect()
    }
}

impl DynamicMatcher for SimpleMatcher {
    fn step(&mut self, inst: &mut EvolvingInstance) -> Result<StepReport> {
        let mut report = StepReport::default();
        let mut q = self.sorter.next_query(&mut self.rng, inst.t());
        if q.is_none() {
            report.completed_run = Some(self.finish_cycle(inst.t()));
            q = self.sorter.next_query(&mut self.rng, inst.t());
        }
        let mut critical = 0;
        match q {
            Some(q) => {
                let answer = inst.query_observed(q, observe(&self.st, false, &mut critical))?;
                self.sorter.feed(answer);
                self.cycle_queries += 1;
                report.queried = true;
                if report.completed_run.is_none() && self.sorter.next_query(&mut self.rng, inst.t()).is_none() {
                    report.completed_run = Some(self.finish_cycle(inst.t()));
                }
            }
            None => inst.idle_step_observed(observe(&self.st, false, &mut critical)),
        }
        report.critical_events = critical;
        Ok(report)
    }

    fn state(&self) -> &MatcherState {
        &self.st
    }

    fn name(&self) -> &'static str {
        "simple"
    }

    fn last_sort_outcomes(&self) -> &[SortOutcome] {
        &self.last_outcomes
    }
}

/// Repeated Gale-Shapley under one-sided evolution.
#[derive(Clone, Debug)]
pub struct OneSidedMatcher {
    st: MatcherState,
    run: DeferredAcceptance,
    a_lists: Arc<Vec<Permutation>>,
}

impl OneSidedMatcher {
    pub fn new(inst: &EvolvingInstance) -> Result<Self> {
        let a_lists = Arc::new(inst.read_a_lists()?.to_vec());
        let st = MatcherState::new(inst.n(), a_lists.clone());
        let run = DeferredAcceptance::new(inst.n(), Selection::Known(a_lists.clone()), inst.t());
        Ok(OneSidedMatcher { st, run, a_lists })
    }

    fn restart(&mut self, now: u64) -> RunInfo {
        let info = self.run.complete(&mut self.st, now);
        self.run = DeferredAcceptance::new(self.st.published.n(), Selection::Known(self.a_lists.clone()), now);
        info
    }
}

impl DynamicMatcher for OneSidedMatcher {
    fn step(&mut self, inst: &mut EvolvingInstance) -> Result<StepReport> {
        let mut report = StepReport::default();
        let mut q = self.run.pending(&mut self.st);
        if q.is_none() {
            report.completed_run = Some(self.restart(inst.t()));
            q = self.run.pending(&mut self.st);
        }
        let mut critical = 0;
        match q {
            Some(q) => {
                let answer = inst.query_observed(q, observe(&self.st, false, &mut critical))?;
                self.run.feed(answer, &mut self.st);
                report.queried = true;
                if report.completed_run.is_none() && self.run.pending(&mut self.st).is_none() {
                    report.completed_run = Some(self.restart(inst.t()));
                }
            }
            None => inst.idle_step_observed(observe(&self.st, false, &mut critical)),
        }
        report.critical_events = critical;
        Ok(report)
    }

    fn state(&self) -> &MatcherState {
        &self.st
    }

    fn name(&self) -> &'static str {
        "one-sided"
    }
}

/// Sorting process on even steps, windowed Gale-Shapley on odd steps.
#[derive(Clone, Debug)]
pub struct InterleavedMatcher {
    st: MatcherState,
    rng: SimRng,
    window: usize,
    sorter: SequentialSorter,
    latest_sorted: Arc<Vec<Permutation>>,
    sorts_completed: u64,
    last_outcomes: Vec<SortOutcome>,
    run: DeferredAcceptance,
}

impl InterleavedMatcher {
    /// The approximations start as random permutations drawn from `rng`.
    pub fn new(inst: &EvolvingInstance, mut rng: SimRng, cfg: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        let n = inst.n();
        let initial: Arc<Vec<Permutation>> = Arc::new((0..n).map(|_| Permutation::random(n, &mut rng)).collect());
        let window = cfg.size(n);
        Ok(InterleavedMatcher {
            st: MatcherState::new(n, initial.clone()),
            rng,
            window,
            sorter: SequentialSorter::new(n, (0..n).map(AgentId::a).collect())?,
            latest_sorted: initial,
            sorts_completed: 0,
            last_outcomes: Vec::new(),
            run: DeferredAcceptance::new(n, Selection::Window(window), inst.t()),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of completed passes of the sorting process.
    pub fn sorts_completed(&self) -> u64 {
        self.sorts_completed
    }

    fn restart_run(&mut self, now: u64) -> RunInfo {
        let info = self.run.complete(&mut self.st, now);
        self.st.approx_a_lists = self.latest_sorted.clone();
        self.run = DeferredAcceptance::new(self.st.published.n(), Selection::Window(self.window), now);
        info
    }

    fn restart_sort(&mut self) {
        let n = self.st.published.n();
        let fresh = SequentialSorter::new(n, (0..n).map(AgentId::a).collect()).expect("valid owners");
        let outcomes = std::mem::replace(&mut self.sorter, fresh).into_outcomes();
        self.latest_sorted = Arc::new(outcomes.iter().map(|o| o.approx.clone()).collect());
        self.last_outcomes = outcomes;
        self.sorts_completed += 1;
    }

    fn sort_step(&mut self, inst: &mut EvolvingInstance, critical: &mut u32) -> Result<bool> {
        let mut q = self.sorter.next_query(&mut self.rng, inst.t());
        if q.is_none() {
            self.restart_sort();
            q = self.sorter.next_query(&mut self.rng, inst.t());
        }
        match q {
            Some(q) => {
                let answer = inst.query_observed(q, observe(&self.st, true, critical))?;
                self.sorter.feed(answer);
                if self.sorter.next_query(&mut self.rng, inst.t()).is_none() {
                    self.restart_sort();
                }
                Ok(true)
            }
            None => {
                inst.idle_step_observed(observe(&self.st, true, critical));
                Ok(false)
            }
        }
    }

    fn match_step(
        &mut self,
        inst: &mut EvolvingInstance,
        critical: &mut u32,
        report: &mut StepReport,
    ) -> Result<bool> {
        let mut q = self.run.pending(&mut self.st);
        if q.is_none() {
            report.completed_run = Some(self.restart_run(inst.t()));
            q = self.run.pending(&mut self.st);
        }
        match q {
            Some(q) => {
                let answer = inst.query_observed(q, observe(&self.st, true, critical))?;
                self.run.feed(answer, &mut self.st);
                if report.completed_run.is_none() && self.run.pending(&mut self.st).is_none() {
                    report.completed_run = Some(self.restart_run(inst.t()));
                }
                Ok(true)
            }
            None => {
                inst.idle_step_observed(observe(&self.st, true, critical));
                Ok(false)
            }
        }
    }
}

impl DynamicMatcher for InterleavedMatcher {
    fn step(&mut self, inst: &mut EvolvingInstance) -> Result<StepReport> {
        let mut report = StepReport::default();
        let mut critical = 0;
        // steps are numbered from 1; odd ones belong to the matching process
        let step_number = inst.t() + 1;
        report.queried = if step_number.is_multiple_of(2) {
            self.sort_step(inst, &mut critical)?
        } else {
            self.match_step(inst, &mut critical, &mut report)?
        };
        report.critical_events = critical;
        Ok(report)
    }

    fn state(&self) -> &MatcherState {
        &self.st
    }

    fn name(&self) -> &'static str {
        "interleaved"
    }

    fn last_sort_outcomes(&self) -> &[SortOutcome] {
        &self.last_outcomes
    }
}

/// The simple sort-then-match loop.
pub fn simple_dynamic_matcher(inst: &EvolvingInstance, rng: SimRng) -> Result<SimpleMatcher> {
    SimpleMatcher::new(inst, rng)
}

/// Repeated Gale-Shapley; requires one-sided evolution.
pub fn one_sided_matcher(inst: &EvolvingInstance) -> Result<OneSidedMatcher> {
    if inst.mode() != EvolutionMode::OneSidedB {
        return Err(Error::ModeViolation);
    }
    OneSidedMatcher::new(inst)
}

/// Interleaved sorting and windowed matching.
pub fn interleaved_matcher(inst: &EvolvingInstance, rng: SimRng, cfg: WindowConfig) -> Result<InterleavedMatcher> {
    InterleavedMatcher::new(inst, rng, cfg)
}
