//! The evolving world: answers comparison queries against the live profile,
//! advances the clock and lets nature apply random adjacent swaps.
//!
//! Each time-step answers one query against the current lists and then
//! applies exactly `alpha` evolution events.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, Permutation, PreferenceProfile, Side};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMode {
    /// Every list may evolve.
    TwoSided,
    /// Only B-side lists evolve; A-side lists are fixed and free to read.
    OneSidedB,
}

impl std::str::FromStr for EvolutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(EvolutionMode::TwoSided),
            "one-sided-b" => Ok(EvolutionMode::OneSidedB),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// Why an evolution event counts as critical.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CriticalFlags {
    /// The swap moved the owner's current partner.
    pub match_swap: bool,
    /// The swap moved the owner's best not-yet-proposed candidate.
    pub best_unproposed_swap: bool,
}

impl CriticalFlags {
    pub const NONE: CriticalFlags = CriticalFlags { match_swap: false, best_unproposed_swap: false };

    pub fn is_critical(self) -> bool {
        self.match_swap || self.best_unproposed_swap
    }

    fn names(self) -> Vec<String> {
        let mut out = Vec::new();
        if self.match_swap {
            out.push("match-swap".to_string());
        }
        if self.best_unproposed_swap {
            out.push("best-unproposed-swap".to_string());
        }
        out
    }

    fn from_names(names: &[String]) -> Result<Self> {
        let mut flags = CriticalFlags::NONE;
        for name in names {
            match name.as_str() {
                "match-swap" => flags.match_swap = true,
                "best-unproposed-swap" => flags.best_unproposed_swap = true,
                other => return Err(Error::InvalidConfig(format!("unknown critical flag `{other}`"))),
            }
        }
        Ok(flags)
    }
}

/// One adjacent swap applied by nature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EvolutionEvent {
    /// Time-step during which the event happened (1 for the first step).
    pub t: u64,
    pub owner: AgentId,
    /// 0-based rank; the event swaps ranks `rank` and `rank + 1`.
    pub rank: usize,
    /// Pre-swap occupant of `rank`.
    pub u: usize,
    /// Pre-swap occupant of `rank + 1`.
    pub v: usize,
    pub critical: CriticalFlags,
}

#[derive(Serialize, Deserialize)]
struct EventRecord {
    t: u64,
    side: Side,
    list: usize,
    pos: usize,
    u: usize,
    v: usize,
    critical: Vec<String>,
}

impl EvolutionEvent {
    /// One JSON object, positions 1-based.
    pub fn to_json_line(&self) -> String {
        let rec = EventRecord {
            t: self.t,
            side: self.owner.side,
            list: self.owner.index,
            pos: self.rank + 1,
            u: self.u,
            v: self.v,
            critical: self.critical.names(),
        };
        serde_json::to_string(&rec).expect("event record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let rec: EventRecord = serde_json::from_str(line)?;
        if rec.pos == 0 {
            return Err(Error::InvalidConfig("event position is 1-based".into()));
        }
        Ok(EvolutionEvent {
            t: rec.t,
            owner: AgentId { side: rec.side, index: rec.list },
            rank: rec.pos - 1,
            u: rec.u,
            v: rec.v,
            critical: CriticalFlags::from_names(&rec.critical)?,
        })
    }
}

pub fn write_event_log<W: Write>(events: &[EvolutionEvent], mut w: W) -> Result<()> {
    for e in events {
        writeln!(w, "{}", e.to_json_line())?;
    }
    Ok(())
}

pub fn read_event_log<R: BufRead>(r: R) -> Result<Vec<EvolutionEvent>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(EvolutionEvent::from_json_line(&line)?);
        }
    }
    Ok(out)
}

/// Whether list owner `z` ranks `u` above `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryTriple {
    pub z: AgentId,
    pub u: AgentId,
    pub v: AgentId,
}

impl QueryTriple {
    pub fn new(z: AgentId, u: usize, v: usize) -> Self {
        let other = z.side.opposite();
        QueryTriple { z, u: AgentId { side: other, index: u }, v: AgentId { side: other, index: v } }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let malformed = |msg: String| Err(Error::MalformedQuery(msg));
        if self.z.index >= n || self.u.index >= n || self.v.index >= n {
            return malformed(format!("index out of range in {self:?} for n={n}"));
        }
        if self.u.side == self.z.side || self.v.side == self.z.side {
            return malformed(format!("{} can only be asked about the other side", self.z));
        }
        if self.u == self.v {
            return malformed(format!("{} compared with itself", self.u));
        }
        Ok(())
    }
}

/// The single mutable world state of one simulation run.
#[derive(Clone, Debug)]
pub struct EvolvingInstance {
    profile: PreferenceProfile,
    t: u64,
    alpha: u32,
    mode: EvolutionMode,
    nature: SimRng,
    log: Option<Vec<EvolutionEvent>>,
    critical_log: Vec<EvolutionEvent>,
    recent: Vec<EvolutionEvent>,
    events_applied: u64,
    query_count: u64,
}

impl EvolvingInstance {
    /// A fresh instance at `t = 0` that records every event.
    pub fn new(profile: PreferenceProfile, alpha: u32, mode: EvolutionMode, nature: SimRng) -> Self {
        EvolvingInstance {
            profile,
            t: 0,
            alpha,
            mode,
            nature,
            log: Some(Vec::new()),
            critical_log: Vec::new(),
            recent: Vec::new(),
            events_applied: 0,
            query_count: 0,
        }
    }

    /// Stops keeping the event log in memory; counters are still maintained.
    pub fn without_event_log(mut self) -> Self {
        self.log = None;
        self
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn mode(&self) -> EvolutionMode {
        self.mode
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn events_applied(&self) -> u64 {
        self.events_applied
    }

    /// `None` when the log was switched off.
    pub fn event_log(&self) -> Option<&[EvolutionEvent]> {
        self.log.as_deref()
    }

    /// Events flagged critical by an observer, kept even without the full log.
    pub fn critical_log(&self) -> &[EvolutionEvent] {
        &self.critical_log
    }

    /// Events applied since the current time-step began, in order.
    pub fn recent_events(&self) -> &[EvolutionEvent] {
        &self.recent
    }

    /// Deep copy of the live lists. Costs no time-step.
    pub fn snapshot(&self) -> PreferenceProfile {
        self.profile.clone()
    }

    /// Borrowed view of the live lists for measurement code in this crate.
    pub(crate) fn truth(&self) -> &PreferenceProfile {
        &self.profile
    }

    /// Free read access to the static A-side lists under one-sided evolution.
    pub fn read_a_lists(&self) -> Result<&[Permutation]> {
        match self.mode {
            EvolutionMode::OneSidedB => Ok(self.profile.a_lists()),
            EvolutionMode::TwoSided => Err(Error::ModeViolation),
        }
    }

    pub fn query(&mut self, q: QueryTriple) -> Result<bool> {
        self.query_observed(q, |_, _| CriticalFlags::NONE)
    }

    /// Answers `q`, then advances one time-step.
    ///
    /// `observe` sees each event together with the pre-swap profile and
    /// returns the critical flags to record on it.
    pub fn query_observed<F>(&mut self, q: QueryTriple, observe: F) -> Result<bool>
    where
        F: FnMut(&EvolutionEvent, &PreferenceProfile) -> CriticalFlags,
    {
        q.validate(self.n())?;
        let answer = self.profile.list(q.z).prefers(q.u.index, q.v.index);
        self.query_count += 1;
        self.advance(observe);
        Ok(answer)
    }

    /// A time-step in which the algorithm asks nothing; nature still moves.
    pub fn idle_step_observed<F>(&mut self, observe: F)
    where
        F: FnMut(&EvolutionEvent, &PreferenceProfile) -> CriticalFlags,
    {
        self.advance(observe);
    }

    fn advance<F>(&mut self, mut observe: F)
    where
        F: FnMut(&EvolutionEvent, &PreferenceProfile) -> CriticalFlags,
    {
        self.t += 1;
        self.recent.clear();
        if self.n() < 2 {
            return;
        }
        for _ in 0..self.alpha {
            let mut event = self.draw_event();
            event.critical = observe(&event, &self.profile);
            self.commit(event);
        }
    }

    /// Draws and applies one event outside the clocked step.
    pub fn apply_evolution_event(&mut self) -> Result<EvolutionEvent> {
        if self.n() < 2 {
            return Err(Error::NoEvolutionDomain);
        }
        let event = self.draw_event();
        self.commit(event);
        Ok(event)
    }

    fn draw_event(&mut self) -> EvolutionEvent {
        let n = self.n();
        let owner = match self.mode {
            EvolutionMode::TwoSided => {
                let k = self.nature.gen_range(0..2 * n);
                if k < n {
                    AgentId::a(k)
                } else {
                    AgentId::b(k - n)
                }
            }
            EvolutionMode::OneSidedB => AgentId::b(self.nature.gen_range(0..n)),
        };
        let rank = self.nature.gen_range(0..n - 1);
        let list = self.profile.list(owner);
        EvolutionEvent {
            t: self.t,
            owner,
            rank,
            u: list.at(rank),
            v: list.at(rank + 1),
            critical: CriticalFlags::NONE,
        }
    }

    fn commit(&mut self, event: EvolutionEvent) {
        self.profile.list_mut(event.owner).swap_adjacent(event.rank);
        self.events_applied += 1;
        self.recent.push(event);
        if event.critical.is_critical() {
            self.critical_log.push(event);
        }
        if let Some(log) = self.log.as_mut() {
            log.push(event);
        }
    }
}

/// Re-applies `events` to `initial`, checking each recorded occupant.
pub fn replay_events(initial: &PreferenceProfile, events: &[EvolutionEvent]) -> Result<PreferenceProfile> {
    let mut profile = initial.clone();
    let n = profile.n();
    for (k, e) in events.iter().enumerate() {
        if e.owner.index >= n || e.rank + 1 >= n {
            return Err(Error::ReplayMismatch(format!("event {k} out of range for n={n}")));
        }
        let list = profile.list_mut(e.owner);
        let (u, v) = list.swap_adjacent(e.rank);
        if (u, v) != (e.u, e.v) {
            return Err(Error::ReplayMismatch(format!(
                "event {k} expected ({}, {}) at rank {} of {}, found ({u}, {v})",
                e.u,
                e.v,
                e.rank + 1,
                e.owner
            )));
        }
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_profile;
    use crate::rng::{stream, Stream};

    fn instance(n: usize, alpha: u32, mode: EvolutionMode, seed: u64) -> EvolvingInstance {
        let profile = random_profile(n, &mut stream(seed, Stream::Profile)).unwrap();
        EvolvingInstance::new(profile, alpha, mode, stream(seed, Stream::Nature))
    }

    #[test]
    fn static_instance_never_changes() {
        let id = Permutation::identity(4);
        let profile = PreferenceProfile::new(vec![id.clone(); 4], vec![id; 4]).unwrap();
        let mut inst = EvolvingInstance::new(profile.clone(), 0, EvolutionMode::TwoSided, stream(1, Stream::Nature));
        for _ in 0..50 {
            assert!(inst.query(QueryTriple::new(AgentId::a(2), 0, 1)).unwrap());
        }
        assert_eq!(inst.snapshot(), profile);
        assert_eq!(inst.t(), 50);
        assert_eq!(inst.event_log().unwrap().len(), 0);
    }

    #[test]
    fn one_sided_n2_swaps_a_b_list_each_step() {
        let mut inst = instance(2, 1, EvolutionMode::OneSidedB, 3);
        for step in 1..=20u64 {
            let before = inst.snapshot();
            inst.query(QueryTriple::new(AgentId::a(0), 0, 1)).unwrap();
            let log = inst.event_log().unwrap();
            assert_eq!(log.len() as u64, step);
            let e = log.last().unwrap();
            assert_eq!(e.owner.side, Side::B);
            assert_eq!(e.rank, 0);
            assert_eq!(e.t, step);
            let after = inst.snapshot();
            assert_eq!(before.a_lists(), after.a_lists());
            assert_eq!(before.list(e.owner).kendall_tau(after.list(e.owner)).unwrap(), 1);
        }
    }

    #[test]
    fn malformed_queries_do_not_advance_the_clock() {
        let mut inst = instance(3, 1, EvolutionMode::TwoSided, 5);
        let bad = [
            QueryTriple::new(AgentId::a(0), 1, 1),
            QueryTriple::new(AgentId::a(3), 0, 1),
            QueryTriple { z: AgentId::a(0), u: AgentId::a(1), v: AgentId::b(0) },
        ];
        for q in bad {
            assert!(matches!(inst.query(q), Err(Error::MalformedQuery(_))));
        }
        assert_eq!(inst.t(), 0);
        assert_eq!(inst.query_count(), 0);
    }

    #[test]
    fn n1_has_no_evolution_domain() {
        let mut inst = instance(1, 2, EvolutionMode::TwoSided, 1);
        assert!(matches!(inst.apply_evolution_event(), Err(Error::NoEvolutionDomain)));
        inst.idle_step_observed(|_, _| CriticalFlags::NONE);
        assert_eq!(inst.t(), 1);
    }

    #[test]
    fn n2_two_sided_events_hit_position_one() {
        let mut inst = instance(2, 1, EvolutionMode::TwoSided, 9);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let e = inst.apply_evolution_event().unwrap();
            assert_eq!(e.rank, 0);
            seen.insert(e.owner);
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn repeated_event_restores_list() {
        let mut p = Permutation::from_order([4, 2, 0, 1, 3]).unwrap();
        let orig = p.clone();
        p.swap_adjacent(2);
        p.swap_adjacent(2);
        assert_eq!(p, orig);
    }

    #[test]
    fn read_a_lists_is_mode_gated() {
        let inst = instance(4, 1, EvolutionMode::TwoSided, 2);
        assert!(matches!(inst.read_a_lists(), Err(Error::ModeViolation)));
        let mut inst = instance(4, 1, EvolutionMode::OneSidedB, 2);
        let a0 = inst.read_a_lists().unwrap().to_vec();
        for _ in 0..10_000 {
            inst.query(QueryTriple::new(AgentId::b(1), 0, 3)).unwrap();
        }
        assert_eq!(inst.read_a_lists().unwrap(), &a0[..]);
    }

    #[test]
    fn log_replay_reproduces_profile() {
        let mut inst = instance(6, 3, EvolutionMode::TwoSided, 11);
        let initial = inst.snapshot();
        for k in 0..500 {
            inst.query(QueryTriple::new(AgentId::b(k % 6), 1, 2)).unwrap();
        }
        let log = inst.event_log().unwrap();
        assert_eq!(log.len() as u64, 3 * inst.t());
        assert_eq!(replay_events(&initial, log).unwrap(), inst.snapshot());

        let mut tampered = log.to_vec();
        tampered[10].u = tampered[10].v;
        assert!(replay_events(&initial, &tampered).is_err());
    }

    #[test]
    fn event_json_roundtrip() {
        let e = EvolutionEvent {
            t: 7,
            owner: AgentId::b(3),
            rank: 0,
            u: 5,
            v: 2,
            critical: CriticalFlags { match_swap: true, best_unproposed_swap: false },
        };
        let line = e.to_json_line();
        assert_eq!(line, r#"{"t":7,"side":"B","list":3,"pos":1,"u":5,"v":2,"critical":["match-swap"]}"#);
        assert_eq!(EvolutionEvent::from_json_line(&line).unwrap(), e);
        let mut buf = Vec::new();
        write_event_log(&[e, e], &mut buf).unwrap();
        assert_eq!(read_event_log(&buf[..]).unwrap(), vec![e, e]);
    }
}
