use std::fs;
use std::time::Instant;

use evomatch::evolution::{read_event_log, replay_events};
use evomatch::format::parse_profile;
use evomatch::harness::{
    read_manifest, replay_dir, run, sweep, write_run, MatcherKind, RunConfig, EVENTS_FILE, INITIAL_PROFILE_FILE,
    MANIFEST_FILE, TIMESERIES_FILE,
};
use evomatch::metrics::CSV_HEADER;
use evomatch::model::{blocking_pairs, Matching};

#[test]
fn same_config_gives_identical_csv() {
    let c = RunConfig::new(32, MatcherKind::Interleaved, 11);
    assert_eq!(run(&c).unwrap().record.to_csv(), run(&c).unwrap().record.to_csv());
}

#[test]
fn static_gale_shapley_run() {
    let c = RunConfig::new(50, MatcherKind::StaticGs, 4).with_alpha(0);
    let out = run(&c).unwrap();
    assert_eq!(out.runs.len(), 1);
    let s = out.record.samples();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].blocking_pairs, 0);
    assert!(s[0].proposals >= 50);
    assert_eq!(s[0].runs_completed, 1);
}

#[test]
fn static_dynamic_runs_reach_zero_and_stay() {
    for matcher in [MatcherKind::Simple, MatcherKind::OneSided, MatcherKind::Interleaved] {
        let out = run(&RunConfig::new(24, matcher, 2).with_alpha(0)).unwrap();
        let settled = out.runs.iter().find(|r| r.index >= 2).unwrap().finished_at;
        assert!(out.record.samples().iter().filter(|s| s.t >= settled).all(|s| s.blocking_pairs == 0), "{matcher}");
        assert_eq!(out.audit.violations.len(), 0);
        assert_eq!(out.audit.blocking_pairs, 0);
    }
}

#[test]
fn garbage_start_and_monotone_bookkeeping() {
    let out = run(&RunConfig::new(64, MatcherKind::Simple, 1)).unwrap();
    let s = out.record.samples();
    // identity matching against a random profile at t = 0
    assert!(s[0].t == 0 && s[0].blocking_pairs > 64 * 4, "{}", s[0].blocking_pairs);
    for w in s.windows(2) {
        assert!(w[0].t < w[1].t);
        assert!(w[0].queries <= w[1].queries);
        assert!(w[0].proposals <= w[1].proposals);
        assert!(w[0].runs_completed <= w[1].runs_completed);
        assert!(w[0].critical_events <= w[1].critical_events);
    }
    assert!(s.last().unwrap().critical_events <= out.config.alpha as u64 * out.final_t);
}

#[test]
fn samples_match_recomputation_from_the_event_log() {
    for matcher in [MatcherKind::Simple, MatcherKind::Interleaved, MatcherKind::OneSided] {
        let mut c = RunConfig::new(12, matcher, 8).with_alpha(2);
        c.record_events = true;
        c.warmup_t = 0;
        c.max_t = 6_000;
        let out = run(&c).unwrap();
        let events = out.events.as_deref().unwrap();
        let identity = Matching::identity(12);
        for s in out.record.samples() {
            let published = out.publications.iter().rev().find(|(t, _)| *t <= s.t).map_or(&identity, |(_, m)| m);
            let upto = events.partition_point(|e| e.t <= s.t);
            let live = replay_events(&out.initial, &events[..upto]).unwrap();
            assert_eq!(blocking_pairs(&live, published).unwrap().len() as u64, s.blocking_pairs, "{matcher} t={}", s.t);
        }
        assert_eq!(out.record.samples().last().unwrap().t, out.final_t);
        assert_eq!(replay_events(&out.initial, events).unwrap(), out.final_profile);
    }
}

#[test]
fn warmup_filtering() {
    let mut c = RunConfig::new(32, MatcherKind::OneSided, 3);
    c.warmup_t = 300;
    c.max_t = 600;
    let out = run(&c).unwrap();
    let expected: Vec<u64> = out.record.samples().iter().filter(|s| s.t >= 300).map(|s| s.blocking_pairs).collect();
    assert_eq!(out.steady_state(), expected);
    assert!(out.traces.iter().all(|t| t.run.started_at >= 300));
}

#[test]
fn written_run_replays() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(20, MatcherKind::Simple, 5).with_alpha(1);
    c.record_events = true;
    let out = run(&c).unwrap();
    let manifest = write_run(&out, dir.path()).unwrap();
    assert_eq!(read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap(), manifest);
    let csv = fs::read_to_string(dir.path().join(TIMESERIES_FILE)).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    let initial = parse_profile(&fs::read_to_string(dir.path().join(INITIAL_PROFILE_FILE)).unwrap()).unwrap();
    assert_eq!(initial, out.initial);
    let report = replay_dir(dir.path()).unwrap();
    assert!(report.ok(), "{report:?}");
    assert_eq!(report.events_checked as u64, out.final_t);

    // a tampered log no longer reproduces
    let path = dir.path().join(EVENTS_FILE);
    let mut events = read_event_log(fs::read_to_string(&path).unwrap().as_bytes()).unwrap();
    events.swap(3, 4);
    let text: String = events.iter().map(|e| e.to_json_line() + "\n").collect();
    fs::write(&path, text).unwrap();
    assert!(!replay_dir(dir.path()).map(|r| r.ok()).unwrap_or(false));
}

#[test]
fn replay_without_event_log_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig::new(8, MatcherKind::OneSided, 1)).unwrap();
    write_run(&out, dir.path()).unwrap();
    assert!(replay_dir(dir.path()).is_err());
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let configs: Vec<RunConfig> = [8, 12, 16]
        .iter()
        .flat_map(|&n| (0..3).map(move |s| RunConfig::new(n, MatcherKind::Interleaved, s)))
        .collect();
    let a = sweep(&configs, 1).unwrap();
    let b = sweep(&configs, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.groups.len(), 3);
    assert!(a.fit(MatcherKind::Interleaved).is_some());
}

#[test]
fn interleaved_n256_fits_a_desk_budget() {
    let c = RunConfig::new(256, MatcherKind::Interleaved, 0);
    let lg = 8;
    assert_eq!(c.max_t, 8 * 256 * 256 * lg);
    let start = Instant::now();
    let out = run(&c).unwrap();
    assert_eq!(out.final_t, c.max_t);
    assert!(start.elapsed().as_secs() < 60);
}
