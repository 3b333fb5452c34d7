//! Experiment driver: configured runs, seed sweeps, log-log growth fits and
//! replay from a manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::evolution::{read_event_log, replay_events, write_event_log, EvolutionEvent, EvolutionMode, EvolvingInstance};
use crate::format::write_profile;
use crate::matchers::{
    gale_shapley_static, interleaved_matcher, one_sided_matcher, simple_dynamic_matcher, DynamicMatcher,
    MatcherState, RunInfo, WindowConfig,
};
use crate::metrics::{critical_event_audit, record_sample, AuditReport, BlockingTracker, RunTrace, TimeSeriesRecord};
use crate::model::{blocking_pairs_scan, random_profile, Matching, PreferenceProfile};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatcherKind {
    Simple,
    OneSided,
    Interleaved,
    StaticGs,
}

impl MatcherKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatcherKind::Simple => "simple",
            MatcherKind::OneSided => "one-sided",
            MatcherKind::Interleaved => "interleaved",
            MatcherKind::StaticGs => "static-gs",
        }
    }
}

impl FromStr for MatcherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(MatcherKind::Simple),
            "one-sided" => Ok(MatcherKind::OneSided),
            "interleaved" => Ok(MatcherKind::Interleaved),
            "static-gs" => Ok(MatcherKind::StaticGs),
            other => Err(Error::InvalidConfig(format!("unknown matcher `{other}`"))),
        }
    }
}

impl std::fmt::Display for MatcherKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn ceil_log2(n: usize) -> u64 {
    (n.max(2) as f64).log2().ceil() as u64
}

/// Fully resolved configuration of one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub alpha: u32,
    pub mode: EvolutionMode,
    pub matcher: MatcherKind,
    pub seed: u64,
    pub max_t: u64,
    pub sample_every: u64,
    pub c_window: f64,
    pub warmup_t: u64,
    /// Keep and export the full event log.
    #[serde(default)]
    pub record_events: bool,
}

impl RunConfig {
    /// Defaults for everything but size, matcher and seed.
    pub fn new(n: usize, matcher: MatcherKind, seed: u64) -> Self {
        RunParams { n, matcher, seed, ..RunParams::default() }.resolve()
    }

    pub fn with_alpha(mut self, alpha: u32) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn default_warmup(n: usize, matcher: MatcherKind) -> u64 {
        let (n64, lg) = (n as u64, ceil_log2(n));
        match matcher {
            MatcherKind::Simple | MatcherKind::Interleaved => 4 * n64 * n64 * lg,
            MatcherKind::OneSided => 4 * n64 * lg,
            MatcherKind::StaticGs => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return Err(Error::EmptyInstance);
        }
        if self.max_t < self.warmup_t {
            return bad(format!("max_t {} is below warmup_t {}", self.max_t, self.warmup_t));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if self.matcher == MatcherKind::OneSided && self.mode != EvolutionMode::OneSidedB {
            return bad("the one-sided matcher needs mode one-sided-b".into());
        }
        WindowConfig { c_window: self.c_window }.validate()
    }
}

/// A run configuration with optional fields, as read from flags or a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub n: usize,
    pub alpha: u32,
    pub mode: Option<EvolutionMode>,
    pub matcher: MatcherKind,
    pub seed: u64,
    pub max_t: Option<u64>,
    pub sample_every: Option<u64>,
    pub c_window: f64,
    pub warmup_t: Option<u64>,
    pub record_events: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            n: 64,
            alpha: 1,
            mode: None,
            matcher: MatcherKind::Interleaved,
            seed: 0,
            max_t: None,
            sample_every: None,
            c_window: WindowConfig::default().c_window,
            warmup_t: None,
            record_events: false,
        }
    }
}

impl RunParams {
    pub fn resolve(&self) -> RunConfig {
        let mode = self.mode.unwrap_or(match self.matcher {
            MatcherKind::OneSided => EvolutionMode::OneSidedB,
            _ => EvolutionMode::TwoSided,
        });
        let warmup_t = self.warmup_t.unwrap_or_else(|| RunConfig::default_warmup(self.n, self.matcher));
        let max_t = self.max_t.unwrap_or(2 * warmup_t);
        RunConfig {
            n: self.n,
            alpha: self.alpha,
            mode,
            matcher: self.matcher,
            seed: self.seed,
            max_t,
            sample_every: self.sample_every.unwrap_or((self.n as u64).div_ceil(4).max(1)),
            c_window: self.c_window,
            warmup_t,
            record_events: self.record_events,
        }
    }
}

/// Everything one simulation produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub record: TimeSeriesRecord,
    /// Every completed run, warm-up included.
    pub runs: Vec<RunInfo>,
    /// Completed runs that started after warm-up, with their blocking pairs.
    pub traces: Vec<RunTrace>,
    /// Each published matching with the clock value from which it was measured.
    pub publications: Vec<(u64, Matching)>,
    pub audit: AuditReport,
    pub initial: PreferenceProfile,
    pub final_profile: PreferenceProfile,
    pub events: Option<Vec<EvolutionEvent>>,
    pub sort_outcomes: Vec<crate::sorting::SortOutcome>,
    pub final_t: u64,
    pub queries: u64,
    pub critical_events: u64,
}

impl RunOutput {
    pub fn steady_state(&self) -> Vec<u64> {
        self.record.steady_state(self.config.warmup_t)
    }

    /// Critical events per time-step over the whole run.
    pub fn critical_rate(&self) -> f64 {
        if self.final_t == 0 {
            0.0
        } else {
            self.critical_events as f64 / self.final_t as f64
        }
    }
}

fn build_matcher(config: &RunConfig, inst: &EvolvingInstance) -> Result<Box<dyn DynamicMatcher>> {
    let alg = stream(config.seed, Stream::Algorithm);
    Ok(match config.matcher {
        MatcherKind::Simple => Box::new(simple_dynamic_matcher(inst, alg)?),
        MatcherKind::OneSided => Box::new(one_sided_matcher(inst)?),
        MatcherKind::Interleaved => {
            Box::new(interleaved_matcher(inst, alg, WindowConfig { c_window: config.c_window })?)
        }
        MatcherKind::StaticGs => unreachable!("static matcher has no dynamic process"),
    })
}

/// Executes one simulation. Deterministic in `config`.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let initial = random_profile(config.n, &mut stream(config.seed, Stream::Profile))?;
    let mut inst = EvolvingInstance::new(initial.clone(), config.alpha, config.mode, stream(config.seed, Stream::Nature));
    if !config.record_events {
        inst = inst.without_event_log();
    }
    let mut record = TimeSeriesRecord::new();

    if config.matcher == MatcherKind::StaticGs {
        let (m, proposals) = gale_shapley_static(inst.truth());
        let pairs = blocking_pairs_scan(inst.truth(), &m)?;
        let mut state_view = MatcherState::new(config.n, std::sync::Arc::new(Vec::new()));
        state_view.published = m;
        state_view.proposals = proposals;
        state_view.runs_completed = 1;
        record_sample(&inst, &state_view, pairs.len(), &mut record);
        let info = RunInfo { index: 1, started_at: 0, finished_at: 0, proposals, queries: 0 };
        let trace = RunTrace { run: info, blocking_pairs: pairs };
        return Ok(RunOutput {
            config: config.clone(),
            record,
            runs: vec![info],
            publications: vec![(0, state_view.published.clone())],
            audit: critical_event_audit(std::slice::from_ref(&trace), &[]),
            traces: vec![trace],
            final_profile: inst.snapshot(),
            initial,
            events: inst.event_log().map(|e| e.to_vec()),
            sort_outcomes: Vec::new(),
            final_t: 0,
            queries: 0,
            critical_events: 0,
        });
    }

    let mut matcher = build_matcher(config, &inst)?;
    let mut runs = Vec::new();
    let mut traces = Vec::new();
    let mut publications = Vec::new();
    let mut tracker = BlockingTracker::new(inst.truth(), &matcher.state().published)?;
    record_sample(&inst, matcher.state(), tracker.count(), &mut record);
    while inst.t() < config.max_t {
        let report = matcher.step(&mut inst)?;
        if let Some(info) = report.completed_run {
            tracker.reset(inst.truth(), &matcher.state().published)?;
            runs.push(info);
            publications.push((inst.t(), matcher.state().published.clone()));
            record_sample(&inst, matcher.state(), tracker.count(), &mut record);
            if info.started_at >= config.warmup_t {
                traces.push(RunTrace { run: info, blocking_pairs: tracker.pairs() });
            }
        } else {
            tracker.update(inst.truth(), inst.recent_events());
            if inst.t().is_multiple_of(config.sample_every) {
                record_sample(&inst, matcher.state(), tracker.count(), &mut record);
            }
        }
    }
    let audit = critical_event_audit(&traces, inst.critical_log());
    Ok(RunOutput {
        config: config.clone(),
        record,
        runs,
        traces,
        publications,
        audit,
        initial,
        final_profile: inst.snapshot(),
        events: inst.event_log().map(|e| e.to_vec()),
        sort_outcomes: matcher_sort_outcomes(matcher.as_ref()),
        final_t: inst.t(),
        queries: inst.query_count(),
        critical_events: inst.critical_log().len() as u64,
    })
}

fn matcher_sort_outcomes(m: &dyn DynamicMatcher) -> Vec<crate::sorting::SortOutcome> {
    m.last_sort_outcomes().to_vec()
}

/// Reproducibility record written next to every run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub final_t: u64,
    pub queries: u64,
    pub runs_completed: usize,
    pub timeseries: String,
    pub events: Option<String>,
    pub report: String,
}

#[derive(Serialize)]
struct RunReport<'a> {
    runs: &'a [RunInfo],
    audit_runs: usize,
    audit_blocking_pairs: usize,
    audit_violations: usize,
    audit_violation_rate: f64,
    critical_events: u64,
    critical_rate: f64,
    sort_outcomes: &'a [crate::sorting::SortOutcome],
}

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const INITIAL_PROFILE_FILE: &str = "initial_profile.txt";

/// Writes CSV, manifest, report and (when recorded) the event log into `dir`.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(TIMESERIES_FILE), out.record.to_csv())?;
    let events = match &out.events {
        Some(events) => {
            let f = fs::File::create(dir.join(EVENTS_FILE))?;
            write_event_log(events, std::io::BufWriter::new(f))?;
            fs::write(dir.join(INITIAL_PROFILE_FILE), write_profile(&out.initial))?;
            Some(EVENTS_FILE.to_string())
        }
        None => None,
    };
    let report = RunReport {
        runs: &out.runs,
        audit_runs: out.audit.runs,
        audit_blocking_pairs: out.audit.blocking_pairs,
        audit_violations: out.audit.violations.len(),
        audit_violation_rate: out.audit.violation_rate(),
        critical_events: out.critical_events,
        critical_rate: out.critical_rate(),
        sort_outcomes: &out.sort_outcomes,
    };
    fs::write(dir.join(REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: out.config.clone(),
        final_t: out.final_t,
        queries: out.queries,
        runs_completed: out.runs.len(),
        timeseries: TIMESERIES_FILE.to_string(),
        events,
        report: REPORT_FILE.to_string(),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Outcome of re-running a manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub csv_identical: bool,
    pub events_checked: usize,
    pub events_identical: bool,
    pub final_profile_reproduced: bool,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.csv_identical && self.events_identical && self.final_profile_reproduced
    }
}

/// Re-runs `manifest`'s configuration and compares against a stored CSV and
/// event log. The event log is also re-applied to the regenerated initial
/// profile and must land on the final profile.
pub fn replay(manifest: &Manifest, csv: &str, events: &[EvolutionEvent]) -> Result<ReplayReport> {
    let mut config = manifest.config.clone();
    config.record_events = true;
    let out = run(&config)?;
    let fresh = out.events.as_deref().unwrap_or_default();
    let replayed = replay_events(&out.initial, events)?;
    Ok(ReplayReport {
        csv_identical: out.record.to_csv() == csv,
        events_checked: events.len(),
        events_identical: fresh == events,
        final_profile_reproduced: replayed == out.final_profile,
    })
}

/// [`replay`] over a directory written by [`write_run`].
pub fn replay_dir(dir: &Path) -> Result<ReplayReport> {
    let manifest = read_manifest(&dir.join(MANIFEST_FILE))?;
    let csv = fs::read_to_string(dir.join(&manifest.timeseries))?;
    let events_name = manifest
        .events
        .clone()
        .ok_or_else(|| Error::ReplayMismatch("run was written without an event log".into()))?;
    let events = read_event_log(BufReader::new(fs::File::open(dir.join(events_name))?))?;
    replay(&manifest, &csv, &events)
}

/// Steady-state statistics of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub matcher: MatcherKind,
    pub n: usize,
    pub alpha: u32,
    pub seed: u64,
    pub samples: usize,
    pub median: f64,
    pub mean: f64,
    pub runs_completed: usize,
    pub critical_rate: f64,
    pub audit_blocking_pairs: usize,
    pub audit_violations: usize,
}

impl RunSummary {
    pub fn from_output(out: &RunOutput) -> Self {
        let steady = out.steady_state();
        let values: Vec<f64> = steady.iter().map(|&v| v as f64).collect();
        RunSummary {
            matcher: out.config.matcher,
            n: out.config.n,
            alpha: out.config.alpha,
            seed: out.config.seed,
            samples: values.len(),
            median: median(&values),
            mean: mean(&values),
            runs_completed: out.runs.len(),
            critical_rate: out.critical_rate(),
            audit_blocking_pairs: out.audit.blocking_pairs,
            audit_violations: out.audit.violations.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub matcher: MatcherKind,
    pub n: usize,
    pub runs: usize,
    /// Median over runs of each run's steady-state median.
    pub median: f64,
    /// Mean over runs of each run's steady-state mean.
    pub mean: f64,
    /// 95th percentile over runs of each run's steady-state median.
    pub p95: f64,
}

/// Least-squares fit of `ln(value)` against `ln(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatcherFit {
    pub matcher: MatcherKind,
    pub fit: SlopeFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub runs: Vec<RunSummary>,
    pub groups: Vec<GroupSummary>,
    pub fits: Vec<MatcherFit>,
}

impl SweepSummary {
    pub fn fit(&self, matcher: MatcherKind) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.matcher == matcher).map(|f| &f.fit)
    }

    pub fn group(&self, matcher: MatcherKind, n: usize) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.matcher == matcher && g.n == n)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Nearest-rank percentile, `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Fits `ln(y) = slope · ln(n) + intercept` over `(n, y)` points.
///
/// Needs at least three distinct sizes. A steady-state level of zero
/// blocking pairs is floored at one half before taking logs.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let mut sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::TooFewSizes(sizes.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.max(0.5).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (sse / (k - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, k - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY);
    Ok(SlopeFit { slope, intercept, ci95: (slope - t * se, slope + t * se), points: points.to_vec() })
}

/// Runs every configuration (on `parallelism` threads; 1 means serial) and
/// aggregates post-warm-up statistics per matcher and size.
pub fn sweep(configs: &[RunConfig], parallelism: usize) -> Result<SweepSummary> {
    let runs: Vec<RunSummary> = if parallelism <= 1 {
        configs.iter().map(|c| run(c).map(|o| RunSummary::from_output(&o))).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| {
            configs.par_iter().map(|c| run(c).map(|o| RunSummary::from_output(&o))).collect::<Result<_>>()
        })?
    };
    Ok(summarize(runs))
}

pub fn summarize(runs: Vec<RunSummary>) -> SweepSummary {
    let mut by_group: BTreeMap<(MatcherKind, usize), Vec<&RunSummary>> = BTreeMap::new();
    for r in &runs {
        by_group.entry((r.matcher, r.n)).or_default().push(r);
    }
    let groups: Vec<GroupSummary> = by_group
        .iter()
        .map(|(&(matcher, n), rs)| {
            let medians: Vec<f64> = rs.iter().map(|r| r.median).collect();
            let means: Vec<f64> = rs.iter().map(|r| r.mean).collect();
            GroupSummary {
                matcher,
                n,
                runs: rs.len(),
                median: median(&medians),
                mean: mean(&means),
                p95: percentile(&medians, 0.95),
            }
        })
        .collect();
    let mut fits = Vec::new();
    let mut by_matcher: BTreeMap<MatcherKind, Vec<(f64, f64)>> = BTreeMap::new();
    for g in &groups {
        by_matcher.entry(g.matcher).or_default().push((g.n as f64, g.median));
    }
    for (matcher, points) in by_matcher {
        if let Ok(fit) = fit_loglog(&points) {
            fits.push(MatcherFit { matcher, fit });
        }
    }
    SweepSummary { runs, groups, fits }
}

/// Sweep description file: a base run plus the axes to vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    #[serde(default)]
    pub base: RunParams,
    pub sizes: Vec<usize>,
    pub matchers: Vec<MatcherKind>,
    pub seeds: u64,
    #[serde(default)]
    pub first_seed: u64,
}

impl SweepPlan {
    pub fn configs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &matcher in &self.matchers {
            for &n in &self.sizes {
                for seed in self.first_seed..self.first_seed + self.seeds {
                    let params = RunParams { n, matcher, seed, mode: None, ..self.base.clone() };
                    out.push(params.resolve());
                }
            }
        }
        out
    }
}

pub fn load_run_params(path: &Path) -> Result<RunParams> {
    Ok(toml::from_str(&fs::read_to_string(path)?)?)
}

pub fn load_sweep_plan(path: &Path) -> Result<SweepPlan> {
    Ok(toml::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_constant_series_is_zero() {
        let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0].iter().map(|&n| (n, 7.0)).collect();
        assert!(fit_loglog(&pts).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn slope_of_identity_series_is_one() {
        let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0].iter().map(|&n| (n, n)).collect();
        let fit = fit_loglog(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01);
        assert!(fit.ci95.0 <= fit.slope && fit.slope <= fit.ci95.1);
    }

    #[test]
    fn fit_needs_three_sizes() {
        let pts = [(64.0, 1.0), (64.0, 2.0), (128.0, 3.0)];
        assert!(matches!(fit_loglog(&pts), Err(Error::TooFewSizes(2))));
    }

    #[test]
    fn percentile_and_median() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(median(&v), 3.0);
        assert_eq!(median(&[1.0, 2.0]), 1.5);
        assert_eq!(percentile(&v, 0.95), 5.0);
        assert_eq!(percentile(&v, 0.2), 1.0);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(8, MatcherKind::OneSided, 1);
        assert_eq!(c.mode, EvolutionMode::OneSidedB);
        assert!(c.validate().is_ok());
        c.mode = EvolutionMode::TwoSided;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(8, MatcherKind::Simple, 1);
        c.max_t = c.warmup_t - 1;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(8, MatcherKind::Interleaved, 1);
        c.c_window = 0.0;
        assert!(c.validate().is_err());
        assert!(RunConfig::new(0, MatcherKind::Simple, 1).validate().is_err());
    }

    #[test]
    fn default_schedule() {
        let c = RunConfig::new(64, MatcherKind::Interleaved, 0);
        assert_eq!(c.warmup_t, 4 * 64 * 64 * 6);
        assert_eq!(c.max_t, 2 * c.warmup_t);
        assert_eq!(c.sample_every, 16);
        let c = RunConfig::new(64, MatcherKind::OneSided, 0);
        assert_eq!(c.warmup_t, 4 * 64 * 6);
    }

    #[test]
    fn matcher_names_roundtrip() {
        for m in [MatcherKind::Simple, MatcherKind::OneSided, MatcherKind::Interleaved, MatcherKind::StaticGs] {
            assert_eq!(m.as_str().parse::<MatcherKind>().unwrap(), m);
        }
        assert!("greedy".parse::<MatcherKind>().is_err());
    }

    #[test]
    fn sweep_plan_from_toml() {
        let plan: SweepPlan = toml::from_str(
            r#"
            sizes = [8, 16, 32]
            matchers = ["one-sided", "interleaved"]
            seeds = 2
            [base]
            alpha = 2
            "#,
        )
        .unwrap();
        let configs = plan.configs();
        assert_eq!(configs.len(), 12);
        assert!(configs.iter().all(|c| c.alpha == 2));
        assert_eq!(configs[0].mode, EvolutionMode::OneSidedB);
        assert_eq!(configs[11].mode, EvolutionMode::TwoSided);
    }
}
