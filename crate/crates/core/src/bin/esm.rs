use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evomatch::acceptance::{criterion_ids, run_criterion, AcceptanceOptions};
use evomatch::evolution::EvolutionMode;
use evomatch::harness::{
    load_run_params, load_sweep_plan, replay_dir, run, sweep, write_run, MatcherKind, RunParams, SweepPlan,
};

#[derive(Parser)]
#[command(name = "esm", version, about = "Stable matching under evolving preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its CSV, manifest and report.
    Run {
        #[command(flatten)]
        flags: RunFlags,
        /// TOML run configuration; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run seed replications over several sizes and fit growth rates.
    Sweep {
        /// TOML sweep description.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        matchers: Vec<MatcherKind>,
        #[arg(long, default_value_t = 8)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Where to write the JSON summary; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Re-run a written run from its manifest and compare outputs.
    Replay {
        /// Directory holding manifest.json, timeseries.csv and events.jsonl.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long)]
    mode: Option<EvolutionMode>,
    #[arg(long)]
    matcher: Option<MatcherKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_t: Option<u64>,
    #[arg(long)]
    sample_every: Option<u64>,
    #[arg(long)]
    c_window: Option<f64>,
    #[arg(long)]
    warmup_t: Option<u64>,
    /// Also write the full event log.
    #[arg(long)]
    record_events: bool,
}

impl RunFlags {
    fn apply(self, mut p: RunParams) -> RunParams {
        p.n = self.n.unwrap_or(p.n);
        p.alpha = self.alpha.unwrap_or(p.alpha);
        p.mode = self.mode.or(p.mode);
        p.matcher = self.matcher.unwrap_or(p.matcher);
        p.seed = self.seed.unwrap_or(p.seed);
        p.max_t = self.max_t.or(p.max_t);
        p.sample_every = self.sample_every.or(p.sample_every);
        p.c_window = self.c_window.unwrap_or(p.c_window);
        p.warmup_t = self.warmup_t.or(p.warmup_t);
        p.record_events |= self.record_events;
        p
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> evomatch::Result<ExitCode> {
    match command {
        Command::Run { flags, config, out } => {
            let base = config.as_deref().map(load_run_params).transpose()?.unwrap_or_default();
            let config = flags.apply(base).resolve();
            let output = run(&config)?;
            write_run(&output, &out)?;
            let steady = output.steady_state();
            println!(
                "t={} queries={} runs={} steady samples={} last blocking={}",
                output.final_t,
                output.queries,
                output.runs.len(),
                steady.len(),
                output.record.samples().last().map_or(0, |s| s.blocking_pairs)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, sizes, matchers, seeds, alpha, parallelism, out } => {
            let plan = match config {
                Some(path) => load_sweep_plan(&path)?,
                None => SweepPlan {
                    base: RunParams { alpha, ..RunParams::default() },
                    sizes,
                    matchers,
                    seeds,
                    first_seed: 0,
                },
            };
            let summary = sweep(&plan.configs(), parallelism)?;
            let json = serde_json::to_string_pretty(&summary)?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            for fit in &summary.fits {
                eprintln!(
                    "{}: slope {:.3} (95% ci {:.3}..{:.3})",
                    fit.matcher, fit.fit.slope, fit.fit.ci95.0, fit.fit.ci95.1
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { only, parallelism } => {
            let mut opts = AcceptanceOptions::default();
            if let Some(p) = parallelism {
                opts.parallelism = p;
            }
            let ids: Vec<u8> = if only.is_empty() { criterion_ids().collect() } else { only };
            let mut all_passed = true;
            for id in ids {
                match run_criterion(id, &opts) {
                    Some(result) => {
                        println!("{result}");
                        all_passed &= result.passed;
                    }
                    None => {
                        eprintln!("unknown criterion {id}");
                        all_passed = false;
                    }
                }
            }
            Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Replay { dir } => {
            let report = replay_dir(&dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
