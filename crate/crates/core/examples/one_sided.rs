//! Repeated deferred acceptance when only the B side evolves.

use evomatch::harness::{run, MatcherKind, RunConfig, RunSummary};

fn main() -> evomatch::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let config = RunConfig::new(n, MatcherKind::OneSided, 7);
    let out = run(&config)?;
    let summary = RunSummary::from_output(&out);
    println!("n={n} steps={} queries={} runs={}", out.final_t, out.queries, out.runs.len());
    println!("blocking pairs after warm-up: median {} mean {:.2}", summary.median, summary.mean);
    for r in out.runs.iter().take(3) {
        println!("run {}: steps {}..{} proposals {} queries {}", r.index, r.started_at, r.finished_at, r.proposals, r.queries);
    }
    Ok(())
}
