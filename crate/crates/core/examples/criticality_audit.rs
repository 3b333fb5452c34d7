//! Critical events of an interleaved run and the audit tying every blocking
//! pair at a run's end to one of them.

use evomatch::harness::{run, MatcherKind, RunConfig};

fn main() -> evomatch::Result<()> {
    for n in [64, 128, 256] {
        let out = run(&RunConfig::new(n, MatcherKind::Interleaved, 3))?;
        println!(
            "n={n:4}: {} critical events over {} steps, rate*n = {:.2}; audited {} runs, {} blocking pairs, {} unexplained",
            out.critical_events,
            out.final_t,
            out.critical_rate() * n as f64,
            out.audit.runs,
            out.audit.blocking_pairs,
            out.audit.violations.len()
        );
    }
    Ok(())
}
