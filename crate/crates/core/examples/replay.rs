//! Write a run with its event log, then reproduce it from the manifest.

use evomatch::harness::{replay_dir, run, write_run, MatcherKind, RunConfig};

fn main() -> evomatch::Result<()> {
    let dir = tempfile::tempdir()?;
    let mut config = RunConfig::new(32, MatcherKind::Interleaved, 5);
    config.record_events = true;
    let out = run(&config)?;
    let manifest = write_run(&out, dir.path())?;
    println!("wrote {} steps to {}", manifest.final_t, dir.path().display());
    let report = replay_dir(dir.path())?;
    println!("{report:?}");
    Ok(())
}
