//! Growth of steady-state blocking pairs with n for each matcher.

use evomatch::harness::{sweep, MatcherKind, RunConfig};

fn main() -> evomatch::Result<()> {
    let seeds = 4;
    let mut configs = Vec::new();
    for matcher in [MatcherKind::Simple, MatcherKind::Interleaved] {
        for n in [32, 64, 128, 256] {
            configs.extend((0..seeds).map(|s| RunConfig::new(n, matcher, s)));
        }
    }
    for n in [128, 256, 512, 1024] {
        configs.extend((0..seeds).map(|s| RunConfig::new(n, MatcherKind::OneSided, s)));
    }
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get());
    let summary = sweep(&configs, threads)?;
    for g in &summary.groups {
        println!("{:12} n={:5} median {:7.1} mean {:8.2} p95 {:7.1}", g.matcher, g.n, g.median, g.mean, g.p95);
    }
    for f in &summary.fits {
        println!("{:12} slope {:.3} (95% ci {:.3}..{:.3})", f.matcher, f.fit.slope, f.fit.ci95.0, f.fit.ci95.1);
    }
    Ok(())
}
