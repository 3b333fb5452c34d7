//! Proposal counts of A-proposing deferred acceptance on random profiles.

use evomatch::matchers::gale_shapley_static;
use evomatch::model::{is_stable, random_profile};
use evomatch::rng::{stream, Stream};

fn main() -> evomatch::Result<()> {
    for n in [64, 256, 1024] {
        let seeds = 20;
        let mut total = 0;
        for seed in 0..seeds {
            let profile = random_profile(n, &mut stream(seed, Stream::Profile))?;
            let (m, proposals) = gale_shapley_static(&profile);
            assert!(is_stable(&profile, &m)?);
            total += proposals;
        }
        let mean = total as f64 / seeds as f64;
        println!("n={n:5}: mean proposals {mean:9.1}, n ln n = {:9.1}", n as f64 * (n as f64).ln());
    }
    Ok(())
}
