//! A cyclic instance whose approximate lists make `M(i) = i` stable while
//! the true lists give it a band of blocking pairs.

use evomatch::format::write_profile;
use evomatch::model::{adversarial_profile, blocking_pairs, is_stable, Matching};

fn main() -> evomatch::Result<()> {
    let (truth, approx) = adversarial_profile(7, 3)?;
    println!("true lists:\n{}", write_profile(&truth));
    println!("approximate lists:\n{}", write_profile(&approx));
    let id = Matching::identity(7);
    println!("identity stable on approximation: {}", is_stable(&approx, &id)?);
    println!("blocking pairs on truth: {:?}", blocking_pairs(&truth, &id)?);

    for n in [64, 256, 1024] {
        let k = (n as f64).log2().ceil() as usize;
        let (truth, _) = adversarial_profile(n, k)?;
        let count = blocking_pairs(&truth, &Matching::identity(n))?.len();
        println!("n={n:5} k={k:2}: {count} blocking pairs, band bound {}", (k - 1) * n - k * (k - 1));
    }
    Ok(())
}
