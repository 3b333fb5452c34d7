//! Draw a random profile, write it in the text format and read it back.

use evomatch::format::{parse_profile, write_profile};
use evomatch::model::random_profile;
use evomatch::rng::{stream, Stream};

fn main() -> evomatch::Result<()> {
    let profile = random_profile(5, &mut stream(42, Stream::Profile))?;
    let text = write_profile(&profile);
    print!("{text}");
    assert_eq!(parse_profile(&text)?, profile);
    Ok(())
}
