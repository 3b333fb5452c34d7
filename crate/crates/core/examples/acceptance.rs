//! Run chosen acceptance checks, e.g. `cargo run --example acceptance -- 2 4`.

use evomatch::acceptance::{criterion_ids, run_criterion, AcceptanceOptions};

fn main() {
    let mut ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ids.is_empty() {
        ids = criterion_ids().collect();
    }
    let opts = AcceptanceOptions::default();
    for id in ids {
        match run_criterion(id, &opts) {
            Some(r) => println!("{r}"),
            None => println!("no criterion {id}"),
        }
    }
}
