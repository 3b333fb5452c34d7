//! Stable matching when preference lists keep changing underneath you.
//!
//! Agents on sides A and B hold strict preference lists over the other side.
//! At every time-step an algorithm may ask one comparison question of one
//! list, after which nature swaps `alpha` randomly chosen adjacent entries of
//! randomly chosen lists. The crate provides:
//!
//! * [`model`]: permutations, profiles, matchings and exact blocking-pair
//!   counting, plus random and adversarial instance generators;
//! * [`evolution`]: the clocked query oracle and its event log;
//! * [`sorting`]: randomized quicksort against the live oracle;
//! * [`matchers`]: static Gale-Shapley and three dynamic matchers;
//! * [`metrics`]: time series, critical-event classification and audits;
//! * [`harness`]: configured runs, seed sweeps, growth-rate fits, replay;
//! * [`acceptance`]: the end-to-end experiment checks.
//!
//! ```
//! use evomatch::evolution::{EvolutionMode, EvolvingInstance};
//! use evomatch::matchers::{one_sided_matcher, DynamicMatcher};
//! use evomatch::model::{count_blocking_pairs, random_profile};
//! use evomatch::rng::{stream, Stream};
//!
//! let profile = random_profile(32, &mut stream(7, Stream::Profile)).unwrap();
//! let mut inst = EvolvingInstance::new(profile, 1, EvolutionMode::OneSidedB, stream(7, Stream::Nature));
//! let mut matcher = one_sided_matcher(&inst).unwrap();
//! while matcher.state().runs_completed < 3 {
//!     matcher.step(&mut inst).unwrap();
//! }
//! let blocking = count_blocking_pairs(&inst.snapshot(), &matcher.state().published).unwrap();
//! assert!(blocking < 32 * 32);
//! ```

pub mod acceptance;
pub mod error;
pub mod evolution;
pub mod format;
pub mod harness;
pub mod matchers;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sorting;

pub use error::{Error, Result};
