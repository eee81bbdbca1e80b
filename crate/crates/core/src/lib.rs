//! Surface realization toolkit.
//!
//! Reconstructs sentences from shuffled, lemmatized, dependency-annotated
//! token sequences. The crate covers the data side of the task: reading and
//! writing the six-column token format, rebuilding dependency trees and
//! linearizing them, lemma-to-form suggestion maps, corpus filtering and
//! training-pair generation, factored input encoding, deterministic
//! baseline realizers, and BLEU/NIST/DIST scoring.

pub mod augment;
pub mod conllu;
pub mod delemma;
pub mod deptree;
mod error;
pub mod factored;
pub mod metrics;
pub mod realizer;
pub mod synth;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every seeded operation in the crate.
///
/// ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a seed gives the
/// same stream on every platform and run.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
