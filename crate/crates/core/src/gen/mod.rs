//! Seeded random programs and event streams for differential testing and
//! benchmarking.

pub mod corpus;
pub mod program;
pub mod vocab;

pub use corpus::{bench_events, random_events, random_graph, random_steps, CorpusOptions, Step};
pub use program::{random_program, ProgramOptions};

/// The generator used everywhere a seed is given.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}
