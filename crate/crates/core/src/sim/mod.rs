//! The monitor simulator: scenario replay over the socket, deterministic
//! step runs for differential testing, and corpus benchmarking.

pub mod bench;
pub mod differential;
pub mod replay;
pub mod report;
pub mod scenario;

pub use bench::{read_corpus, replay_docs, BenchReport, Timings};
pub use differential::{first_difference, run_steps, Transcript};
pub use replay::{simulate, SimError, SimOptions, TopicFilter, TopicInterest, DEFAULT_GRACE, DEFAULT_POLLING, SIM_EPOCH_NS};
pub use report::{ExpectationResult, Observed, RunReport};
pub use scenario::{Action, Entry, Matcher, Scenario, ScenarioError, Want};
