//! Survival multi-armed bandits.
//!
//! An agent starts with budget `B`, pulls one of `K` arms per step, and is
//! ruined the first time its budget drops to zero or below. This crate
//! provides:
//!
//! - [`arms`]: finite reward distributions on `[-1, 1]`;
//! - [`ruin`]: ruin rates `γ`, gambler's-ruin probabilities, the EXPLOIT ruin
//!   probability and the survival-regret baseline;
//! - [`policies`]: constant, UCB, multinomial Thompson sampling, EXPLOIT-greedy,
//!   EXPLOIT-UCB and EXPLOIT-UCB-DOUBLE;
//! - [`simulator`]: the episode engine and a deterministic parallel batch runner;
//! - [`metrics`]: experiment records and CSV output;
//! - [`experiment`]: config files, the bundled reference preset and the runner
//!   behind the `survival-bandit` binary.

pub mod arms;
pub mod experiment;
pub mod format;
pub mod instance;
pub mod metrics;
pub mod policies;
pub mod rng;
pub mod ruin;
pub mod simulator;

pub use arms::{ArmClass, ArmSpec};
pub use instance::BanditInstance;
pub use policies::{BonusStyle, DoublingParam, Policy, PolicyConfig, PolicyKind};
pub use rng::RandomStream;
pub use ruin::{Gamma, RuinReport, TheoryError};
pub use simulator::{run_batch, run_episode, BatchSummary, EpisodeResult};
