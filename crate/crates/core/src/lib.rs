//! Daily foraging in changing grid worlds.
//!
//! A seeded, deterministic simulator of an agent that must walk from its home
//! cell to a food cell through barriers, every simulated day, while the world
//! changes overnight (barriers move, the food may relocate) and motion is
//! noisy. On top of the environment sit a multi-strategy agent framework
//! (round-robin scheduling with progressive tick budgets, a five-callback
//! strategy interface, reflexive food bypass, dead-reckoning localization),
//! a range of strategies from pure random walks to an episodic-memory map
//! builder that plans with budgeted A*, and an experiment harness that runs
//! seeded environment/day grids and emits CSV statistics.

pub mod agent;
pub mod grid;
pub mod harness;
pub mod plan;
pub mod report;
pub mod strategies;

pub use agent::{Agent, DayConfig, DayResult, LocationEstimate};
pub use grid::{Action, CellState, Environment, GridError, NoiseParams, Position, SenseData};
pub use harness::{ExperimentConfig, FoodPattern, RunStats, StrategyKind};
