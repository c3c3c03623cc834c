//! Biham-Middleton-Levine traffic cellular automaton.
//!
//! Two vehicle kinds share an `n x n` torus: LR vehicles advance one cell
//! right during the horizontal phase, TB vehicles one cell down during the
//! vertical phase, each only into an empty cell. Four backends compute the
//! same synchronous update with different techniques; see [`Backend`].

pub mod engine;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod seeding;
pub mod snapshot;

pub use engine::{horizontal_rule, simulate, step_phase, vertical_rule, Backend, Engine, LaneKernel, Phase};
pub use error::{Error, ParseError, Result};
pub use grid::{idx, Cell, Grid, GridPair, Layout};
pub use metrics::{classify, count_vehicles, moved_in_phase, StepMetrics, TrafficPhase};
pub use seeding::{init_grid, SeedSpec, SplitMix64};
pub use snapshot::{encode_ppm, write_ppm, ColorMap};
