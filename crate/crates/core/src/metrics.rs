//! Per-step observables and regime classification.

use crate::engine::Phase;
use crate::error::{Error, Result};
use crate::grid::{Grid, EMPTY, LR, TB};

/// Default number of trailing steps averaged by [`classify`].
pub const DEFAULT_WINDOW: usize = 64;
pub const FREE_FLOW_THRESHOLD: f64 = 0.99;
pub const JAM_THRESHOLD: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMetrics {
    pub step: u64,
    pub lr_count: usize,
    pub tb_count: usize,
    pub lr_moved: usize,
    pub tb_moved: usize,
    /// Fraction of vehicles that advanced this step. 1 for an empty grid.
    pub mobility: f64,
}

impl StepMetrics {
    pub fn new(step: u64, lr_count: usize, tb_count: usize, lr_moved: usize, tb_moved: usize) -> StepMetrics {
        debug_assert!(lr_moved <= lr_count && tb_moved <= tb_count);
        let total = lr_count + tb_count;
        let mobility = if total == 0 {
            1.0
        } else {
            (lr_moved + tb_moved) as f64 / total as f64
        };
        StepMetrics {
            step,
            lr_count,
            tb_count,
            lr_moved,
            tb_moved,
            mobility,
        }
    }
}

/// `(LR, TB)` counts over interior cells.
pub fn count_vehicles(g: &Grid) -> (usize, usize) {
    let mut lr = 0;
    let mut tb = 0;
    for r in 0..g.n() {
        for &b in g.interior_row(r) {
            lr += (b == LR) as usize;
            tb += (b == TB) as usize;
        }
    }
    (lr, tb)
}

/// Vehicles that advanced in one phase: cells that held the moving kind
/// before and are empty after.
pub fn moved_in_phase(before: &Grid, after: &Grid, phase: Phase) -> Result<usize> {
    if before.n() != after.n() {
        return Err(Error::SizeMismatch(before.n(), after.n()));
    }
    let vehicle = match phase {
        Phase::Horizontal => LR,
        Phase::Vertical => TB,
    };
    Ok((0..before.n())
        .map(|r| {
            before
                .interior_row(r)
                .iter()
                .zip(after.interior_row(r))
                .filter(|&(&b, &a)| b == vehicle && a == EMPTY)
                .count()
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrafficPhase {
    FreeFlow,
    Jammed,
    Intermediate,
}

impl TrafficPhase {
    pub fn name(self) -> &'static str {
        match self {
            TrafficPhase::FreeFlow => "FreeFlow",
            TrafficPhase::Jammed => "Jammed",
            TrafficPhase::Intermediate => "Intermediate",
        }
    }
}

impl std::fmt::Display for TrafficPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classify by mean mobility over `history`.
pub fn classify(history: &[f64]) -> Result<TrafficPhase> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mean = history.iter().sum::<f64>() / history.len() as f64;
    Ok(if mean >= FREE_FLOW_THRESHOLD {
        TrafficPhase::FreeFlow
    } else if mean <= JAM_THRESHOLD {
        TrafficPhase::Jammed
    } else {
        TrafficPhase::Intermediate
    })
}
