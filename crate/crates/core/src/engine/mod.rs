//! Update rules and the interchangeable backends.
//!
//! A step is one horizontal phase (LR vehicles advance) followed by one
//! vertical phase (TB vehicles advance). Each phase reads `cur`, writes
//! `next`, then swaps the pair.

mod bands;
mod halo;
pub mod lanes;
mod naive;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid, GridPair, Layout, EMPTY, LR, TB};
use crate::metrics::{count_vehicles, moved_in_phase, StepMetrics};

pub use lanes::LaneKernel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// `n x n` grid, wraparound by modulo in the inner loop. Correctness reference.
    ScalarNaive,
    /// Ghost-cell grid, scalar inner loop.
    ScalarHalo,
    /// Ghost-cell grid, scalar inner loop, rows split into contiguous bands across workers.
    ParallelRows,
    /// Ghost-cell grid, branchless select-and-mask over `W` adjacent cells per iteration.
    Lanes,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::ScalarNaive,
        Backend::ScalarHalo,
        Backend::ParallelRows,
        Backend::Lanes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::ScalarNaive => "naive",
            Backend::ScalarHalo => "halo",
            Backend::ParallelRows => "parallel",
            Backend::Lanes => "lanes",
        }
    }

    pub fn layout(self) -> Layout {
        match self {
            Backend::ScalarNaive => Layout::Compact,
            _ => Layout::Halo,
        }
    }

    /// Whether the backend may split a phase across more than one worker.
    pub fn is_multithreaded(self) -> bool {
        matches!(self, Backend::ParallelRows | Backend::Lanes)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Backend> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown backend {s:?} (expected naive, halo, parallel or lanes)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Horizontal,
    Vertical,
}

#[inline(always)]
pub(crate) fn horizontal_byte(left: u8, center: u8, right: u8) -> u8 {
    if left == LR && center == EMPTY {
        LR
    } else if center == LR && right == EMPTY {
        EMPTY
    } else {
        center
    }
}

#[inline(always)]
pub(crate) fn vertical_byte(top: u8, center: u8, bottom: u8) -> u8 {
    if top == TB && center == EMPTY {
        TB
    } else if center == TB && bottom == EMPTY {
        EMPTY
    } else {
        center
    }
}

/// New state of a cell during a horizontal phase.
pub fn horizontal_rule(left: Cell, center: Cell, right: Cell) -> Cell {
    Cell::from_byte(horizontal_byte(left as u8, center as u8, right as u8)).unwrap()
}

/// New state of a cell during a vertical phase.
pub fn vertical_rule(top: Cell, center: Cell, bottom: Cell) -> Cell {
    Cell::from_byte(vertical_byte(top as u8, center as u8, bottom as u8)).unwrap()
}

/// A configured backend. Owns the worker pool for multithreaded backends.
pub struct Engine {
    backend: Backend,
    threads: usize,
    lanes: LaneKernel,
    bands: bands::BandRunner,
}

impl Engine {
    pub fn new(backend: Backend, threads: usize) -> Result<Engine> {
        Engine::with_lane_kernel(backend, threads, LaneKernel::detect())
    }

    /// Like [`Engine::new`] but pins the lane kernel used by [`Backend::Lanes`].
    pub fn with_lane_kernel(backend: Backend, threads: usize, lanes: LaneKernel) -> Result<Engine> {
        if threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if threads > 1 && !backend.is_multithreaded() {
            return Err(Error::Config(format!(
                "backend {backend} is single-threaded, got {threads} threads"
            )));
        }
        if !lanes.is_supported() {
            return Err(Error::Config(format!("lane kernel {lanes:?} not supported on this CPU")));
        }
        Ok(Engine {
            backend,
            threads,
            lanes,
            bands: bands::BandRunner::new(threads)?,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn lane_kernel(&self) -> LaneKernel {
        self.lanes
    }

    pub fn layout(&self) -> Layout {
        self.backend.layout()
    }

    /// Double buffer for `initial`, converted to this backend's layout.
    pub fn pair(&self, initial: &Grid) -> GridPair {
        GridPair::new(initial.to_layout(self.layout()))
    }

    fn check(&self, pair: &GridPair) -> Result<()> {
        let (cur, next) = (&pair.cur, &pair.next);
        if cur.n() != next.n() {
            return Err(Error::SizeMismatch(cur.n(), next.n()));
        }
        if cur.layout() != self.layout() || next.layout() != self.layout() {
            return Err(Error::Config(format!(
                "backend {} needs {:?} grids",
                self.backend,
                self.layout()
            )));
        }
        Ok(())
    }

    /// Apply one phase to every interior cell and swap the buffers.
    ///
    /// Halo backends refill the ghost cells this phase reads before updating.
    pub fn step_phase(&self, pair: &mut GridPair, phase: Phase) -> Result<()> {
        self.check(pair)?;
        self.phase_unchecked(pair, phase);
        Ok(())
    }

    fn phase_unchecked(&self, pair: &mut GridPair, phase: Phase) {
        let n = pair.cur.n();
        match self.backend {
            Backend::ScalarNaive => naive::phase(pair.cur.as_bytes(), pair.next.as_bytes_mut(), n, phase),
            halo_backend => {
                match phase {
                    Phase::Horizontal => pair.cur.fill_horizontal_halo(),
                    Phase::Vertical => pair.cur.fill_vertical_halo(),
                }
                let cur = pair.cur.as_bytes();
                let lanes = self.lanes;
                self.bands.run(pair.next.as_bytes_mut(), n, |first, band| {
                    if halo_backend == Backend::Lanes {
                        lanes::phase_band(lanes, cur, band, first, n, phase)
                    } else {
                        halo::phase_band(cur, band, first, n, phase)
                    }
                });
            }
        }
        pair.swap();
    }

    /// One full step: horizontal phase then vertical phase.
    pub fn step(&self, pair: &mut GridPair) -> Result<()> {
        self.check(pair)?;
        self.phase_unchecked(pair, Phase::Horizontal);
        self.phase_unchecked(pair, Phase::Vertical);
        Ok(())
    }

    /// Advance `steps` full steps without collecting metrics.
    pub fn run(&self, pair: &mut GridPair, steps: u64) -> Result<()> {
        self.check(pair)?;
        for _ in 0..steps {
            self.phase_unchecked(pair, Phase::Horizontal);
            self.phase_unchecked(pair, Phase::Vertical);
        }
        Ok(())
    }

    /// Advance `steps` full steps, reporting [`StepMetrics`] and the current
    /// grid after each one.
    ///
    /// Fails with [`Error::Conservation`] if a step changes either vehicle count.
    pub fn run_observed(
        &self,
        pair: &mut GridPair,
        steps: u64,
        mut observer: impl FnMut(&StepMetrics, &Grid),
    ) -> Result<()> {
        self.check(pair)?;
        let (lr_count, tb_count) = count_vehicles(&pair.cur);
        for step in 1..=steps {
            self.phase_unchecked(pair, Phase::Horizontal);
            let lr_moved = moved_in_phase(&pair.next, &pair.cur, Phase::Horizontal)?;
            self.phase_unchecked(pair, Phase::Vertical);
            let tb_moved = moved_in_phase(&pair.next, &pair.cur, Phase::Vertical)?;

            let (lr_after, tb_after) = count_vehicles(&pair.cur);
            if (lr_after, tb_after) != (lr_count, tb_count) {
                return Err(Error::Conservation {
                    step,
                    lr_before: lr_count,
                    tb_before: tb_count,
                    lr_after,
                    tb_after,
                });
            }
            observer(&StepMetrics::new(step, lr_count, tb_count, lr_moved, tb_moved), &pair.cur);
        }
        Ok(())
    }
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("backend", &self.backend)
            .field("threads", &self.threads)
            .field("lanes", &self.lanes)
            .finish()
    }
}

/// One phase on `pair` with a throwaway [`Engine`].
pub fn step_phase(backend: Backend, pair: &mut GridPair, phase: Phase, threads: usize) -> Result<()> {
    Engine::new(backend, threads)?.step_phase(pair, phase)
}

/// Run `initial` forward `steps` steps and return the final grid in the backend's layout.
pub fn simulate(backend: Backend, threads: usize, initial: &Grid, steps: u64) -> Result<Grid> {
    let engine = Engine::new(backend, threads)?;
    let mut pair = engine.pair(initial);
    engine.run(&mut pair, steps)?;
    Ok(pair.into_current())
}
