//! Deterministic initial placement.
//!
//! SplitMix64 drives a forward Fisher-Yates shuffle of the interior cell
//! indices. The first `k` shuffled cells get LR vehicles, the next `k` get
//! TB vehicles, with `k = floor(rho * n^2 / 2)`. The sequence is fully pinned
//! so any implementation of the same procedure reproduces the same grid.

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid, Layout};

/// SplitMix64 generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, m)`. Draws above the largest multiple of `m`
    /// that fits in 2^64 are rejected, so there is no modulo bias.
    pub fn bounded(&mut self, m: u64) -> Result<u64> {
        if m == 0 {
            return Err(Error::EmptyRange);
        }
        // 2^64 mod m
        let rem = (u64::MAX % m + 1) % m;
        loop {
            let x = self.next_u64();
            if rem == 0 || x < rem.wrapping_neg() {
                return Ok(x % m);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedSpec {
    pub seed: u64,
    pub rho: f64,
    pub n: usize,
}

impl SeedSpec {
    pub fn new(seed: u64, rho: f64, n: usize) -> Result<SeedSpec> {
        let spec = SeedSpec { seed, rho, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("density {} outside [0, 1]", self.rho)));
        }
        if self.n == 0 {
            return Err(Error::Config("grid side must be at least 1".into()));
        }
        Ok(())
    }

    /// Vehicles of each type.
    pub fn vehicles_per_type(&self) -> usize {
        let cells = (self.n * self.n) as f64;
        (self.rho * cells / 2.0).floor() as usize
    }
}

/// Random grid with exactly `spec.vehicles_per_type()` vehicles of each kind.
/// Ghost cells are left empty.
pub fn init_grid(spec: &SeedSpec, layout: Layout) -> Result<Grid> {
    spec.validate()?;
    let n = spec.n;
    let cells = n * n;
    let k = spec.vehicles_per_type();
    debug_assert!(2 * k <= cells);

    let mut rng = SplitMix64::new(spec.seed);
    let mut order: Vec<usize> = (0..cells).collect();
    for i in 0..2 * k {
        let j = i + rng.bounded((cells - i) as u64)? as usize;
        order.swap(i, j);
    }

    let mut grid = Grid::new(n, layout);
    for (rank, &cell) in order[..2 * k].iter().enumerate() {
        let kind = if rank < k { Cell::Lr } else { Cell::Tb };
        grid.set(cell / n, cell % n, kind);
    }
    Ok(grid)
}
