//! Scalar update on the ghost-cell layout. Neighbors are plain offsets;
//! the caller has filled the ghosts this phase reads.

use super::{horizontal_byte, vertical_byte, Phase};
use crate::grid::idx;

/// Update interior rows `first..first + band.len() / stride` into `band`.
pub(super) fn phase_band(cur: &[u8], band: &mut [u8], first: usize, n: usize, phase: Phase) {
    match phase {
        Phase::Horizontal => horizontal(cur, band, first, n),
        Phase::Vertical => vertical(cur, band, first, n),
    }
}

fn horizontal(cur: &[u8], band: &mut [u8], first: usize, n: usize) {
    let s = n + 2;
    for i in first..first + band.len() / s {
        for j in 1..=n {
            let left = cur[idx(i, j - 1, s)];
            let center = cur[idx(i, j, s)];
            let right = cur[idx(i, j + 1, s)];
            band[idx(i - first, j, s)] = horizontal_byte(left, center, right);
        }
    }
}

fn vertical(cur: &[u8], band: &mut [u8], first: usize, n: usize) {
    let s = n + 2;
    for i in first..first + band.len() / s {
        for j in 1..=n {
            let top = cur[idx(i - 1, j, s)];
            let center = cur[idx(i, j, s)];
            let bottom = cur[idx(i + 1, j, s)];
            band[idx(i - first, j, s)] = vertical_byte(top, center, bottom);
        }
    }
}
