//! Literal transcription of the update rules on an `n x n` torus.
//! Neighbors are found with modulo arithmetic on every access.

use super::{horizontal_byte, vertical_byte, Phase};
use crate::grid::idx;

pub(super) fn phase(cur: &[u8], next: &mut [u8], n: usize, phase: Phase) {
    match phase {
        Phase::Horizontal => horizontal(cur, next, n),
        Phase::Vertical => vertical(cur, next, n),
    }
}

fn horizontal(cur: &[u8], next: &mut [u8], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let left = cur[idx(i, (j + n - 1) % n, n)];
            let center = cur[idx(i, j, n)];
            let right = cur[idx(i, (j + 1) % n, n)];
            next[idx(i, j, n)] = horizontal_byte(left, center, right);
        }
    }
}

fn vertical(cur: &[u8], next: &mut [u8], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let top = cur[idx((i + n - 1) % n, j, n)];
            let center = cur[idx(i, j, n)];
            let bottom = cur[idx((i + 1) % n, j, n)];
            next[idx(i, j, n)] = vertical_byte(top, center, bottom);
        }
    }
}
