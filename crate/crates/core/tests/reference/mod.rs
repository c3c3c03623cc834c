//! Brute-force reference automaton, independent of the library.
//!
//! Works on rows of characters ('.', '>', 'v') and moves vehicles one at a
//! time from an immutable snapshot, which makes the synchronous semantics
//! explicit: a vehicle advances iff the cell ahead was empty at the start of
//! the phase.

#![allow(dead_code)]

pub type Board = Vec<Vec<char>>;

pub fn board(text: &str) -> Board {
    text.lines().map(|l| l.chars().collect()).collect()
}

pub fn show(b: &Board) -> String {
    b.iter().map(|r| r.iter().collect::<String>() + "\n").collect()
}

/// Move every `vehicle` whose target cell is empty in `before`.
fn advance(before: &Board, vehicle: char, dr: usize, dc: usize) -> Board {
    let n = before.len();
    let mut after = before.clone();
    for r in 0..n {
        for c in 0..n {
            if before[r][c] != vehicle {
                continue;
            }
            let (tr, tc) = ((r + dr) % n, (c + dc) % n);
            if before[tr][tc] == '.' {
                after[r][c] = '.';
                after[tr][tc] = vehicle;
            }
        }
    }
    after
}

pub fn horizontal(b: &Board) -> Board {
    advance(b, '>', 0, 1)
}

pub fn vertical(b: &Board) -> Board {
    advance(b, 'v', 1, 0)
}

pub fn step(b: &Board) -> Board {
    vertical(&horizontal(b))
}

pub fn steps(b: &Board, k: usize) -> Board {
    (0..k).fold(b.clone(), |acc, _| step(&acc))
}

pub fn count(b: &Board, vehicle: char) -> usize {
    b.iter().flatten().filter(|&&c| c == vehicle).count()
}
