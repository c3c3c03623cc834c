//! Cell storage for the automaton.
//!
//! A [`Grid`] is a flat, row-major byte buffer. Two layouts share the type:
//! [`Layout::Compact`] stores exactly the `n x n` torus (stride `n`), while
//! [`Layout::Halo`] surrounds it with a one-cell ghost ring (stride `n + 2`)
//! so the update loops never need wraparound arithmetic. Ghost corners are
//! never written or read.

use std::fmt;

use crate::error::ParseError;

/// Content of a single cell. Stored as one byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Cell {
    Empty = 0,
    /// Vehicle moving left to right.
    Lr = 1,
    /// Vehicle moving top to bottom.
    Tb = 2,
}

pub const EMPTY: u8 = Cell::Empty as u8;
pub const LR: u8 = Cell::Lr as u8;
pub const TB: u8 = Cell::Tb as u8;

impl Cell {
    #[inline]
    pub fn from_byte(b: u8) -> Option<Cell> {
        match b {
            EMPTY => Some(Cell::Empty),
            LR => Some(Cell::Lr),
            TB => Some(Cell::Tb),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Cell::Empty => '.',
            Cell::Lr => '>',
            Cell::Tb => 'v',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        match c {
            '.' => Some(Cell::Empty),
            '>' => Some(Cell::Lr),
            'v' => Some(Cell::Tb),
            _ => None,
        }
    }
}

/// Linear index of `(i, j)` in a row-major buffer with rows of `stride` cells.
#[inline(always)]
pub fn idx(i: usize, j: usize, stride: usize) -> usize {
    debug_assert!(i < stride && j < stride, "idx({i}, {j}) out of range for stride {stride}");
    i * stride + j
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    /// `n x n`, no border. Used by the modulo-indexing backend.
    Compact,
    /// `(n + 2) x (n + 2)` with a ghost ring.
    Halo,
}

impl Layout {
    #[inline]
    pub fn stride(self, n: usize) -> usize {
        match self {
            Layout::Compact => n,
            Layout::Halo => n + 2,
        }
    }

    /// Offset of the first interior row/column.
    #[inline]
    pub fn origin(self) -> usize {
        match self {
            Layout::Compact => 0,
            Layout::Halo => 1,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    layout: Layout,
    cells: Vec<u8>,
}

impl Grid {
    /// An all-empty grid. Panics if `n == 0`.
    pub fn new(n: usize, layout: Layout) -> Grid {
        assert!(n > 0, "grid side must be positive");
        let stride = layout.stride(n);
        Grid {
            n,
            layout,
            cells: vec![EMPTY; stride * stride],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn stride(&self) -> usize {
        self.layout.stride(self.n)
    }

    /// The whole buffer, ghosts included.
    pub fn as_bytes(&self) -> &[u8] {
        &self.cells
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    /// Cell at interior coordinates `(row, col)`, both in `0..n`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cell {
        let o = self.layout.origin();
        let b = self.cells[idx(row + o, col + o, self.stride())];
        Cell::from_byte(b).expect("grid holds an invalid cell byte")
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        assert!(row < self.n && col < self.n);
        let o = self.layout.origin();
        let s = self.stride();
        self.cells[idx(row + o, col + o, s)] = cell as u8;
    }

    /// Interior row `row` (0-based) as a slice of `n` bytes.
    pub fn interior_row(&self, row: usize) -> &[u8] {
        let o = self.layout.origin();
        let start = idx(row + o, o, self.stride());
        &self.cells[start..start + self.n]
    }

    /// Iterator over interior bytes in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.n).flat_map(move |r| self.interior_row(r).iter().copied())
    }

    /// Copy of this grid's interior in another layout. Ghosts of the result are empty.
    pub fn to_layout(&self, layout: Layout) -> Grid {
        if layout == self.layout {
            return self.clone();
        }
        let mut out = Grid::new(self.n, layout);
        let o = layout.origin();
        let s = out.stride();
        for r in 0..self.n {
            let start = idx(r + o, o, s);
            out.cells[start..start + self.n].copy_from_slice(self.interior_row(r));
        }
        out
    }

    /// Whether the interiors match, regardless of layout.
    pub fn same_interior(&self, other: &Grid) -> bool {
        self.n == other.n && (0..self.n).all(|r| self.interior_row(r) == other.interior_row(r))
    }

    /// First interior coordinate where the two grids differ.
    pub fn first_difference(&self, other: &Grid) -> Option<(usize, usize)> {
        assert_eq!(self.n, other.n);
        (0..self.n).find_map(|r| {
            self.interior_row(r)
                .iter()
                .zip(other.interior_row(r))
                .position(|(a, b)| a != b)
                .map(|c| (r, c))
        })
    }

    /// Copy interior column 1 and `n` into the opposite ghost columns, for every interior row.
    pub fn fill_horizontal_halo(&mut self) {
        debug_assert_eq!(self.layout, Layout::Halo);
        let n = self.n;
        let s = self.stride();
        for i in 1..=n {
            let row = &mut self.cells[idx(i, 0, s)..idx(i, 0, s) + s];
            row[0] = row[n];
            row[n + 1] = row[1];
        }
    }

    /// Copy interior rows 1 and `n` into the opposite ghost rows. Corners are not touched.
    pub fn fill_vertical_halo(&mut self) {
        debug_assert_eq!(self.layout, Layout::Halo);
        let n = self.n;
        let s = self.stride();
        self.cells.copy_within(idx(n, 1, s)..idx(n, 1, s) + n, idx(0, 1, s));
        self.cells.copy_within(idx(1, 1, s)..idx(1, 1, s) + n, idx(n + 1, 1, s));
    }

    /// 64-bit FNV-1a over interior bytes in row-major order.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        self.interior()
            .fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME))
    }

    /// Parse the text fixture format: `n` lines of `n` characters from `.`, `>`, `v`.
    pub fn parse(text: &str, layout: Layout) -> Result<Grid, ParseError> {
        let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(text).split('\n').collect();
        if text.is_empty() {
            return Err(ParseError::Empty);
        }
        let n = lines.len();
        let mut grid = Grid::new(n, layout);
        for (r, line) in lines.iter().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let width = line.chars().count();
            if width != n {
                return Err(ParseError::Shape {
                    line: r + 1,
                    expected: n,
                    found: width,
                });
            }
            for (c, ch) in line.chars().enumerate() {
                let cell = Cell::from_char(ch).ok_or(ParseError::Character {
                    line: r + 1,
                    column: c + 1,
                    found: ch,
                })?;
                grid.set(r, c, cell);
            }
        }
        Ok(grid)
    }

    /// Render the interior in the fixture format, each row newline-terminated.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.n + 1));
        for r in 0..self.n {
            for c in 0..self.n {
                out.push(self.get(r, c).to_char());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid(n={}, {:?})", self.n, self.layout)?;
        f.write_str(&self.render())
    }
}

/// Double buffer: read from `cur`, write into `next`, then swap.
#[derive(Clone, Debug)]
pub struct GridPair {
    pub cur: Grid,
    pub next: Grid,
}

impl GridPair {
    pub fn new(initial: Grid) -> GridPair {
        let next = Grid::new(initial.n(), initial.layout());
        GridPair { cur: initial, next }
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.cur, &mut self.next);
    }

    pub fn into_current(self) -> Grid {
        self.cur
    }
}
