//! Binary PPM (P6) rendering, one pixel per interior cell.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid};

pub type Rgb = [u8; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColorMap {
    pub lr: Rgb,
    pub tb: Rgb,
    pub empty: Rgb,
}

impl ColorMap {
    /// Red LR vehicles, blue TB vehicles, white background.
    pub const DEFAULT: ColorMap = ColorMap {
        lr: [255, 0, 0],
        tb: [0, 0, 255],
        empty: [255, 255, 255],
    };

    pub fn color(&self, cell: Cell) -> Rgb {
        match cell {
            Cell::Empty => self.empty,
            Cell::Lr => self.lr,
            Cell::Tb => self.tb,
        }
    }
}

impl Default for ColorMap {
    fn default() -> Self {
        ColorMap::DEFAULT
    }
}

pub fn encode_ppm(g: &Grid, colors: &ColorMap) -> Vec<u8> {
    let n = g.n();
    let header = format!("P6\n{n} {n}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * n * n);
    out.extend_from_slice(header.as_bytes());
    for b in g.interior() {
        out.extend_from_slice(&colors.color(Cell::from_byte(b).expect("invalid cell byte")));
    }
    out
}

pub fn write_ppm(g: &Grid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(g, &ColorMap::DEFAULT)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Layout;

    #[test]
    fn single_empty_cell() {
        let bytes = encode_ppm(&Grid::new(1, Layout::Halo), &ColorMap::DEFAULT);
        // "P6\n" + "1 1\n" + "255\n" is 11 bytes.
        assert_eq!(bytes.len(), 11 + 3);
        assert_eq!(&bytes[..11], b"P6\n1 1\n255\n");
        assert_eq!(&bytes[11..], &[255, 255, 255]);
    }

    #[test]
    fn vehicle_colors() {
        let g = Grid::parse(">v\n..", Layout::Compact).unwrap();
        let bytes = encode_ppm(&g, &ColorMap::DEFAULT);
        let px = &bytes[b"P6\n2 2\n255\n".len()..];
        assert_eq!(&px[0..3], &[255, 0, 0]);
        assert_eq!(&px[3..6], &[0, 0, 255]);
        assert_eq!(&px[6..12], &[255; 6]);
    }

    #[test]
    fn write_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("x.ppm");
        let err = write_ppm(&Grid::new(2, Layout::Halo), &bad).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }
}
