//! Boolean rasters and their `P1` text form.
//!
//! Cell `(i, j)` has column `i` and row `j`, with `j = 0` at the bottom. The
//! text form lists rows top first, as image formats do.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for j in 0..height {
            for i in 0..width {
                m.cells[j * width + i] = f(i, j);
            }
        }
        m
    }

    /// Builds a mask from flat row-major data (row 0 at the bottom).
    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::Invalid(format!(
                "{} cells given for a {width}x{height} mask",
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.width + i]
    }

    /// Like [`Mask::get`] but `false` outside the raster.
    #[inline]
    pub fn get_signed(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.width
            && (j as usize) < self.height
            && self.get(i as usize, j as usize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = self.width;
        self.cells[j * w + i] = v;
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [bool] {
        &mut self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Flat indices of the set cells, in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn and(&self, other: &Mask) -> Mask {
        assert!(self.same_shape(other));
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| *a && *b)
            .collect();
        Mask { cells, ..*self }
    }

    /// `self ∖ other`.
    pub fn minus(&self, other: &Mask) -> Mask {
        assert!(self.same_shape(other));
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| *a && !*b)
            .collect();
        Mask { cells, ..*self }
    }

    pub fn not(&self) -> Mask {
        let cells = self.cells.iter().map(|c| !c).collect();
        Mask { cells, ..*self }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.same_shape(other) && self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }

    /// Text raster: `P1`, then `width height`, then rows of `0`/`1`, top row first.
    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for j in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|i| if self.get(i, j) { "1" } else { "0" })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_pbm(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                tokens.push((ln + 1, tok));
            }
        }
        let mut it = tokens.into_iter();
        match it.next() {
            Some((_, "P1")) => {}
            Some((ln, t)) => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected P1 header, found {t:?}"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty raster".into(),
                })
            }
        }
        let mut dim = |what: &str| -> Result<usize> {
            let (ln, t) = it.next().ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("missing {what}"),
            })?;
            t.parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad {what} {t:?}"),
            })
        };
        let width = dim("width")?;
        let height = dim("height")?;
        let mut rows = Vec::with_capacity(width * height);
        for (ln, t) in it {
            // Rows may also be written without separators, as in "0110".
            for ch in t.chars() {
                match ch {
                    '0' => rows.push(false),
                    '1' => rows.push(true),
                    _ => {
                        return Err(Error::Parse {
                            line: ln,
                            msg: format!("unexpected raster symbol {ch:?}"),
                        })
                    }
                }
            }
        }
        if rows.len() != width * height {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("expected {} cells, found {}", width * height, rows.len()),
            });
        }
        Ok(Self::from_fn(width, height, |i, j| {
            rows[(height - 1 - j) * width + i]
        }))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_pbm(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pbm())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_roundtrip_keeps_orientation() {
        let m = Mask::from_fn(5, 3, |i, j| i == 0 && j == 0 || i == 4 && j == 2);
        let text = m.to_pbm();
        // bottom-left cell appears on the last line
        assert!(text.lines().last().unwrap().starts_with('1'));
        assert_eq!(Mask::parse_pbm(&text).unwrap(), m);
        let compact = "P1\n3 2\n110\n001\n";
        let c = Mask::parse_pbm(compact).unwrap();
        assert!(c.get(0, 1) && c.get(1, 1) && c.get(2, 0) && !c.get(0, 0));
    }

    #[test]
    fn malformed_rasters_are_rejected() {
        assert!(Mask::parse_pbm("P2\n1 1\n0\n").is_err());
        assert!(Mask::parse_pbm("P1\n2 2\n0 1 1\n").is_err());
        assert!(Mask::parse_pbm("P1\n1 1\n2\n").is_err());
    }
}
