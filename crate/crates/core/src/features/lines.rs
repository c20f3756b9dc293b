//! Lines perpendicular to the diagonal and the antidiagonal.
//!
//! Every family is indexed by `n` in `1..=16` and walks its line by an
//! offset `k ≥ 0` measured from the (anti)diagonal:
//!
//! | family           | cell at offset `k`         |
//! |------------------|----------------------------|
//! | upper diagonal   | `(2n−1−k, 2n−1+k)`         |
//! | lower diagonal   | `(2n+k, 2n−k)`             |
//! | upper antidiag.  | `(2n−k, 33−2n−k)`          |
//! | lower antidiag.  | `(2n−1+k, 34−2n+k)`        |
//!
//! `k` ranges over the offsets admitted by each family's two bounds, which
//! keep the line on the board.

use std::fmt;

use crate::error::{Error, Result};

pub const LINES_PER_FAMILY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineFamily {
    UpperDiagonal,
    LowerDiagonal,
    UpperAntidiagonal,
    LowerAntidiagonal,
}

impl LineFamily {
    pub const ALL: [LineFamily; 4] = [
        LineFamily::UpperDiagonal,
        LineFamily::LowerDiagonal,
        LineFamily::UpperAntidiagonal,
        LineFamily::LowerAntidiagonal,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based `(row, col)` of offset `k` on line `n`, without bound checks.
    fn cell_at(self, n: i32, k: i32) -> (i32, i32) {
        match self {
            LineFamily::UpperDiagonal => (2 * n - 1 - k, 2 * n - 1 + k),
            LineFamily::LowerDiagonal => (2 * n + k, 2 * n - k),
            LineFamily::UpperAntidiagonal => (2 * n - k, 33 - 2 * n - k),
            LineFamily::LowerAntidiagonal => (2 * n - 1 + k, 34 - 2 * n + k),
        }
    }

    /// The two summation bounds of each family, as stated in the definitions.
    fn admits(self, n: i32, k: i32) -> bool {
        k >= 0
            && match self {
                LineFamily::UpperDiagonal => 2 * n - 1 - k >= 1 && 2 * n - 1 + k <= 32,
                LineFamily::LowerDiagonal => 2 * n - k >= 1 && 2 * n + k <= 32,
                LineFamily::UpperAntidiagonal => 2 * n - k >= 1 && 33 - 2 * n - k >= 1,
                LineFamily::LowerAntidiagonal => 2 * n - 1 + k <= 32 && 34 - 2 * n + k <= 32,
            }
    }
}

impl fmt::Display for LineFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineFamily::UpperDiagonal => "upper-diag",
            LineFamily::LowerDiagonal => "lower-diag",
            LineFamily::UpperAntidiagonal => "upper-antidiag",
            LineFamily::LowerAntidiagonal => "lower-antidiag",
        })
    }
}

/// The cells of one line, ordered by ascending offset `k` (one-based coordinates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSpec {
    pub family: LineFamily,
    pub n: usize,
    pub cells: Vec<(usize, usize)>,
}

impl LineSpec {
    /// `L(n)`, the number of cells on the line.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn line_cells(family: LineFamily, n: usize) -> Result<LineSpec> {
    if !(1..=LINES_PER_FAMILY).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "line index {n} outside 1..={LINES_PER_FAMILY}"
        )));
    }
    let n = n as i32;
    let cells = (0..=32)
        .filter(|&k| family.admits(n, k))
        .map(|k| family.cell_at(n, k))
        .map(|(l, m)| (l as usize, m as usize))
        .collect();
    Ok(LineSpec {
        family,
        n: n as usize,
        cells,
    })
}

/// `L(n)` for every line of a family.
pub fn line_lengths(family: LineFamily) -> [usize; LINES_PER_FAMILY] {
    std::array::from_fn(|i| line_cells(family, i + 1).expect("n in range").len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_lines() {
        assert_eq!(
            line_cells(LineFamily::UpperDiagonal, 1).unwrap().cells,
            vec![(1, 1)]
        );
        assert_eq!(
            line_cells(LineFamily::LowerDiagonal, 1).unwrap().cells,
            vec![(2, 2), (3, 1)]
        );
        assert_eq!(
            line_cells(LineFamily::UpperAntidiagonal, 16).unwrap().cells,
            vec![(32, 1)]
        );
        assert_eq!(
            line_cells(LineFamily::LowerAntidiagonal, 1).unwrap().cells,
            vec![(1, 32)]
        );
    }

    #[test]
    fn rejects_out_of_range_index() {
        for family in LineFamily::ALL {
            assert!(line_cells(family, 0).is_err());
            assert!(line_cells(family, 17).is_err());
        }
    }

    /// The two stated bounds per family are equivalent to "both coordinates
    /// on the board", checked over a generous range of offsets.
    #[test]
    fn stated_bounds_equal_board_bounds() {
        for family in LineFamily::ALL {
            for n in 1..=16 {
                let filtered: Vec<_> = (0..100)
                    .map(|k| family.cell_at(n, k))
                    .filter(|&(l, m)| (1..=32).contains(&l) && (1..=32).contains(&m))
                    .map(|(l, m)| (l as usize, m as usize))
                    .collect();
                assert_eq!(line_cells(family, n as usize).unwrap().cells, filtered);
            }
        }
    }

    #[test]
    fn no_cell_lies_on_two_lines_of_one_orientation() {
        // Odd-indexed perpendiculars of the diagonal live in the upper
        // triangle, even-indexed ones in the lower triangle (and the mirror
        // image for the antidiagonal), so each orientation covers only part
        // of the board.
        let mut diag = [[0u8; 32]; 32];
        let mut anti = [[0u8; 32]; 32];
        for family in LineFamily::ALL {
            for n in 1..=16 {
                for (l, m) in line_cells(family, n).unwrap().cells {
                    let grid = match family {
                        LineFamily::UpperDiagonal | LineFamily::LowerDiagonal => &mut diag,
                        _ => &mut anti,
                    };
                    grid[l - 1][m - 1] += 1;
                }
            }
        }
        for l in 1..=32i32 {
            for m in 1..=32i32 {
                let (s, d) = (l + m, l - m);
                let on_diag = (s % 4 == 2 && l <= m) || (s % 4 == 0 && l >= m);
                let on_anti = (s <= 33 && d.rem_euclid(4) == 3) || (s >= 33 && d.rem_euclid(4) == 1);
                assert_eq!(diag[l as usize - 1][m as usize - 1], on_diag as u8, "({l},{m})");
                assert_eq!(anti[l as usize - 1][m as usize - 1], on_anti as u8, "({l},{m})");
            }
        }
    }
}
