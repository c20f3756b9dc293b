//! The 256-dimensional structural feature vector.
//!
//! Sixteen segments of sixteen integers each, in this fixed order:
//!
//! | #  | segment  | value at index `n` (1..=16)                                  |
//! |----|----------|--------------------------------------------------------------|
//! | 0  | `H_hl`   | ink in row `2n`, columns 1..=16                              |
//! | 1  | `H_hr`   | ink in row `2n−1`, columns 16..=32                           |
//! | 2  | `H_vu`   | ink in column `2n`, rows 1..=16                              |
//! | 3  | `H_vl`   | ink in column `2n−1`, rows 16..=32                           |
//! | 4  | `H_ud`   | ink on upper-diagonal line `n`                               |
//! | 5  | `H_ld`   | ink on lower-diagonal line `n`                               |
//! | 6  | `H_uad`  | ink on upper-antidiagonal line `n`                           |
//! | 7  | `H_lad`  | ink on lower-antidiagonal line `n`                           |
//! | 8  | `P_oiud` | largest ink offset on upper-diagonal line `n`                |
//! | 9  | `P_oild` | largest ink offset on lower-diagonal line `n`                |
//! | 10 | `P_oiuad`| largest ink offset on upper-antidiagonal line `n`            |
//! | 11 | `P_oilad`| largest ink offset on lower-antidiagonal line `n`            |
//! | 12 | `P_ioud` | smallest ink offset on upper-diagonal line `n`               |
//! | 13 | `P_iold` | smallest ink offset on lower-diagonal line `n`               |
//! | 14 | `P_iouad`| smallest ink offset on upper-antidiagonal line `n`           |
//! | 15 | `P_iolad`| smallest ink offset on lower-antidiagonal line `n`           |
//!
//! The right and lower half-histograms start at column/row 16, so they span
//! 17 cells and share column/row 16 with the left and upper halves. Profiles
//! are `-1` on lines without ink.
//!
//! [`extract`] walks the matrix once and maps each black cell to the lines
//! through it. [`oracle::oracle_extract`] goes the other way, enumerating
//! every line with [`line_cells`]; the two are checked against each other.

mod lines;
pub mod oracle;

pub use lines::{line_cells, line_lengths, LineFamily, LineSpec, LINES_PER_FAMILY};

use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use crate::preprocess::{CharMatrix, SIDE};

/// Number of features per character.
pub const FEATURE_DIM: usize = 256;

/// Version tag of the segment layout, stored in model files.
pub const FEATURE_LAYOUT_VERSION: u32 = 1;

/// Value of a profile on a line with no ink.
pub const NO_INK: i32 = -1;

type Segment16 = [i32; LINES_PER_FAMILY];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    HorizontalLeft,
    HorizontalRight,
    VerticalUpper,
    VerticalLower,
    UpperDiagonal,
    LowerDiagonal,
    UpperAntidiagonal,
    LowerAntidiagonal,
    OutInUpperDiagonal,
    OutInLowerDiagonal,
    OutInUpperAntidiagonal,
    OutInLowerAntidiagonal,
    InOutUpperDiagonal,
    InOutLowerDiagonal,
    InOutUpperAntidiagonal,
    InOutLowerAntidiagonal,
}

impl Segment {
    pub const ALL: [Segment; 16] = [
        Segment::HorizontalLeft,
        Segment::HorizontalRight,
        Segment::VerticalUpper,
        Segment::VerticalLower,
        Segment::UpperDiagonal,
        Segment::LowerDiagonal,
        Segment::UpperAntidiagonal,
        Segment::LowerAntidiagonal,
        Segment::OutInUpperDiagonal,
        Segment::OutInLowerDiagonal,
        Segment::OutInUpperAntidiagonal,
        Segment::OutInLowerAntidiagonal,
        Segment::InOutUpperDiagonal,
        Segment::InOutLowerDiagonal,
        Segment::InOutUpperAntidiagonal,
        Segment::InOutLowerAntidiagonal,
    ];

    /// Position of the segment in the layout.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Offset of the segment's first value in a [`FeatureVector`].
    pub fn offset(self) -> usize {
        self.index() * LINES_PER_FAMILY
    }

    pub fn name(self) -> &'static str {
        match self {
            Segment::HorizontalLeft => "H_hl",
            Segment::HorizontalRight => "H_hr",
            Segment::VerticalUpper => "H_vu",
            Segment::VerticalLower => "H_vl",
            Segment::UpperDiagonal => "H_ud",
            Segment::LowerDiagonal => "H_ld",
            Segment::UpperAntidiagonal => "H_uad",
            Segment::LowerAntidiagonal => "H_lad",
            Segment::OutInUpperDiagonal => "P_oiud",
            Segment::OutInLowerDiagonal => "P_oild",
            Segment::OutInUpperAntidiagonal => "P_oiuad",
            Segment::OutInLowerAntidiagonal => "P_oilad",
            Segment::InOutUpperDiagonal => "P_ioud",
            Segment::InOutLowerDiagonal => "P_iold",
            Segment::InOutUpperAntidiagonal => "P_iouad",
            Segment::InOutLowerAntidiagonal => "P_iolad",
        }
    }

    pub fn is_histogram(self) -> bool {
        self.index() < 8
    }

    /// The line family a diagonal/antidiagonal segment is measured on.
    pub fn line_family(self) -> Option<LineFamily> {
        match self.index() {
            0..=3 => None,
            i => Some(LineFamily::ALL[(i - 4) % 4]),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector([i32; FEATURE_DIM]);

impl FeatureVector {
    pub fn from_array(values: [i32; FEATURE_DIM]) -> Self {
        Self(values)
    }

    fn from_segments(segments: [Segment16; 16]) -> Self {
        let mut values = [0; FEATURE_DIM];
        for (chunk, segment) in values.chunks_exact_mut(LINES_PER_FAMILY).zip(segments) {
            chunk.copy_from_slice(&segment);
        }
        Self(values)
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        FEATURE_DIM
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn segment(&self, segment: Segment) -> &[i32] {
        &self.0[segment.offset()..segment.offset() + LINES_PER_FAMILY]
    }

    /// Value of `segment` at the one-based index `n`.
    pub fn get(&self, segment: Segment, n: usize) -> i32 {
        self.segment(segment)[n - 1]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }

    /// 256 comma-separated integers, no trailing newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(FEATURE_DIM * 3);
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out
    }

    /// One line per segment: name followed by its sixteen values.
    pub fn to_annotated(&self) -> String {
        let mut out = String::new();
        for segment in Segment::ALL {
            write!(out, "{:<8}", segment.name()).unwrap();
            for v in self.segment(segment) {
                write!(out, " {v:>3}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureVector[{}]", self.to_csv())
    }
}

/// Which line of each orientation passes through a cell, and at which offset.
#[derive(Debug, Clone, Copy)]
struct Membership {
    /// `(family index, n − 1, k)`
    diagonal: Option<(u8, u8, u8)>,
    antidiagonal: Option<(u8, u8, u8)>,
}

/// Inverse of the line parametrisation: with `s = l + m` and `d = l − m`,
/// upper-diagonal lines have `s = 4n − 2` (above the diagonal), lower-diagonal
/// lines `s = 4n` (below it), and the antidiagonal families have
/// `d = 4n − 33` with `s ≤ 33` and `d = 4n − 35` with `s ≥ 33`.
fn membership_table() -> &'static [[Membership; SIDE]; SIDE] {
    static TABLE: OnceLock<[[Membership; SIDE]; SIDE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let (l, m) = (r as i32 + 1, c as i32 + 1);
                let (s, d) = (l + m, l - m);
                let diagonal = if s % 4 == 2 && l <= m {
                    Some((0, (s + 2) / 4 - 1, (m - l) / 2))
                } else if s % 4 == 0 && l >= m {
                    Some((1, s / 4 - 1, (l - m) / 2))
                } else {
                    None
                };
                let antidiagonal = if s <= 33 && (d + 33) % 4 == 0 {
                    Some((2, (d + 33) / 4 - 1, (33 - s) / 2))
                } else if s >= 33 && (d + 35) % 4 == 0 {
                    Some((3, (d + 35) / 4 - 1, (s - 33) / 2))
                } else {
                    None
                };
                let pack = |v: Option<(i32, i32, i32)>| v.map(|(f, n, k)| (f as u8, n as u8, k as u8));
                Membership {
                    diagonal: pack(diagonal),
                    antidiagonal: pack(antidiagonal),
                }
            })
        })
    })
}

/// Everything [`extract`] needs, gathered in one pass.
struct Scan {
    horizontal_left: Segment16,
    horizontal_right: Segment16,
    vertical_upper: Segment16,
    vertical_lower: Segment16,
    /// Indexed by [`LineFamily::index`].
    counts: [Segment16; 4],
    nearest: [Segment16; 4],
    farthest: [Segment16; 4],
}

impl Scan {
    fn run(matrix: &CharMatrix) -> Self {
        let mut scan = Scan {
            horizontal_left: [0; 16],
            horizontal_right: [0; 16],
            vertical_upper: [0; 16],
            vertical_lower: [0; 16],
            counts: [[0; 16]; 4],
            nearest: [[NO_INK; 16]; 4],
            farthest: [[NO_INK; 16]; 4],
        };
        let table = membership_table();
        for (r, row) in matrix.rows().iter().enumerate() {
            for (c, _) in row.iter().enumerate().filter(|(_, &b)| b == 1) {
                // One-based row l = r + 1, column m = c + 1.
                let (l, m) = (r + 1, c + 1);
                if l % 2 == 0 && m <= 16 {
                    scan.horizontal_left[l / 2 - 1] += 1;
                }
                if l % 2 == 1 && m >= 16 {
                    scan.horizontal_right[l / 2] += 1;
                }
                if m % 2 == 0 && l <= 16 {
                    scan.vertical_upper[m / 2 - 1] += 1;
                }
                if m % 2 == 1 && l >= 16 {
                    scan.vertical_lower[m / 2] += 1;
                }
                let cell = table[r][c];
                for (family, n, k) in [cell.diagonal, cell.antidiagonal].into_iter().flatten() {
                    let (family, n, k) = (family as usize, n as usize, k as i32);
                    scan.counts[family][n] += 1;
                    let nearest = &mut scan.nearest[family][n];
                    if *nearest == NO_INK || k < *nearest {
                        *nearest = k;
                    }
                    let farthest = &mut scan.farthest[family][n];
                    *farthest = (*farthest).max(k);
                }
            }
        }
        scan
    }
}

/// `(H_hl, H_hr)`
pub fn horizontal_histograms(matrix: &CharMatrix) -> (Segment16, Segment16) {
    let scan = Scan::run(matrix);
    (scan.horizontal_left, scan.horizontal_right)
}

/// `(H_vu, H_vl)`
pub fn vertical_histograms(matrix: &CharMatrix) -> (Segment16, Segment16) {
    let scan = Scan::run(matrix);
    (scan.vertical_upper, scan.vertical_lower)
}

/// `(H_ud, H_ld)`
pub fn diagonal_histograms(matrix: &CharMatrix) -> (Segment16, Segment16) {
    let scan = Scan::run(matrix);
    (scan.counts[0], scan.counts[1])
}

/// `(H_uad, H_lad)`
pub fn antidiagonal_histograms(matrix: &CharMatrix) -> (Segment16, Segment16) {
    let scan = Scan::run(matrix);
    (scan.counts[2], scan.counts[3])
}

/// `(P_oiud, P_oild, P_oiuad, P_oilad)`: offset of the first ink met when
/// walking each line from the border toward the (anti)diagonal.
pub fn out_in_profiles(matrix: &CharMatrix) -> [Segment16; 4] {
    Scan::run(matrix).farthest
}

/// `(P_ioud, P_iold, P_iouad, P_iolad)`: offset of the first ink met when
/// walking each line from the (anti)diagonal toward the border.
pub fn in_out_profiles(matrix: &CharMatrix) -> [Segment16; 4] {
    Scan::run(matrix).nearest
}

pub fn extract(matrix: &CharMatrix) -> FeatureVector {
    let scan = Scan::run(matrix);
    let [ud, ld, uad, lad] = scan.counts;
    let [oiud, oild, oiuad, oilad] = scan.farthest;
    let [ioud, iold, iouad, iolad] = scan.nearest;
    FeatureVector::from_segments([
        scan.horizontal_left,
        scan.horizontal_right,
        scan.vertical_upper,
        scan.vertical_lower,
        ud,
        ld,
        uad,
        lad,
        oiud,
        oild,
        oiuad,
        oilad,
        ioud,
        iold,
        iouad,
        iolad,
    ])
}
