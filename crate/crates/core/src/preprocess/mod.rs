//! Raw grayscale scans to normalized 32×32 binary character matrices.
//!
//! The pipeline is `binarize` → `crop_to_content` → `normalize_32`; [`prepare`]
//! runs all three. Ink is black, black is `1`, and black means a *low*
//! intensity (white-background scans).

mod io;

pub use io::{load_char_matrix, load_gray, parse_matrix_text, read_matrix_text, InputKind};

use std::fmt;

use crate::error::{Error, Result};

/// Side length of a [`CharMatrix`].
pub const SIDE: usize = 32;

/// Fixed threshold used when Otsu's method has nothing to separate.
pub const FALLBACK_THRESHOLD: u8 = 128;

/// Default fraction of a preimage block that must be ink for a downscaled cell to be black.
pub const DEFAULT_COVERAGE: f64 = 0.5;

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{}x{} image needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }
}

/// A binary image, row-major, `1` = ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl Bitmap {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{}x{} bitmap needs {} bits, got {}",
                width,
                height,
                width * height,
                bits.len()
            )));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidInput(format!("bitmap entry {bad} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// An all-white bitmap.
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Zero-based access.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.width + col]
    }

    /// Zero-based write; `value` is truncated to its lowest bit.
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.bits[row * self.width + col] = value & 1;
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// The normalized 32×32 character matrix.
///
/// Entries are addressed either zero-based through [`CharMatrix::get`] or
/// one-based through [`CharMatrix::f`], which mirrors the `f(l, m)` map used
/// by the feature definitions (row `l`, column `m`, both in `1..=32`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharMatrix {
    rows: [[u8; SIDE]; SIDE],
}

impl CharMatrix {
    pub fn blank() -> Self {
        Self {
            rows: [[0; SIDE]; SIDE],
        }
    }

    pub fn filled() -> Self {
        Self {
            rows: [[1; SIDE]; SIDE],
        }
    }

    pub fn from_rows(rows: [[u8; SIDE]; SIDE]) -> Result<Self> {
        if rows.iter().flatten().any(|&b| b > 1) {
            return Err(Error::InvalidInput(
                "character matrix entries must be 0 or 1".into(),
            ));
        }
        Ok(Self { rows })
    }

    /// Builds a matrix from a predicate over zero-based `(row, col)`.
    pub fn from_fn(mut ink: impl FnMut(usize, usize) -> bool) -> Self {
        let mut rows = [[0; SIDE]; SIDE];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = ink(r, c) as u8;
            }
        }
        Self { rows }
    }

    pub fn from_bitmap(bmp: &Bitmap) -> Result<Self> {
        if bmp.width() != SIDE || bmp.height() != SIDE {
            return Err(Error::InvalidInput(format!(
                "expected a {SIDE}x{SIDE} bitmap, got {}x{}",
                bmp.width(),
                bmp.height()
            )));
        }
        Ok(Self::from_fn(|r, c| bmp.get(r, c) == 1))
    }

    /// Zero-based access.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.rows[row][col]
    }

    /// One-based access, `l` and `m` in `1..=32`.
    #[inline]
    pub fn f(&self, l: usize, m: usize) -> u8 {
        self.rows[l - 1][m - 1]
    }

    /// Zero-based write.
    pub fn set(&mut self, row: usize, col: usize, black: bool) {
        self.rows[row][col] = black as u8;
    }

    pub fn rows(&self) -> &[[u8; SIDE]; SIDE] {
        &self.rows
    }

    pub fn ink_count(&self) -> usize {
        self.rows.iter().flatten().filter(|&&b| b == 1).count()
    }

    /// Cellwise OR.
    pub fn union(&self, other: &CharMatrix) -> CharMatrix {
        CharMatrix::from_fn(|r, c| self.get(r, c) == 1 || other.get(r, c) == 1)
    }

    /// 32 lines of 32 `'0'`/`'1'` characters, each newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(SIDE * (SIDE + 1));
        for row in &self.rows {
            out.extend(row.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

impl Default for CharMatrix {
    fn default() -> Self {
        Self::blank()
    }
}

impl fmt::Debug for CharMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CharMatrix [")?;
        for row in &self.rows {
            let line: String = row.iter().map(|&b| if b == 1 { '#' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// How [`binarize`] picks its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// Otsu's global threshold.
    #[default]
    Otsu,
    /// Pixels with intensity strictly below `t` become ink.
    Fixed(u8),
}

/// Otsu's threshold as a strict upper bound for ink: pixels with intensity
/// `< t` are black. Uniform images have no between-class variance and fall
/// back to [`FALLBACK_THRESHOLD`].
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let mut histogram = [0u64; 256];
    for &s in img.samples() {
        histogram[s as usize] += 1;
    }
    let total = img.samples().len() as f64;
    let weighted_total: f64 = histogram
        .iter()
        .enumerate()
        .map(|(i, &n)| i as f64 * n as f64)
        .sum();

    let mut best: Option<(usize, f64)> = None;
    let mut weight_low = 0.0;
    let mut sum_low = 0.0;
    // Class "low" is [0, i]; the returned threshold is i + 1.
    for (i, &count) in histogram.iter().enumerate().take(255) {
        weight_low += count as f64;
        sum_low += i as f64 * count as f64;
        let weight_high = total - weight_low;
        if weight_low == 0.0 || weight_high == 0.0 {
            continue;
        }
        let mean_low = sum_low / weight_low;
        let mean_high = (weighted_total - sum_low) / weight_high;
        let between = weight_low * weight_high * (mean_low - mean_high).powi(2);
        if best.is_none_or(|(_, v)| between > v) {
            best = Some((i, between));
        }
    }
    match best {
        Some((i, _)) => (i + 1) as u8,
        None => FALLBACK_THRESHOLD,
    }
}

pub fn binarize(img: &GrayImage, mode: ThresholdMode) -> Result<Bitmap> {
    if img.is_empty() {
        return Err(Error::InvalidInput("cannot binarize an empty image".into()));
    }
    let threshold = match mode {
        ThresholdMode::Otsu => otsu_threshold(img),
        ThresholdMode::Fixed(t) => t,
    };
    let bits = img.samples().iter().map(|&s| (s < threshold) as u8).collect();
    Ok(Bitmap {
        width: img.width(),
        height: img.height(),
        bits,
    })
}

/// Result of [`crop_to_content`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cropped {
    pub bitmap: Bitmap,
    /// The input had no ink and was returned unchanged.
    pub empty: bool,
}

/// Crops to the tight bounding box of the ink.
pub fn crop_to_content(bmp: &Bitmap) -> Cropped {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for r in 0..bmp.height() {
        for c in 0..bmp.width() {
            if bmp.get(r, c) == 1 {
                let (r0, r1, c0, c1) = bounds.get_or_insert((r, r, c, c));
                *r0 = (*r0).min(r);
                *r1 = (*r1).max(r);
                *c0 = (*c0).min(c);
                *c1 = (*c1).max(c);
            }
        }
    }
    let Some((r0, r1, c0, c1)) = bounds else {
        return Cropped {
            bitmap: bmp.clone(),
            empty: true,
        };
    };
    let width = c1 - c0 + 1;
    let height = r1 - r0 + 1;
    let mut bits = Vec::with_capacity(width * height);
    for r in r0..=r1 {
        bits.extend_from_slice(&bmp.bits()[r * bmp.width() + c0..=r * bmp.width() + c1]);
    }
    Cropped {
        bitmap: Bitmap {
            width,
            height,
            bits,
        },
        empty: false,
    }
}

/// Source pixels feeding output index `out` along one axis, with integer
/// weights. Downscaling (and the identity) uses exact area overlap measured
/// in 1/32-pixel units; upscaling picks the nearest source pixel.
fn axis_weights(src_len: usize, out: usize) -> Vec<(usize, u64)> {
    if src_len >= SIDE {
        let lo = out * src_len;
        let hi = (out + 1) * src_len;
        (lo / SIDE..hi.div_ceil(SIDE))
            .filter_map(|i| {
                let overlap = hi.min((i + 1) * SIDE).saturating_sub(lo.max(i * SIDE));
                (overlap > 0).then_some((i, overlap as u64))
            })
            .collect()
    } else {
        vec![((2 * out + 1) * src_len / (2 * SIDE), 1)]
    }
}

/// Resamples to 32×32 with the default 0.5 coverage threshold.
pub fn normalize_32(bmp: &Bitmap) -> Result<CharMatrix> {
    normalize_32_with(bmp, DEFAULT_COVERAGE)
}

/// Resamples to 32×32. A cell is black when the ink fraction of its preimage
/// is at least `coverage`. If that erases every black pixel, the single cell
/// with the most ink (first in row-major order) is kept black.
pub fn normalize_32_with(bmp: &Bitmap, coverage: f64) -> Result<CharMatrix> {
    if bmp.width() == 0 || bmp.height() == 0 || bmp.ink_count() == 0 {
        return Err(Error::InvalidInput(
            "cannot normalize a bitmap without ink".into(),
        ));
    }
    if !(0.0..=1.0).contains(&coverage) {
        return Err(Error::InvalidArgument(format!(
            "coverage threshold {coverage} outside [0, 1]"
        )));
    }
    let row_w: Vec<_> = (0..SIDE).map(|o| axis_weights(bmp.height(), o)).collect();
    let col_w: Vec<_> = (0..SIDE).map(|o| axis_weights(bmp.width(), o)).collect();

    let mut out = CharMatrix::blank();
    let mut densest: Option<((usize, usize), f64)> = None;
    for (l, rw) in row_w.iter().enumerate() {
        for (m, cw) in col_w.iter().enumerate() {
            let mut ink = 0u64;
            let mut area = 0u64;
            for &(r, wr) in rw {
                for &(c, wc) in cw {
                    area += wr * wc;
                    if bmp.get(r, c) == 1 {
                        ink += wr * wc;
                    }
                }
            }
            let fraction = ink as f64 / area as f64;
            if ink > 0 && fraction >= coverage {
                out.set(l, m, true);
            }
            if densest.is_none_or(|(_, best)| fraction > best) {
                densest = Some(((l, m), fraction));
            }
        }
    }
    if out.ink_count() == 0 {
        let ((l, m), _) = densest.expect("32x32 cells were visited");
        out.set(l, m, true);
    }
    Ok(out)
}

/// Binarize, crop and normalize a grayscale image.
pub fn prepare(img: &GrayImage, mode: ThresholdMode) -> Result<CharMatrix> {
    let bitmap = binarize(img, mode)?;
    let cropped = crop_to_content(&bitmap);
    if cropped.empty {
        return Err(Error::InvalidInput("image contains no ink".into()));
    }
    normalize_32(&cropped.bitmap)
}
