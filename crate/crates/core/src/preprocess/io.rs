use std::path::Path;

use super::{prepare, CharMatrix, GrayImage, ThresholdMode, SIDE};
use crate::error::{Error, Result};

/// How an input file is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// PNG/BMP (anything the `image` crate decodes), converted to 8-bit luma.
    Image,
    /// A pre-binarized `.txt` matrix: 32 lines of 32 `'0'`/`'1'` characters.
    MatrixText,
}

impl InputKind {
    pub fn of(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("txt") => InputKind::MatrixText,
            _ => InputKind::Image,
        }
    }
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.into_raw())
}

pub fn parse_matrix_text(text: &str) -> Result<CharMatrix> {
    let mut rows = [[0u8; SIDE]; SIDE];
    let mut count = 0;
    for (i, line) in text.lines().enumerate() {
        if i >= SIDE {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::InvalidInput(format!(
                "matrix text has more than {SIDE} rows"
            )));
        }
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.len() != SIDE {
            return Err(Error::InvalidInput(format!(
                "matrix row {} has {} characters, expected {SIDE}",
                i + 1,
                line.len()
            )));
        }
        for (j, ch) in line.chars().enumerate() {
            rows[i][j] = match ch {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "matrix row {} column {}: unexpected {other:?}",
                        i + 1,
                        j + 1
                    )))
                }
            };
        }
        count += 1;
    }
    if count != SIDE {
        return Err(Error::InvalidInput(format!(
            "matrix text has {count} rows, expected {SIDE}"
        )));
    }
    CharMatrix::from_rows(rows)
}

pub fn read_matrix_text(path: &Path) -> Result<CharMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_text(&text)
}

/// Loads a character matrix from either an image (run through
/// [`prepare`]) or a `.txt` matrix file.
pub fn load_char_matrix(path: &Path, mode: ThresholdMode) -> Result<CharMatrix> {
    match InputKind::of(path) {
        InputKind::MatrixText => read_matrix_text(path),
        InputKind::Image => prepare(&load_gray(path)?, mode),
    }
}
