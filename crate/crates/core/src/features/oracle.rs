//! Reference implementation of the feature map by direct enumeration.
//!
//! Each feature is computed straight from its definition: sum the stated row
//! or column range, or walk the cells returned by [`line_cells`] and count
//! ink / pick the extreme ink offsets. Nothing here shares code with the
//! single-pass extractor; it exists to check it.

use super::{line_cells, FeatureVector, LineFamily, FEATURE_DIM, NO_INK};
use crate::preprocess::CharMatrix;

pub fn oracle_extract(matrix: &CharMatrix) -> FeatureVector {
    let f = |l: usize, m: usize| i32::from(matrix.f(l, m));
    let mut out = Vec::with_capacity(FEATURE_DIM);

    // H_hl(n) = Σ_{m=1}^{16} f(2n, m)
    out.extend((1..=16).map(|n| (1..=16).map(|m| f(2 * n, m)).sum::<i32>()));
    // H_hr(n) = Σ_{m=16}^{32} f(2n−1, m)
    out.extend((1..=16).map(|n| (16..=32).map(|m| f(2 * n - 1, m)).sum::<i32>()));
    // H_vu(n) = Σ_{m=1}^{16} f(m, 2n)
    out.extend((1..=16).map(|n| (1..=16).map(|m| f(m, 2 * n)).sum::<i32>()));
    // H_vl(n) = Σ_{m=16}^{32} f(m, 2n−1)
    out.extend((1..=16).map(|n| (16..=32).map(|m| f(m, 2 * n - 1)).sum::<i32>()));

    let lines: Vec<Vec<Vec<i32>>> = LineFamily::ALL
        .iter()
        .map(|&family| {
            (1..=16)
                .map(|n| {
                    line_cells(family, n)
                        .expect("n in range")
                        .cells
                        .iter()
                        .map(|&(l, m)| f(l, m))
                        .collect()
                })
                .collect()
        })
        .collect();

    for family in &lines {
        out.extend(family.iter().map(|line| line.iter().sum::<i32>()));
    }
    // Out-in: the offset I with ink at I and none beyond it.
    for family in &lines {
        out.extend(family.iter().map(|line| {
            (0..line.len())
                .find(|&i| line[i] == 1 && line[i + 1..].iter().all(|&v| v == 0))
                .map_or(NO_INK, |i| i as i32)
        }));
    }
    // In-out: the offset I with ink at I and none before it.
    for family in &lines {
        out.extend(family.iter().map(|line| {
            (0..line.len())
                .find(|&i| line[i] == 1 && line[..i].iter().all(|&v| v == 0))
                .map_or(NO_INK, |i| i as i32)
        }));
    }

    FeatureVector::from_array(out.try_into().expect("256 features"))
}
