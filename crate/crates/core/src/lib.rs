//! Handwritten character recognition from structural features.
//!
//! A character image is binarized and normalized to a 32×32 matrix
//! ([`preprocess`]), reduced to a 256-dimensional integer vector of
//! half-row/half-column histograms and (anti)diagonal histograms and profiles
//! ([`features`]), and classified against per-class k-means codebooks
//! ([`classifier`]). [`dataset`] and [`eval`] provide the corpus handling and
//! the 1st/2nd/3rd-choice accuracy harness.
//!
//! ```
//! use glyph_core::features::{extract, Segment};
//! use glyph_core::preprocess::CharMatrix;
//!
//! // A vertical bar through column 8.
//! let bar = CharMatrix::from_fn(|_, c| c == 7);
//! let v = extract(&bar);
//! assert_eq!(v.len(), 256);
//! assert_eq!(v.get(Segment::VerticalUpper, 4), 16);
//! ```

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod preprocess;

pub use error::{Error, Result};

// The guide's chapters are compiled as doctests so their snippets stay in
// step with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/kmeans.md")]
    mod kmeans {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/model-format.md")]
    mod model_format {}
}
