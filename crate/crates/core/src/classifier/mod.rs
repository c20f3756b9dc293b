//! Per-class k-means codebooks and nearest-centroid classification.

pub mod kmeans;
mod model;
mod model_io;

pub use kmeans::{kmeans_fit, kmeans_fit_with_rng, KMeansFit, KMeansParams};
pub use model::{
    classify, classify_values, train, Category, Choice, Codebook, LabeledVector, Model,
    RankedChoices,
};
pub use model_io::{load_model, save_model, MODEL_FORMAT_VERSION, MODEL_MAGIC};
