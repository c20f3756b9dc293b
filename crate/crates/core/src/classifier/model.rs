use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit_with_rng, squared_distance, KMeansParams};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM, FEATURE_LAYOUT_VERSION};

/// Character set a model (or dataset split) covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Digits,
    Uppercase,
    Lowercase,
    /// Whatever labels the training data carries.
    Custom,
}

impl Category {
    /// Expected class labels, `None` for [`Category::Custom`].
    pub fn alphabet(self) -> Option<Vec<String>> {
        let range = match self {
            Category::Digits => '0'..='9',
            Category::Uppercase => 'A'..='Z',
            Category::Lowercase => 'a'..='z',
            Category::Custom => return None,
        };
        Some(range.map(String::from).collect())
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Category::Digits => 0,
            Category::Uppercase => 1,
            Category::Lowercase => 2,
            Category::Custom => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Category::Digits,
            1 => Category::Uppercase,
            2 => Category::Lowercase,
            3 => Category::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Digits => "digits",
            Category::Uppercase => "uppercase",
            Category::Lowercase => "lowercase",
            Category::Custom => "custom",
        })
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "digits" => Ok(Category::Digits),
            "uppercase" => Ok(Category::Uppercase),
            "lowercase" => Ok(Category::Lowercase),
            "custom" => Ok(Category::Custom),
            other => Err(Error::InvalidArgument(format!("unknown category {other:?}"))),
        }
    }
}

/// A feature vector with its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub label: String,
    pub features: FeatureVector,
}

impl LabeledVector {
    pub fn new(label: impl Into<String>, features: FeatureVector) -> Self {
        Self {
            label: label.into(),
            features,
        }
    }
}

/// The k-means centroids of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub label: String,
    /// Requested cluster count.
    pub k: usize,
    pub training_count: usize,
    pub centroids: Vec<Vec<f64>>,
}

impl Codebook {
    /// Smallest squared distance from `v` to any centroid.
    fn nearest_squared(&self, v: &[f64]) -> f64 {
        self.centroids
            .iter()
            .map(|c| squared_distance(v, c))
            .fold(f64::INFINITY, f64::min)
    }

    fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::InvalidArgument("codebook label is empty".into()));
        }
        if self.centroids.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "codebook {:?} has no centroids",
                self.label
            )));
        }
        if self.centroids.len() > self.k.min(self.training_count) {
            return Err(Error::InvalidArgument(format!(
                "codebook {:?} has {} centroids for k = {} and {} samples",
                self.label,
                self.centroids.len(),
                self.k,
                self.training_count
            )));
        }
        if let Some(c) = self.centroids.iter().find(|c| c.len() != FEATURE_DIM) {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_DIM,
                found: c.len(),
            });
        }
        Ok(())
    }
}

/// Per-class codebooks, kept sorted by label.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    category: Category,
    feature_layout_version: u32,
    seed: u64,
    codebooks: Vec<Codebook>,
}

impl Model {
    pub fn new(category: Category, seed: u64, mut codebooks: Vec<Codebook>) -> Result<Self> {
        if codebooks.is_empty() {
            return Err(Error::InvalidArgument("a model needs at least one class".into()));
        }
        for cb in &codebooks {
            cb.validate()?;
        }
        codebooks.sort_by(|a, b| a.label.cmp(&b.label));
        if let Some(w) = codebooks.windows(2).find(|w| w[0].label == w[1].label) {
            return Err(Error::InvalidArgument(format!(
                "duplicate class label {:?}",
                w[0].label
            )));
        }
        Ok(Self {
            category,
            feature_layout_version: FEATURE_LAYOUT_VERSION,
            seed,
            codebooks,
        })
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn feature_layout_version(&self) -> u32 {
        self.feature_layout_version
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.codebooks.iter().map(|cb| cb.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.codebooks
            .binary_search_by(|cb| cb.label.as_str().cmp(label))
            .is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub label: String,
    pub distance: f64,
}

/// Classes ranked by ascending distance, each at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedChoices {
    pub choices: Vec<Choice>,
}

impl RankedChoices {
    pub fn first(&self) -> &Choice {
        &self.choices[0]
    }

    /// Zero-based rank of `label`, if it made the list.
    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.choices.iter().position(|c| c.label == label)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Fits one codebook per class, each with its own PRNG stream derived from
/// `params.seed` and the class's position in label order.
///
/// For a fixed category every label of its alphabet must be present; a
/// [`Category::Custom`] model takes the labels found in `samples`.
pub fn train(samples: &[LabeledVector], category: Category, params: &KMeansParams) -> Result<Model> {
    params.validate()?;
    let mut by_label: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for s in samples {
        by_label
            .entry(s.label.as_str())
            .or_default()
            .push(s.features.to_f64());
    }
    if let Some(alphabet) = category.alphabet() {
        if let Some(missing) = alphabet.iter().find(|l| !by_label.contains_key(l.as_str())) {
            return Err(Error::InvalidDataset(format!(
                "class {missing:?} has no training samples"
            )));
        }
        let known: BTreeSet<&str> = alphabet.iter().map(String::as_str).collect();
        if let Some(stray) = by_label.keys().find(|l| !known.contains(*l)) {
            return Err(Error::InvalidDataset(format!(
                "label {stray:?} is not part of the {category} alphabet"
            )));
        }
    } else if by_label.is_empty() {
        return Err(Error::InvalidDataset("no training samples".into()));
    }
    if let Some(empty) = by_label.keys().find(|l| l.is_empty()) {
        return Err(Error::InvalidDataset(format!("empty class label {empty:?}")));
    }

    let classes: Vec<(&str, Vec<Vec<f64>>)> = by_label.into_iter().collect();
    let codebooks = classes
        .par_iter()
        .enumerate()
        .map(|(stream, (label, points))| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(stream as u64);
            let fit = kmeans_fit_with_rng(points, params, &mut rng)?;
            Ok(Codebook {
                label: label.to_string(),
                k: params.k,
                training_count: points.len(),
                centroids: fit.centroids,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Model::new(category, params.seed, codebooks)
}

/// The `t` classes whose nearest centroid is closest to `v`, ascending by
/// distance, ties broken by label.
pub fn classify(model: &Model, v: &FeatureVector, t: usize) -> Result<RankedChoices> {
    classify_values(model, &v.to_f64(), t)
}

pub fn classify_values(model: &Model, v: &[f64], t: usize) -> Result<RankedChoices> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    if v.len() != FEATURE_DIM {
        return Err(Error::DimensionMismatch {
            expected: FEATURE_DIM,
            found: v.len(),
        });
    }
    let mut scored: Vec<(f64, &str)> = model
        .codebooks
        .iter()
        .map(|cb| (cb.nearest_squared(v), cb.label.as_str()))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    scored.truncate(t);
    Ok(RankedChoices {
        choices: scored
            .into_iter()
            .map(|(d2, label)| Choice {
                label: label.to_string(),
                distance: d2.sqrt(),
            })
            .collect(),
    })
}
