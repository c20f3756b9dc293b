//! Lloyd's k-means with k-means++ seeding.
//!
//! Fits are bitwise reproducible for a given seed: the PRNG is ChaCha8, the
//! assignment step is data-parallel but writes each point's result to its
//! own slot, and every reduction runs sequentially in point order.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 64;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the largest Euclidean centroid shift.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

impl KMeansParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be finite and non-negative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Fewer distinct points than `k`: one centroid per distinct point was returned.
    pub reduced: bool,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every assignment step, ending with the final centroids.
    pub inertia_trace: Vec<f64>,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().expect("trace is never empty")
    }
}

pub fn kmeans_fit(points: &[Vec<f64>], params: &KMeansParams) -> Result<KMeansFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    kmeans_fit_with_rng(points, params, &mut rng)
}

/// Same as [`kmeans_fit`], drawing the k-means++ seeds from `rng` instead of
/// a generator built from `params.seed`.
pub fn kmeans_fit_with_rng(
    points: &[Vec<f64>],
    params: &KMeansParams,
    rng: &mut impl Rng,
) -> Result<KMeansFit> {
    params.validate()?;
    let dim = check_points(points)?;
    let distinct = distinct_indices(points);

    if params.k >= distinct.len() {
        let centroids: Vec<Vec<f64>> = distinct.iter().map(|&i| points[i].clone()).collect();
        let (_, d2) = assign(points, &centroids);
        return Ok(KMeansFit {
            centroids,
            reduced: params.k > distinct.len(),
            iterations: 0,
            converged: true,
            inertia_trace: vec![d2.iter().sum()],
        });
    }

    let k = params.k;
    let mut centroids = kmeans_plus_plus(points, k, rng);
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        let (mut labels, mut d2) = assign(points, &centroids);
        reseed_empty(points, &mut centroids, &mut labels, &mut d2);
        inertia_trace.push(d2.iter().sum());

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in points.iter().zip(&labels) {
            counts[j] += 1;
            for (s, x) in sums[j].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut shift: f64 = 0.0;
        for ((centroid, sum), &count) in centroids.iter_mut().zip(sums).zip(&counts) {
            let updated: Vec<f64> = sum.into_iter().map(|s| s / count as f64).collect();
            shift = shift.max(squared_distance(centroid, &updated).sqrt());
            *centroid = updated;
        }
        iterations += 1;
        if shift <= params.tol {
            converged = true;
            break;
        }
    }

    let (_, d2) = assign(points, &centroids);
    inertia_trace.push(d2.iter().sum());
    Ok(KMeansFit {
        centroids,
        reduced: false,
        iterations,
        converged,
        inertia_trace,
    })
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidArgument("k-means needs at least one point".into()));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("points must have dimension ≥ 1".into()));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("points must be finite".into()));
        }
    }
    Ok(dim)
}

/// Index of the first occurrence of every distinct point, in input order.
fn distinct_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let mut seen = HashSet::new();
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| seen.insert(p.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<_>>()))
        .map(|(i, _)| i)
        .collect()
}

/// Nearest centroid (lowest index on ties) and squared distance per point.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points
        .par_iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centroids.iter().enumerate() {
                let d = squared_distance(p, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .unzip()
}

/// Requires more distinct points than `k`, which guarantees positive total
/// weight at every draw.
fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points
        .par_iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            chosen = Some(i);
            if acc > target {
                break;
            }
        }
        let chosen = chosen.expect("some point is away from every centroid");
        let centroid = points[chosen].clone();
        d2.par_iter_mut().zip(points).for_each(|(d, p)| {
            *d = d.min(squared_distance(p, &centroid));
        });
        centroids.push(centroid);
    }
    centroids
}

/// Gives every empty cluster the point currently farthest from its centroid.
/// Inertia can only drop: the moved point's term becomes zero.
fn reseed_empty(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    labels: &mut [usize],
    d2: &mut [f64],
) {
    let mut counts = vec![0usize; centroids.len()];
    for &j in labels.iter() {
        counts[j] += 1;
    }
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut farthest: Option<usize> = None;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && farthest.is_none_or(|f| d > d2[f]) {
                farthest = Some(i);
            }
        }
        // Unreachable while there are more distinct points than clusters.
        let Some(i) = farthest else { break };
        counts[labels[i]] -= 1;
        counts[empty] += 1;
        labels[i] = empty;
        d2[i] = 0.0;
        centroids[empty] = points[i].clone();
    }
}
