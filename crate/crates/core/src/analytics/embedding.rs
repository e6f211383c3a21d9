//! 2-D embeddings of a distance matrix: classical metric MDS (default) and
//! exact t-SNE.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    MetricMds,
    Tsne,
}

impl EmbeddingMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "metric_mds" | "mds" => Some(Self::MetricMds),
            "tsne" => Some(Self::Tsne),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub labels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub method: EmbeddingMethod,
}

const TSNE_SEED: u64 = 0x5eed;
const TSNE_ITERATIONS: usize = 1000;

pub fn embed_algorithms(matrix: &SimilarityMatrix, method: EmbeddingMethod) -> Result<Embedding2D> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "embedding needs at least 2 entities, got {n}"
        )));
    }
    if matrix.values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "distance matrix".into(),
        });
    }
    let coords = match method {
        EmbeddingMethod::MetricMds => classical_mds(&matrix.values),
        EmbeddingMethod::Tsne => tsne(&matrix.values, TSNE_SEED),
    };
    Ok(Embedding2D {
        labels: matrix.labels.clone(),
        coords,
        method,
    })
}

/// Double-centered squared distances, top two eigenpairs. Each axis is
/// flipped so its largest-magnitude coordinate is positive.
pub fn classical_mds(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = dist.len();
    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut coords = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[k].max(0.0).sqrt();
        let col: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)] * scale).collect();
        let sign = sign_of_largest(&col);
        for i in 0..n {
            coords[i][axis] = sign * col[i];
        }
    }
    coords
}

/// +1 or −1 such that the largest-magnitude entry becomes positive.
pub(crate) fn sign_of_largest(values: &[f64]) -> f64 {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.abs() > values[best].abs() {
            best = i;
        }
    }
    if values.get(best).copied().unwrap_or(0.0) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Exact t-SNE on precomputed distances with perplexity min(5, (n−1)/3).
pub fn tsne(dist: &[Vec<f64>], seed: u64) -> Vec<[f64; 2]> {
    let n = dist.len();
    let perplexity = (5.0f64).min((n as f64 - 1.0) / 3.0).max(1.0);
    let p = joint_probabilities(dist, perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [a * 1e-4, b * 1e-4]
        })
        .collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0; 2]; n];
    let learning_rate = 100.0;

    for iter in 0..TSNE_ITERATIONS {
        let exaggeration = if iter < 100 { 4.0 } else { 1.0 };
        let momentum = if iter < 250 { 0.5 } else { 0.8 };
        let mut num = vec![vec![0.0; n]; n];
        let mut z = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i][j] = q;
                num[j][i] = q;
                z += 2.0 * q;
            }
        }
        let z = z.max(f64::MIN_POSITIVE);
        for i in 0..n {
            let mut grad = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mult = 4.0 * (exaggeration * p[i][j] - num[i][j] / z) * num[i][j];
                grad[0] += mult * (y[i][0] - y[j][0]);
                grad[1] += mult * (y[i][1] - y[j][1]);
            }
            for a in 0..2 {
                let same_sign = (grad[a] > 0.0) == (velocity[i][a] > 0.0);
                gains[i][a] = if same_sign {
                    (gains[i][a] * 0.8f64).max(0.01)
                } else {
                    gains[i][a] + 0.2
                };
                velocity[i][a] = momentum * velocity[i][a] - learning_rate * gains[i][a] * grad[a];
            }
        }
        for i in 0..n {
            y[i][0] += velocity[i][0];
            y[i][1] += velocity[i][1];
        }
        let mean = [
            y.iter().map(|p| p[0]).sum::<f64>() / n as f64,
            y.iter().map(|p| p[1]).sum::<f64>() / n as f64,
        ];
        for p in y.iter_mut() {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
    }
    y
}

/// Symmetrized affinities with per-point Gaussian precision tuned by
/// bisection to the target perplexity.
fn joint_probabilities(dist: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let n = dist.len();
    let target = perplexity.ln();
    let mut cond = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0;
        for _ in 0..100 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                if j != i {
                    let d2 = dist[i][j] * dist[i][j];
                    let w = (-beta * d2).exp();
                    cond[i][j] = w;
                    sum += w;
                    weighted += w * d2;
                }
            }
            if sum <= 0.0 {
                // all mass underflowed: precision too high
                hi = beta;
                beta = (lo + hi) / 2.0;
                continue;
            }
            let entropy = sum.ln() + beta * weighted / sum;
            for j in 0..n {
                if j != i {
                    cond[i][j] /= sum;
                }
            }
            let diff = entropy - target;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (lo + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (lo + hi) / 2.0;
            }
        }
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i][j] = ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }
    p
}
