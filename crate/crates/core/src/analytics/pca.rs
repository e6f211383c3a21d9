//! Linear m→2 projection fitted once on the reference set and shared by all
//! generation scatterplots.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReferenceSet;

use super::embedding::sign_of_largest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Identity,
    Pca,
    /// Covariance had rank < 2; first two coordinate axes are used.
    AxisFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// Two unit row vectors of length m.
    pub axes: [Vec<f64>; 2],
    pub method: ProjectionMethod,
}

impl Projection {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, point: &[f64]) -> Result<[f64; 2]> {
        Error::check_dim(self.dim(), point.len())?;
        Ok(self.apply_unchecked(point))
    }

    fn apply_unchecked(&self, point: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, axis) in self.axes.iter().enumerate() {
            out[k] = point
                .iter()
                .zip(&self.mean)
                .zip(axis)
                .map(|((x, mu), a)| (x - mu) * a)
                .sum();
        }
        out
    }

    pub fn apply_all<P: AsRef<[f64]>>(&self, points: &[P]) -> Result<Vec<[f64; 2]>> {
        points.iter().map(|p| self.apply(p.as_ref())).collect()
    }
}

const DEGENERATE_EIGENVALUE: f64 = 1e-12;

pub fn project_reference_pca(reference: &ReferenceSet) -> Result<Projection> {
    let pts: Vec<&[f64]> = reference.points().iter().map(|p| &p[..]).collect();
    fit_pca(&pts)
}

pub fn fit_pca(points: &[&[f64]]) -> Result<Projection> {
    let n = points.len();
    let m = points.first().map_or(0, |p| p.len());
    if m < 2 {
        return Err(Error::InvalidInput(format!("projection needs m >= 2, got {m}")));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "projection needs at least 3 reference points, got {n}"
        )));
    }
    for p in points {
        Error::check_dim(m, p.len())?;
    }
    let mean: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let unit = |j: usize| {
        let mut v = vec![0.0; m];
        v[j] = 1.0;
        v
    };
    if m == 2 {
        return Ok(Projection {
            mean,
            axes: [unit(0), unit(1)],
            method: ProjectionMethod::Identity,
        });
    }

    let cov = DMatrix::from_fn(m, m, |a, b| {
        points
            .iter()
            .map(|p| (p[a] - mean[a]) * (p[b] - mean[b]))
            .sum::<f64>()
            / (n as f64 - 1.0)
    });
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]];
    let second = eig.eigenvalues[order[1]];
    if !(second > DEGENERATE_EIGENVALUE * top.max(1.0)) {
        log::warn!("reference covariance is degenerate; projecting on the first two objectives");
        return Ok(Projection {
            mean,
            axes: [unit(0), unit(1)],
            method: ProjectionMethod::AxisFallback,
        });
    }

    let mut axes: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (slot, &k) in order.iter().take(2).enumerate() {
        let mut axis: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        axis.iter_mut().for_each(|v| *v /= norm);
        // Orient by the projected reference coordinates.
        let proj: Vec<f64> = points
            .iter()
            .map(|p| p.iter().zip(&mean).zip(&axis).map(|((x, mu), a)| (x - mu) * a).sum())
            .collect();
        let sign = sign_of_largest(&proj);
        axis.iter_mut().for_each(|v| *v *= sign);
        axes[slot] = axis;
    }
    Ok(Projection {
        mean,
        axes,
        method: ProjectionMethod::Pca,
    })
}
