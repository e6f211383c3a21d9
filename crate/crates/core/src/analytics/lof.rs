//! Local outlier factor in objective space.

use crate::error::{Error, Result};
use crate::measures::euclidean;
use crate::model::SolutionSet;

const LRD_EPS: f64 = 1e-10;

pub fn lof(set: &SolutionSet, k: usize) -> Result<Vec<f64>> {
    let pts: Vec<&[f64]> = set.objectives().iter().map(|o| &o[..]).collect();
    lof_points(&pts, k)
}

/// Exactly `k` neighbors per point (self excluded), distance ties broken by
/// lower index.
pub fn lof_points(points: &[&[f64]], k: usize) -> Result<Vec<f64>> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "k_lof must satisfy 1 <= k < |S| (k = {k}, |S| = {n})"
        )));
    }
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| euclidean(a, b)).collect())
        .collect();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            idx.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
            idx.truncate(k);
            idx
        })
        .collect();
    let kdist: Vec<f64> = (0..n).map(|i| dist[i][neighbors[i][k - 1]]).collect();
    let lrd: Vec<f64> = (0..n)
        .map(|i| {
            let reach: f64 = neighbors[i].iter().map(|&o| kdist[o].max(dist[i][o])).sum();
            1.0 / (reach / k as f64 + LRD_EPS)
        })
        .collect();
    Ok((0..n)
        .map(|i| neighbors[i].iter().map(|&o| lrd[o]).sum::<f64>() / (k as f64 * lrd[i]))
        .collect())
}
