//! Kamada–Kawai style stress layout.
//!
//! Stress is Σ_{i<j} (‖p_i−p_j‖ − d_ij)² / d_ij². Each sweep moves every
//! node in turn to the minimizer of its local majorizer, so stress never
//! increases.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const MAX_SWEEPS: usize = 500;
pub const REL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KkLayout {
    pub coords: Vec<[f64; 2]>,
    pub initial_stress: f64,
    pub final_stress: f64,
    pub sweeps: usize,
}

pub fn stress(dist: &[Vec<f64>], coords: &[[f64; 2]]) -> f64 {
    let n = coords.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[i][j];
            if d > 0.0 {
                let e = planar(coords[i], coords[j]) - d;
                s += e * e / (d * d);
            }
        }
    }
    s
}

fn planar(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Nodes placed evenly on a circle of radius max(d)/2, starting at angle 0.
pub fn circular_init(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = dist.len();
    let max = dist.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let r = if max > 0.0 { max / 2.0 } else { 1.0 };
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

pub fn kamada_kawai(dist: &[Vec<f64>], init: &[[f64; 2]]) -> KkLayout {
    let n = init.len();
    let mut p = init.to_vec();
    let initial = stress(dist, &p);
    let mut current = initial;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && n > 1 {
        sweeps += 1;
        for i in 0..n {
            let (mut wsum, mut x, mut y) = (0.0, 0.0, 0.0);
            for j in 0..n {
                let d = dist[i][j];
                if j == i || d <= 0.0 {
                    continue;
                }
                let w = 1.0 / (d * d);
                let norm = planar(p[i], p[j]);
                let (ux, uy) = if norm > 0.0 {
                    ((p[i][0] - p[j][0]) / norm, (p[i][1] - p[j][1]) / norm)
                } else {
                    (0.0, 0.0)
                };
                wsum += w;
                x += w * (p[j][0] + d * ux);
                y += w * (p[j][1] + d * uy);
            }
            if wsum > 0.0 {
                p[i] = [x / wsum, y / wsum];
            }
        }
        let next = stress(dist, &p);
        let improvement = current - next;
        current = next;
        if current == 0.0 || improvement <= REL_TOLERANCE * current.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    KkLayout {
        coords: p,
        initial_stress: initial,
        final_stress: current,
        sweeps,
    }
}

/// All-pairs shortest hop counts over an undirected adjacency list.
/// Unreachable pairs get 2 × the largest finite distance (1 if none).
pub fn hop_distances(adjacency: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = adjacency.len();
    let mut out = vec![vec![f64::INFINITY; n]; n];
    for (s, row) in out.iter_mut().enumerate() {
        row[s] = 0.0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if row[v].is_infinite() {
                    row[v] = row[u] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    let diameter = out
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |a, &b| a.max(b));
    let fill = if diameter > 0.0 { 2.0 * diameter } else { 1.0 };
    for v in out.iter_mut().flatten() {
        if v.is_infinite() {
            *v = fill;
        }
    }
    out
}
