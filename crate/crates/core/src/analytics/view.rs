//! Magnified solution-set view: outlier-biased sampling, KDE grids and
//! reference display modes.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ReferenceSet, SolutionSet};

use super::lof::lof;
use super::pca::Projection;

pub const GRID_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionViewConfig {
    pub lof_threshold: f64,
    pub k_lof: usize,
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for SolutionViewConfig {
    fn default() -> Self {
        Self {
            lof_threshold: 1.5,
            k_lof: 20,
            grid_size: GRID_SIZE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefMode {
    Scatter,
    Density,
    Hull,
}

impl RefMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "scatter" => Some(Self::Scatter),
            "density" => Some(Self::Density),
            "hull" => Some(Self::Hull),
            _ => None,
        }
    }
}

/// Gaussian KDE sampled at cell centers, row-major with rows along y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub size: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub bandwidth: [f64; 2],
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn cell_area(&self) -> f64 {
        let dx = (self.x_range[1] - self.x_range[0]) / self.size as f64;
        let dy = (self.y_range[1] - self.y_range[0]) / self.size as f64;
        dx * dy
    }

    /// Riemann sum of the density.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPoint {
    /// Position in the original solution set.
    pub index: usize,
    pub coords: [f64; 2],
    pub objectives: Vec<f64>,
    pub marked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationView {
    pub label: String,
    pub total: usize,
    pub kept_points: Vec<ViewPoint>,
    /// Indices of LOF outliers and per-objective extrema.
    pub marked_points: Vec<usize>,
    pub kde_grid: DensityGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModes {
    pub scatter: Vec<[f64; 2]>,
    pub density: DensityGrid,
    /// Convex hull, counter-clockwise.
    pub hull: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionViewModel {
    pub rate: f64,
    pub generations: Vec<GenerationView>,
    pub reference_modes: ReferenceModes,
}

pub fn sample_solution_view(
    generations: &[(String, &SolutionSet)],
    reference: &ReferenceSet,
    projection: &Projection,
    rate: f64,
    cfg: &SolutionViewConfig,
) -> Result<SolutionViewModel> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidInput(format!("rate must be in (0, 1], got {rate}")));
    }
    if generations.is_empty() || generations.iter().any(|(_, s)| s.is_empty()) {
        return Err(Error::InvalidInput("solution view needs non-empty generations".into()));
    }
    let views = generations
        .iter()
        .enumerate()
        .map(|(pos, (label, set))| generation_view(label, set, projection, rate, cfg, pos as u64))
        .collect::<Result<_>>()?;
    let ref_proj = projection.apply_all(reference.points())?;
    Ok(SolutionViewModel {
        rate,
        generations: views,
        reference_modes: ReferenceModes {
            density: kde_grid(&ref_proj, cfg.grid_size),
            hull: convex_hull(&ref_proj),
            scatter: ref_proj,
        },
    })
}

fn generation_view(
    label: &str,
    set: &SolutionSet,
    projection: &Projection,
    rate: f64,
    cfg: &SolutionViewConfig,
    stream: u64,
) -> Result<GenerationView> {
    let n = set.len();
    let coords = projection.apply_all(set.objectives())?;
    let marked = marked_indices(set, cfg)?;
    let mut is_marked = vec![false; n];
    for &i in &marked {
        is_marked[i] = true;
    }
    let remainder: Vec<usize> = (0..n).filter(|&i| !is_marked[i]).collect();
    let take = (rate * remainder.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut keep = is_marked.clone();
    for pos in sample(&mut rng, remainder.len(), take.min(remainder.len())) {
        keep[remainder[pos]] = true;
    }
    let kept_points = (0..n)
        .filter(|&i| keep[i])
        .map(|i| ViewPoint {
            index: i,
            coords: coords[i],
            objectives: set.objectives()[i].to_vec(),
            marked: is_marked[i],
        })
        .collect();
    Ok(GenerationView {
        label: label.to_string(),
        total: n,
        kept_points,
        marked_points: marked,
        kde_grid: kde_grid(&coords, cfg.grid_size),
    })
}

/// LOF outliers plus argmin/argmax of every objective, ascending.
pub fn marked_indices(set: &SolutionSet, cfg: &SolutionViewConfig) -> Result<Vec<usize>> {
    let n = set.len();
    let mut marked = vec![false; n];
    let k = cfg.k_lof.min(n.saturating_sub(1));
    if k >= 1 {
        for (i, s) in lof(set, k)?.into_iter().enumerate() {
            if s > cfg.lof_threshold {
                marked[i] = true;
            }
        }
    }
    let objs = set.objectives();
    for j in 0..set.dim() {
        let (mut lo, mut hi) = (0, 0);
        for i in 1..n {
            if objs[i][j] < objs[lo][j] {
                lo = i;
            }
            if objs[i][j] > objs[hi][j] {
                hi = i;
            }
        }
        marked[lo] = true;
        marked[hi] = true;
    }
    Ok((0..n).filter(|&i| marked[i]).collect())
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mu = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
}

/// Product Gaussian kernel with Scott bandwidths σ·n^(−1/6), evaluated on a
/// `size`×`size` grid over the data bounds padded by 4h.
pub fn kde_grid(points: &[[f64; 2]], size: usize) -> DensityGrid {
    let n = points.len();
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let factor = (n.max(1) as f64).powf(-1.0 / 6.0);
    let (mut hx, mut hy) = (std_dev(&xs) * factor, std_dev(&ys) * factor);
    match (hx > 0.0, hy > 0.0) {
        (true, true) => {}
        (true, false) => hy = hx,
        (false, true) => hx = hy,
        (false, false) => {
            hx = 1.0;
            hy = 1.0;
        }
    }
    let bounds = |v: &[f64], h: f64| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        [lo - 4.0 * h, hi + 4.0 * h]
    };
    let x_range = bounds(&xs, hx);
    let y_range = bounds(&ys, hy);
    let dx = (x_range[1] - x_range[0]) / size as f64;
    let dy = (y_range[1] - y_range[0]) / size as f64;
    let norm = 1.0 / (n as f64 * std::f64::consts::TAU * hx * hy);
    let mut values = vec![0.0; size * size];
    for r in 0..size {
        let y = y_range[0] + (r as f64 + 0.5) * dy;
        for c in 0..size {
            let x = x_range[0] + (c as f64 + 0.5) * dx;
            let s: f64 = points
                .iter()
                .map(|p| {
                    let u = (x - p[0]) / hx;
                    let v = (y - p[1]) / hy;
                    (-0.5 * (u * u + v * v)).exp()
                })
                .sum();
            values[r * size + c] = s * norm;
        }
    }
    DensityGrid {
        size,
        x_range,
        y_range,
        bandwidth: [hx, hy],
        values,
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::pca::project_reference_pca;
    use crate::benchmarks::{default_divisions, dtlz, reference_set};
    use rand::{Rng, SeedableRng};

    fn random_set(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SolutionSet {
        SolutionSet::from_rows(
            (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn setup() -> (ReferenceSet, Projection) {
        let p = dtlz(2, 3).unwrap();
        let r = reference_set(&p, default_divisions(3)).unwrap();
        let proj = project_reference_pca(&r).unwrap();
        (r, proj)
    }

    #[test]
    fn full_rate_keeps_everything() {
        let (r, proj) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_set(&mut rng, 100, 3);
        let v = sample_solution_view(&[("a#0".into(), &s)], &r, &proj, 1.0, &Default::default()).unwrap();
        assert_eq!(v.generations[0].kept_points.len(), 100);
    }

    #[test]
    fn marked_points_survive_any_rate() {
        let (r, proj) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rows: Vec<Vec<f64>> = (0..80)
            .map(|_| (0..3).map(|_| rng.random_range(0.4..0.6)).collect())
            .collect();
        rows.push(vec![5.0, 5.0, 5.0]);
        let s = SolutionSet::from_rows(rows).unwrap();
        for rate in [0.01, 0.1, 0.5, 0.9] {
            let v = sample_solution_view(&[("a#3".into(), &s)], &r, &proj, rate, &Default::default()).unwrap();
            let g = &v.generations[0];
            let kept: Vec<usize> = g.kept_points.iter().map(|p| p.index).collect();
            assert!(g.marked_points.contains(&80));
            for m in &g.marked_points {
                assert!(kept.contains(m));
            }
            for j in 0..3 {
                let lo = (0..81).min_by(|&a, &b| s.objectives()[a][j].total_cmp(&s.objectives()[b][j])).unwrap();
                assert!(kept.contains(&lo));
            }
            let rest = 81 - g.marked_points.len();
            assert_eq!(kept.len(), g.marked_points.len() + (rate * rest as f64).round() as usize);
        }
    }

    #[test]
    fn kde_integrates_to_one_and_is_nonnegative() {
        let (r, proj) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_set(&mut rng, 100, 3);
        let v = sample_solution_view(&[("a#0".into(), &s)], &r, &proj, 0.5, &Default::default()).unwrap();
        for grid in [&v.generations[0].kde_grid, &v.reference_modes.density] {
            assert_eq!(grid.values.len(), 64 * 64);
            assert!(grid.values.iter().all(|&x| x >= 0.0));
            assert!((grid.integral() - 1.0).abs() < 0.02, "{}", grid.integral());
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let (r, proj) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_set(&mut rng, 60, 3);
        let sel = [("a#0".to_string(), &s)];
        let a = sample_solution_view(&sel, &r, &proj, 0.3, &Default::default()).unwrap();
        let b = sample_solution_view(&sel, &r, &proj, 0.3, &Default::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hull_of_square_with_interior() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn hull_contains_all_reference_points() {
        let (r, proj) = setup();
        let pts = proj.apply_all(r.points()).unwrap();
        let h = convex_hull(&pts);
        for p in &pts {
            for i in 0..h.len() {
                assert!(cross(h[i], h[(i + 1) % h.len()], *p) >= -1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (r, proj) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_set(&mut rng, 10, 3);
        let cfg = SolutionViewConfig::default();
        assert!(sample_solution_view(&[("a#0".into(), &s)], &r, &proj, 0.0, &cfg).is_err());
        assert!(sample_solution_view(&[("a#0".into(), &s)], &r, &proj, 1.5, &cfg).is_err());
        assert!(sample_solution_view(&[], &r, &proj, 0.5, &cfg).is_err());
    }
}
