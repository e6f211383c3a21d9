//! Per-generation quality measures: IGD, hypervolume, spacing and maximum spread.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AlgorithmRun;
use crate::model::{ObjectiveVector, ReferenceSet, SolutionSet};

/// Hypervolume settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub hv_anchor: ObjectiveVector,
    /// Monte Carlo budget used when m > 4.
    pub hv_mc_samples: usize,
    #[serde(default)]
    pub mc_seed: u64,
}

impl MeasureConfig {
    pub const DEFAULT_MC_SAMPLES: usize = 100_000;

    pub fn new(hv_anchor: ObjectiveVector) -> Self {
        Self {
            hv_anchor,
            hv_mc_samples: Self::DEFAULT_MC_SAMPLES,
            mc_seed: 0,
        }
    }

    /// Anchor at the component-wise reference maximum scaled by 1.1.
    pub fn from_reference(reference: &ReferenceSet) -> Self {
        let anchor = reference.nadir().into_iter().map(|v| v * 1.1).collect();
        Self::new(ObjectiveVector::new(anchor).expect("reference values are finite"))
    }
}

/// Nearest distances from each reference point to a solution set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgdDistanceProfile {
    pub distances: Vec<f64>,
    pub mean: f64,
}

/// Inverted generational distance with its per-reference-point distances.
pub fn igd(set: &SolutionSet, reference: &ReferenceSet) -> Result<IgdDistanceProfile> {
    igd_points(set, reference.points())
}

/// IGD against an arbitrary non-empty target point list, without the
/// reference-set non-dominance requirement.
pub fn igd_points(set: &SolutionSet, targets: &[ObjectiveVector]) -> Result<IgdDistanceProfile> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("IGD needs at least one target point".into()));
    }
    for t in targets {
        Error::check_dim(t.dim(), set.dim())?;
    }
    let distances: Vec<f64> = targets
        .iter()
        .map(|r| {
            set.objectives()
                .iter()
                .map(|x| euclidean(r, x))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    Ok(IgdDistanceProfile { distances, mean })
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Union volume of the boxes spanned by each solution and the anchor.
///
/// Exact for m ≤ 4; Monte Carlo with `cfg.hv_mc_samples` draws for m > 4.
/// Solutions that do not strictly dominate the anchor contribute nothing.
pub fn hypervolume(set: &SolutionSet, cfg: &MeasureConfig) -> Result<f64> {
    let anchor: &[f64] = &cfg.hv_anchor;
    Error::check_dim(anchor.len(), set.dim())?;
    let points = clip_to_anchor(set.objectives(), anchor);
    if points.is_empty() {
        return Ok(0.0);
    }
    if anchor.len() <= 4 {
        Ok(exact_hypervolume(&points, anchor))
    } else {
        Ok(monte_carlo_hypervolume(&points, anchor, cfg.hv_mc_samples, cfg.mc_seed).0)
    }
}

fn clip_to_anchor<P: AsRef<[f64]>>(points: &[P], anchor: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| p.iter().zip(anchor).all(|(x, r)| x < r))
        .map(<[f64]>::to_vec)
        .collect()
}

/// Exact hypervolume of points that all strictly dominate `anchor`.
///
/// 2-D sweep, 3-D staircase sweep, and slicing along the last objective above
/// three dimensions.
pub fn exact_hypervolume(points: &[Vec<f64>], anchor: &[f64]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    match anchor.len() {
        0 => 0.0,
        1 => anchor[0] - points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => hv2(points, anchor),
        3 => hv3(points, anchor),
        _ => hv_slice(points, anchor),
    }
}

fn hv2(points: &[Vec<f64>], anchor: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut floor = anchor[1];
    for (x, y) in pts {
        if y < floor {
            area += (anchor[0] - x) * (floor - y);
            floor = y;
        }
    }
    area
}

/// Totally ordered f64 key for the staircase map.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Non-dominated 2-D staircase with incrementally maintained dominated area.
struct Staircase {
    // x -> y, x ascending and y strictly descending.
    steps: BTreeMap<Key, f64>,
    area: f64,
    rx: f64,
    ry: f64,
}

impl Staircase {
    fn new(rx: f64, ry: f64) -> Self {
        Self {
            steps: BTreeMap::new(),
            area: 0.0,
            rx,
            ry,
        }
    }

    fn insert(&mut self, qx: f64, qy: f64) {
        let mut height = self.ry;
        if let Some((_, &py)) = self.steps.range(..=Key(qx)).next_back() {
            if py <= qy {
                return;
            }
            height = py;
        }
        let mut cur_x = qx;
        let mut added = 0.0;
        let mut removed = Vec::new();
        let mut stop_x = self.rx;
        for (&Key(sx), &sy) in self.steps.range(Key(qx)..) {
            added += (height - qy) * (sx - cur_x);
            cur_x = sx;
            if sy >= qy {
                removed.push(Key(sx));
                height = sy;
            } else {
                stop_x = sx;
                break;
            }
        }
        if stop_x == self.rx {
            added += (height - qy) * (self.rx - cur_x);
        }
        for k in removed {
            self.steps.remove(&k);
        }
        self.steps.insert(Key(qx), qy);
        self.area += added;
    }
}

fn hv3(points: &[Vec<f64>], anchor: &[f64]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stair = Staircase::new(anchor[0], anchor[1]);
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        stair.insert(p[0], p[1]);
        let next_z = pts.get(i + 1).map_or(anchor[2], |q| q[2]);
        volume += stair.area * (next_z - p[2]);
    }
    volume
}

fn hv_slice(points: &[Vec<f64>], anchor: &[f64]) -> f64 {
    let m = anchor.len();
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| a[m - 1].total_cmp(&b[m - 1]));
    let sub_anchor = &anchor[..m - 1];
    let mut slab: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let projected = p[..m - 1].to_vec();
        if !slab
            .iter()
            .any(|q| q.iter().zip(&projected).all(|(a, b)| a <= b))
        {
            slab.retain(|q| !q.iter().zip(&projected).all(|(a, b)| b <= a));
            slab.push(projected);
        }
        let next = pts.get(i + 1).map_or(anchor[m - 1], |q| q[m - 1]);
        let depth = next - p[m - 1];
        if depth > 0.0 {
            volume += exact_hypervolume(&slab, sub_anchor) * depth;
        }
    }
    volume
}

/// Monte Carlo estimate and its standard error.
pub fn monte_carlo_hypervolume(
    points: &[Vec<f64>],
    anchor: &[f64],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    if points.is_empty() || samples == 0 {
        return (0.0, 0.0);
    }
    let m = anchor.len();
    let lower: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = lower.iter().zip(anchor).map(|(l, r)| r - l).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..m {
            sample[j] = rng.random_range(lower[j]..anchor[j]);
        }
        if points
            .iter()
            .any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s))
        {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let se = box_volume * (frac * (1.0 - frac) / samples as f64).sqrt();
    (box_volume * frac, se)
}

/// Exclusive hypervolume contribution of every point (exact for any m).
///
/// Points that do not strictly dominate the anchor get 0.
pub fn hv_contributions(points: &[Vec<f64>], anchor: &[f64]) -> Vec<f64> {
    let inside: Vec<bool> = points
        .iter()
        .map(|p| p.iter().zip(anchor).all(|(x, r)| x < r))
        .collect();
    (0..points.len())
        .map(|i| {
            if !inside[i] {
                return 0.0;
            }
            let p = &points[i];
            let own: f64 = p.iter().zip(anchor).map(|(x, r)| r - x).product();
            let limited: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && inside[j])
                .map(|(_, q)| q.iter().zip(p).map(|(a, b)| a.max(*b)).collect())
                .collect();
            (own - exact_hypervolume(&limited, anchor)).max(0.0)
        })
        .collect()
}

/// Schott's spacing with Euclidean nearest-neighbor distances; 0 for a singleton.
pub fn spacing(set: &SolutionSet) -> f64 {
    let pts = set.objectives();
    let n = pts.len();
    if n < 2 {
        return 0.0;
    }
    let nearest: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(&pts[i], &pts[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nearest.iter().sum::<f64>() / n as f64;
    let var = nearest.iter().map(|d| (mean - d) * (mean - d)).sum::<f64>() / (n - 1) as f64;
    var.sqrt()
}

/// Diagonal of the set's per-objective bounding box.
pub fn maximum_spread(set: &SolutionSet) -> f64 {
    let pts = set.objectives();
    (0..set.dim())
        .map(|j| {
            let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[j]), hi.max(p[j]))
            });
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
}

/// Generation indices attaining the optimum of each series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestGenerations {
    pub igd: usize,
    pub hv: usize,
    pub sp: usize,
    pub ms: usize,
}

/// IGD distances for one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationProfile {
    pub gen: usize,
    pub distances: Vec<f64>,
}

/// The four measure series of one run, aligned with `generations`.
///
/// `best` and `generations` hold original generation indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSeries {
    pub algorithm: String,
    pub generations: Vec<usize>,
    pub igd: Vec<f64>,
    pub hv: Vec<f64>,
    pub sp: Vec<f64>,
    pub ms: Vec<f64>,
    pub best: BestGenerations,
    #[serde(default)]
    pub igd_profiles: Vec<GenerationProfile>,
}

/// Which measure a series or size mapping refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Igd,
    Hv,
    Sp,
    Ms,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Igd, Measure::Hv, Measure::Sp, Measure::Ms];

    /// True when larger values are better.
    pub fn maximize(self) -> bool {
        matches!(self, Measure::Hv | Measure::Ms)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Igd => "igd",
            Measure::Hv => "hv",
            Measure::Sp => "sp",
            Measure::Ms => "ms",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl MeasureSeries {
    pub fn series(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::Igd => &self.igd,
            Measure::Hv => &self.hv,
            Measure::Sp => &self.sp,
            Measure::Ms => &self.ms,
        }
    }

    pub fn best_gen(&self, measure: Measure) -> usize {
        match measure {
            Measure::Igd => self.best.igd,
            Measure::Hv => self.best.hv,
            Measure::Sp => self.best.sp,
            Measure::Ms => self.best.ms,
        }
    }

    /// Position of an original generation index within the series.
    pub fn position(&self, gen: usize) -> Option<usize> {
        self.generations.binary_search(&gen).ok()
    }

    pub fn value_at(&self, measure: Measure, gen: usize) -> Option<f64> {
        self.position(gen).map(|i| self.series(measure)[i])
    }

    pub fn best_value(&self, measure: Measure) -> f64 {
        self.value_at(measure, self.best_gen(measure))
            .expect("best generation is part of the series")
    }

    pub fn last_value(&self, measure: Measure) -> f64 {
        *self.series(measure).last().expect("series are non-empty")
    }
}

/// Position of the optimum; ties go to the earliest position.
fn best_position(values: &[f64], maximize: bool) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let better = if maximize {
            *v > values[best]
        } else {
            *v < values[best]
        };
        if better {
            best = i;
        }
    }
    best
}

/// Computes all four series and the best generations of a run.
pub fn measure_run(
    run: &AlgorithmRun,
    reference: &ReferenceSet,
    cfg: &MeasureConfig,
) -> Result<MeasureSeries> {
    measure_run_with(run, reference, cfg, None)
}

/// As [`measure_run`]; with a normalizer, IGD is taken between the
/// normalized generation and the normalized reference.
pub fn measure_run_with(
    run: &AlgorithmRun,
    reference: &ReferenceSet,
    cfg: &MeasureConfig,
    normalizer: Option<&Normalizer>,
) -> Result<MeasureSeries> {
    let norm_ref = normalizer.map(|n| n.apply_reference(reference));
    let per_generation: Vec<(IgdDistanceProfile, f64, f64, f64)> = run
        .generations()
        .par_iter()
        .map(|rec| {
            let profile = match (normalizer, &norm_ref) {
                (Some(n), Some(r)) => igd(&n.apply(&rec.solutions), r)?,
                _ => igd(&rec.solutions, reference)?,
            };
            let hv = hypervolume(&rec.solutions, cfg)?;
            Ok((
                profile,
                hv,
                spacing(&rec.solutions),
                maximum_spread(&rec.solutions),
            ))
        })
        .collect::<Result<_>>()?;

    let generations: Vec<usize> = run.generations().iter().map(|r| r.index).collect();
    let igd_values: Vec<f64> = per_generation.iter().map(|g| g.0.mean).collect();
    let hv: Vec<f64> = per_generation.iter().map(|g| g.1).collect();
    let sp: Vec<f64> = per_generation.iter().map(|g| g.2).collect();
    let ms: Vec<f64> = per_generation.iter().map(|g| g.3).collect();

    let best_igd_pos = best_position(&igd_values, false);
    let best = BestGenerations {
        igd: generations[best_igd_pos],
        hv: generations[best_position(&hv, true)],
        sp: generations[best_position(&sp, false)],
        ms: generations[best_position(&ms, true)],
    };

    let last_pos = generations.len() - 1;
    let mut profile_positions = vec![best_igd_pos];
    if last_pos != best_igd_pos {
        profile_positions.push(last_pos);
    }
    profile_positions.sort_unstable();
    let igd_profiles = profile_positions
        .into_iter()
        .map(|p| GenerationProfile {
            gen: generations[p],
            distances: per_generation[p].0.distances.clone(),
        })
        .collect();

    Ok(MeasureSeries {
        algorithm: run.algorithm_id.clone(),
        generations,
        igd: igd_values,
        hv,
        sp,
        ms,
        best,
        igd_profiles,
    })
}

/// Optional min-max normalization fitted on the reference set's extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Normalizer {
    pub fn fit(reference: &ReferenceSet) -> Self {
        let m = reference.dim();
        let lower = (0..m)
            .map(|j| {
                reference
                    .points()
                    .iter()
                    .map(|p| p[j])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Self {
            lower,
            upper: reference.nadir(),
        }
    }

    pub fn apply_point(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    (v - lo) / span
                } else {
                    v - lo
                }
            })
            .collect()
    }

    pub fn apply(&self, set: &SolutionSet) -> SolutionSet {
        let rows = set
            .objectives()
            .iter()
            .map(|p| self.apply_point(p))
            .collect();
        let objectives: Vec<ObjectiveVector> = SolutionSet::from_rows(rows)
            .expect("normalization keeps values finite")
            .objectives()
            .to_vec();
        SolutionSet::with_decisions(objectives, set.decisions().map(<[_]>::to_vec))
            .expect("cardinality unchanged")
    }

    pub fn apply_reference(&self, reference: &ReferenceSet) -> ReferenceSet {
        let pts = reference
            .points()
            .iter()
            .map(|p| ObjectiveVector::new(self.apply_point(p)).expect("finite"))
            .collect();
        ReferenceSet::new(pts).expect("monotone map keeps non-dominance")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GenerationRecord;
    use proptest::prelude::*;
    use rand::Rng;

    fn set(rows: &[&[f64]]) -> SolutionSet {
        SolutionSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn reference(rows: &[&[f64]]) -> ReferenceSet {
        ReferenceSet::new(set(rows).objectives().to_vec()).unwrap()
    }

    fn cfg(anchor: &[f64]) -> MeasureConfig {
        MeasureConfig::new(ObjectiveVector::new(anchor.to_vec()).unwrap())
    }

    #[test]
    fn igd_examples() {
        let p = reference(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(igd(&p.as_solution_set(), &p).unwrap().mean, 0.0);

        let p = reference(&[&[0.0, 0.0]]);
        assert_eq!(igd(&set(&[&[3.0, 4.0]]), &p).unwrap().mean, 5.0);

        // (0,0) dominates (2,0), so this target list is not a valid reference set
        let targets = set(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let prof = igd_points(&set(&[&[1.0, 0.0]]), targets.objectives()).unwrap();
        assert_eq!(prof.distances, vec![1.0, 1.0]);
        assert_eq!(prof.mean, 1.0);

        assert!(igd(&set(&[&[1.0, 0.0, 0.0]]), &p).is_err());
    }

    #[test]
    fn hypervolume_examples() {
        let s = set(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(hypervolume(&s, &cfg(&[3.0, 3.0])).unwrap(), 3.0);
        assert_eq!(hypervolume(&set(&[&[0.0, 0.0]]), &cfg(&[1.0, 1.0])).unwrap(), 1.0);
        // point on the anchor boundary does not count
        assert_eq!(hypervolume(&set(&[&[1.0, 0.0]]), &cfg(&[1.0, 1.0])).unwrap(), 0.0);
        assert!(hypervolume(&s, &cfg(&[3.0, 3.0, 3.0])).is_err());
    }

    #[test]
    fn hypervolume_3d_and_4d_boxes() {
        // two overlapping boxes: 1 + 1 - 0.5^3... computed by inclusion–exclusion
        let s = set(&[&[0.0, 0.5, 0.5], &[0.5, 0.0, 0.0]]);
        let a = 1.0 * 0.5 * 0.5;
        let b = 0.5 * 1.0 * 1.0;
        let both = 0.5 * 0.5 * 0.5;
        let hv = hypervolume(&s, &cfg(&[1.0, 1.0, 1.0])).unwrap();
        assert!((hv - (a + b - both)).abs() < 1e-12);

        let s4 = set(&[&[0.0, 0.5, 0.5, 0.5], &[0.5, 0.0, 0.0, 0.0]]);
        let a = 0.5f64.powi(3);
        let b = 0.5;
        let both = 0.5f64.powi(4);
        let hv = hypervolume(&s4, &cfg(&[1.0; 4])).unwrap();
        assert!((hv - (a + b - both)).abs() < 1e-12);
    }

    /// Inclusion–exclusion over all subsets; exponential, small inputs only.
    fn inclusion_exclusion(points: &[Vec<f64>], anchor: &[f64]) -> f64 {
        let n = points.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let mut corner = vec![f64::NEG_INFINITY; anchor.len()];
            for (i, p) in points.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    for (c, v) in corner.iter_mut().zip(p) {
                        *c = c.max(*v);
                    }
                }
            }
            let vol: f64 = corner.iter().zip(anchor).map(|(c, r)| (r - c).max(0.0)).product();
            if mask.count_ones() % 2 == 1 {
                total += vol;
            } else {
                total -= vol;
            }
        }
        total
    }

    #[test]
    fn exact_hv_matches_inclusion_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 2..=5 {
            for _ in 0..20 {
                let pts: Vec<Vec<f64>> = (0..7)
                    .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
                    .collect();
                let anchor = vec![1.0; m];
                let exact = exact_hypervolume(&pts, &anchor);
                let oracle = inclusion_exclusion(&pts, &anchor);
                assert!((exact - oracle).abs() < 1e-12, "m={m}: {exact} vs {oracle}");
            }
        }
    }

    #[test]
    fn contributions_match_leave_one_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 2..=4 {
            let pts: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
                .collect();
            let anchor = vec![1.2; m];
            let full = exact_hypervolume(&pts, &anchor);
            let contrib = hv_contributions(&pts, &anchor);
            for i in 0..pts.len() {
                let mut rest = pts.clone();
                rest.remove(i);
                let expected = full - exact_hypervolume(&rest, &anchor);
                assert!((contrib[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_path_for_many_objectives() {
        let s = set(&[&[0.0; 5]]);
        let mut c = cfg(&[1.0; 5]);
        c.hv_mc_samples = 1000;
        // single box fills the sampling region
        assert_eq!(hypervolume(&s, &c).unwrap(), 1.0);
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(spacing(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]])), 0.0);
        let sp = spacing(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[3.0, 0.0]]));
        assert!((sp - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(spacing(&set(&[&[4.0, 2.0]])), 0.0);
    }

    #[test]
    fn spread_examples() {
        assert_eq!(maximum_spread(&set(&[&[0.0, 0.0], &[1.0, 1.0]])), 2f64.sqrt());
        assert_eq!(maximum_spread(&set(&[&[7.0, 1.0]])), 0.0);
        assert_eq!(
            maximum_spread(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]])),
            5f64.sqrt()
        );
    }

    #[test]
    fn constant_run_has_constant_series() {
        let g = set(&[&[0.2, 0.9], &[0.9, 0.2]]);
        let run = AlgorithmRun::builtin(
            "same",
            (0..5)
                .map(|i| GenerationRecord {
                    index: i,
                    solutions: g.clone(),
                })
                .collect(),
        )
        .unwrap();
        let r = reference(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let series = measure_run(&run, &r, &MeasureConfig::from_reference(&r)).unwrap();
        assert!(series.igd.windows(2).all(|w| w[0] == w[1]));
        assert!(series.hv.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(series.best, BestGenerations { igd: 0, hv: 0, sp: 0, ms: 0 });
        assert_eq!(series.igd_profiles.len(), 2);
    }

    #[test]
    fn default_anchor_scales_nadir() {
        let r = reference(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let c = MeasureConfig::from_reference(&r);
        assert_eq!(c.hv_anchor.to_vec(), vec![1.1, 1.1]);
    }

    #[test]
    fn normalizer_maps_reference_to_unit_box() {
        let r = reference(&[&[0.0, 2.0], &[4.0, 0.0]]);
        let n = Normalizer::fit(&r);
        let rn = n.apply_reference(&r);
        assert_eq!(rn.points()[0].to_vec(), vec![0.0, 1.0]);
        assert_eq!(rn.points()[1].to_vec(), vec![1.0, 0.0]);
    }

    fn rows(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, m), 1..12)
    }

    proptest! {
        #[test]
        fn igd_never_increases_when_adding(pts in rows(3), extra in prop::collection::vec(0.0f64..1.0, 3)) {
            let r = reference(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
            let s = SolutionSet::from_rows(pts.clone()).unwrap();
            let mut bigger = pts;
            bigger.push(extra);
            let s2 = SolutionSet::from_rows(bigger).unwrap();
            prop_assert!(igd(&s2, &r).unwrap().mean <= igd(&s, &r).unwrap().mean);
        }

        #[test]
        fn hv_monotone_and_ignores_dominated(pts in rows(3), extra in prop::collection::vec(0.0f64..1.0, 3)) {
            let c = cfg(&[1.0, 1.0, 1.0]);
            let s = SolutionSet::from_rows(pts.clone()).unwrap();
            let base = hypervolume(&s, &c).unwrap();
            let mut bigger = pts.clone();
            bigger.push(extra.clone());
            let grown = hypervolume(&SolutionSet::from_rows(bigger).unwrap(), &c).unwrap();
            prop_assert!(grown >= base - 1e-15);
            let extra_nd = !pts.iter().any(|p| p.iter().zip(&extra).all(|(a, b)| a <= b));
            if extra_nd {
                prop_assert!(grown > base);
            }
            let filtered = crate::model::non_dominated_filter(&s);
            prop_assert!((hypervolume(&filtered, &c).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn sp_and_ms_non_negative(pts in rows(2)) {
            let s = SolutionSet::from_rows(pts.clone()).unwrap();
            prop_assert!(spacing(&s) >= 0.0);
            let ms = maximum_spread(&s);
            prop_assert!(ms >= 0.0);
            let identical = pts.iter().all(|p| p == &pts[0]);
            prop_assert_eq!(ms == 0.0, identical);
            if pts.len() <= 2 {
                prop_assert!(spacing(&s).abs() < 1e-15);
            }
        }

        #[test]
        fn igd_profile_matches_double_loop(pts in rows(2), refs in rows(2)) {
            let s = SolutionSet::from_rows(pts.clone()).unwrap();
            let r_set = SolutionSet::from_rows(refs).unwrap();
            let r = ReferenceSet::new(crate::model::non_dominated_filter(&r_set).objectives().to_vec()).unwrap();
            let prof = igd(&s, &r).unwrap();
            let mut total = 0.0;
            for rp in r.points() {
                let mut best = f64::INFINITY;
                for x in &pts {
                    let d = ((rp[0] - x[0]).powi(2) + (rp[1] - x[1]).powi(2)).sqrt();
                    if d < best { best = d; }
                }
                total += best;
            }
            let mean = prof.distances.iter().sum::<f64>() / prof.distances.len() as f64;
            prop_assert!((prof.mean - mean).abs() < 1e-12);
            prop_assert!((prof.mean - total / r.len() as f64).abs() < 1e-12);
        }
    }
}
