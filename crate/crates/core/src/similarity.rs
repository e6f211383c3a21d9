//! Generation similarity (exact Wasserstein-1 between solution sets) and
//! algorithm similarity (DTW and Euclidean distances between measure series,
//! or EMD between best generations).

use std::borrow::Cow;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{AlgorithmRun, Workspace};
use crate::measures::{euclidean, Measure, Normalizer};
use crate::model::SolutionSet;

/// Largest support accepted by the exact transport solver, per side.
pub const MAX_EMD_SUPPORT: usize = 500;

/// First-order Wasserstein distance between the uniform distributions on the
/// objective vectors of `a` and `b`, with Euclidean ground cost.
pub fn emd(a: &SolutionSet, b: &SolutionSet) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    for (name, s) in [("first", a), ("second", b)] {
        if s.len() > MAX_EMD_SUPPORT {
            return Err(Error::TooLarge(format!(
                "{name} set has {} points, the exact solver accepts at most {MAX_EMD_SUPPORT}; \
                 reduce the population or down-sample further",
                s.len()
            )));
        }
    }
    // evaluate in a canonical argument order so emd(a, b) == emd(b, a) bitwise
    let (a, b) = if canonical_order(a, b) == std::cmp::Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let cost: Vec<Vec<f64>> = a
        .objectives()
        .iter()
        .map(|x| b.objectives().iter().map(|y| euclidean(x, y)).collect())
        .collect();
    Ok(if a.len() == b.len() {
        assignment_cost(&cost) / a.len() as f64
    } else {
        transport_cost(&cost)
    })
}

fn canonical_order(a: &SolutionSet, b: &SolutionSet) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let flat = |s: &SolutionSet| -> Vec<u64> {
            s.objectives()
                .iter()
                .flat_map(|p| p.iter().map(|v| v.to_bits()))
                .collect()
        };
        flat(a).cmp(&flat(b))
    })
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// shortest augmenting paths with potentials). Returns the total cost.
pub(crate) fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // col_owner[j] = row (1-based) matched to column j; column 0 is virtual
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    // Row then column reduction gives feasible potentials; rows with a free
    // tight column are matched up front and skip augmentation.
    for i in 1..=n {
        u[i] = cost[i - 1].iter().copied().fold(f64::INFINITY, f64::min);
    }
    for j in 1..=n {
        v[j] = (1..=n)
            .map(|i| cost[i - 1][j - 1] - u[i])
            .fold(f64::INFINITY, f64::min);
    }
    let mut row_matched = vec![false; n + 1];
    for i in 1..=n {
        for j in 1..=n {
            if col_owner[j] == 0 && cost[i - 1][j - 1] - u[i] - v[j] == 0.0 {
                col_owner[j] = i;
                row_matched[i] = true;
                break;
            }
        }
    }
    for i in 1..=n {
        if row_matched[i] {
            continue;
        }
        col_owner[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let row = &cost[i0 - 1];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[col_owner[j] - 1][j - 1]).sum()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact transportation cost between uniform masses on the rows and columns
/// of `cost`, via successive shortest paths on integer-scaled supplies.
pub(crate) fn transport_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let m = cost[0].len();
    let g = gcd(n, m);
    let row_units = (m / g) as u64;
    let col_units = (n / g) as u64;
    let total_units = n as u64 * row_units;

    // nodes: 0 source, 1..=n rows, n+1..=n+m columns, n+m+1 sink
    let source = 0;
    let sink = n + m + 1;
    let nodes = n + m + 2;
    let mut supply = vec![row_units; n];
    let mut demand = vec![col_units; m];
    let mut flow = vec![vec![0u64; m]; n];
    let mut pot = vec![0.0f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    let mut sent = 0u64;
    while sent < total_units {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        dist[source] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (k, &d) in dist.iter().enumerate() {
                if !done[k] && d < best {
                    best = d;
                    u = k;
                }
            }
            if u == usize::MAX || u == sink {
                break;
            }
            done[u] = true;
            let relax = |v: usize, c: f64, dist: &mut [f64], parent: &mut [usize]| {
                let nd = dist[u] + (c + pot[u] - pot[v]).max(0.0);
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = u;
                }
            };
            if u == source {
                for i in 0..n {
                    if supply[i] > 0 {
                        relax(1 + i, 0.0, &mut dist, &mut parent);
                    }
                }
            } else if u <= n {
                let i = u - 1;
                for j in 0..m {
                    if !done[n + 1 + j] {
                        relax(n + 1 + j, cost[i][j], &mut dist, &mut parent);
                    }
                }
            } else {
                let j = u - n - 1;
                for i in 0..n {
                    if flow[i][j] > 0 && !done[1 + i] {
                        relax(1 + i, -cost[i][j], &mut dist, &mut parent);
                    }
                }
                if demand[j] > 0 {
                    relax(sink, 0.0, &mut dist, &mut parent);
                }
            }
        }
        let reach = dist[sink];
        debug_assert!(reach.is_finite(), "transport network stays connected");
        for k in 0..nodes {
            pot[k] += dist[k].min(reach);
        }

        // walk back to find the bottleneck, then push
        let mut bottleneck = u64::MAX;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            if u == source {
                bottleneck = bottleneck.min(supply[v - 1]);
            } else if v == sink {
                bottleneck = bottleneck.min(demand[u - n - 1]);
            } else if u > n {
                bottleneck = bottleneck.min(flow[v - 1][u - n - 1]);
            }
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            if u == source {
                supply[v - 1] -= bottleneck;
            } else if v == sink {
                demand[u - n - 1] -= bottleneck;
            } else if u <= n {
                flow[u - 1][v - n - 1] += bottleneck;
            } else {
                flow[v - 1][u - n - 1] -= bottleneck;
            }
            v = u;
        }
        sent += bottleneck;
    }

    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            if flow[i][j] > 0 {
                total += flow[i][j] as f64 * cost[i][j];
            }
        }
    }
    total / total_units as f64
}

/// Dynamic time warping with |a − b| local cost and no window constraint.
pub fn dtw(s: &[f64], t: &[f64]) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidInput("DTW needs non-empty series".into()));
    }
    let m = t.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &a in s {
        cur[0] = f64::INFINITY;
        for (j, &b) in t.iter().enumerate() {
            let step = prev[j].min(prev[j + 1]).min(cur[j]);
            cur[j + 1] = (a - b).abs() + step;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// L2 norm of the elementwise difference of two equal-length series.
pub fn euclid_series(s: &[f64], t: &[f64]) -> Result<f64> {
    if s.len() != t.len() {
        return Err(Error::InvalidInput(format!(
            "Euclidean series distance needs equal lengths, got {} and {}",
            s.len(),
            t.len()
        )));
    }
    Ok(s.iter()
        .zip(t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// What a similarity matrix measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    GenEmd,
    AlgDtwIgd,
    AlgDtwHv,
    AlgEuclidIgd,
    AlgEuclidHv,
    AlgBestIgdEmd,
    AlgBestHvEmd,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 7] = [
        SimilarityKind::GenEmd,
        SimilarityKind::AlgDtwIgd,
        SimilarityKind::AlgDtwHv,
        SimilarityKind::AlgEuclidIgd,
        SimilarityKind::AlgEuclidHv,
        SimilarityKind::AlgBestIgdEmd,
        SimilarityKind::AlgBestHvEmd,
    ];

    /// The six algorithm-level kinds.
    pub const ALGORITHM: [SimilarityKind; 6] = [
        SimilarityKind::AlgDtwIgd,
        SimilarityKind::AlgDtwHv,
        SimilarityKind::AlgEuclidIgd,
        SimilarityKind::AlgEuclidHv,
        SimilarityKind::AlgBestIgdEmd,
        SimilarityKind::AlgBestHvEmd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::GenEmd => "gen_emd",
            SimilarityKind::AlgDtwIgd => "alg_dtw_igd",
            SimilarityKind::AlgDtwHv => "alg_dtw_hv",
            SimilarityKind::AlgEuclidIgd => "alg_euclid_igd",
            SimilarityKind::AlgEuclidHv => "alg_euclid_hv",
            SimilarityKind::AlgBestIgdEmd => "alg_best_igd_emd",
            SimilarityKind::AlgBestHvEmd => "alg_best_hv_emd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Symmetric pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub kind: SimilarityKind,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Validates shape, symmetry (1e-9), zero diagonal and non-negativity.
    pub fn new(kind: SimilarityKind, labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        Error::check_dim(n, values.len())?;
        for (i, row) in values.iter().enumerate() {
            Error::check_dim(n, row.len())?;
            if row[i] != 0.0 {
                return Err(Error::InvalidInput(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) is {v}")));
                }
                if (v - values[j][i]).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(Self {
            kind,
            labels,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Restriction to `labels`, in the given order.
    pub fn submatrix(&self, labels: &[String]) -> Option<SimilarityMatrix> {
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Option<_>>()?;
        let values = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.values[i][j]).collect())
            .collect();
        Some(SimilarityMatrix {
            kind: self.kind,
            labels: labels.to_vec(),
            values,
        })
    }

    /// Cache key: kind plus a hash of the label list.
    pub fn cache_key(&self) -> String {
        cache_key(self.kind, &self.labels)
    }
}

/// `<kind>-<first 16 hex digits of sha256(labels joined by newlines)>`.
pub fn cache_key(kind: SimilarityKind, labels: &[String]) -> String {
    let mut h = Sha256::new();
    for l in labels {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    let digest = hex::encode(h.finalize());
    format!("{}-{}", kind.as_str(), &digest[..16])
}

/// Fills a symmetric matrix from a pairwise function over the lower triangle.
/// Entries are computed in parallel; the result does not depend on scheduling.
pub fn pairwise<F>(n: usize, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let entries: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| f(i, j))
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(entries) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(values)
}

/// Node label of a generation: `algId#genIndex`.
pub fn generation_label(run_id: &str, gen: usize) -> String {
    format!("{run_id}#{gen}")
}

/// Splits `algId#genIndex` back into its parts.
pub fn parse_generation_label(label: &str) -> Option<(&str, usize)> {
    let (id, gen) = label.rsplit_once('#')?;
    Some((id, gen.parse().ok()?))
}

/// EMD between every pair of generations across `runs`.
pub fn generation_similarity_matrix(runs: &[&AlgorithmRun]) -> Result<SimilarityMatrix> {
    generation_similarity_matrix_with(runs, None)
}

/// As [`generation_similarity_matrix`], optionally normalizing each set first.
pub fn generation_similarity_matrix_with(
    runs: &[&AlgorithmRun],
    normalizer: Option<&Normalizer>,
) -> Result<SimilarityMatrix> {
    if runs.is_empty() {
        return Err(Error::InvalidInput("need at least one run".into()));
    }
    let mut labels = Vec::new();
    let mut sets: Vec<Cow<'_, SolutionSet>> = Vec::new();
    for run in runs {
        for g in run.generations() {
            labels.push(generation_label(&run.algorithm_id, g.index));
            sets.push(match normalizer {
                Some(n) => Cow::Owned(n.apply(&g.solutions)),
                None => Cow::Borrowed(&g.solutions),
            });
        }
    }
    let values = pairwise(sets.len(), |i, j| emd(&sets[i], &sets[j]))?;
    SimilarityMatrix::new(SimilarityKind::GenEmd, labels, values)
}

/// Algorithm-level similarity over all runs of `ws`, which must have measures.
pub fn algorithm_similarity_matrix(ws: &Workspace, kind: SimilarityKind) -> Result<SimilarityMatrix> {
    let series = ws
        .runs
        .iter()
        .map(|r| {
            ws.measures.get(&r.algorithm_id).ok_or_else(|| {
                Error::InvalidInput(format!("measures missing for {}", r.algorithm_id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = ws.runs.iter().map(|r| r.algorithm_id.clone()).collect();
    let n = labels.len();
    let values = match kind {
        SimilarityKind::GenEmd => {
            return Err(Error::UnknownKind(
                "gen_emd is a generation-level kind; use generation_similarity_matrix".into(),
            ))
        }
        SimilarityKind::AlgDtwIgd | SimilarityKind::AlgEuclidIgd
        | SimilarityKind::AlgDtwHv | SimilarityKind::AlgEuclidHv => {
            let measure = match kind {
                SimilarityKind::AlgDtwIgd | SimilarityKind::AlgEuclidIgd => Measure::Igd,
                _ => Measure::Hv,
            };
            let use_dtw = matches!(kind, SimilarityKind::AlgDtwIgd | SimilarityKind::AlgDtwHv);
            pairwise(n, |i, j| {
                let (a, b) = (series[i].series(measure), series[j].series(measure));
                if use_dtw {
                    dtw(a, b)
                } else {
                    euclid_series(a, b)
                }
            })?
        }
        SimilarityKind::AlgBestIgdEmd | SimilarityKind::AlgBestHvEmd => {
            let measure = if kind == SimilarityKind::AlgBestIgdEmd {
                Measure::Igd
            } else {
                Measure::Hv
            };
            let normalizer = ws.normalize.then(|| Normalizer::fit(&ws.reference));
            let best: Vec<Cow<'_, SolutionSet>> = ws
                .runs
                .iter()
                .zip(&series)
                .map(|(run, s)| {
                    let set = &run
                        .generation(s.best_gen(measure))
                        .expect("best generation comes from this run")
                        .solutions;
                    match &normalizer {
                        Some(n) => Cow::Owned(n.apply(set)),
                        None => Cow::Borrowed(set),
                    }
                })
                .collect();
            pairwise(n, |i, j| emd(&best[i], &best[j]))?
        }
    };
    SimilarityMatrix::new(kind, labels, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(rows: Vec<Vec<f64>>) -> SolutionSet {
        SolutionSet::from_rows(rows).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SolutionSet {
        set((0..n)
            .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
            .collect())
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_force_matching(a: &SolutionSet, b: &SolutionSet) -> f64 {
        let n = a.len();
        permutations(n)
            .into_iter()
            .map(|p| {
                (0..n)
                    .map(|i| euclidean(&a.objectives()[i], &b.objectives()[p[i]]))
                    .sum::<f64>()
                    / n as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn emd_examples() {
        let a = set(vec![vec![0.0, 0.0], vec![1.0, 2.0]]);
        assert_eq!(emd(&a, &a).unwrap(), 0.0);
        assert_eq!(
            emd(&set(vec![vec![0.0, 0.0]]), &set(vec![vec![3.0, 4.0]])).unwrap(),
            5.0
        );
        assert!(emd(&a, &set(vec![vec![0.0, 0.0, 0.0]])).is_err());
    }

    #[test]
    fn emd_matches_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=6 {
            for _ in 0..10 {
                let a = random_set(&mut rng, n, 2);
                let b = random_set(&mut rng, n, 2);
                let got = emd(&a, &b).unwrap();
                let want = brute_force_matching(&a, &b);
                assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
            }
        }
    }

    /// Unequal sizes: replicate each point so both sides have lcm(n, m) unit
    /// masses, then brute-force the matching.
    #[test]
    fn unequal_emd_matches_replicated_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, m) in [(1, 2), (2, 3), (3, 2), (2, 4), (3, 1), (1, 5), (6, 3), (3, 6)] {
            for _ in 0..5 {
                let a = random_set(&mut rng, n, 3);
                let b = random_set(&mut rng, m, 3);
                let l = n * m / gcd(n, m);
                let rep = |s: &SolutionSet, k: usize| {
                    set(s
                        .objectives()
                        .iter()
                        .flat_map(|p| std::iter::repeat_n(p.to_vec(), k))
                        .collect())
                };
                let want = brute_force_matching(&rep(&a, l / n), &rep(&b, l / m));
                let got = emd(&a, &b).unwrap();
                assert!((got - want).abs() < 1e-9, "({n},{m}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn transport_and_assignment_agree_on_square_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 5, 17, 40] {
            let a = random_set(&mut rng, n, 3);
            let b = random_set(&mut rng, n, 3);
            let cost: Vec<Vec<f64>> = a
                .objectives()
                .iter()
                .map(|x| b.objectives().iter().map(|y| euclidean(x, y)).collect())
                .collect();
            let hungarian = assignment_cost(&cost) / n as f64;
            let flow = transport_cost(&cost);
            assert!((hungarian - flow).abs() < 1e-9);
        }
    }

    #[test]
    fn emd_is_translation_invariant_and_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let a = random_set(&mut rng, 5, 2);
            let b = random_set(&mut rng, 4, 2);
            let c = random_set(&mut rng, 3, 2);
            let shift = |s: &SolutionSet| {
                set(s.objectives().iter().map(|p| vec![p[0] + 3.5, p[1] - 1.25]).collect())
            };
            let ab = emd(&a, &b).unwrap();
            assert!((emd(&shift(&a), &shift(&b)).unwrap() - ab).abs() < 1e-9);
            assert_eq!(ab, emd(&b, &a).unwrap());
            assert!(emd(&a, &c).unwrap() <= ab + emd(&b, &c).unwrap() + 1e-9);
        }
    }

    #[test]
    fn emd_rejects_oversized_supports() {
        let big = set(vec![vec![0.0, 0.0]; MAX_EMD_SUPPORT + 1]);
        let small = set(vec![vec![0.0, 0.0]]);
        assert!(matches!(emd(&big, &small), Err(Error::TooLarge(_))));
    }

    fn enumerate_paths(s: &[f64], t: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (s[i] - t[j]).abs();
        if i + 1 == s.len() && j + 1 == t.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < s.len() {
            enumerate_paths(s, t, i + 1, j, acc, best);
        }
        if j + 1 < t.len() {
            enumerate_paths(s, t, i, j + 1, acc, best);
        }
        if i + 1 < s.len() && j + 1 < t.len() {
            enumerate_paths(s, t, i + 1, j + 1, acc, best);
        }
    }

    #[test]
    fn dtw_examples() {
        let s = [1.0, 3.0, 2.0];
        assert_eq!(dtw(&s, &s).unwrap(), 0.0);
        assert_eq!(dtw(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert!(dtw(&[], &[1.0]).is_err());
    }

    #[test]
    fn dtw_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut best = f64::INFINITY;
            enumerate_paths(&s, &t, 0, 0, 0.0, &mut best);
            assert_eq!(dtw(&s, &t).unwrap(), best);
            // the diagonal path is one admissible warping
            let diagonal: f64 = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum();
            assert!(dtw(&s, &t).unwrap() <= diagonal + 1e-12);
        }
    }

    #[test]
    fn euclid_examples() {
        assert_eq!(euclid_series(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclid_series(&[0.0; 3], &[1.0; 3]).unwrap(), 3f64.sqrt());
        assert!(euclid_series(&[0.0], &[0.0, 1.0]).is_err());
        let s = [0.3, -1.0, 2.5, 4.0];
        let t = [1.0, 0.5, -0.5, 2.0];
        let naive = ((0.7f64).powi(2) + 1.5f64.powi(2) + 3.0f64.powi(2) + 2.0f64.powi(2)).sqrt();
        assert!((euclid_series(&s, &t).unwrap() - naive).abs() < 1e-12);
    }

    #[test]
    fn kind_parsing() {
        for k in SimilarityKind::ALL {
            assert_eq!(SimilarityKind::parse(k.as_str()).unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.as_str()));
        }
        assert!(matches!(SimilarityKind::parse("nope"), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn matrix_invariants_enforced() {
        let l = vec!["a".to_string(), "b".to_string()];
        assert!(SimilarityMatrix::new(SimilarityKind::GenEmd, l.clone(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(SimilarityMatrix::new(SimilarityKind::GenEmd, l.clone(), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SimilarityMatrix::new(SimilarityKind::GenEmd, l.clone(), vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(SimilarityMatrix::new(SimilarityKind::GenEmd, l, vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let l = generation_label("alg#x", 42);
        assert_eq!(parse_generation_label(&l), Some(("alg#x", 42)));
    }
}
