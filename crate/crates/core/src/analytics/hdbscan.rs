//! HDBSCAN on a precomputed distance matrix, excess-of-mass cluster
//! selection, the root never selected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 5,
            min_samples: 5,
        }
    }
}

/// Cluster label per point, `None` for noise. Labels are numbered by first
/// appearance in input order.
pub fn hdbscan(dist: &[Vec<f64>], params: HdbscanParams) -> Result<Vec<Option<usize>>> {
    let n = dist.len();
    if params.min_cluster_size < 2 || params.min_samples < 1 {
        return Err(Error::InvalidInput(
            "min_cluster_size must be >= 2 and min_samples >= 1".into(),
        ));
    }
    for row in dist {
        Error::check_dim(n, row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "hdbscan distances".into(),
            });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let core: Vec<f64> = dist
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[(params.min_samples - 1).min(n - 1)]
        })
        .collect();
    let mrd = |i: usize, j: usize| dist[i][j].max(core[i]).max(core[j]);

    let mut edges = prim_mst(n, mrd);
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let dendro = single_linkage(n, &edges);
    let tree = condense(n, &dendro, params.min_cluster_size);
    let selected = select_eom(&tree);
    Ok(label_points(n, &tree, &selected))
}

fn prim_mst(n: usize, w: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut u = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if !in_tree[v] {
                let d = w(u, v);
                if d < best[v] {
                    best[v] = d;
                    from[v] = u;
                }
            }
        }
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || best[v] < best[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        let (a, b) = (from[next].min(next), from[next].max(next));
        edges.push((a, b, best[next]));
        u = next;
    }
    edges
}

/// Internal node n + k merges `left` and `right` at `dist`.
struct Merge {
    left: usize,
    right: usize,
    dist: f64,
    size: usize,
}

fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Merge> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for &(a, b, d) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let node = n + merges.len();
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge {
            left: ra,
            right: rb,
            dist: d,
            size: size[node],
        });
    }
    merges
}

fn lambda(d: f64) -> f64 {
    1.0 / d.max(f64::MIN_POSITIVE.sqrt())
}

#[derive(Debug, Default)]
struct Cluster {
    parent: Option<usize>,
    birth: f64,
    children: Vec<usize>,
    /// (point, λ at which it left this cluster)
    points: Vec<(usize, f64)>,
    stability: f64,
}

fn condense(n: usize, dendro: &[Merge], min_size: usize) -> Vec<Cluster> {
    let mut clusters = vec![Cluster::default()];
    if n == 1 {
        clusters[0].points.push((0, 0.0));
        return clusters;
    }
    let root = n + dendro.len() - 1;
    // (dendrogram node, owning cluster)
    let mut stack = vec![(root, 0usize)];
    while let Some((node, c)) = stack.pop() {
        if node < n {
            // a lone leaf that is still a cluster's whole remainder
            clusters[c].points.push((node, f64::INFINITY));
            continue;
        }
        let dist = dendro[node - n].dist;
        let lam = lambda(dist);
        let parts = same_level_parts(n, dendro, node);
        let big = parts.iter().filter(|&&(_, size)| size >= min_size).count();
        for (child, size) in parts {
            if size < min_size {
                let mut leaves = Vec::new();
                collect_leaves(n, dendro, child, &mut leaves);
                clusters[c].points.extend(leaves.into_iter().map(|p| (p, lam)));
            } else if big >= 2 {
                let id = clusters.len();
                clusters.push(Cluster {
                    parent: Some(c),
                    birth: lam,
                    ..Default::default()
                });
                clusters[c].children.push(id);
                stack.push((child, id));
            } else {
                stack.push((child, c));
            }
        }
    }
    let count = clusters.len();
    for id in 0..count {
        let birth = clusters[id].birth;
        let mut terms: Vec<f64> = clusters[id]
            .points
            .iter()
            .map(|&(_, lp)| if lp.is_finite() { lp - birth } else { 0.0 })
            .collect();
        for &ch in &clusters[id].children {
            terms.push((clusters[ch].birth - birth) * subtree_size(&clusters, ch) as f64);
        }
        clusters[id].stability = ordered_sum(terms);
    }
    clusters
}

/// The components a dendrogram node splits into at its own level: merges at
/// the same distance are expanded, so tied edges split all at once.
fn same_level_parts(n: usize, dendro: &[Merge], node: usize) -> Vec<(usize, usize)> {
    let dist = dendro[node - n].dist;
    let mut parts = Vec::new();
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x >= n && dendro[x - n].dist == dist {
            stack.push(dendro[x - n].right);
            stack.push(dendro[x - n].left);
        } else {
            parts.push((x, if x < n { 1 } else { dendro[x - n].size }));
        }
    }
    parts
}

/// Summation independent of term order.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn subtree_size(clusters: &[Cluster], id: usize) -> usize {
    clusters[id].points.len()
        + clusters[id]
            .children
            .iter()
            .map(|&c| subtree_size(clusters, c))
            .sum::<usize>()
}

fn collect_leaves(n: usize, dendro: &[Merge], node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            stack.push(dendro[x - n].right);
            stack.push(dendro[x - n].left);
        }
    }
}

fn select_eom(clusters: &[Cluster]) -> Vec<bool> {
    let count = clusters.len();
    let mut selected = vec![false; count];
    let mut best = vec![0.0; count];
    // children always have larger ids than their parent
    for id in (0..count).rev() {
        let child_sum = ordered_sum(clusters[id].children.iter().map(|&c| best[c]).collect());
        let is_leaf = clusters[id].children.is_empty();
        if id != 0 && (is_leaf || clusters[id].stability >= child_sum) {
            selected[id] = true;
            best[id] = clusters[id].stability;
        } else {
            best[id] = child_sum;
        }
    }
    // keep only the top-most selected clusters
    for id in 0..count {
        if selected[id] {
            let mut stack = clusters[id].children.clone();
            while let Some(c) = stack.pop() {
                selected[c] = false;
                stack.extend(clusters[c].children.iter().copied());
            }
        }
    }
    selected
}

fn label_points(n: usize, clusters: &[Cluster], selected: &[bool]) -> Vec<Option<usize>> {
    let mut raw: Vec<Option<usize>> = vec![None; n];
    for (id, c) in clusters.iter().enumerate() {
        let mut anc = Some(id);
        let mut owner = None;
        while let Some(a) = anc {
            if selected[a] {
                owner = Some(a);
            }
            anc = clusters[a].parent;
        }
        for &(p, _) in &c.points {
            raw[p] = owner;
        }
    }
    let mut map = std::collections::HashMap::new();
    raw.into_iter()
        .map(|l| {
            l.map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn distances(pts: &[[f64; 2]]) -> Vec<Vec<f64>> {
        pts.iter()
            .map(|a| {
                pts.iter()
                    .map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
                    .collect()
            })
            .collect()
    }

    fn blobs(rng: &mut ChaCha8Rng, centers: &[[f64; 2]], per: usize, radius: f64) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for c in centers {
            for _ in 0..per {
                let r = radius * rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                pts.push([c[0] + r * t.cos(), c[1] + r * t.sin()]);
            }
        }
        pts
    }

    #[test]
    fn two_separated_blobs() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = blobs(&mut rng, &[[0.0, 0.0], [100.0, 0.0]], 30, 0.5);
            let labels = hdbscan(&distances(&pts), HdbscanParams::default()).unwrap();
            assert!(labels.iter().all(|l| l.is_some()), "seed {seed}: noise found");
            assert!(labels[..30].iter().all(|&l| l == Some(0)));
            assert!(labels[30..].iter().all(|&l| l == Some(1)));
        }
    }

    #[test]
    fn constant_intra_distance_blobs() {
        let n = 60;
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i == j, i / 30 == j / 30) {
                        (true, _) => 0.0,
                        (false, true) => 1.0,
                        (false, false) => 100.0,
                    })
                    .collect()
            })
            .collect();
        let labels = hdbscan(&d, HdbscanParams::default()).unwrap();
        assert!(labels.iter().all(|l| l.is_some()));
        let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn far_point_is_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pts = blobs(&mut rng, &[[0.0, 0.0], [20.0, 0.0]], 20, 1.0);
        pts.push([10.0, 40.0]);
        let labels = hdbscan(&distances(&pts), HdbscanParams::default()).unwrap();
        assert_eq!(labels[40], None);
    }

    #[test]
    fn tiny_inputs() {
        assert!(hdbscan(&[], HdbscanParams::default()).unwrap().is_empty());
        assert_eq!(hdbscan(&[vec![0.0]], HdbscanParams::default()).unwrap(), vec![None]);
        let d = distances(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert_eq!(hdbscan(&d, HdbscanParams::default()).unwrap(), vec![None; 3]);
    }

    #[test]
    fn permutation_only_renames_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let pts = blobs(&mut rng, &[[0.0, 0.0], [6.0, 1.0], [2.0, 9.0]], 15, 2.0);
            let base = hdbscan(&distances(&pts), HdbscanParams::default()).unwrap();
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            perm.shuffle(&mut rng);
            let shuffled: Vec<[f64; 2]> = perm.iter().map(|&i| pts[i]).collect();
            let other = hdbscan(&distances(&shuffled), HdbscanParams::default()).unwrap();
            // same partition: co-membership agrees for every pair
            for a in 0..pts.len() {
                assert_eq!(base[perm[a]].is_none(), other[a].is_none());
                for b in 0..pts.len() {
                    let same_base = base[perm[a]].is_some() && base[perm[a]] == base[perm[b]];
                    let same_other = other[a].is_some() && other[a] == other[b];
                    assert_eq!(same_base, same_other);
                }
            }
        }
    }
}
