//! kNN generation graph with layout, clusters, neighbor rings and
//! chronological curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureSeries};
use crate::similarity::{parse_generation_label, SimilarityKind, SimilarityMatrix};

use super::hdbscan::{hdbscan, HdbscanParams};
use super::layout::{circular_init, hop_distances, kamada_kawai};

pub const DEFAULT_K: usize = 10;
pub const RADIUS_RANGE: (f64, f64) = (3.0, 12.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub k: usize,
    pub size_measure: Measure,
    pub hdbscan: HdbscanParams,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            size_measure: Measure::Igd,
            hdbscan: HdbscanParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub label: String,
    pub run_id: String,
    pub gen_index: usize,
    pub coords: [f64; 2],
    pub size_value: f64,
    /// `size_value` mapped linearly onto [`RADIUS_RANGE`].
    pub radius: f64,
    /// Chronological position within the run, 0 = first, 1 = last.
    pub age: f64,
    pub cluster: Option<usize>,
    pub is_outlier: bool,
    pub ring: f64,
    /// The k nearest generations, nearest first.
    pub neighbors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCurves {
    pub run_id: String,
    /// Chronological pieces with at least two nodes.
    pub segments: Vec<Vec<String>>,
    /// Nodes dropped because both their curve links stay inside one cluster.
    pub collapsed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationGraph {
    pub k: usize,
    pub size_measure: Measure,
    pub nodes: Vec<GraphNode>,
    /// Undirected union of the kNN lists, ascending by distance.
    pub edges: Vec<GraphEdge>,
    pub curves: Vec<RunCurves>,
    pub clusters: Vec<ClusterSummary>,
}

/// `measures` must contain a series for every run appearing in `matrix`.
pub fn build_generation_graph(
    matrix: &SimilarityMatrix,
    measures: &BTreeMap<String, MeasureSeries>,
    params: &GraphParams,
) -> Result<GenerationGraph> {
    if matrix.kind != SimilarityKind::GenEmd {
        return Err(Error::InvalidInput(format!(
            "generation graph needs a gen_emd matrix, got {}",
            matrix.kind.as_str()
        )));
    }
    let n = matrix.len();
    let k = params.k;
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "k must satisfy 1 <= k < node count (k = {k}, nodes = {n})"
        )));
    }
    let ids: Vec<(&str, usize)> = matrix
        .labels
        .iter()
        .map(|l| {
            parse_generation_label(l)
                .ok_or_else(|| Error::InvalidInput(format!("bad generation label {l:?}")))
        })
        .collect::<Result<_>>()?;
    let size_values: Vec<f64> = ids
        .iter()
        .map(|&(run, gen)| {
            measures
                .get(run)
                .and_then(|s| s.value_at(params.size_measure, gen))
                .ok_or_else(|| Error::InvalidInput(format!("no measure for {run}#{gen}")))
        })
        .collect::<Result<_>>()?;

    let labels = &matrix.labels;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            idx.sort_by(|&a, &b| {
                matrix.values[i][a]
                    .total_cmp(&matrix.values[i][b])
                    .then_with(|| labels[a].cmp(&labels[b]))
            });
            idx.truncate(k);
            idx
        })
        .collect();

    let mut pairs = BTreeSet::new();
    for (i, nb) in neighbors.iter().enumerate() {
        for &j in nb {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &pairs {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut edge_list: Vec<(usize, usize)> = pairs.into_iter().collect();
    edge_list.sort_by(|&(a, b), &(c, d)| {
        matrix.values[a][b]
            .total_cmp(&matrix.values[c][d])
            .then_with(|| (&labels[a], &labels[b]).cmp(&(&labels[c], &labels[d])))
    });
    let edges = edge_list
        .iter()
        .map(|&(a, b)| GraphEdge {
            source: labels[a].clone(),
            target: labels[b].clone(),
            distance: matrix.values[a][b],
        })
        .collect();

    let hops = hop_distances(&adjacency);
    let layout = kamada_kawai(&hops, &circular_init(&hops));
    let clusters = hdbscan(&matrix.values, params.hdbscan)?;

    let (lo, hi) = size_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let radius = |v: f64| {
        let (r0, r1) = RADIUS_RANGE;
        if hi > lo {
            r0 + (v - lo) / (hi - lo) * (r1 - r0)
        } else {
            (r0 + r1) / 2.0
        }
    };

    // chronological node order per run
    let mut by_run: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, &(run, _)) in ids.iter().enumerate() {
        by_run.entry(run).or_default().push(i);
    }
    for seq in by_run.values_mut() {
        seq.sort_by_key(|&i| ids[i].1);
    }
    let mut age = vec![0.0; n];
    for seq in by_run.values() {
        let len = seq.len();
        for (pos, &i) in seq.iter().enumerate() {
            age[i] = if len > 1 { pos as f64 / (len - 1) as f64 } else { 0.0 };
        }
    }

    let nodes = (0..n)
        .map(|i| {
            let foreign = neighbors[i].iter().filter(|&&j| ids[j].0 != ids[i].0).count();
            GraphNode {
                label: labels[i].clone(),
                run_id: ids[i].0.to_string(),
                gen_index: ids[i].1,
                coords: layout.coords[i],
                size_value: size_values[i],
                radius: radius(size_values[i]),
                age: age[i],
                cluster: clusters[i],
                is_outlier: clusters[i].is_none(),
                ring: foreign as f64 / k as f64,
                neighbors: neighbors[i].iter().map(|&j| labels[j].clone()).collect(),
            }
        })
        .collect();

    let curves = by_run
        .iter()
        .map(|(run, seq)| curves_for_run(run, seq, &clusters, labels))
        .collect();

    let mut members: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, c) in clusters.iter().enumerate() {
        if let Some(c) = c {
            members.entry(*c).or_default().push(labels[i].clone());
        }
    }
    let clusters = members
        .into_iter()
        .map(|(id, members)| ClusterSummary { id, members })
        .collect();

    Ok(GenerationGraph {
        k,
        size_measure: params.size_measure,
        nodes,
        edges,
        curves,
        clusters,
    })
}

/// Cuts the chronological sequence between consecutive nodes of the same
/// cluster; pieces of one node are collapsed.
fn curves_for_run(
    run: &str,
    seq: &[usize],
    clusters: &[Option<usize>],
    labels: &[String],
) -> RunCurves {
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for (pos, &i) in seq.iter().enumerate() {
        if pos > 0 {
            let prev = seq[pos - 1];
            if clusters[prev].is_some() && clusters[prev] == clusters[i] {
                pieces.push(std::mem::take(&mut current));
            }
        }
        current.push(i);
    }
    pieces.push(current);
    let mut segments = Vec::new();
    let mut collapsed = Vec::new();
    for p in pieces {
        if p.len() >= 2 {
            segments.push(p.iter().map(|&i| labels[i].clone()).collect());
        } else {
            collapsed.extend(p.iter().map(|&i| labels[i].clone()));
        }
    }
    RunCurves {
        run_id: run.to_string(),
        segments,
        collapsed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::BestGenerations;
    use crate::similarity::generation_label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(run: &str, gens: usize, rng: &mut ChaCha8Rng) -> MeasureSeries {
        let vals: Vec<f64> = (0..gens).map(|_| rng.random_range(0.0..1.0)).collect();
        MeasureSeries {
            algorithm: run.into(),
            generations: (0..gens).collect(),
            igd: vals.clone(),
            hv: vals.clone(),
            sp: vals.clone(),
            ms: vals,
            best: BestGenerations { igd: 0, hv: 0, sp: 0, ms: 0 },
            igd_profiles: Vec::new(),
        }
    }

    /// Each run walks through planar points; distance is Euclidean.
    fn fixture(runs: &[(&str, Vec<[f64; 2]>)]) -> (SimilarityMatrix, BTreeMap<String, MeasureSeries>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut labels = Vec::new();
        let mut pts = Vec::new();
        let mut measures = BTreeMap::new();
        for (run, walk) in runs {
            for (g, p) in walk.iter().enumerate() {
                labels.push(generation_label(run, g));
                pts.push(*p);
            }
            measures.insert(run.to_string(), series(run, walk.len(), &mut rng));
        }
        let values = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        (
            SimilarityMatrix::new(SimilarityKind::GenEmd, labels, values).unwrap(),
            measures,
        )
    }

    fn random_walk(rng: &mut ChaCha8Rng, len: usize) -> Vec<[f64; 2]> {
        let mut p = [0.0, 0.0];
        (0..len)
            .map(|_| {
                p[0] += rng.random_range(-1.0..1.0);
                p[1] += rng.random_range(-1.0..1.0);
                p
            })
            .collect()
    }

    #[test]
    fn every_node_has_k_neighbors_and_edges_cover_them() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (m, s) = fixture(&[("a", random_walk(&mut rng, 100)), ("b", random_walk(&mut rng, 100))]);
        let g = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        assert_eq!(g.nodes.len(), 200);
        let edge_set: BTreeSet<(String, String)> = g
            .edges
            .iter()
            .map(|e| (e.source.clone(), e.target.clone()))
            .collect();
        for node in &g.nodes {
            assert_eq!(node.neighbors.len(), 10);
            for nb in &node.neighbors {
                assert!(
                    edge_set.contains(&(node.label.clone(), nb.clone()))
                        || edge_set.contains(&(nb.clone(), node.label.clone()))
                );
            }
            assert!((0.0..=1.0).contains(&node.ring));
            let scaled = node.ring * 10.0;
            assert!((scaled - scaled.round()).abs() < 1e-12);
            assert!((3.0..=12.0).contains(&node.radius));
            assert_eq!(node.is_outlier, node.cluster.is_none());
        }
        assert!(g.edges.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn single_run_has_zero_rings() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, s) = fixture(&[("only", random_walk(&mut rng, 40))]);
        let g = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        assert!(g.nodes.iter().all(|n| n.ring == 0.0));
    }

    #[test]
    fn two_blobs_give_two_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let blob = |rng: &mut ChaCha8Rng, cx: f64| -> Vec<[f64; 2]> {
            (0..30)
                .map(|_| [cx + rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)])
                .collect()
        };
        let (m, s) = fixture(&[("a", blob(&mut rng, 0.0)), ("b", blob(&mut rng, 100.0))]);
        let g = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        assert_eq!(g.clusters.len(), 2);
        assert!(g.nodes.iter().all(|n| !n.is_outlier));
    }

    #[test]
    fn curves_partition_each_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, s) = fixture(&[("a", random_walk(&mut rng, 60)), ("b", random_walk(&mut rng, 60))]);
        let g = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        for c in &g.curves {
            let mut all: Vec<usize> = c
                .segments
                .iter()
                .flatten()
                .chain(&c.collapsed)
                .map(|l| parse_generation_label(l).unwrap().1)
                .collect();
            all.sort();
            assert_eq!(all, (0..60).collect::<Vec<_>>());
            // no segment keeps an intra-cluster link
            let cluster_of: BTreeMap<&str, Option<usize>> =
                g.nodes.iter().map(|n| (n.label.as_str(), n.cluster)).collect();
            for seg in &c.segments {
                for w in seg.windows(2) {
                    let (x, y) = (cluster_of[w[0].as_str()], cluster_of[w[1].as_str()]);
                    assert!(x.is_none() || x != y);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (m, s) = fixture(&[("a", random_walk(&mut rng, 30)), ("b", random_walk(&mut rng, 30))]);
        let a = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        let b = build_generation_graph(&m, &s, &GraphParams::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for k in [0, 60] {
            let p = GraphParams { k, ..GraphParams::default() };
            assert!(build_generation_graph(&m, &s, &p).is_err());
        }
    }
}
