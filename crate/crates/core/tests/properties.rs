//! Property tests over the public API: round-trips, matrix contracts and
//! analytics invariants on generated inputs.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use emoscope_core::analytics::{build_generation_graph, hdbscan, GraphParams, HdbscanParams};
use emoscope_core::benchmarks::{dtlz, reference_set};
use emoscope_core::evolution::{run_nsga2, EvolutionConfig};
use emoscope_core::ingest::{
    build_workspace, downsample, parse_run_log, write_run_log, AlgorithmRun, GenerationRecord,
    RunSource,
};
use emoscope_core::model::{non_dominated_filter, SolutionSet};
use emoscope_core::similarity::{
    algorithm_similarity_matrix, dtw, emd, generation_similarity_matrix, SimilarityKind,
};

fn rows(m: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, m), 1..max)
}

fn run_from(id: &str, gens: Vec<Vec<Vec<f64>>>) -> AlgorithmRun {
    let records = gens
        .into_iter()
        .enumerate()
        .map(|(i, r)| GenerationRecord {
            index: 3 * i,
            solutions: SolutionSet::from_rows(r).unwrap(),
        })
        .collect();
    AlgorithmRun::new(id, "synthetic", None, RunSource::Imported, records).unwrap()
}

/// Same partition up to label names; `perm[i]` is the original index of
/// permuted point `i`.
fn same_partition(a: &[Option<usize>], b: &[Option<usize>], perm: &[usize]) -> bool {
    let mut map = BTreeMap::new();
    for (i, &orig) in perm.iter().enumerate() {
        match (a[orig], b[i]) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if *map.entry(x).or_insert(y) != y {
                    return false;
                }
            }
            _ => return false,
        }
    }
    let targets: BTreeSet<_> = map.values().collect();
    targets.len() == map.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn run_log_round_trips(gens in prop::collection::vec(rows(3, 6), 1..8)) {
        let run = run_from("alg-1", gens);
        let mut buf = Vec::new();
        write_run_log(&run, &mut buf).unwrap();
        let back = parse_run_log(buf.as_slice()).unwrap();
        prop_assert_eq!(back, run);
    }

    #[test]
    fn downsampled_runs_keep_endpoints(gens in prop::collection::vec(rows(2, 4), 2..40), target in 2usize..20) {
        let run = run_from("a", gens);
        let small = downsample(&run, target).unwrap();
        prop_assert_eq!(small.generations()[0].index, run.generations()[0].index);
        prop_assert_eq!(small.last().index, run.last().index);
        for g in small.generations() {
            prop_assert_eq!(run.generation(g.index), Some(g));
        }
    }

    #[test]
    fn generation_matrix_is_a_valid_distance_matrix(
        a in prop::collection::vec(rows(2, 5), 1..5),
        b in prop::collection::vec(rows(2, 5), 1..5),
    ) {
        let (ra, rb) = (run_from("a", a), run_from("b", b));
        let mat = generation_similarity_matrix(&[&ra, &rb]).unwrap();
        prop_assert_eq!(mat.len(), ra.len() + rb.len());
        for i in 0..mat.len() {
            prop_assert_eq!(mat.get(i, i), 0.0);
            for j in 0..mat.len() {
                prop_assert!(mat.get(i, j) >= 0.0 && mat.get(i, j).is_finite());
                prop_assert_eq!(mat.get(i, j).to_bits(), mat.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn emd_of_filtered_front_is_finite_and_translation_invariant(pts in rows(3, 10), other in rows(3, 10), shift in prop::collection::vec(-3.0f64..3.0, 3)) {
        let a = non_dominated_filter(&SolutionSet::from_rows(pts.clone()).unwrap());
        let b = SolutionSet::from_rows(other.clone()).unwrap();
        let base = emd(&a, &b).unwrap();
        let moved = |s: &SolutionSet| {
            SolutionSet::from_rows(
                s.objectives().iter().map(|o| o.iter().zip(&shift).map(|(x, d)| x + d).collect()).collect(),
            )
            .unwrap()
        };
        prop_assert!((emd(&moved(&a), &moved(&b)).unwrap() - base).abs() <= 1e-9);
    }

    #[test]
    fn dtw_bounded_by_diagonal_and_symmetric(s in prop::collection::vec(-4.0f64..4.0, 1..12), t in prop::collection::vec(-4.0f64..4.0, 1..12)) {
        prop_assert_eq!(dtw(&s, &t).unwrap(), dtw(&t, &s).unwrap());
        prop_assert_eq!(dtw(&s, &s).unwrap(), 0.0);
        if s.len() == t.len() {
            let diag: f64 = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(dtw(&s, &t).unwrap() <= diag + 1e-12);
        }
    }

    #[test]
    fn hdbscan_is_permutation_consistent(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 12..40),
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let dist = |p: &[(f64, f64)]| -> Vec<Vec<f64>> {
            p.iter().map(|a| p.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect()).collect()
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted: Vec<(f64, f64)> = perm.iter().map(|&i| pts[i]).collect();
        let params = HdbscanParams { min_cluster_size: 4, min_samples: 3 };
        let a = hdbscan(&dist(&pts), params).unwrap();
        let b = hdbscan(&dist(&permuted), params).unwrap();
        prop_assert!(same_partition(&a, &b, &perm), "{a:?} vs {b:?}");
    }
}

#[test]
fn graph_rings_are_multiples_of_one_over_k() {
    let problem = dtlz(2, 3).unwrap();
    let reference = reference_set(&problem, 6).unwrap();
    let runs: Vec<AlgorithmRun> = (0..3)
        .map(|s| {
            let mut r = run_nsga2(&problem, &EvolutionConfig::new(8, 20, s)).unwrap();
            r.algorithm_id = format!("r{s}");
            r
        })
        .collect();
    let ws = build_workspace(problem.meta().clone(), reference, runs).unwrap();
    let matrix = generation_similarity_matrix(&ws.runs.iter().collect::<Vec<_>>()).unwrap();
    let measures: BTreeMap<String, _> = ws
        .runs
        .iter()
        .map(|r| (r.algorithm_id.clone(), ws.measure(r).unwrap()))
        .collect();
    for k in [1, 4, 10] {
        let params = GraphParams { k, ..GraphParams::default() };
        let g = build_generation_graph(&matrix, &measures, &params).unwrap();
        for node in &g.nodes {
            let scaled = node.ring * k as f64;
            assert!((scaled - scaled.round()).abs() < 1e-9, "ring {} for k={k}", node.ring);
            assert!((0.0..=1.0).contains(&node.ring));
            assert!((0.0..=1.0).contains(&node.age));
            assert_eq!(node.neighbors.len(), k);
        }
        assert_eq!(g, build_generation_graph(&matrix, &measures, &params).unwrap());
    }
}

#[test]
fn algorithm_matrices_satisfy_matrix_contract() {
    let problem = dtlz(2, 3).unwrap();
    let reference = reference_set(&problem, 6).unwrap();
    let runs: Vec<AlgorithmRun> = (0..3)
        .map(|s| {
            let mut r = run_nsga2(&problem, &EvolutionConfig::new(8, 15, s + 10)).unwrap();
            r.algorithm_id = format!("alg{s}");
            r
        })
        .collect();
    let mut ws = build_workspace(problem.meta().clone(), reference, runs).unwrap();
    let measured: Vec<_> = ws.runs.iter().map(|r| (r.algorithm_id.clone(), ws.measure(r).unwrap())).collect();
    ws.measures.extend(measured);
    for kind in SimilarityKind::ALGORITHM {
        let m = algorithm_similarity_matrix(&ws, kind).unwrap();
        assert_eq!(m.labels, vec!["alg0", "alg1", "alg2"]);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0, "{kind:?}");
            for j in 0..3 {
                assert!(m.get(i, j) >= 0.0 && m.get(i, j).is_finite());
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }
}
