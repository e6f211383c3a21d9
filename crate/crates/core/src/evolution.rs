//! Generational EMO loop with two engines: NSGA-II and steady-state SMS-EMOA.
//!
//! Randomness comes from ChaCha8 seeded with `seed`. Generation `t` draws from
//! stream `t` of that generator (stream 0 builds the initial population), so a
//! run is reproducible bit for bit on any platform.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
pub use crate::ingest::GenerationRecord;
use crate::ingest::{AlgorithmRun, RunSource};
use crate::measures::hv_contributions;
use crate::model::{dominates_unchecked, DecisionVector, ObjectiveVector, SolutionSet};

/// Engine settings. `mutation_prob = None` means 1/d.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub sbx_eta: f64,
    pub sbx_prob: f64,
    pub mutation_eta: f64,
    pub mutation_prob: Option<f64>,
}

impl EvolutionConfig {
    pub fn new(population_size: usize, generations: usize, seed: u64) -> Self {
        Self {
            population_size,
            generations,
            seed,
            sbx_eta: 20.0,
            sbx_prob: 1.0,
            mutation_eta: 20.0,
            mutation_prob: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "population size must be even and at least 4, got {}",
                self.population_size
            )));
        }
        if self.generations < 1 {
            return Err(Error::InvalidInput("at least one generation is required".into()));
        }
        if !(self.sbx_eta > 0.0 && self.mutation_eta > 0.0) {
            return Err(Error::InvalidInput("distribution indices must be positive".into()));
        }
        let probs = [Some(self.sbx_prob), self.mutation_prob];
        if probs.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput("probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Which built-in engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Nsga2,
    SmsEmoa,
}

impl Engine {
    pub fn id(self) -> &'static str {
        match self {
            Engine::Nsga2 => "nsga2",
            Engine::SmsEmoa => "smsemoa",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nsga2" | "nsgaii" => Some(Engine::Nsga2),
            "smsemoa" => Some(Engine::SmsEmoa),
            _ => None,
        }
    }

    pub fn run(self, problem: &BenchmarkProblem, cfg: &EvolutionConfig) -> Result<AlgorithmRun> {
        match self {
            Engine::Nsga2 => run_nsga2(problem, cfg),
            Engine::SmsEmoa => run_sms_emoa(problem, cfg),
        }
    }
}

/// Generator for one generation's stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
struct Individual {
    x: Vec<f64>,
    f: Vec<f64>,
}

struct Variation<'a> {
    problem: &'a BenchmarkProblem,
    cfg: &'a EvolutionConfig,
    mutation_prob: f64,
}

impl<'a> Variation<'a> {
    fn new(problem: &'a BenchmarkProblem, cfg: &'a EvolutionConfig) -> Self {
        let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / problem.d() as f64);
        Self {
            problem,
            cfg,
            mutation_prob,
        }
    }

    fn random_individual(&self, rng: &mut ChaCha8Rng) -> Individual {
        let x: Vec<f64> = self
            .problem
            .bounds()
            .iter()
            .map(|b| rng.random_range(b.lower..=b.upper))
            .collect();
        self.evaluate(x)
    }

    fn evaluate(&self, x: Vec<f64>) -> Individual {
        let f = self.problem.evaluate_raw(&x);
        Individual { x, f }
    }

    /// Simulated binary crossover followed by polynomial mutation.
    fn offspring(&self, p1: &[f64], p2: &[f64], rng: &mut ChaCha8Rng) -> (Individual, Individual) {
        let (mut c1, mut c2) = (p1.to_vec(), p2.to_vec());
        if rng.random::<f64>() < self.cfg.sbx_prob {
            self.sbx(&mut c1, &mut c2, rng);
        }
        self.mutate(&mut c1, rng);
        self.mutate(&mut c2, rng);
        (self.evaluate(c1), self.evaluate(c2))
    }

    fn sbx(&self, c1: &mut [f64], c2: &mut [f64], rng: &mut ChaCha8Rng) {
        let eta = self.cfg.sbx_eta;
        for (k, b) in self.problem.bounds().iter().enumerate() {
            if rng.random::<f64>() > 0.5 {
                continue;
            }
            if (c1[k] - c2[k]).abs() <= 1e-14 {
                continue;
            }
            let (y1, y2) = if c1[k] < c2[k] { (c1[k], c2[k]) } else { (c2[k], c1[k]) };
            let (yl, yu) = (b.lower, b.upper);
            let u: f64 = rng.random();
            let spread = |beta: f64| {
                let alpha = 2.0 - beta.powf(-(eta + 1.0));
                if u <= 1.0 / alpha {
                    (u * alpha).powf(1.0 / (eta + 1.0))
                } else {
                    (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
                }
            };
            let betaq = spread(1.0 + 2.0 * (y1 - yl) / (y2 - y1));
            let lo = (0.5 * ((y1 + y2) - betaq * (y2 - y1))).clamp(yl, yu);
            let betaq = spread(1.0 + 2.0 * (yu - y2) / (y2 - y1));
            let hi = (0.5 * ((y1 + y2) + betaq * (y2 - y1))).clamp(yl, yu);
            if rng.random::<f64>() <= 0.5 {
                c1[k] = hi;
                c2[k] = lo;
            } else {
                c1[k] = lo;
                c2[k] = hi;
            }
        }
    }

    fn mutate(&self, x: &mut [f64], rng: &mut ChaCha8Rng) {
        let eta = self.cfg.mutation_eta;
        let pow = 1.0 / (eta + 1.0);
        for (v, b) in x.iter_mut().zip(self.problem.bounds()) {
            if rng.random::<f64>() >= self.mutation_prob {
                continue;
            }
            let span = b.upper - b.lower;
            let d1 = (*v - b.lower) / span;
            let d2 = (b.upper - *v) / span;
            let u: f64 = rng.random();
            let dq = if u <= 0.5 {
                let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
                val.powf(pow) - 1.0
            } else {
                let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
                1.0 - val.powf(pow)
            };
            *v = b.clamp(*v + dq * span);
        }
    }
}

/// Fast non-dominated sort; fronts hold ascending indices.
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates_unchecked(a, b) {
                dominated_by_me[i].push(j);
                count[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominated_by_me[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (same order as `front`).
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = points[front[0]].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let val = |i: usize| points[front[i]].as_ref()[k];
        order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(front[a].cmp(&front[b])));
        let (lo, hi) = (val(order[0]), val(order[n - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            dist[order[w]] += (val(order[w + 1]) - val(order[w - 1])) / range;
        }
    }
    dist
}

/// Rank and crowding distance for every point.
fn rank_and_crowding<P: AsRef<[f64]>>(points: &[P]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in non_dominated_sort(points).into_iter().enumerate() {
        let cd = crowding_distance(points, &front);
        for (&i, c) in front.iter().zip(cd) {
            rank[i] = r;
            crowd[i] = c;
        }
    }
    (rank, crowd)
}

/// (μ+λ) survivor selection: whole fronts first, then the last partial front
/// by descending crowding distance with ties to the lower index. Returns
/// ascending indices.
pub fn environmental_selection<P: AsRef<[f64]>>(points: &[P], keep: usize) -> Vec<usize> {
    let mut selected = Vec::with_capacity(keep);
    for front in non_dominated_sort(points) {
        if selected.len() + front.len() <= keep {
            selected.extend_from_slice(&front);
            if selected.len() == keep {
                break;
            }
            continue;
        }
        let cd = crowding_distance(points, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            cd[b].partial_cmp(&cd[a])
                .unwrap_or(Ordering::Equal)
                .then(front[a].cmp(&front[b]))
        });
        let missing = keep - selected.len();
        selected.extend(order.into_iter().take(missing).map(|i| front[i]));
        break;
    }
    selected.sort_unstable();
    selected
}

fn to_record(index: usize, pop: &[Individual]) -> Result<GenerationRecord> {
    let objectives = pop
        .iter()
        .map(|ind| ObjectiveVector::new(ind.f.clone()))
        .collect::<Result<Vec<_>>>()?;
    let decisions = pop
        .iter()
        .map(|ind| DecisionVector::new(ind.x.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GenerationRecord {
        index,
        solutions: SolutionSet::with_decisions(objectives, Some(decisions))?,
    })
}

fn initial_population(var: &Variation<'_>, n: usize, seed: u64) -> Vec<Individual> {
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| var.random_individual(&mut rng)).collect()
}

fn finish(
    engine: Engine,
    problem: &BenchmarkProblem,
    records: Vec<GenerationRecord>,
) -> Result<AlgorithmRun> {
    AlgorithmRun::new(
        engine.id(),
        problem.meta().name.clone(),
        Some(problem.d()),
        RunSource::Builtin,
        records,
    )
}

/// NSGA-II: binary tournament on (rank, crowding), SBX, polynomial mutation,
/// (μ+λ) selection by rank then crowding.
pub fn run_nsga2(problem: &BenchmarkProblem, cfg: &EvolutionConfig) -> Result<AlgorithmRun> {
    cfg.validate()?;
    let var = Variation::new(problem, cfg);
    let n = cfg.population_size;
    let mut pop = initial_population(&var, n, cfg.seed);
    let mut records = Vec::with_capacity(cfg.generations);
    records.push(to_record(0, &pop)?);

    for t in 1..cfg.generations {
        let mut rng = stream_rng(cfg.seed, t as u64);
        let objs: Vec<&[f64]> = pop.iter().map(|i| i.f.as_slice()).collect();
        let (rank, crowd) = rank_and_crowding(&objs);
        let tournament = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            match rank[lo].cmp(&rank[hi]) {
                Ordering::Less => lo,
                Ordering::Greater => hi,
                Ordering::Equal if crowd[hi] > crowd[lo] => hi,
                Ordering::Equal => lo,
            }
        };
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let (c1, c2) = var.offspring(&pop[p1].x, &pop[p2].x, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        let mut union = pop;
        union.extend(offspring);
        let union_objs: Vec<&[f64]> = union.iter().map(|i| i.f.as_slice()).collect();
        let keep = environmental_selection(&union_objs, n);
        pop = keep.into_iter().map(|i| union[i].clone()).collect();
        records.push(to_record(t, &pop)?);
    }
    finish(Engine::Nsga2, problem, records)
}

/// The individual a steady-state SMS-EMOA step discards.
#[derive(Debug, Clone, PartialEq)]
pub struct SmsRemoval {
    pub index: usize,
    pub worst_front: Vec<usize>,
    /// Reference point used for the contributions: worst-front maximum + 1.
    pub anchor: Vec<f64>,
}

/// Picks the member of the worst front with the least exclusive hypervolume
/// contribution; ties go to the lower index.
pub fn sms_removal(points: &[Vec<f64>]) -> SmsRemoval {
    let worst_front = non_dominated_sort(points)
        .pop()
        .expect("population is non-empty");
    let m = points[worst_front[0]].len();
    let anchor: Vec<f64> = (0..m)
        .map(|j| {
            worst_front
                .iter()
                .map(|&i| points[i][j])
                .fold(f64::NEG_INFINITY, f64::max)
                + 1.0
        })
        .collect();
    if worst_front.len() == 1 {
        return SmsRemoval {
            index: worst_front[0],
            worst_front,
            anchor,
        };
    }
    let members: Vec<Vec<f64>> = worst_front.iter().map(|&i| points[i].clone()).collect();
    let contrib = hv_contributions(&members, &anchor);
    let mut best = 0;
    for (k, c) in contrib.iter().enumerate().skip(1) {
        if *c < contrib[best] {
            best = k;
        }
    }
    SmsRemoval {
        index: worst_front[best],
        worst_front,
        anchor,
    }
}

/// Steady-state SMS-EMOA: one offspring per step from two uniformly drawn
/// parents, then removal by [`sms_removal`]. A generation is
/// `population_size` steps.
pub fn run_sms_emoa(problem: &BenchmarkProblem, cfg: &EvolutionConfig) -> Result<AlgorithmRun> {
    cfg.validate()?;
    let var = Variation::new(problem, cfg);
    let n = cfg.population_size;
    let mut pop = initial_population(&var, n, cfg.seed);
    let mut records = Vec::with_capacity(cfg.generations);
    records.push(to_record(0, &pop)?);

    for t in 1..cfg.generations {
        let mut rng = stream_rng(cfg.seed, t as u64);
        for _ in 0..n {
            let p1 = rng.random_range(0..n);
            let mut p2 = rng.random_range(0..n - 1);
            if p2 >= p1 {
                p2 += 1;
            }
            let (child, _) = var.offspring(&pop[p1].x, &pop[p2].x, &mut rng);
            pop.push(child);
            let objs: Vec<Vec<f64>> = pop.iter().map(|i| i.f.clone()).collect();
            let removal = sms_removal(&objs);
            pop.remove(removal.index);
        }
        records.push(to_record(t, &pop)?);
    }
    finish(Engine::SmsEmoa, problem, records)
}
