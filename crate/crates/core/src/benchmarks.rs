//! DTLZ test problems and analytic reference fronts.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, DecisionVector, ObjectiveVector, ProblemMeta, ReferenceSet};

/// Shape of the true Pareto front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontKind {
    /// Σ f = 0.5 with f ≥ 0 (DTLZ1).
    SimplexPlane,
    /// Σ f² = 1 with f ≥ 0 (DTLZ2, DTLZ3).
    UnitSphereOctant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Dtlz1,
    Dtlz2,
    Dtlz3,
}

/// A DTLZ problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkProblem {
    meta: ProblemMeta,
    variant: Variant,
}

/// Builds DTLZ1, DTLZ2 or DTLZ3 with the standard number of distance variables
/// (k = 5 for DTLZ1, k = 10 otherwise).
pub fn dtlz(id: u32, m: usize) -> Result<BenchmarkProblem> {
    let (variant, k) = match id {
        1 => (Variant::Dtlz1, 5),
        2 => (Variant::Dtlz2, 10),
        3 => (Variant::Dtlz3, 10),
        other => return Err(Error::UnsupportedProblem(format!("dtlz{other}"))),
    };
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "DTLZ needs at least 2 objectives, got {m}"
        )));
    }
    let d = m + k - 1;
    let meta = ProblemMeta::new(
        format!("dtlz{id}"),
        m,
        Some(d),
        vec![Bounds { lower: 0.0, upper: 1.0 }; d],
    )?;
    Ok(BenchmarkProblem { meta, variant })
}

/// Looks a problem up by name (`dtlz1`, `dtlz2`, `dtlz3`, case-insensitive).
pub fn by_name(name: &str, m: usize) -> Result<BenchmarkProblem> {
    let lower = name.to_ascii_lowercase();
    match lower.strip_prefix("dtlz").and_then(|s| s.parse::<u32>().ok()) {
        Some(id) => dtlz(id, m),
        None => Err(Error::UnsupportedProblem(name.to_string())),
    }
}

impl BenchmarkProblem {
    pub fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    pub fn m(&self) -> usize {
        self.meta.m
    }

    pub fn d(&self) -> usize {
        self.meta.d.expect("benchmarks always define d")
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.meta.bounds
    }

    pub fn front_kind(&self) -> FrontKind {
        match self.variant {
            Variant::Dtlz1 => FrontKind::SimplexPlane,
            Variant::Dtlz2 | Variant::Dtlz3 => FrontKind::UnitSphereOctant,
        }
    }

    pub fn evaluate(&self, x: &DecisionVector) -> Result<ObjectiveVector> {
        x.check_bounds(self.bounds())?;
        ObjectiveVector::new(self.evaluate_raw(x))
    }

    /// Evaluation without validation; `x` must have length d and lie in [0, 1].
    pub fn evaluate_raw(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m();
        let (pos, dist) = x.split_at(m - 1);
        match self.variant {
            Variant::Dtlz1 => {
                let g = rastrigin_g(dist);
                let scale = 0.5 * (1.0 + g);
                (0..m)
                    .map(|i| {
                        let upto = m - 1 - i;
                        let mut f = scale * pos[..upto].iter().product::<f64>();
                        if i > 0 {
                            f *= 1.0 - pos[upto];
                        }
                        f
                    })
                    .collect()
            }
            Variant::Dtlz2 | Variant::Dtlz3 => {
                let g = if self.variant == Variant::Dtlz2 {
                    dist.iter().map(|v| (v - 0.5) * (v - 0.5)).sum()
                } else {
                    rastrigin_g(dist)
                };
                let scale = 1.0 + g;
                (0..m)
                    .map(|i| {
                        let upto = m - 1 - i;
                        let mut f = scale
                            * pos[..upto]
                                .iter()
                                .map(|v| (v * FRAC_PI_2).cos())
                                .product::<f64>();
                        if i > 0 {
                            f *= (pos[upto] * FRAC_PI_2).sin();
                        }
                        f
                    })
                    .collect()
            }
        }
    }
}

fn rastrigin_g(dist: &[f64]) -> f64 {
    let k = dist.len() as f64;
    100.0
        * (k + dist
            .iter()
            .map(|v| {
                let t = v - 0.5;
                t * t - (20.0 * PI * t).cos()
            })
            .sum::<f64>())
}

/// Das–Dennis simplex-lattice weights: all m-part compositions of `divisions`,
/// scaled to sum to 1, in lexicographic order of the integer parts.
pub fn simplex_lattice(m: usize, divisions: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for part in (0..=left).rev() {
            prefix.push(part);
            rec(m, left - part, prefix, out);
            prefix.pop();
        }
    }
    let mut parts = Vec::new();
    rec(m, divisions, &mut Vec::with_capacity(m), &mut parts);
    parts
        .into_iter()
        .map(|p| p.into_iter().map(|v| v as f64 / divisions as f64).collect())
        .collect()
}

/// Samples the true front of `problem` on a simplex lattice.
pub fn reference_set(problem: &BenchmarkProblem, divisions: usize) -> Result<ReferenceSet> {
    if divisions == 0 {
        return Err(Error::InvalidInput("divisions must be at least 1".into()));
    }
    let kind = problem.front_kind();
    let points = simplex_lattice(problem.m(), divisions)
        .into_iter()
        .map(|w| match kind {
            FrontKind::SimplexPlane => w.iter().map(|v| 0.5 * v).collect(),
            FrontKind::UnitSphereOctant => {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                w.iter().map(|v| v / norm).collect()
            }
        })
        .map(ObjectiveVector::new)
        .collect::<Result<Vec<_>>>()?;
    ReferenceSet::new(points)
}

/// Default lattice resolution: 12 for three objectives, otherwise the largest
/// resolution giving at most 100 points.
pub fn default_divisions(m: usize) -> usize {
    if m == 3 {
        return 12;
    }
    let mut div = 1;
    while lattice_size(m, div + 1) <= 100 {
        div += 1;
    }
    div
}

/// C(divisions + m − 1, m − 1).
pub fn lattice_size(m: usize, divisions: usize) -> usize {
    let n = divisions + m - 1;
    let k = m - 1;
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
