//! Decision and objective spaces, Pareto dominance, solution and reference sets.
//!
//! All objectives are minimized. Maximization problems must be negated before
//! they reach these types.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in objective space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    /// Builds an objective vector, rejecting empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("objective vector is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "objective vector".into(),
            });
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A point in decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "decision vector".into(),
            });
        }
        Ok(Self(values))
    }

    /// Checks length and box bounds.
    pub fn check_bounds(&self, bounds: &[Bounds]) -> Result<()> {
        Error::check_dim(bounds.len(), self.0.len())?;
        for (i, (x, b)) in self.0.iter().zip(bounds).enumerate() {
            if *x < b.lower || *x > b.upper {
                return Err(Error::InvalidInput(format!(
                    "decision variable {i} = {x} outside [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Box constraint on one decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidInput(format!(
                "bounds require lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

/// One generation's output: objective vectors plus optional decision vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    objectives: Vec<ObjectiveVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decisions: Option<Vec<DecisionVector>>,
}

impl SolutionSet {
    pub fn new(objectives: Vec<ObjectiveVector>) -> Result<Self> {
        Self::with_decisions(objectives, None)
    }

    pub fn with_decisions(
        objectives: Vec<ObjectiveVector>,
        decisions: Option<Vec<DecisionVector>>,
    ) -> Result<Self> {
        let first = objectives
            .first()
            .ok_or_else(|| Error::InvalidInput("solution set is empty".into()))?;
        let m = first.dim();
        for v in &objectives {
            Error::check_dim(m, v.dim())?;
        }
        if let Some(ds) = &decisions {
            Error::check_dim(objectives.len(), ds.len())?;
            if let Some(d0) = ds.first() {
                for d in ds {
                    Error::check_dim(d0.dim(), d.dim())?;
                }
            }
        }
        Ok(Self {
            objectives,
            decisions,
        })
    }

    /// Convenience constructor from raw rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let objectives = rows
            .into_iter()
            .map(ObjectiveVector::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(objectives)
    }

    pub fn objectives(&self) -> &[ObjectiveVector] {
        &self.objectives
    }

    pub fn decisions(&self) -> Option<&[DecisionVector]> {
        self.decisions.as_deref()
    }

    /// Objective dimension m.
    pub fn dim(&self) -> usize {
        self.objectives[0].dim()
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    /// Subset by index, keeping decisions aligned.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let objectives = indices.iter().map(|&i| self.objectives[i].clone()).collect();
        let decisions = self
            .decisions
            .as_ref()
            .map(|ds| indices.iter().map(|&i| ds[i].clone()).collect());
        Self::with_decisions(objectives, decisions)
    }
}

/// A finite sample of the true Pareto front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReferenceSet {
    points: Vec<ObjectiveVector>,
}

impl ReferenceSet {
    /// Validates non-emptiness, dimension consistency and mutual non-dominance.
    pub fn new(points: Vec<ObjectiveVector>) -> Result<Self> {
        let set = SolutionSet::new(points)?;
        for (i, a) in set.objectives.iter().enumerate() {
            for (j, b) in set.objectives.iter().enumerate() {
                if i != j && dominates(a, b)? {
                    return Err(Error::InvalidInput(format!(
                        "reference point {j} is dominated by reference point {i}"
                    )));
                }
            }
        }
        Ok(Self {
            points: set.objectives,
        })
    }

    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Component-wise maximum over the reference points.
    pub fn nadir(&self) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|j| {
                self.points
                    .iter()
                    .map(|p| p[j])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    pub fn as_solution_set(&self) -> SolutionSet {
        SolutionSet {
            objectives: self.points.clone(),
            decisions: None,
        }
    }
}

/// Problem metadata: name, objective count, decision count and box bounds.
///
/// Imported runs may not carry decision-space information, in which case `d`
/// is `None` and `bounds` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub name: String,
    pub m: usize,
    pub d: Option<usize>,
    #[serde(default)]
    pub bounds: Vec<Bounds>,
}

impl ProblemMeta {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        d: Option<usize>,
        bounds: Vec<Bounds>,
    ) -> Result<Self> {
        let meta = Self {
            name: name.into(),
            m,
            d,
            bounds,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidInput(format!(
                "problem needs at least 2 objectives, got {}",
                self.m
            )));
        }
        match self.d {
            Some(d) => {
                if d < self.m {
                    return Err(Error::InvalidInput(format!(
                        "decision dimension {d} smaller than objective count {}",
                        self.m
                    )));
                }
                if !self.bounds.is_empty() {
                    Error::check_dim(d, self.bounds.len())?;
                }
            }
            None if !self.bounds.is_empty() => {
                return Err(Error::InvalidInput(
                    "bounds given without a decision dimension".into(),
                ))
            }
            None => {}
        }
        for b in &self.bounds {
            Bounds::new(b.lower, b.upper)?;
        }
        Ok(())
    }
}

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    Error::check_dim(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

/// Dominance test without the dimension check, for hot loops.
#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Members of `set` not dominated by any other member, in their original order.
pub fn non_dominated_filter(set: &SolutionSet) -> SolutionSet {
    let keep = non_dominated_indices(set.objectives());
    set.select(&keep)
        .expect("a non-empty set always has a non-dominated member")
}

/// Indices of the non-dominated members of `points`, ascending.
pub fn non_dominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let p = points[i].as_ref();
            !points
                .iter()
                .enumerate()
                .any(|(j, q)| j != i && dominates_unchecked(q.as_ref(), p))
        })
        .collect()
}
