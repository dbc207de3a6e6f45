//! Convex fairness constraints and the statistical-rate metric.
//!
//! Constraints are expressed on the vector of training scores
//! `(f(x₁), …, f(x_N))` as a maximum of affine pieces,
//! `Ω(s) = maxⱼ (aⱼ·s + bⱼ)`. The covariance constraint
//! `|(1/N) Σ (zᵢ − z̄) sᵢ| − c` is the two-piece instance. Any other convex
//! piecewise-affine surrogate plugs into the solver through
//! [`ScoreConstraint`].

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessKind {
    CovarianceParity,
    None,
}

/// Which fairness constraint to impose and how strongly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub kind: FairnessKind,
    /// Constraint slack `c`.
    pub threshold: f64,
    /// Penalty weight `μ`, used only in penalty mode.
    pub mu: f64,
}

impl Default for FairnessSpec {
    fn default() -> Self {
        FairnessSpec {
            kind: FairnessKind::CovarianceParity,
            threshold: 0.1,
            mu: 1.0,
        }
    }
}

impl FairnessSpec {
    pub fn none() -> Self {
        FairnessSpec {
            kind: FairnessKind::None,
            threshold: 0.0,
            mu: 0.0,
        }
    }

    pub fn covariance(threshold: f64) -> Self {
        FairnessSpec {
            kind: FairnessKind::CovarianceParity,
            threshold,
            mu: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fairness threshold must be nonnegative, got {}",
                self.threshold
            )));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fairness penalty weight must be nonnegative, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// The constraint this spec imposes on a training set, if any.
    pub fn constraint(&self, s: &Dataset) -> Result<Option<PiecewiseAffine>> {
        match self.kind {
            FairnessKind::None => Ok(None),
            FairnessKind::CovarianceParity => covariance_pieces(s, self.threshold).map(Some),
        }
    }
}

/// A convex function of the training-score vector.
pub trait ScoreConstraint {
    /// `Ω(s)`; the constraint is satisfied when this is `≤ 0`.
    fn value(&self, scores: &[f64]) -> f64;

    /// Affine pieces `(a, b)` with `Ω(s) = max (a·s + b)`.
    fn pieces(&self) -> &[AffinePiece];
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub b: f64,
}

impl AffinePiece {
    pub fn value(&self, scores: &[f64]) -> f64 {
        self.a.iter().zip(scores).map(|(a, s)| a * s).sum::<f64>() + self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Empty("constraint pieces"));
        }
        Ok(PiecewiseAffine { pieces })
    }
}

impl ScoreConstraint for PiecewiseAffine {
    fn value(&self, scores: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value(scores))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }
}

fn binary_indicators(s: &Dataset) -> Result<Vec<f64>> {
    if s.num_groups() != 2 {
        return Err(Error::GroupCount(s.num_groups()));
    }
    if s.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    Ok(s.iter().map(|x| x.z as f64).collect())
}

/// Signed covariance `(1/N) Σ (zᵢ − z̄) sᵢ` between group indicator and score.
pub fn covariance(s: &Dataset, scores: &[f64]) -> Result<f64> {
    let z = binary_indicators(s)?;
    if scores.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: scores.len(),
        });
    }
    let n = z.len() as f64;
    let zbar = z.iter().sum::<f64>() / n;
    Ok(z.iter().zip(scores).map(|(zi, si)| (zi - zbar) * si).sum::<f64>() / n)
}

fn covariance_pieces(s: &Dataset, c: f64) -> Result<PiecewiseAffine> {
    let z = binary_indicators(s)?;
    let n = z.len() as f64;
    let zbar = z.iter().sum::<f64>() / n;
    let a: Vec<f64> = z.iter().map(|zi| (zi - zbar) / n).collect();
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    PiecewiseAffine::new(vec![
        AffinePiece { a, b: -c },
        AffinePiece { a: neg, b: -c },
    ])
}

/// `|(1/N) Σ (zᵢ − z̄) f(xᵢ)| − c`; nonpositive means the constraint holds.
pub fn covariance_constraint(f: &Classifier, s: &Dataset, c: f64) -> Result<f64> {
    let scores = f.scores(s)?;
    Ok(covariance(s, &scores)?.abs() - c)
}

/// `μ · max(0, Ω(f))`.
pub fn fairness_penalty(f: &Classifier, s: &Dataset, spec: &FairnessSpec) -> Result<f64> {
    spec.validate()?;
    match spec.kind {
        FairnessKind::None => Err(Error::InvalidParameter(
            "fairness penalty needs a fairness constraint".into(),
        )),
        FairnessKind::CovarianceParity => {
            let omega = covariance_constraint(f, s, spec.threshold)?;
            Ok(spec.mu * omega.max(0.0))
        }
    }
}

/// Statistical rate `γ = min(p₀/p₁, p₁/p₀)` with `p_g = Pr[pred = +1 | group g]`.
///
/// Both rates zero gives 1; exactly one zero gives 0.
pub fn statistical_rate(predictions: &[Label], groups: &[usize]) -> Result<f64> {
    if predictions.len() != groups.len() {
        return Err(Error::DimensionMismatch {
            expected: predictions.len(),
            got: groups.len(),
        });
    }
    let mut total = [0usize; 2];
    let mut pos = [0usize; 2];
    for (p, &g) in predictions.iter().zip(groups) {
        if g > 1 {
            return Err(Error::GroupCount(g + 1));
        }
        total[g] += 1;
        if p.is_positive() {
            pos[g] += 1;
        }
    }
    for (g, &t) in total.iter().enumerate() {
        if t == 0 {
            return Err(Error::MissingGroup(g));
        }
    }
    let p0 = pos[0] as f64 / total[0] as f64;
    let p1 = pos[1] as f64 / total[1] as f64;
    Ok(match (p0 == 0.0, p1 == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (p0 / p1).min(p1 / p0),
    })
}
