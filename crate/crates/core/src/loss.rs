//! Margin losses, their derivatives in the score, and admissibility constants.
//!
//! A loss is σ-admissible when it is σ-Lipschitz in the classifier score for a
//! fixed label. The constants returned by [`LossSpec::admissibility`] are the
//! standard ones:
//!
//! | loss                        | σ        |
//! |-----------------------------|----------|
//! | hinge `(1 − y f)₊`           | 1        |
//! | logistic `ln(1 + e^{−y f})`  | 1        |
//! | zero-one on `f ∈ {−1, 1}`    | 1/2      |
//! | squared `(f − y)²`, `|f| ≤ B`| 2B + 2   |

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Hinge,
    /// `bound` is the score bound `B` the admissibility constant is certified
    /// on. Scores outside `[−B, B]` are still accepted.
    Squared { bound: Option<f64> },
    Logistic,
    ZeroOne,
}

impl LossSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Hinge => "hinge",
            LossSpec::Squared { .. } => "squared",
            LossSpec::Logistic => "logistic",
            LossSpec::ZeroOne => "zero-one",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let LossSpec::Squared { bound: Some(b) } = *self {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "squared-loss score bound must be positive, got {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn loss(&self, score: f64, y: Label) -> Result<f64> {
        let yv = y.value();
        match *self {
            LossSpec::Hinge => Ok((1.0 - yv * score).max(0.0)),
            LossSpec::Squared { .. } => Ok((score - yv) * (score - yv)),
            LossSpec::Logistic => Ok(softplus(-yv * score)),
            LossSpec::ZeroOne => {
                if score != 1.0 && score != -1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "zero-one loss takes scores in {{-1, +1}}, got {score}"
                    )));
                }
                Ok(if score == yv { 0.0 } else { 1.0 })
            }
        }
    }

    /// Derivative of the loss in the score. The hinge uses the subgradient 0
    /// at the kink `y·score = 1`.
    pub fn grad(&self, score: f64, y: Label) -> Result<f64> {
        let yv = y.value();
        match *self {
            LossSpec::Hinge => Ok(if yv * score < 1.0 { -yv } else { 0.0 }),
            LossSpec::Squared { .. } => Ok(2.0 * (score - yv)),
            LossSpec::Logistic => Ok(-yv * sigmoid(-yv * score)),
            LossSpec::ZeroOne => Err(Error::NotDifferentiable("zero-one")),
        }
    }

    /// Admissibility constant σ.
    pub fn admissibility(&self) -> Result<f64> {
        match *self {
            LossSpec::Hinge | LossSpec::Logistic => Ok(1.0),
            LossSpec::ZeroOne => Ok(0.5),
            LossSpec::Squared { bound: Some(b) } => {
                self.validate()?;
                Ok(2.0 * b + 2.0)
            }
            LossSpec::Squared { bound: None } => Err(Error::InvalidParameter(
                "squared loss needs a score bound B for its admissibility constant".into(),
            )),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, LossSpec::ZeroOne)
    }
}

/// `ln(1 + eᵗ)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{−t})` without overflow.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
