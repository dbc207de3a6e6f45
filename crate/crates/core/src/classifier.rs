//! Classifier representations: kernel expansions over training anchors and
//! linear models over the (identity) feature map.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kernel::{clamp_norm_sq, dot, Gram, KernelSpec};

/// `f(x) = Σ αᵢ k(anchorᵢ, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelClassifier {
    alpha: Vec<f64>,
    anchors: Vec<Vec<f64>>,
    kernel: KernelSpec,
}

impl KernelClassifier {
    pub fn new(alpha: Vec<f64>, anchors: Vec<Vec<f64>>, kernel: KernelSpec) -> Result<Self> {
        kernel.validate()?;
        if alpha.len() != anchors.len() {
            return Err(Error::DimensionMismatch {
                expected: anchors.len(),
                got: alpha.len(),
            });
        }
        if alpha.iter().any(|a| !a.is_finite())
            || anchors.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("kernel classifier"));
        }
        if let Some(first) = anchors.first() {
            if let Some(bad) = anchors.iter().find(|a| a.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        Ok(KernelClassifier {
            alpha,
            anchors,
            kernel,
        })
    }

    /// The zero function expanded over the features of `s`.
    pub fn zeros(s: &Dataset, kernel: KernelSpec) -> Result<Self> {
        KernelClassifier::new(
            vec![0.0; s.len()],
            s.features().map(<[f64]>::to_vec).collect(),
            kernel,
        )
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    fn input_dim(&self) -> Option<usize> {
        self.anchors.first().map(Vec::len)
    }

    /// Exact kernel expansion at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.input_dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        let v: f64 = self
            .alpha
            .iter()
            .zip(&self.anchors)
            .map(|(a, xi)| a * self.kernel.eval_unchecked(xi, x))
            .sum();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("classifier score"))
        }
    }

    pub fn gram(&self) -> Result<Gram> {
        let pts: Vec<&[f64]> = self.anchors.iter().map(Vec::as_slice).collect();
        Gram::new(&self.kernel, &pts)
    }

    /// `‖f‖²ₖ = αᵀKα`.
    pub fn rkhs_norm_sq(&self) -> Result<f64> {
        clamp_norm_sq(self.gram()?.quad_form(&self.alpha))
    }

    /// `β = Σ αᵢ xᵢ`, the weight vector this expansion collapses to under the
    /// linear kernel.
    pub fn collapse_linear(&self) -> Result<LinearClassifier> {
        if !self.kernel.is_linear() {
            return Err(Error::NotLinear);
        }
        let d = self.input_dim().ok_or(Error::Empty("anchor set"))?;
        let mut w = vec![0.0; d];
        for (a, xi) in self.alpha.iter().zip(&self.anchors) {
            for (wj, xj) in w.iter_mut().zip(xi) {
                *wj += a * xj;
            }
        }
        LinearClassifier::new(w)
    }
}

/// `f(x) = ⟨w, φ(x)⟩` with the identity feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    weights: Vec<f64>,
}

impl LinearClassifier {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("linear weights"));
        }
        Ok(LinearClassifier { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let v = dot(&self.weights, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("classifier score"))
        }
    }

    pub fn rkhs_norm_sq(&self) -> f64 {
        dot(&self.weights, &self.weights)
    }
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Kernel(KernelClassifier),
    Linear(LinearClassifier),
}

impl Classifier {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Classifier::Kernel(k) => k.evaluate(x),
            Classifier::Linear(l) => l.evaluate(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Label::from_score(self.score(x)?)
    }

    pub fn scores(&self, s: &Dataset) -> Result<Vec<f64>> {
        s.features().map(|x| self.score(x)).collect()
    }

    pub fn predictions(&self, s: &Dataset) -> Result<Vec<Label>> {
        s.features().map(|x| self.predict(x)).collect()
    }

    pub fn rkhs_norm_sq(&self) -> Result<f64> {
        match self {
            Classifier::Kernel(k) => k.rkhs_norm_sq(),
            Classifier::Linear(l) => Ok(l.rkhs_norm_sq()),
        }
    }

    /// `‖f − g‖ₖ`. Kernel expansions are compared through the Gram quadratic
    /// form over the union of both anchor sets.
    pub fn rkhs_distance(&self, other: &Classifier) -> Result<f64> {
        match (self, other) {
            (Classifier::Linear(a), Classifier::Linear(b)) => {
                if a.weights.len() != b.weights.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.weights.len(),
                        got: b.weights.len(),
                    });
                }
                let d: f64 = a
                    .weights
                    .iter()
                    .zip(&b.weights)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                Ok(d.sqrt())
            }
            (Classifier::Kernel(a), Classifier::Kernel(b)) => {
                if a.kernel != b.kernel {
                    return Err(Error::InvalidParameter(
                        "classifiers live in different RKHSs".into(),
                    ));
                }
                let mut coef = a.alpha.clone();
                coef.extend(b.alpha.iter().map(|v| -v));
                let mut anchors = a.anchors.clone();
                anchors.extend(b.anchors.iter().cloned());
                KernelClassifier::new(coef, anchors, a.kernel)?
                    .rkhs_norm_sq()
                    .map(f64::sqrt)
            }
            (Classifier::Kernel(k), Classifier::Linear(l))
            | (Classifier::Linear(l), Classifier::Kernel(k)) => {
                // only comparable through the linear kernel
                let kl = k.collapse_linear()?;
                Classifier::Linear(kl).rkhs_distance(&Classifier::Linear(l.clone()))
            }
        }
    }
}

impl From<KernelClassifier> for Classifier {
    fn from(k: KernelClassifier) -> Self {
        Classifier::Kernel(k)
    }
}

impl From<LinearClassifier> for Classifier {
    fn from(l: LinearClassifier) -> Self {
        Classifier::Linear(l)
    }
}
