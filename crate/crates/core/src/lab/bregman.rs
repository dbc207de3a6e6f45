//! Bregman divergences of convex functionals on the finite coefficient
//! parameterization.
//!
//! For `f = Σ αᵢ k(xᵢ, ·)` the RKHS inner product `⟨f − f′, ∇F(f′)⟩ₖ`
//! equals the Euclidean product of `α − α′` with the coefficient gradient
//! `∂F/∂α′`, so every functional here works with plain coefficient vectors.

use crate::data::Label;
use crate::error::{Error, Result};
use crate::kernel::{dot, Gram};
use crate::loss::LossSpec;

/// A convex functional with a coefficient-space gradient.
pub trait ConvexFunctional {
    fn dim(&self) -> usize;
    fn value(&self, f: &[f64]) -> Result<f64>;
    fn gradient(&self, f: &[f64]) -> Result<Vec<f64>>;
}

/// `F(f) − F(f′) − ⟨f − f′, ∇F(f′)⟩`.
///
/// Nonnegative for convex `F` up to floating-point round-off.
pub fn bregman(functional: &dyn ConvexFunctional, f: &[f64], f_prime: &[f64]) -> Result<f64> {
    for v in [f, f_prime] {
        if v.len() != functional.dim() {
            return Err(Error::DimensionMismatch {
                expected: functional.dim(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("bregman argument"));
        }
    }
    let grad = functional.gradient(f_prime)?;
    let diff: Vec<f64> = f.iter().zip(f_prime).map(|(a, b)| a - b).collect();
    let d = functional.value(f)? - functional.value(f_prime)? - dot(&diff, &grad);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NonFinite("bregman divergence"))
    }
}

/// `‖v‖²₂`.
#[derive(Debug, Clone, Copy)]
pub struct SquaredNorm {
    pub dim: usize,
}

impl ConvexFunctional for SquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, f: &[f64]) -> Result<f64> {
        Ok(dot(f, f))
    }

    fn gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(f.iter().map(|v| 2.0 * v).collect())
    }
}

/// `vᵀAv + bᵀv + c` with `A` symmetric positive semidefinite (row-major).
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

impl Quadratic {
    /// Checks shape and symmetry; positive semidefiniteness is the caller's
    /// responsibility.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.len() });
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("quadratic coefficients"));
                }
                if (v - a[j][i]).abs() > 1e-12 * (1.0 + v.abs()) {
                    return Err(Error::InvalidParameter("quadratic form matrix must be symmetric".into()));
                }
            }
        }
        Ok(Quadratic { a, b, c })
    }

    /// `MᵀM`, which is positive semidefinite for any square `m`.
    pub fn gram_of(m: &[Vec<f64>], b: Vec<f64>, c: f64) -> Result<Self> {
        let n = m.len();
        let a = (0..n)
            .map(|i| (0..n).map(|j| m.iter().map(|row| row[i] * row[j]).sum()).collect())
            .collect();
        Quadratic::new(a, b, c)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, v)).collect()
    }
}

impl ConvexFunctional for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, f: &[f64]) -> Result<f64> {
        Ok(dot(f, &self.apply(f)) + dot(&self.b, f) + self.c)
    }

    fn gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(f).iter().zip(&self.b).map(|(av, b)| 2.0 * av + b).collect())
    }
}

/// `‖f‖²ₖ = αᵀKα`.
#[derive(Debug, Clone)]
pub struct RkhsNormSq {
    pub gram: Gram,
}

impl ConvexFunctional for RkhsNormSq {
    fn dim(&self) -> usize {
        self.gram.size()
    }

    fn value(&self, f: &[f64]) -> Result<f64> {
        Ok(self.gram.quad_form(f))
    }

    fn gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.gram.mul(f).into_iter().map(|v| 2.0 * v).collect())
    }
}

/// `(1/N) Σ L((Kα)ᵢ, yᵢ) + λ αᵀKα`, the unconstrained training objective.
#[derive(Debug, Clone)]
pub struct RegularizedRisk {
    pub gram: Gram,
    pub labels: Vec<Label>,
    pub loss: LossSpec,
    pub lambda: f64,
}

impl ConvexFunctional for RegularizedRisk {
    fn dim(&self) -> usize {
        self.gram.size()
    }

    fn value(&self, f: &[f64]) -> Result<f64> {
        let scores = self.gram.mul(f);
        let mut risk = 0.0;
        for (s, y) in scores.iter().zip(&self.labels) {
            risk += self.loss.loss(*s, *y)?;
        }
        Ok(risk / self.labels.len() as f64 + self.lambda * dot(f, &scores))
    }

    fn gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        let scores = self.gram.mul(f);
        let n = self.labels.len() as f64;
        let c = scores
            .iter()
            .zip(&self.labels)
            .zip(f)
            .map(|((s, y), a)| Ok(self.loss.grad(*s, *y)? / n + 2.0 * self.lambda * a))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.gram.mul(&c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;

    #[test]
    fn squared_norm_identity() {
        let f = [1.0, -2.0, 0.5];
        let g = [0.25, 3.0, -1.0];
        let d = bregman(&SquaredNorm { dim: 3 }, &f, &g).unwrap();
        let expected: f64 = f.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((d - expected).abs() < 1e-12);
        assert_eq!(bregman(&SquaredNorm { dim: 3 }, &f, &f).unwrap(), 0.0);
    }

    #[test]
    fn rkhs_norm_divergence_is_squared_distance() {
        let pts: [&[f64]; 3] = [&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5]];
        let gram = Gram::new(&KernelSpec::GaussianRbf, &pts).unwrap();
        let a = [0.3, -1.0, 2.0];
        let b = [1.0, 0.5, -0.5];
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let expected = gram.quad_form(&diff);
        let d = bregman(&RkhsNormSq { gram }, &a, &b).unwrap();
        assert!((d - expected).abs() < 1e-12);
    }

    #[test]
    fn regularized_risk_divergence_nonnegative() {
        let pts: [&[f64]; 4] = [&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5], &[-1.0, 0.2]];
        let gram = Gram::new(&KernelSpec::Linear, &pts).unwrap();
        let f = RegularizedRisk {
            gram,
            labels: vec![Label::Positive, Label::Negative, Label::Positive, Label::Negative],
            loss: LossSpec::Logistic,
            lambda: 0.1,
        };
        for k in 0..20 {
            let t = k as f64;
            let a = [t.sin(), (2.0 * t).cos(), 0.3 * t, -0.1 * t];
            let b = [(3.0 * t).cos(), 0.5, -t.sin(), 1.0];
            assert!(bregman(&f, &a, &b).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn argument_checks() {
        assert!(bregman(&SquaredNorm { dim: 2 }, &[1.0], &[1.0, 2.0]).is_err());
        assert!(bregman(&SquaredNorm { dim: 1 }, &[f64::NAN], &[1.0]).is_err());
        assert!(Quadratic::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0], 0.0).is_err());
    }
}
