//! Kernel functions, Gram matrices and the `κ²` bound on `k(x, x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported kernels. The multiquadric family carries its shape constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `exp(-‖x − x'‖²)`. There is no bandwidth; rescale features instead.
    GaussianRbf,
    Multiquadric { c: f64 },
    InverseMultiquadric { c: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Multiquadric { c } | KernelSpec::InverseMultiquadric { c }
                if !(c > 0.0 && c.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "kernel shape constant must be positive, got {c}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, KernelSpec::Linear)
    }

    /// Evaluates `k(x, x')`.
    pub fn eval(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        if x.len() != xp.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: xp.len(),
            });
        }
        Ok(self.eval_unchecked(x, xp))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], xp: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, xp),
            KernelSpec::GaussianRbf => (-sq_dist(x, xp)).exp(),
            KernelSpec::Multiquadric { c } => (sq_dist(x, xp) + c * c).sqrt(),
            KernelSpec::InverseMultiquadric { c } => 1.0 / (sq_dist(x, xp) + c * c).sqrt(),
        }
    }

    /// A value `κ²` with `k(x, x) ≤ κ²` for every `x` in `xs`.
    ///
    /// Only the linear kernel depends on the data (`max ‖x‖²`). For the
    /// multiquadric family the constants follow the usual closed forms
    /// (`c` and `1/c`).
    pub fn kappa_sq<'a, I>(&self, xs: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        match *self {
            KernelSpec::Linear => xs
                .into_iter()
                .map(|x| dot(x, x))
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
                .ok_or(Error::Empty("point set for linear-kernel kappa")),
            KernelSpec::GaussianRbf => Ok(1.0),
            KernelSpec::Multiquadric { c } => Ok(c),
            KernelSpec::InverseMultiquadric { c } => Ok(1.0 / c),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dense symmetric Gram matrix `K[i][j] = k(x_i, x_j)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(kernel: &KernelSpec, points: &[&[f64]]) -> Result<Gram> {
        let n = points.len();
        if let Some(first) = points.first() {
            for p in points {
                if p.len() != first.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.len(),
                        got: p.len(),
                    });
                }
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval_unchecked(points[i], points[j]);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Gram { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `K a`
    pub fn mul(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), a)).collect()
    }

    /// `aᵀ K b`
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, &self.mul(b))
    }

    pub fn quad_form(&self, a: &[f64]) -> f64 {
        self.bilinear(a, a)
    }
}

/// Clamps round-off negatives of a squared RKHS norm to zero and rejects
/// anything more negative than `-1e-10`.
pub(crate) fn clamp_norm_sq(v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite("RKHS norm"));
    }
    if v >= 0.0 {
        Ok(v)
    } else if v >= -1e-10 {
        Ok(0.0)
    } else {
        Err(Error::NegativeNorm(v))
    }
}
