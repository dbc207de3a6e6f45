//! Closed-form stability, generalization and excess-risk bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants feeding the bound calculators.
///
/// `b` (norm bound on the best fair classifier), `g` (gradient bound for
/// linear models) and `delta` (confidence) are only needed by the bounds
/// that use them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub sigma: f64,
    pub kappa_sq: f64,
    pub lambda: f64,
    pub n: usize,
    pub b: Option<f64>,
    pub g: Option<f64>,
    pub delta: Option<f64>,
}

impl BoundInputs {
    pub fn new(sigma: f64, kappa_sq: f64, lambda: f64, n: usize) -> Self {
        BoundInputs {
            sigma,
            kappa_sq,
            lambda,
            n,
            b: None,
            g: None,
            delta: None,
        }
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_sq.sqrt()
    }

    fn check(&self) -> Result<()> {
        if self.lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.sigma >= 0.0 && self.kappa_sq >= 0.0) {
            return Err(Error::InvalidParameter("sigma and kappa² must be nonnegative".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        Ok(())
    }

    fn gradient_bound(&self) -> Result<f64> {
        match self.g {
            Some(g) if g >= 0.0 && g.is_finite() => Ok(g),
            Some(g) => Err(Error::InvalidParameter(format!("gradient bound must be nonnegative, got {g}"))),
            None => Err(Error::InvalidParameter("gradient bound G is not set".into())),
        }
    }

    fn log_term(&self) -> Result<f64> {
        match self.delta {
            Some(d) if d > 0.0 && d < 1.0 => Ok((8.0 / d).ln()),
            Some(d) => Err(Error::InvalidParameter(format!("confidence delta must lie in (0, 1), got {d}"))),
            None => Err(Error::InvalidParameter("confidence delta is not set".into())),
        }
    }
}

/// Uniform stability of the RKHS-regularized program: `σ²κ²/(λN)`.
pub fn stability_bound_rkhs(inp: &BoundInputs) -> Result<f64> {
    inp.check()?;
    Ok(inp.sigma * inp.sigma * inp.kappa_sq / (inp.lambda * inp.n as f64))
}

/// Uniform stability for linear models: `G²/(λN)`.
pub fn stability_bound_linear(inp: &BoundInputs) -> Result<f64> {
    inp.check()?;
    let g = inp.gradient_bound()?;
    Ok(g * g / (inp.lambda * inp.n as f64))
}

/// Bound on `‖g − gⁱ‖ₖ` between minimizers on neighbouring datasets:
/// `σκ/(λN)`.
pub fn norm_gap_bound(inp: &BoundInputs) -> Result<f64> {
    inp.check()?;
    Ok(inp.sigma * inp.kappa() / (inp.lambda * inp.n as f64))
}

/// `8·sqrt((2·L²/(λN) + 1/N)·ln(8/δ))` given the squared Lipschitz constant
/// `L² = lipschitz_sq` (σ²κ² or G²) and `ln(8/δ)`.
pub fn highprob_from_log(lipschitz_sq: f64, lambda: f64, n: usize, log_term: f64) -> f64 {
    let n = n as f64;
    8.0 * ((2.0 * lipschitz_sq / (lambda * n) + 1.0 / n) * log_term).sqrt()
}

/// With probability `1 − δ`, `R ≤ E + 8·sqrt((2σ²κ²/(λN) + 1/N)·ln(8/δ))`.
/// Returns the additive term.
pub fn generalization_bound_highprob(inp: &BoundInputs) -> Result<f64> {
    inp.check()?;
    let log = inp.log_term()?;
    Ok(highprob_from_log(inp.sigma * inp.sigma * inp.kappa_sq, inp.lambda, inp.n, log))
}

/// The linear-model variant with `G²` in place of `σ²κ²`.
pub fn generalization_bound_highprob_linear(inp: &BoundInputs) -> Result<f64> {
    inp.check()?;
    let log = inp.log_term()?;
    let g = inp.gradient_bound()?;
    Ok(highprob_from_log(g * g, inp.lambda, inp.n, log))
}

fn norm_bound(inp: &BoundInputs) -> Result<f64> {
    match inp.b {
        Some(b) if b > 0.0 && b.is_finite() => Ok(b),
        Some(b) => Err(Error::InvalidParameter(format!("norm bound B must be positive, got {b}"))),
        None => Err(Error::InvalidParameter("norm bound B is not set".into())),
    }
}

/// Expected excess risk over the best fair classifier: `σ²κ²/(λN) + λB²`.
pub fn excess_risk_bound(inp: &BoundInputs) -> Result<f64> {
    let b = norm_bound(inp)?;
    Ok(stability_bound_rkhs(inp)? + inp.lambda * b * b)
}

/// The λ minimizing [`excess_risk_bound`]: `σκ/(B√N)`. The bound there is
/// `2σκB/√N`. Ignores `inp.lambda`.
pub fn optimal_lambda(inp: &BoundInputs) -> Result<f64> {
    let b = norm_bound(inp)?;
    if inp.n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let l = inp.sigma * inp.kappa() / (b * (inp.n as f64).sqrt());
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::InvalidParameter("optimal lambda is degenerate for these constants".into()))
    }
}

/// Allowance added to a theoretical bound when it is compared against
/// solver output: `2·σ·κ·ε`, with `ε` the coefficient error implied by the
/// stationarity gap and strong convexity `2λ`.
pub fn solver_allowance(sigma: f64, kappa: f64, coefficient_error: f64) -> f64 {
    2.0 * sigma * kappa * coefficient_error
}
