//! Training of stability-regularized fair classifiers.
//!
//! The program solved is
//!
//! ```text
//! min_f  (1/N) Σ L(f, sᵢ) + λ‖f‖²ₖ      s.t.  Ω(f) ≤ 0          (constrained mode)
//! min_f  (1/N) Σ L(f, sᵢ) + λ‖f‖²ₖ + μ·max(0, Ω(f))             (penalty mode)
//! ```
//!
//! over the span of `k(xᵢ, ·)`, or over weight vectors for the linear kernel.
//! Iterates move along the RKHS gradient, so the step geometry and the
//! stationarity gap are both measured in `‖·‖ₖ` regardless of the
//! parameterization. Each step starts from a Barzilai–Borwein trial length
//! and backtracks until the Armijo condition holds, so accepted iterates
//! never increase the objective.
//!
//! The constraint pieces `gⱼ(s) = aⱼ·s + bⱼ ≤ 0` enter through a quadratic
//! exterior penalty with multiplier estimates (augmented Lagrangian). The
//! penalty weight grows by `penalty_growth` whenever the violation fails to
//! shrink, until `max(0, Ω) ≤ tol`.

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, KernelClassifier, LinearClassifier};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::fairness::{fairness_penalty, FairnessKind, FairnessSpec, PiecewiseAffine, ScoreConstraint};
use crate::kernel::{dot, Gram, KernelSpec};
use crate::loss::LossSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Enforce `Ω(f) ≤ 0`.
    Constrained,
    /// Add `μ·max(0, Ω(f))` to the objective.
    Penalty,
}

/// How the classifier is parameterized during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Weights for the linear kernel, dual coefficients otherwise.
    Auto,
    /// Dual coefficients over the training points.
    Dual,
    /// Weight vector over features (linear kernel only).
    Primal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossSpec,
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub fairness: FairnessSpec,
    pub mode: ConstraintMode,
    pub representation: Representation,
    /// Total gradient iterations across all penalty rounds.
    pub max_iters: usize,
    /// Initial trial step length.
    pub step_size: f64,
    /// Tolerance on the stationarity gap and on `max(0, Ω)`.
    pub tol: f64,
    pub penalty_growth: f64,
    /// Recorded with results; training itself is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossSpec::Logistic,
            kernel: KernelSpec::Linear,
            lambda: 0.01,
            fairness: FairnessSpec::covariance(0.1),
            mode: ConstraintMode::Constrained,
            representation: Representation::Auto,
            max_iters: 20_000,
            step_size: 1.0,
            tol: 1e-6,
            penalty_growth: 10.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.kernel.validate()?;
        self.fairness.validate()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty growth must exceed 1, got {}",
                self.penalty_growth
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if self.representation == Representation::Primal && !self.kernel.is_linear() {
            return Err(Error::NotLinear);
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    fn primal(&self) -> bool {
        match self.representation {
            Representation::Primal => true,
            Representation::Dual => false,
            Representation::Auto => self.kernel.is_linear(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub classifier: Classifier,
    pub objective_value: f64,
    /// `Ω` at the returned point; `None` without a fairness constraint.
    pub constraint_value: Option<f64>,
    pub iterations: usize,
    /// RKHS norm of the gradient of the Lagrangian at the returned point.
    pub stationarity_gap: f64,
    /// Largest `|f(xᵢ)|` over the training set, the realized score bound.
    pub max_abs_score: f64,
    pub converged: bool,
}

impl TrainResult {
    /// Upper estimate of `‖f − f_exact‖ₖ` from strong convexity (modulus 2λ).
    pub fn coefficient_error(&self, lambda: f64) -> f64 {
        if lambda > 0.0 {
            self.stationarity_gap / (2.0 * lambda)
        } else {
            f64::INFINITY
        }
    }

    /// Turns a non-converged result into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                gap: self.stationarity_gap,
                violation: self.constraint_value.unwrap_or(0.0).max(0.0),
                iterations: self.iterations,
            })
        }
    }
}

/// Mean loss over `s`.
pub fn empirical_risk(f: &Classifier, s: &Dataset, loss: &LossSpec) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut total = 0.0;
    for sample in s.iter() {
        let score = f.score(&sample.x)?;
        let score = match loss {
            LossSpec::ZeroOne => Label::from_score(score)?.value(),
            _ => score,
        };
        total += loss.loss(score, sample.y)?;
    }
    Ok(total / s.len() as f64)
}

/// Training objective of `f` on `s` under `config`.
pub fn objective(f: &Classifier, s: &Dataset, config: &TrainConfig) -> Result<f64> {
    let mut v = empirical_risk(f, s, &config.loss)? + config.lambda * f.rkhs_norm_sq()?;
    if config.mode == ConstraintMode::Penalty && config.fairness.kind != FairnessKind::None {
        v += fairness_penalty(f, s, &config.fairness)?;
    }
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("objective"))
    }
}

/// Trains at each λ and reports `(λ, ‖f_λ‖ₖ)`.
pub fn norm_path(s: &Dataset, config: &TrainConfig, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("lambdas must be sorted ascending".into()));
    }
    if let Some(&l) = lambdas.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter(format!("norm path needs lambda > 0, got {l}")));
    }
    lambdas
        .iter()
        .map(|&l| {
            let r = train(s, &config.with_lambda(l))?;
            Ok((l, r.classifier.rkhs_norm_sq()?.sqrt()))
        })
        .collect()
}

/// Parameter space the iterates live in.
enum Geometry {
    /// `θ = α`, scores `Kα`, metric `K`.
    Dual(Gram),
    /// `θ = w`, scores `Xw`, Euclidean metric.
    Primal(Vec<Vec<f64>>),
}

impl Geometry {
    fn scores(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            Geometry::Dual(k) => k.mul(theta),
            Geometry::Primal(x) => x.iter().map(|xi| dot(xi, theta)).collect(),
        }
    }

    /// RKHS gradient coefficients for score sensitivities `c`.
    fn direction(&self, theta: &[f64], c: &[f64], lambda: f64) -> Vec<f64> {
        match self {
            Geometry::Dual(_) => c.iter().zip(theta).map(|(ci, t)| ci + 2.0 * lambda * t).collect(),
            Geometry::Primal(x) => {
                let mut d: Vec<f64> = theta.iter().map(|t| 2.0 * lambda * t).collect();
                for (xi, ci) in x.iter().zip(c) {
                    if *ci != 0.0 {
                        for (dj, xj) in d.iter_mut().zip(xi) {
                            *dj += ci * xj;
                        }
                    }
                }
                d
            }
        }
    }

    /// `(H d, X d)`: the metric applied to `d` and the induced score change.
    fn apply(&self, d: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            Geometry::Dual(k) => {
                let kd = k.mul(d);
                (kd.clone(), kd)
            }
            Geometry::Primal(x) => (d.to_vec(), x.iter().map(|xi| dot(xi, d)).collect()),
        }
    }

    fn norm_sq(&self, theta: &[f64], scores: &[f64]) -> f64 {
        match self {
            Geometry::Dual(_) => dot(theta, scores),
            Geometry::Primal(_) => dot(theta, theta),
        }
    }
}

/// Non-regularizer part of the objective as a function of training scores.
struct ScoreObjective<'a> {
    loss: LossSpec,
    labels: Vec<Label>,
    lambda: f64,
    constraint: Option<&'a PiecewiseAffine>,
    mode: ConstraintMode,
    mu: f64,
    multipliers: Vec<f64>,
    rho: f64,
}

impl ScoreObjective<'_> {
    fn value(&self, scores: &[f64], norm_sq: f64) -> f64 {
        let n = scores.len() as f64;
        let mut v = 0.0;
        for (s, y) in scores.iter().zip(&self.labels) {
            // the loss kinds reaching here are total on finite scores
            v += self.loss.loss(*s, *y).unwrap_or(f64::NAN);
        }
        v = v / n + self.lambda * norm_sq;
        if let Some(c) = self.constraint {
            match self.mode {
                ConstraintMode::Constrained => {
                    for (p, m) in c.pieces().iter().zip(&self.multipliers) {
                        let t = (m + self.rho * p.value(scores)).max(0.0);
                        v += (t * t - m * m) / (2.0 * self.rho);
                    }
                }
                ConstraintMode::Penalty => v += self.mu * c.value(scores).max(0.0),
            }
        }
        v
    }

    /// `∂/∂sᵢ` of [`Self::value`] (excluding the regularizer).
    fn score_gradient(&self, scores: &[f64]) -> Vec<f64> {
        let n = scores.len() as f64;
        let mut g: Vec<f64> = scores
            .iter()
            .zip(&self.labels)
            .map(|(s, y)| self.loss.grad(*s, *y).unwrap_or(f64::NAN) / n)
            .collect();
        if let Some(c) = self.constraint {
            match self.mode {
                ConstraintMode::Constrained => {
                    for (p, m) in c.pieces().iter().zip(&self.multipliers) {
                        let t = (m + self.rho * p.value(scores)).max(0.0);
                        if t > 0.0 {
                            for (gi, ai) in g.iter_mut().zip(&p.a) {
                                *gi += t * ai;
                            }
                        }
                    }
                }
                ConstraintMode::Penalty => {
                    let vals: Vec<f64> = c.pieces().iter().map(|p| p.value(scores)).collect();
                    let (j, vmax) = vals
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
                    if vmax > 0.0 {
                        for (gi, ai) in g.iter_mut().zip(&c.pieces()[j].a) {
                            *gi += self.mu * ai;
                        }
                    }
                }
            }
        }
        g
    }
}

struct State {
    theta: Vec<f64>,
    scores: Vec<f64>,
    norm_sq: f64,
    value: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;
const RESYNC_EVERY: usize = 50;
const MAX_PENALTY_ROUNDS: usize = 200;

/// Gradient descent on the smooth (or subdifferentiable) objective until the
/// RKHS gradient norm drops to `tol` or the iteration budget runs out.
/// Returns the final gradient norm.
fn descend(
    geom: &Geometry,
    obj: &ScoreObjective<'_>,
    st: &mut State,
    tol: f64,
    step0: f64,
    budget: &mut usize,
    iterations: &mut usize,
) -> Result<f64> {
    let lambda = obj.lambda;
    st.value = obj.value(&st.scores, st.norm_sq);
    let mut prev: Option<(Vec<f64>, f64, Vec<f64>)> = None; // (d, η, H d)
    let mut since_sync = 0;
    loop {
        let c = obj.score_gradient(&st.scores);
        let d = geom.direction(&st.theta, &c, lambda);
        let (hd, sd) = geom.apply(&d);
        let gsq = dot(&d, &hd).max(0.0);
        if !gsq.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        let gnorm = gsq.sqrt();
        if gnorm <= tol || *budget == 0 || gsq == 0.0 {
            return Ok(gnorm);
        }
        *budget -= 1;
        *iterations += 1;

        // BB1 step from the last accepted move Δθ = −η d_prev:
        // ⟨Δθ,Δθ⟩ / ⟨Δθ,Δd⟩ = η ⟨d_prev, d_prev⟩ / ⟨d_prev, d_prev − d⟩
        let mut eta = match &prev {
            Some((dp, eta_p, hdp)) => {
                let num = dot(dp, hdp);
                let den = num - dot(hdp, &d);
                if den > 0.0 && num > 0.0 {
                    eta_p * num / den
                } else {
                    step0
                }
            }
            None => step0,
        };
        if !(eta.is_finite() && eta > 0.0) {
            eta = step0;
        }

        let theta_hd = dot(&st.theta, &hd);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let scores: Vec<f64> = st.scores.iter().zip(&sd).map(|(s, v)| s - eta * v).collect();
            let norm_sq = (st.norm_sq - 2.0 * eta * theta_hd + eta * eta * gsq).max(0.0);
            let value = obj.value(&scores, norm_sq);
            if value.is_finite() && value <= st.value - ARMIJO * eta * gsq {
                accepted = Some((scores, norm_sq, value));
                break;
            }
            eta *= 0.5;
        }
        let Some((scores, norm_sq, value)) = accepted else {
            // no descent along the (sub)gradient at any trial length
            return Ok(gnorm);
        };
        for (t, di) in st.theta.iter_mut().zip(&d) {
            *t -= eta * di;
        }
        st.scores = scores;
        st.norm_sq = norm_sq;
        st.value = value;
        since_sync += 1;
        if since_sync >= RESYNC_EVERY {
            st.scores = geom.scores(&st.theta);
            st.norm_sq = geom.norm_sq(&st.theta, &st.scores);
            st.value = obj.value(&st.scores, st.norm_sq);
            since_sync = 0;
        }
        prev = Some((d, eta, hd));
    }
}

/// Approximate minimizer of the configured program on `s`.
///
/// Never fails on non-convergence; check [`TrainResult::converged`] or call
/// [`TrainResult::require_converged`].
pub fn train(s: &Dataset, config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    if s.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if !config.loss.is_differentiable() {
        return Err(Error::NotDifferentiable("zero-one"));
    }
    let primal = config.primal();
    let geom = if primal {
        Geometry::Primal(s.features().map(<[f64]>::to_vec).collect())
    } else {
        let pts: Vec<&[f64]> = s.features().collect();
        Geometry::Dual(Gram::new(&config.kernel, &pts)?)
    };
    let constraint = config.fairness.constraint(s)?;
    let n_pieces = constraint.as_ref().map_or(0, |c| c.pieces().len());

    let mut obj = ScoreObjective {
        loss: config.loss,
        labels: s.labels(),
        lambda: config.lambda,
        constraint: constraint.as_ref(),
        mode: config.mode,
        mu: config.fairness.mu,
        multipliers: vec![0.0; n_pieces],
        rho: 1.0,
    };
    let dim = if primal { s.dim() } else { s.len() };
    let mut st = State {
        theta: vec![0.0; dim],
        scores: vec![0.0; s.len()],
        norm_sq: 0.0,
        value: 0.0,
    };
    let mut budget = config.max_iters;
    let mut iterations = 0;
    let tol = config.tol;

    let gap;
    let mut converged;
    match (&constraint, config.mode) {
        (Some(c), ConstraintMode::Constrained) => {
            let mut prev_violation = f64::INFINITY;
            let mut last_gap;
            let mut rounds = 0;
            loop {
                rounds += 1;
                last_gap = descend(&geom, &obj, &mut st, tol, config.step_size, &mut budget, &mut iterations)?;
                let vals: Vec<f64> = c.pieces().iter().map(|p| p.value(&st.scores)).collect();
                let violation = vals.iter().fold(0.0f64, |m, &v| m.max(v));
                for (m, v) in obj.multipliers.iter_mut().zip(&vals) {
                    *m = (*m + obj.rho * v).max(0.0);
                }
                if violation <= tol && last_gap <= tol {
                    converged = true;
                    break;
                }
                if budget == 0 || rounds >= MAX_PENALTY_ROUNDS {
                    converged = false;
                    break;
                }
                if violation > 0.25 * prev_violation {
                    obj.rho *= config.penalty_growth;
                }
                prev_violation = violation;
            }
            // gradient of the Lagrangian at the updated multipliers
            st.scores = geom.scores(&st.theta);
            st.norm_sq = geom.norm_sq(&st.theta, &st.scores);
            let lagr = obj.score_gradient_at_multipliers(&st.scores);
            let d = geom.direction(&st.theta, &lagr, config.lambda);
            let (hd, _) = geom.apply(&d);
            gap = dot(&d, &hd).max(0.0).sqrt();
            converged &= gap <= tol;
        }
        _ => {
            gap = descend(&geom, &obj, &mut st, tol, config.step_size, &mut budget, &mut iterations)?;
            converged = gap <= tol;
        }
    }

    let classifier: Classifier = if primal {
        LinearClassifier::new(st.theta)?.into()
    } else {
        KernelClassifier::new(st.theta, s.features().map(<[f64]>::to_vec).collect(), config.kernel)?.into()
    };
    let scores = classifier.scores(s)?;
    let max_abs_score = scores.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let constraint_value = constraint.as_ref().map(|c| c.value(&scores));
    let objective_value = objective(&classifier, s, config)?;
    Ok(TrainResult {
        classifier,
        objective_value,
        constraint_value,
        iterations,
        stationarity_gap: gap,
        max_abs_score,
        converged,
    })
}

impl ScoreObjective<'_> {
    /// Score gradient of `(1/N)ΣL + Σ μⱼ gⱼ` with the current multipliers.
    fn score_gradient_at_multipliers(&self, scores: &[f64]) -> Vec<f64> {
        let n = scores.len() as f64;
        let mut g: Vec<f64> = scores
            .iter()
            .zip(&self.labels)
            .map(|(s, y)| self.loss.grad(*s, *y).unwrap_or(f64::NAN) / n)
            .collect();
        if let Some(c) = self.constraint {
            for (p, m) in c.pieces().iter().zip(&self.multipliers) {
                if *m > 0.0 {
                    for (gi, ai) in g.iter_mut().zip(&p.a) {
                        *gi += m * ai;
                    }
                }
            }
        }
        g
    }
}
