//! Empirical uniform stability: retrain on neighbouring datasets `Sⁱ` that
//! differ from `S` in one sample and measure how far losses and classifiers
//! move.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, LinearClassifier};
use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::lab::bounds::solver_allowance;
use crate::lab::synthetic::GroupGaussian;
use crate::loss::LossSpec;
use crate::seed::{rng, Stream};
use crate::solver::{train, TrainConfig, TrainResult};

/// Source of the replacement sample `s′` put in place of `S[i]`.
pub trait ReplacementSampler: Sync {
    fn draw(&self, s: &Dataset, i: usize, rng: &mut ChaCha8Rng) -> Result<Sample>;
}

/// `s′ = S[i]`: the neighbouring dataset equals `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySampler;

impl ReplacementSampler for IdentitySampler {
    fn draw(&self, s: &Dataset, i: usize, _rng: &mut ChaCha8Rng) -> Result<Sample> {
        s.get(i).cloned().ok_or(Error::IndexOutOfRange { index: i, len: s.len() })
    }
}

/// Uniform draw from a fixed pool, typically held-out data.
#[derive(Debug, Clone)]
pub struct PoolSampler {
    pool: Dataset,
}

impl PoolSampler {
    pub fn new(pool: Dataset) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::Empty("replacement pool"));
        }
        Ok(PoolSampler { pool })
    }
}

impl ReplacementSampler for PoolSampler {
    fn draw(&self, _s: &Dataset, _i: usize, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let j = rng.random_range(0..self.pool.len());
        Ok(self.pool.samples()[j].clone())
    }
}

/// Fresh draw from a synthetic law, with features multiplied by `scale`
/// (the normalization factor applied to `S`).
#[derive(Debug, Clone, Copy)]
pub struct GeneratorSampler {
    pub generator: GroupGaussian,
    pub scale: f64,
}

impl ReplacementSampler for GeneratorSampler {
    fn draw(&self, _s: &Dataset, _i: usize, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let mut s = self.generator.sample(rng);
        for v in &mut s.x {
            *v *= self.scale;
        }
        Ok(s)
    }
}

/// Measurements from one swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: usize,
    /// `max_{s ∈ eval} |L(g, s) − L(gⁱ, s)|`.
    pub beta: f64,
    /// `‖g − gⁱ‖ₖ`.
    pub norm_gap: f64,
    /// `2σκ·max(ε(g), ε(gⁱ))`.
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    /// Largest per-probe `beta`.
    pub beta_hat: f64,
    /// Largest per-probe `norm_gap`.
    pub norm_gap: f64,
    /// Largest per-probe allowance.
    pub allowance: f64,
    pub sigma: f64,
    /// `max k(x, x)` over `S`, the evaluation set and every replacement.
    pub kappa_sq: f64,
    pub probes: Vec<ProbeRecord>,
}

/// Trains `g` on `s` and, for each probe `p`, draws an index and a
/// replacement from the `Probe`/`Replacement` streams of `seed`, trains
/// `gⁱ` on the neighbouring dataset and records the loss and norm gaps.
///
/// Probes run in parallel; results are kept in probe order. Every training
/// run must converge, otherwise the first failure is returned.
pub fn empirical_uniform_stability(
    s: &Dataset,
    config: &TrainConfig,
    probes: usize,
    sampler: &dyn ReplacementSampler,
    eval: &Dataset,
    seed: u64,
) -> Result<StabilityEstimate> {
    if probes == 0 {
        return Err(Error::InvalidParameter("at least one probe is required".into()));
    }
    if config.lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if s.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if eval.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let sigma = config.loss.admissibility()?;

    let swaps = (0..probes)
        .map(|p| {
            let i = rng(seed, Stream::Probe, p as u64).random_range(0..s.len());
            let r = sampler.draw(s, i, &mut rng(seed, Stream::Replacement, p as u64))?;
            Ok((i, r))
        })
        .collect::<Result<Vec<_>>>()?;

    let kappa_sq = config
        .kernel
        .kappa_sq(s.features().chain(eval.features()).chain(swaps.iter().map(|(_, r)| r.x.as_slice())))?;
    let kappa = kappa_sq.sqrt();

    let base = train(s, config)?.require_converged()?;
    let base_err = base.coefficient_error(config.lambda);
    let base_losses = eval_losses(&base.classifier, eval, &config.loss)?;

    let records = swaps
        .into_par_iter()
        .map(|(i, r)| {
            let neighbour = s.swap_sample(i, r)?;
            let g_i = train(&neighbour, config)?.require_converged()?;
            probe_record(i, &base, &base_losses, base_err, &g_i, eval, config, sigma, kappa)
        })
        .collect::<Result<Vec<_>>>()?;

    let max = |f: fn(&ProbeRecord) -> f64| records.iter().map(f).fold(0.0f64, f64::max);
    Ok(StabilityEstimate {
        beta_hat: max(|r| r.beta),
        norm_gap: max(|r| r.norm_gap),
        allowance: max(|r| r.allowance),
        sigma,
        kappa_sq,
        probes: records,
    })
}

fn eval_losses(f: &Classifier, eval: &Dataset, loss: &LossSpec) -> Result<Vec<f64>> {
    eval.iter().map(|s| loss.loss(f.score(&s.x)?, s.y)).collect()
}

#[allow(clippy::too_many_arguments)]
fn probe_record(
    index: usize,
    base: &TrainResult,
    base_losses: &[f64],
    base_err: f64,
    g_i: &TrainResult,
    eval: &Dataset,
    config: &TrainConfig,
    sigma: f64,
    kappa: f64,
) -> Result<ProbeRecord> {
    let losses = eval_losses(&g_i.classifier, eval, &config.loss)?;
    let beta = base_losses
        .iter()
        .zip(&losses)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let norm_gap = base.classifier.rkhs_distance(&g_i.classifier)?;
    let err = base_err.max(g_i.coefficient_error(config.lambda));
    Ok(ProbeRecord {
        index,
        beta,
        norm_gap,
        allowance: solver_allowance(sigma, kappa, err),
    })
}

/// Empirical gradient bound for a linear model next to its analytic
/// ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    /// `max ‖∂L/∂score · x‖₂` over the samples and weight vectors visited;
    /// a lower estimate of `G`.
    pub estimate: f64,
    /// `σ·κ`.
    pub ceiling: f64,
}

/// Estimates `G = sup ‖∇_w L(w·x, y)‖₂` over `s` and weight vectors with
/// `‖w‖ ≤ radius`.
///
/// The visited weights are `w = 0` and `classifier_samples − 1` random
/// directions scaled by `radius·U(0, 1)`. For the squared loss the radius is
/// capped at `B/κ`, so every visited score stays in `[−B, B]` where its
/// admissibility constant applies.
pub fn estimate_g(
    loss: &LossSpec,
    s: &Dataset,
    kernel: &KernelSpec,
    classifier_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<GradientBound> {
    if !kernel.is_linear() {
        return Err(Error::NotLinear);
    }
    if classifier_samples == 0 {
        return Err(Error::InvalidParameter("classifier_samples must be at least 1".into()));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
    }
    if !loss.is_differentiable() {
        return Err(Error::NotDifferentiable("zero-one"));
    }
    let sigma = loss.admissibility()?;
    let kappa = kernel.kappa_sq(s.features())?.sqrt();
    let radius = match *loss {
        LossSpec::Squared { bound: Some(b) } if kappa > 0.0 => radius.min(b / kappa),
        _ => radius,
    };

    let mut r = rng(seed, Stream::ClassifierSample, 0);
    let mut estimate = 0.0f64;
    for k in 0..classifier_samples {
        let w = if k == 0 {
            vec![0.0; s.dim()]
        } else {
            random_weight(s.dim(), radius, &mut r)
        };
        let f = LinearClassifier::new(w)?;
        for sample in s.iter() {
            let g = loss.grad(f.evaluate(&sample.x)?, sample.y)?;
            let norm = sample.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            estimate = estimate.max(g.abs() * norm);
        }
    }
    Ok(GradientBound {
        estimate,
        ceiling: sigma * kappa,
    })
}

fn random_weight(dim: usize, radius: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(r)).collect();
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return vec![0.0; dim];
    }
    let scale = radius * r.random::<f64>() / len;
    dir.into_iter().map(|v| v * scale).collect()
}
