//! The repeated-split protocol: hold out one test set, train on `n`
//! resampled training sets, and summarize accuracy, statistical rate,
//! prediction stability, generalization gap and uniform stability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::data::{bootstrap, hold_out, subsample, Dataset, Holdout};
use crate::error::{Error, Result};
use crate::fairness::statistical_rate;
use crate::lab::bounds::{stability_bound_rkhs, BoundInputs};
use crate::lab::metrics::{accuracy, generalization_gap, mean_std, stab_metric};
use crate::lab::stability::{empirical_uniform_stability, PoolSampler};
use crate::seed::{rng, Stream};
use crate::solver::{train, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Training sets are subsamples without replacement of the data left
    /// after the shared test set.
    SharedTest,
    /// Training sets are i.i.d. draws with replacement from that remainder,
    /// so any two of them are independent samples.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub test_frac: f64,
    pub train_frac: f64,
    pub repetitions: usize,
    pub mode: ResampleMode,
    /// Swap probes for the uniform-stability estimate; 0 skips it.
    pub probes: usize,
    pub seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            test_frac: 0.2,
            train_frac: 0.75,
            repetitions: 50,
            mode: ResampleMode::SharedTest,
            probes: 0,
            seed: 0,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("at least one repetition is required".into()));
        }
        if !(self.test_frac > 0.0 && self.test_frac < 1.0) {
            return Err(Error::InvalidParameter(format!("test fraction {} must lie in (0, 1)", self.test_frac)));
        }
        if !(self.train_frac > 0.0 && self.train_frac <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction {} must lie in (0, 1]",
                self.train_frac
            )));
        }
        Ok(())
    }
}

/// Summary of one protocol run at one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda: f64,
    pub repetitions: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub gamma_mean: f64,
    pub gamma_std: f64,
    /// Absent with fewer than two repetitions.
    pub stab: Option<f64>,
    /// Mean of test risk minus training risk across repetitions.
    pub gen_gap: f64,
    /// Repetitions whose training run stopped before reaching tolerance.
    pub unconverged: usize,
    /// The uniform-stability fields are absent at λ = 0 or without probes.
    pub beta_hat: Option<f64>,
    pub beta_bound: Option<f64>,
    pub norm_gap: Option<f64>,
    pub allowance: Option<f64>,
}

struct Repetition {
    classifier: Classifier,
    accuracy: f64,
    gamma: f64,
    gen_gap: f64,
    converged: bool,
}

/// Runs the protocol on `s` under `config`.
///
/// The test set comes from the `TestSplit` stream of `protocol.seed` and
/// repetition `r` from the `(Repetition, r)` stream, so the report does not
/// depend on scheduling. Uniform stability is probed on the first
/// repetition's training set, with replacements drawn from the data that
/// was neither test nor training data (the whole remainder in independent
/// mode) and the test set as evaluation set.
pub fn run_stability_suite(s: &Dataset, config: &TrainConfig, protocol: &Protocol) -> Result<StabilityReport> {
    config.validate()?;
    protocol.validate()?;
    let Holdout { test, rest } = hold_out(s, protocol.test_frac, &mut rng(protocol.seed, Stream::TestSplit, 0))?;

    let draw = |r: usize| -> Result<(Dataset, Vec<usize>)> {
        let mut g = rng(protocol.seed, Stream::Repetition, r as u64);
        match protocol.mode {
            ResampleMode::SharedTest => subsample(&rest, protocol.train_frac, &mut g),
            ResampleMode::Independent => Ok((
                bootstrap(&rest, protocol.train_frac, &mut g)?,
                (0..rest.len()).collect(),
            )),
        }
    };

    let reps = (0..protocol.repetitions)
        .into_par_iter()
        .map(|r| {
            let (train_set, _) = draw(r)?;
            let fit = train(&train_set, config)?;
            let preds = fit.classifier.predictions(&test)?;
            Ok(Repetition {
                accuracy: accuracy(&fit.classifier, &test)?,
                gamma: statistical_rate(&preds, &test.groups())?,
                gen_gap: generalization_gap(&fit.classifier, &train_set, &test, &config.loss)?,
                converged: fit.converged,
                classifier: fit.classifier,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let accs: Vec<f64> = reps.iter().map(|r| r.accuracy).collect();
    let gammas: Vec<f64> = reps.iter().map(|r| r.gamma).collect();
    let gaps: Vec<f64> = reps.iter().map(|r| r.gen_gap).collect();
    let (acc_mean, acc_std) = mean_std(&accs);
    let (gamma_mean, gamma_std) = mean_std(&gammas);
    let (gen_gap, _) = mean_std(&gaps);
    let classifiers: Vec<Classifier> = reps.iter().map(|r| r.classifier.clone()).collect();
    let stab = if classifiers.len() >= 2 {
        Some(stab_metric(&classifiers, &test)?)
    } else {
        None
    };

    let (first_train, left) = draw(0)?;
    let mut report = StabilityReport {
        lambda: config.lambda,
        repetitions: protocol.repetitions,
        train_size: first_train.len(),
        test_size: test.len(),
        acc_mean,
        acc_std,
        gamma_mean,
        gamma_std,
        stab,
        gen_gap,
        unconverged: reps.iter().filter(|r| !r.converged).count(),
        beta_hat: None,
        beta_bound: None,
        norm_gap: None,
        allowance: None,
    };

    if config.lambda > 0.0 && protocol.probes > 0 {
        let pool = if left.is_empty() { rest.clone() } else { rest.subset(&left)? };
        let sampler = PoolSampler::new(pool)?;
        let est = empirical_uniform_stability(&first_train, config, protocol.probes, &sampler, &test, protocol.seed)?;
        let bound = stability_bound_rkhs(&BoundInputs::new(est.sigma, est.kappa_sq, config.lambda, first_train.len()))?;
        report.beta_hat = Some(est.beta_hat);
        report.norm_gap = Some(est.norm_gap);
        report.allowance = Some(est.allowance);
        report.beta_bound = Some(bound);
    }
    Ok(report)
}
