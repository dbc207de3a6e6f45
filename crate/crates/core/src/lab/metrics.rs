//! Empirical metrics: prediction disagreement across training sets,
//! prediction agreement between neighbouring classifiers, accuracy and the
//! holdout generalization gap.

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::solver::empirical_risk;

/// Average number of test points on which two classifiers trained on
/// different training sets disagree:
///
/// `(1/(n(n−1))) Σ_{i≠j} Σ_{x∈T} |I[fᵢ(x) ≥ 0] − I[fⱼ(x) ≥ 0]|`.
///
/// The sum runs over ordered pairs even though the summand is symmetric.
pub fn stab_metric(classifiers: &[Classifier], test: &Dataset) -> Result<f64> {
    if classifiers.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "stab needs at least 2 classifiers, got {}",
            classifiers.len()
        )));
    }
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let preds = classifiers
        .iter()
        .map(|f| f.predictions(test))
        .collect::<Result<Vec<_>>>()?;
    Ok(stab_from_predictions(&preds))
}

/// [`stab_metric`] on precomputed prediction vectors of equal length.
pub fn stab_from_predictions(preds: &[Vec<Label>]) -> f64 {
    let n = preds.len();
    let mut unordered: u64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            unordered += preds[i].iter().zip(&preds[j]).filter(|(a, b)| a != b).count() as u64;
        }
    }
    (2 * unordered) as f64 / (n * (n - 1)) as f64
}

/// Outcome of comparing predictions of two neighbouring classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementCheck {
    /// Points with `|g(x)| > threshold` whose predicted labels differ.
    pub violations: usize,
    /// Fraction of points with `|g(x)| ≤ threshold`.
    pub low_margin_mass: f64,
    /// `max |g(x) − gⁱ(x)|` over the evaluation set.
    pub max_score_gap: f64,
}

/// Checks that predictions of `g` and `g_i` agree wherever `g` has margin
/// above `margin_threshold`. When the threshold is at least the observed
/// score gap, a disagreement would require a score to cross zero by more than
/// the gap, so `violations` must be 0; the disagreement probability is then
/// bounded by `low_margin_mass`.
pub fn prediction_agreement_check(
    g: &Classifier,
    g_i: &Classifier,
    eval: &Dataset,
    margin_threshold: f64,
) -> Result<AgreementCheck> {
    if !(margin_threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "margin threshold must be nonnegative, got {margin_threshold}"
        )));
    }
    let mut violations = 0;
    let mut low = 0;
    let mut max_gap = 0.0f64;
    for x in eval.features() {
        let a = g.score(x)?;
        let b = g_i.score(x)?;
        max_gap = max_gap.max((a - b).abs());
        if a.abs() <= margin_threshold {
            low += 1;
        } else if Label::from_score(a)? != Label::from_score(b)? {
            violations += 1;
        }
    }
    let low_margin_mass = if eval.is_empty() {
        0.0
    } else {
        low as f64 / eval.len() as f64
    };
    Ok(AgreementCheck {
        violations,
        low_margin_mass,
        max_score_gap: max_gap,
    })
}

/// Holdout risk minus training risk; the holdout risk stands in for the
/// population risk.
pub fn generalization_gap(f: &Classifier, train: &Dataset, holdout: &Dataset, loss: &LossSpec) -> Result<f64> {
    Ok(empirical_risk(f, holdout, loss)? - empirical_risk(f, train, loss)?)
}

pub fn accuracy(f: &Classifier, s: &Dataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut correct = 0usize;
    for sample in s.iter() {
        if f.predict(&sample.x)? == sample.y {
            correct += 1;
        }
    }
    Ok(correct as f64 / s.len() as f64)
}

/// Mean and sample standard deviation (`n − 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
