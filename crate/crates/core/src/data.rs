//! Samples, datasets and the split/swap operations the stability experiments
//! are built on.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// Sign rule with ties mapped to the positive class.
    pub fn from_score(score: f64) -> Result<Label> {
        if !score.is_finite() {
            return Err(Error::NonFinite("score"));
        }
        Ok(if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl TryFrom<f64> for Label {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Label::Positive)
        } else if v == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(Error::InvalidLabel(v))
        }
    }
}

/// One observation: features, sensitive-attribute category and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub z: usize,
    pub y: Label,
}

impl Sample {
    pub fn new(x: Vec<f64>, z: usize, y: Label) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(Sample { x, z, y })
    }
}

/// Ordered collection of samples sharing a feature dimension.
///
/// Indices are stable: index `i` identifies the sample replaced when forming
/// the neighbouring dataset `S^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
    num_groups: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, dim: usize, num_groups: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be positive".into()));
        }
        if num_groups == 0 {
            return Err(Error::InvalidParameter("number of groups must be positive".into()));
        }
        for s in &samples {
            check_sample(s, dim, num_groups)?;
        }
        Ok(Dataset {
            samples,
            dim,
            num_groups,
        })
    }

    /// Builds a dataset inferring `dim` from the first sample and
    /// `num_groups` from the largest category seen (at least 2).
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        let first = samples.first().ok_or(Error::Empty("dataset"))?;
        let dim = first.x.len();
        let groups = samples.iter().map(|s| s.z + 1).max().unwrap_or(1).max(2);
        Dataset::new(samples, dim, groups)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn get(&self, i: usize) -> Option<&Sample> {
        self.samples.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.samples.iter().map(|s| s.x.as_slice())
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    /// Returns `S^i`: a copy of this dataset with sample `i` replaced.
    pub fn swap_sample(&self, i: usize, replacement: Sample) -> Result<Dataset> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        check_sample(&replacement, self.dim, self.num_groups)?;
        let mut samples = self.samples.clone();
        samples[i] = replacement;
        Ok(Dataset {
            samples,
            dim: self.dim,
            num_groups: self.num_groups,
        })
    }

    /// Dataset made of the samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let samples = indices
            .iter()
            .map(|&i| {
                self.samples.get(i).cloned().ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            dim: self.dim,
            num_groups: self.num_groups,
        })
    }

    /// Concatenation of two datasets with matching dimension.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().cloned());
        Ok(Dataset {
            samples,
            dim: self.dim,
            num_groups: self.num_groups.max(other.num_groups),
        })
    }

    /// Applies `f` to every feature vector. Used by normalization and
    /// feature maps.
    pub fn map_features(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(f(&s.x), s.z, s.y))
            .collect::<Result<Vec<_>>>()?;
        let dim = samples.first().map_or(self.dim, |s| s.x.len());
        Dataset::new(samples, dim, self.num_groups)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn groups(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.z).collect()
    }

    /// Number of distinct categories that actually occur.
    pub fn groups_present(&self) -> usize {
        let mut seen = vec![false; self.num_groups];
        for s in &self.samples {
            seen[s.z] = true;
        }
        seen.into_iter().filter(|&b| b).count()
    }
}

fn check_sample(s: &Sample, dim: usize, num_groups: usize) -> Result<()> {
    if s.x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s.x.len(),
        });
    }
    if s.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature vector"));
    }
    if s.z >= num_groups {
        return Err(Error::InvalidParameter(format!(
            "sensitive category {} out of range for {} groups",
            s.z, num_groups
        )));
    }
    Ok(())
}

/// Scales every feature vector by `1/max‖x‖` so the largest norm is 1.
/// Returns the scaled dataset and the factor applied.
pub fn normalize_max_norm(s: &Dataset) -> Result<(Dataset, f64)> {
    if s.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let max = s
        .features()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    if max == 0.0 {
        return Err(Error::InvalidParameter("all feature vectors are zero".into()));
    }
    let factor = 1.0 / max;
    Ok((scale_features(s, factor)?, factor))
}

/// Multiplies every feature by `factor`.
pub fn scale_features(s: &Dataset, factor: f64) -> Result<Dataset> {
    if factor == 1.0 {
        return Ok(s.clone());
    }
    s.map_features(|x| x.iter().map(|v| v * factor).collect())
}

/// Result of holding out a test set: the test set and the remaining pool
/// training sets are drawn from.
#[derive(Debug, Clone)]
pub struct Holdout {
    pub test: Dataset,
    pub rest: Dataset,
}

/// Draws `⌊test_frac·N⌋` samples without replacement as the test set.
pub fn hold_out<R: Rng + ?Sized>(s: &Dataset, test_frac: f64, rng: &mut R) -> Result<Holdout> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_frac} must lie in (0, 1)"
        )));
    }
    let n = s.len();
    let n_test = (test_frac * n as f64).floor() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::Empty("test/remainder split"));
    }
    let picked = index::sample(rng, n, n_test).into_vec();
    let mut in_test = vec![false; n];
    for &i in &picked {
        in_test[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    Ok(Holdout {
        test: s.subset(&picked)?,
        rest: s.subset(&rest)?,
    })
}

/// Uniform subsample of `⌊frac·N⌋` samples without replacement. Also returns
/// the indices left out.
pub fn subsample<R: Rng + ?Sized>(
    s: &Dataset,
    frac: f64,
    rng: &mut R,
) -> Result<(Dataset, Vec<usize>)> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {frac} must lie in (0, 1]"
        )));
    }
    let n = s.len();
    let k = (frac * n as f64).floor() as usize;
    if k == 0 {
        return Err(Error::Empty("training split"));
    }
    let picked = index::sample(rng, n, k).into_vec();
    let mut used = vec![false; n];
    for &i in &picked {
        used[i] = true;
    }
    let left: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
    Ok((s.subset(&picked)?, left))
}

/// `⌊frac·N⌋` samples drawn i.i.d. with replacement from the empirical
/// distribution of `s`.
pub fn bootstrap<R: Rng + ?Sized>(s: &Dataset, frac: f64, rng: &mut R) -> Result<Dataset> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {frac} must lie in (0, 1]"
        )));
    }
    let k = (frac * s.len() as f64).floor() as usize;
    if k == 0 {
        return Err(Error::Empty("training split"));
    }
    let idx: Vec<usize> = (0..k).map(|_| rng.random_range(0..s.len())).collect();
    s.subset(&idx)
}

/// Seeded train/test split: a test set of `⌊test_frac·N⌋` samples, then a
/// training set of `⌊train_frac·(N − |test|)⌋` samples from the remainder.
pub fn split(s: &Dataset, test_frac: f64, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = crate::seed::rng(seed, crate::seed::Stream::TestSplit, 0);
    let Holdout { test, rest } = hold_out(s, test_frac, &mut rng)?;
    let mut rng = crate::seed::rng(seed, crate::seed::Stream::TrainSplit, 0);
    let (train, _) = subsample(&rest, train_frac, &mut rng)?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: &[f64], z: usize, y: f64) -> Sample {
        Sample::new(x.to_vec(), z, Label::try_from(y).unwrap()).unwrap()
    }

    fn three() -> Dataset {
        Dataset::from_samples(vec![
            sample(&[0.0, 1.0], 0, 1.0),
            sample(&[1.0, 0.0], 1, -1.0),
            sample(&[1.0, 1.0], 0, -1.0),
        ])
        .unwrap()
    }

    fn numbered(n: usize) -> Dataset {
        Dataset::from_samples(
            (0..n)
                .map(|i| sample(&[i as f64], i % 2, if i % 3 == 0 { 1.0 } else { -1.0 }))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_swap_is_noop() {
        let s = three();
        let t = s.swap_sample(0, s.samples()[0].clone()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn swap_replaces_only_target() {
        let s = three();
        let new = sample(&[5.0, 5.0], 1, 1.0);
        let t = s.swap_sample(2, new.clone()).unwrap();
        assert_eq!(t.samples()[0], s.samples()[0]);
        assert_eq!(t.samples()[1], s.samples()[1]);
        assert_eq!(t.samples()[2], new);
        // original untouched
        assert_eq!(s.samples()[2].x, vec![1.0, 1.0]);
    }

    #[test]
    fn swap_out_of_range() {
        let s = three();
        let err = s.swap_sample(3, s.samples()[0].clone()).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 3, len: 3 });
    }

    #[test]
    fn swap_dimension_mismatch() {
        let s = three();
        let err = s.swap_sample(0, sample(&[1.0], 0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn swap_twice_restores() {
        let s = three();
        let t = s.swap_sample(1, sample(&[9.0, 9.0], 0, 1.0)).unwrap();
        let back = t.swap_sample(1, s.samples()[1].clone()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn labels_validated() {
        assert!(Label::try_from(0.0).is_err());
        assert!(Label::try_from(2.0).is_err());
        assert_eq!(Label::try_from(-1.0).unwrap(), Label::Negative);
    }

    #[test]
    fn non_finite_features_rejected() {
        assert!(Sample::new(vec![f64::NAN], 0, Label::Positive).is_err());
        assert!(Sample::new(vec![f64::INFINITY], 0, Label::Positive).is_err());
    }

    #[test]
    fn group_out_of_range_rejected() {
        let err = Dataset::new(vec![sample(&[1.0], 2, 1.0)], 1, 2).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn split_sizes() {
        let s = numbered(100);
        let (train, test) = split(&s, 0.2, 1.0, 7).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(train.len(), 80);
        let (train, test) = split(&s, 0.2, 0.75, 7).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(train.len(), 60);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let s = numbered(50);
        let a = split(&s, 0.3, 0.5, 42).unwrap();
        let b = split(&s, 0.3, 0.5, 42).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        // features are unique ids, so disjointness is checkable by value
        for t in a.1.iter() {
            assert!(a.0.iter().all(|r| r.x != t.x));
        }
        let c = split(&s, 0.3, 0.5, 43).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn split_rejects_empty_sides() {
        let s = numbered(3);
        assert!(split(&s, 0.1, 1.0, 0).is_err());
        assert!(split(&s, 0.0, 1.0, 0).is_err());
        assert!(split(&s, 0.5, 0.1, 0).is_err());
    }

    #[test]
    fn score_sign_rule() {
        assert_eq!(Label::from_score(0.0).unwrap(), Label::Positive);
        assert_eq!(Label::from_score(-0.3).unwrap(), Label::Negative);
        assert_eq!(Label::from_score(1e-12).unwrap(), Label::Positive);
        assert_eq!(Label::from_score(-0.0).unwrap(), Label::Positive);
        assert!(Label::from_score(f64::NAN).is_err());
    }

    #[test]
    fn normalize_examples() {
        let s = Dataset::from_samples(vec![sample(&[3.0, 4.0], 0, 1.0), sample(&[1.0, 0.0], 1, -1.0)])
            .unwrap();
        let (t, f) = normalize_max_norm(&s).unwrap();
        assert_eq!(f, 0.2);
        assert_eq!(t.samples()[0].x, vec![0.6000000000000001, 0.8]);
        let (u, f) = normalize_max_norm(&Dataset::from_samples(vec![sample(&[0.6, 0.8], 0, 1.0)]).unwrap()).unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(u.samples()[0].x, vec![0.6, 0.8]);
        let zeros = Dataset::from_samples(vec![sample(&[0.0, 0.0], 0, 1.0)]).unwrap();
        assert!(normalize_max_norm(&zeros).is_err());
    }

    #[test]
    fn bootstrap_size() {
        let s = numbered(40);
        let mut rng = crate::seed::rng(1, crate::seed::Stream::Repetition, 0);
        let b = bootstrap(&s, 0.5, &mut rng).unwrap();
        assert_eq!(b.len(), 20);
    }
}
