//! Synthetic populations with a known law: Gaussian class clusters whose
//! location shifts with the sensitive group, and group-dependent base rates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, Sample};
use crate::error::{Error, Result};

/// `z ~ Bernoulli(group1_prob)`, `y = +1` with probability
/// `positive_rate[z]`, and
/// `x ~ N(y·(separation/2)·u + z·group_shift·e₀, noise²·I)` where
/// `u = (1, …, 1)/√dim`. With `bias` set, a constant feature of that value is
/// appended after the Gaussian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupGaussian {
    pub dim: usize,
    pub group1_prob: f64,
    pub positive_rate: [f64; 2],
    pub separation: f64,
    pub group_shift: f64,
    pub noise: f64,
    pub bias: Option<f64>,
}

impl Default for GroupGaussian {
    fn default() -> Self {
        GroupGaussian {
            dim: 2,
            group1_prob: 0.5,
            positive_rate: [0.4, 0.6],
            separation: 2.0,
            group_shift: 1.0,
            noise: 1.0,
            bias: None,
        }
    }
}

impl GroupGaussian {
    /// Surrogate for census-income data with a binary sex attribute:
    /// two thirds of rows in group 1, positive rates 0.31 vs 0.11.
    pub fn adult_sex() -> Self {
        GroupGaussian {
            dim: 6,
            group1_prob: 0.675,
            positive_rate: [0.114, 0.312],
            separation: 2.4,
            group_shift: 0.6,
            noise: 1.0,
            bias: Some(1.0),
        }
    }

    /// Surrogate with a binary race attribute: 86% in group 1, positive
    /// rates 0.16 vs 0.26.
    pub fn adult_race() -> Self {
        GroupGaussian {
            group1_prob: 0.86,
            positive_rate: [0.155, 0.254],
            ..GroupGaussian::adult_sex()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.dim == 0 {
            return Err(Error::InvalidParameter("synthetic dimension must be positive".into()));
        }
        if !prob(self.group1_prob) || !self.positive_rate.iter().all(|&p| prob(p)) {
            return Err(Error::InvalidParameter("synthetic probabilities must lie in [0, 1]".into()));
        }
        if !(self.noise >= 0.0 && self.separation.is_finite() && self.group_shift.is_finite()) {
            return Err(Error::InvalidParameter("invalid synthetic cluster geometry".into()));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.dim + usize::from(self.bias.is_some())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        let z = usize::from(rng.random::<f64>() < self.group1_prob);
        let y = if rng.random::<f64>() < self.positive_rate[z] {
            Label::Positive
        } else {
            Label::Negative
        };
        let along = y.value() * self.separation / 2.0 / (self.dim as f64).sqrt();
        let mut x: Vec<f64> = (0..self.dim)
            .map(|j| {
                let noise: f64 = StandardNormal.sample(rng);
                let shift = if j == 0 { z as f64 * self.group_shift } else { 0.0 };
                along + shift + self.noise * noise
            })
            .collect();
        if let Some(b) = self.bias {
            x.push(b);
        }
        Sample { x, z, y }
    }

    pub fn dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        let samples = (0..n).map(|_| self.sample(rng)).collect();
        Dataset::new(samples, self.feature_dim(), 2)
    }
}
