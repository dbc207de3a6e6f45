//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 0
//! out = "results"
//!
//! [data]
//! source = "csv"            # or "synthetic"
//! path = "adult.csv"
//! features = ["age", "education_num", "hours_per_week"]
//! sensitive = "sex"
//! label = "income"
//! label_encoding = "auto"   # "zero_one", "plus_minus"
//! normalize = true
//!
//! [protocol]
//! lambdas = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05]
//! repetitions = 50
//! test_frac = 0.2
//! train_frac = 0.75
//! mode = "shared_test"      # or "independent"
//! probes = 0
//!
//! [train]
//! loss = "logistic"         # "hinge", "squared"
//! kernel = "linear"         # "gaussian_rbf", "multiquadric", "inverse_multiquadric"
//! fairness = "covariance"   # or "none"
//! threshold = 0.1
//! mode = "constrained"      # or "penalty"
//! ```
//!
//! Every key is optional except the data source and what that source needs.
//! Unknown keys are rejected. Relative paths are resolved against the
//! directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stablefair::lab::{GroupGaussian, Protocol, ResampleMode};
use stablefair::seed::{rng, Stream};
use stablefair::{
    ConstraintMode, Dataset, FairnessKind, FairnessSpec, KernelSpec, LossSpec, Representation, TrainConfig,
};

use crate::error::{CliError, Result};
use crate::ingest::{load_csv, normalize, LabelEncoding, Schema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub train: TrainSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Csv,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Two Gaussian clusters, balanced groups.
    Default,
    /// Census-income surrogate, binary sex attribute.
    AdultSex,
    /// Census-income surrogate, binary race attribute.
    AdultRace,
}

impl Preset {
    pub fn generator(self) -> GroupGaussian {
        match self {
            Preset::Default => GroupGaussian::default(),
            Preset::AdultSex => GroupGaussian::adult_sex(),
            Preset::AdultRace => GroupGaussian::adult_race(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: SourceKind,
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub features: Vec<String>,
    pub sensitive: Option<String>,
    pub label: Option<String>,
    #[serde(default)]
    pub label_encoding: LabelEncoding,
    pub sensitive_values: Option<Vec<String>>,
    pub preset: Option<Preset>,
    /// Number of synthetic rows.
    pub n: Option<usize>,
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub lambdas: Vec<f64>,
    pub repetitions: usize,
    pub test_frac: f64,
    pub train_frac: f64,
    pub mode: ResampleMode,
    /// Swap probes per λ for uniform stability (sweep) or certification.
    pub probes: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        let p = Protocol::default();
        ProtocolConfig {
            lambdas: vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
            repetitions: p.repetitions,
            test_frac: p.test_frac,
            train_frac: p.train_frac,
            mode: p.mode,
            probes: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossName {
    Hinge,
    Logistic,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Linear,
    GaussianRbf,
    Multiquadric,
    InverseMultiquadric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessName {
    Covariance,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub loss: LossName,
    /// Score bound `B` for the squared loss.
    pub squared_bound: Option<f64>,
    pub kernel: KernelName,
    /// Shape constant of the multiquadric kernels.
    pub kernel_c: Option<f64>,
    pub fairness: FairnessName,
    pub threshold: f64,
    pub mu: f64,
    pub mode: ConstraintMode,
    pub representation: Representation,
    pub max_iters: usize,
    pub step_size: f64,
    pub tol: f64,
    pub penalty_growth: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            loss: LossName::Logistic,
            squared_bound: None,
            kernel: KernelName::Linear,
            kernel_c: None,
            fairness: FairnessName::Covariance,
            threshold: t.fairness.threshold,
            mu: 1.0,
            mode: t.mode,
            representation: t.representation,
            max_iters: t.max_iters,
            step_size: t.step_size,
            tol: t.tol,
            penalty_growth: t.penalty_growth,
        }
    }
}

impl TrainSection {
    pub fn to_config(&self, lambda: f64, seed: u64) -> Result<TrainConfig> {
        let loss = match self.loss {
            LossName::Hinge => LossSpec::Hinge,
            LossName::Logistic => LossSpec::Logistic,
            LossName::Squared => LossSpec::Squared {
                bound: self.squared_bound,
            },
        };
        let c = || {
            self.kernel_c
                .ok_or_else(|| CliError::Config("multiquadric kernels need `kernel_c`".into()))
        };
        let kernel = match self.kernel {
            KernelName::Linear => KernelSpec::Linear,
            KernelName::GaussianRbf => KernelSpec::GaussianRbf,
            KernelName::Multiquadric => KernelSpec::Multiquadric { c: c()? },
            KernelName::InverseMultiquadric => KernelSpec::InverseMultiquadric { c: c()? },
        };
        let fairness = match self.fairness {
            FairnessName::Covariance => FairnessSpec {
                kind: FairnessKind::CovarianceParity,
                threshold: self.threshold,
                mu: self.mu,
            },
            FairnessName::None => FairnessSpec::none(),
        };
        let cfg = TrainConfig {
            loss,
            kernel,
            lambda,
            fairness,
            mode: self.mode,
            representation: self.representation,
            max_iters: self.max_iters,
            step_size: self.step_size,
            tol: self.tol,
            penalty_growth: self.penalty_growth,
            seed,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|source| CliError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = &cfg.data.path {
            if p.is_relative() {
                cfg.data.path = Some(base.join(p));
            }
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.protocol;
        if p.lambdas.is_empty() {
            return Err(CliError::Config("lambda grid is empty".into()));
        }
        if let Some(l) = p.lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(CliError::Config(format!("lambda {l} must be nonnegative")));
        }
        self.protocol(0).validate().map_err(|e| CliError::Config(e.to_string()))?;
        for &l in &p.lambdas {
            self.train.to_config(l, self.seed)?;
        }
        let d = &self.data;
        match d.source {
            SourceKind::Csv => {
                if d.path.is_none() || d.sensitive.is_none() || d.label.is_none() || d.features.is_empty() {
                    return Err(CliError::Config(
                        "csv data needs `path`, `features`, `sensitive` and `label`".into(),
                    ));
                }
                if d.preset.is_some() || d.n.is_some() {
                    return Err(CliError::Config("`preset` and `n` apply to synthetic data only".into()));
                }
            }
            SourceKind::Synthetic => {
                if d.preset.is_none() || d.n.is_none() {
                    return Err(CliError::Config("synthetic data needs `preset` and `n`".into()));
                }
                if d.path.is_some() || !d.features.is_empty() || d.sensitive.is_some() || d.label.is_some() {
                    return Err(CliError::Config("csv schema keys do not apply to synthetic data".into()));
                }
            }
        }
        Ok(())
    }

    pub fn protocol(&self, probes: usize) -> Protocol {
        Protocol {
            test_frac: self.protocol.test_frac,
            train_frac: self.protocol.train_frac,
            repetitions: self.protocol.repetitions,
            mode: self.protocol.mode,
            probes,
            seed: self.seed,
        }
    }

    pub fn schema(&self) -> Option<Schema> {
        Some(Schema {
            features: self.data.features.clone(),
            sensitive: self.data.sensitive.clone()?,
            label: self.data.label.clone()?,
            label_encoding: self.data.label_encoding,
            sensitive_values: self.data.sensitive_values.clone(),
        })
    }

    /// Loads or generates the dataset, normalized when configured. Returns
    /// it with the scale factor applied (1 without normalization).
    pub fn dataset(&self) -> Result<(Dataset, f64)> {
        let raw = match self.data.source {
            SourceKind::Csv => {
                let path = self.data.path.as_ref().ok_or_else(|| CliError::Config("missing data path".into()))?;
                let schema = self.schema().ok_or_else(|| CliError::Config("incomplete csv schema".into()))?;
                load_csv(path, &schema)?.dataset
            }
            SourceKind::Synthetic => {
                let (preset, n) = match (self.data.preset, self.data.n) {
                    (Some(p), Some(n)) => (p, n),
                    _ => return Err(CliError::Config("synthetic data needs `preset` and `n`".into())),
                };
                preset.generator().dataset(n, &mut rng(self.seed, Stream::Synthetic, 0))?
            }
        };
        if raw.is_empty() {
            return Err(CliError::Data("dataset has no rows".into()));
        }
        if self.data.normalize {
            normalize(&raw)
        } else {
            Ok((raw, 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|source| CliError::Toml {
            path: "inline".into(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    const SYNTH: &str = "[data]\nsource = \"synthetic\"\npreset = \"adult_race\"\nn = 500\n";

    #[test]
    fn defaults_mirror_the_reference_protocol() {
        let cfg = parse(SYNTH).unwrap();
        assert_eq!(cfg.protocol.lambdas, vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05]);
        assert_eq!(cfg.protocol.repetitions, 50);
        assert_eq!(cfg.protocol.test_frac, 0.2);
        assert!(cfg.data.normalize);
        let t = cfg.train.to_config(0.01, 0).unwrap();
        assert_eq!(t.loss, LossSpec::Logistic);
        assert_eq!(t.fairness.threshold, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse(&format!("{SYNTH}[protocol]\nlambda = [0.1]\n")).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::CONFIG);
        assert!(e.to_string().contains("lambda"), "{e}");
        assert!(parse(&format!("seeed = 1\n{SYNTH}")).is_err());
        assert!(parse(&format!("{SYNTH}[train]\nkernel = \"polynomial\"\n")).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for extra in [
            "[protocol]\nlambdas = []\n",
            "[protocol]\nrepetitions = 0\n",
            "[protocol]\nlambdas = [-0.1]\n",
            "[train]\ntol = 0.0\n",
            "[train]\nkernel = \"multiquadric\"\n",
        ] {
            let e = parse(&format!("{SYNTH}{extra}")).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{extra}: {e}");
        }
        let e = parse("[data]\nsource = \"csv\"\npath = \"x.csv\"\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn synthetic_dataset_is_normalized() {
        let cfg = parse(SYNTH).unwrap();
        let (d, factor) = cfg.dataset().unwrap();
        assert_eq!(d.len(), 500);
        assert!(factor > 0.0 && factor < 1.0);
        let max = d.features().map(|x| x.iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }
}
