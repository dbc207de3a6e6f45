//! Command-line driver: CSV ingestion, experiment configs, λ sweeps with
//! report tables and plots, and stability certification.

pub mod config;
pub mod error;
pub mod ingest;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use stablefair::data::split;
use stablefair::fairness::statistical_rate;
use stablefair::lab::metrics::accuracy;
use stablefair::solver::empirical_risk;
use stablefair::{train, TrainResult};

pub use config::ExperimentConfig;
pub use error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "stablefair", version, about = "Stability-regularized fair classification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one classifier on the training split and save it.
    Train(Common),
    /// Score a saved classifier on the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Model file written by `train` (default: <out>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the repeated-split protocol over the λ grid.
    Sweep(Common),
    /// Measure uniform stability and compare it with the closed-form bounds.
    Certify(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated λ grid, overriding the config.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambda: Option<Vec<f64>>,
    /// Repetitions per λ, overriding the config.
    #[arg(long)]
    pub reps: Option<usize>,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(l) = &self.lambda {
            cfg.protocol.lambdas = l.clone();
        }
        if let Some(r) = self.reps {
            cfg.protocol.repetitions = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A trained classifier with the feature scale it expects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub lambda: f64,
    pub scale: f64,
    pub result: TrainResult,
}

pub const MODEL_FILE: &str = "model.json";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(c) => cmd_train(&c.resolve()?),
        Command::Evaluate { common, model } => {
            let cfg = common.resolve()?;
            let path = model.unwrap_or_else(|| cfg.out.join(MODEL_FILE));
            cmd_evaluate(&cfg, &path)
        }
        Command::Sweep(c) => cmd_sweep(&c.resolve()?),
        Command::Certify(c) => cmd_certify(&c.resolve()?),
    }
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<()> {
    let (data, scale) = cfg.dataset()?;
    let (train_set, test) = split(&data, cfg.protocol.test_frac, cfg.protocol.train_frac, cfg.seed)?;
    let lambda = cfg.protocol.lambdas[0];
    let tc = cfg.train.to_config(lambda, cfg.seed)?;
    let result = train(&train_set, &tc)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let path = cfg.out.join(MODEL_FILE);
    let model = ModelFile { lambda, scale, result };
    let body = serde_json::to_string_pretty(&model).map_err(|source| CliError::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;

    let f = &model.result.classifier;
    println!("lambda={lambda}");
    println!("train_size={}", train_set.len());
    println!("objective={}", model.result.objective_value);
    println!("stationarity_gap={}", model.result.stationarity_gap);
    println!("iterations={}", model.result.iterations);
    if let Some(c) = model.result.constraint_value {
        println!("constraint_value={c}");
    }
    println!("train_accuracy={}", accuracy(f, &train_set)?);
    println!("test_accuracy={}", accuracy(f, &test)?);
    println!("model={}", path.display());
    if !model.result.converged {
        return Err(CliError::NonConvergence(format!(
            "stationarity gap {} after {} iterations",
            model.result.stationarity_gap, model.result.iterations
        )));
    }
    Ok(())
}

fn cmd_evaluate(cfg: &ExperimentConfig, model_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(model_path).map_err(|e| CliError::io(model_path, e))?;
    let model: ModelFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: model_path.to_path_buf(),
        source,
    })?;
    let (data, scale) = cfg.dataset()?;
    if (scale - model.scale).abs() > 1e-12 * scale.abs().max(1.0) {
        return Err(CliError::Data(format!(
            "model expects feature scale {} but the configured data has scale {scale}",
            model.scale
        )));
    }
    let (_, test) = split(&data, cfg.protocol.test_frac, cfg.protocol.train_frac, cfg.seed)?;
    let f = &model.result.classifier;
    let preds = f.predictions(&test)?;
    let tc = cfg.train.to_config(model.lambda, cfg.seed)?;
    println!("test_size={}", test.len());
    println!("accuracy={}", accuracy(f, &test)?);
    println!("gamma={}", statistical_rate(&preds, &test.groups())?);
    println!("risk={}", empirical_risk(f, &test, &tc.loss)?);
    Ok(())
}

fn cmd_sweep(cfg: &ExperimentConfig) -> Result<()> {
    let (data, _) = cfg.dataset()?;
    let out = sweep::run_sweep(cfg, &data, &cfg.out)?;
    for r in &out.reports {
        println!(
            "lambda={} acc={:.4}({:.4}) gamma={:.4}({:.4}) stab={}",
            r.lambda,
            r.acc_mean,
            r.acc_std,
            r.gamma_mean,
            r.gamma_std,
            r.stab.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    println!("table={}", out.table.display());
    println!("plot={}", out.plot.display());
    Ok(())
}

fn cmd_certify(cfg: &ExperimentConfig) -> Result<()> {
    let (data, _) = cfg.dataset()?;
    let certs = sweep::certify(cfg, &data)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let path = cfg.out.join(sweep::CERTIFICATE_FILE);
    sweep::write_certificates(&path, &certs)?;
    for c in &certs {
        println!(
            "lambda={} beta_hat={:.3e} bound={:.3e} norm_gap={:.3e} bound={:.3e} allowance={:.1e} {}",
            c.lambda,
            c.beta_hat,
            c.beta_bound,
            c.norm_gap,
            c.norm_gap_bound,
            c.allowance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    println!("certificate={}", path.display());
    let failed: Vec<String> = certs.iter().filter(|c| !c.passed).map(|c| c.lambda.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::BoundViolated(format!("at lambda {}", failed.join(", "))))
    }
}
