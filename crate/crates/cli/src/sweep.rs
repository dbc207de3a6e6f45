//! λ sweeps, report tables and the stab-vs-λ plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use stablefair::lab::bounds::{norm_gap_bound, stability_bound_rkhs};
use stablefair::lab::stability::PoolSampler;
use stablefair::lab::{empirical_uniform_stability, run_stability_suite, BoundInputs, StabilityReport};
use stablefair::data::split;
use stablefair::Dataset;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TABLE_FILE: &str = "table.csv";
pub const PLOT_FILE: &str = "stab.svg";
pub const REPORT_FILE: &str = "reports.json";
pub const CERTIFICATE_FILE: &str = "certificate.csv";

/// Columns of the sweep table, in order.
pub const TABLE_COLUMNS: [&str; 8] = [
    "lambda",
    "acc_mean",
    "acc_std",
    "gamma_mean",
    "gamma_std",
    "stab",
    "beta_hat",
    "beta_bound",
];

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reports: Vec<StabilityReport>,
    pub table: PathBuf,
    pub plot: PathBuf,
}

/// Runs the protocol at every λ of the grid on `data`.
///
/// Uniform stability is probed only at λ > 0; its columns stay empty at
/// λ = 0.
pub fn sweep_reports(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<StabilityReport>> {
    cfg.protocol
        .lambdas
        .iter()
        .map(|&lambda| {
            let train = cfg.train.to_config(lambda, cfg.seed)?;
            let probes = if lambda > 0.0 { cfg.protocol.probes } else { 0 };
            Ok(run_stability_suite(data, &train, &cfg.protocol(probes))?)
        })
        .collect()
}

/// Runs the sweep and writes the table, the plot and the full reports into
/// `out`. Fails with a non-convergence error after writing when any
/// training run stopped short of tolerance.
pub fn run_sweep(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<SweepOutput> {
    let reports = sweep_reports(cfg, data)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let table = out.join(TABLE_FILE);
    write(&table, &render_table(&reports))?;
    let plot = out.join(PLOT_FILE);
    let label = format!("{:?}", cfg.train.mode).to_lowercase();
    write(&plot, &render_plot(&[(label.as_str(), &reports)]))?;
    let json = out.join(REPORT_FILE);
    let body = serde_json::to_string_pretty(&reports).map_err(|source| CliError::Json {
        path: json.clone(),
        source,
    })?;
    write(&json, &body)?;

    let unconverged: usize = reports.iter().map(|r| r.unconverged).sum();
    if unconverged > 0 {
        return Err(CliError::NonConvergence(format!(
            "{unconverged} training runs stopped before reaching tolerance; results written to {}",
            out.display()
        )));
    }
    Ok(SweepOutput { reports, table, plot })
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| CliError::io(path, e))
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn render_table(reports: &[StabilityReport]) -> String {
    let mut s = TABLE_COLUMNS.join(",");
    s.push('\n');
    for r in reports {
        let row = [
            r.lambda.to_string(),
            r.acc_mean.to_string(),
            r.acc_std.to_string(),
            r.gamma_mean.to_string(),
            r.gamma_std.to_string(),
            cell(r.stab),
            cell(r.beta_hat),
            cell(r.beta_bound),
        ];
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// SVG line plot of stab against λ, one series per entry.
pub fn render_plot(series: &[(&str, &[StabilityReport])]) -> String {
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, rs)| rs.iter().filter_map(|r| r.stab.map(|s| (r.lambda, s))).collect())
        .collect();
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let y1 = 5.0 * nice_step(y1 * 1.05 / 5.0);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / y1 * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), t * y1);
        let (x, y) = (px(xv), py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">stab</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (k, ((name, _), pts)) in series.iter().zip(&points).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        if !path.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            right - 110.0,
            right - 90.0,
            right - 85.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Smallest `{1, 2, 5}·10ᵏ` that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let base = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * base)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Uniform-stability certificate at one λ.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Certificate {
    pub lambda: f64,
    pub n: usize,
    pub probes: usize,
    pub beta_hat: f64,
    pub beta_bound: f64,
    pub norm_gap: f64,
    pub norm_gap_bound: f64,
    pub allowance: f64,
    pub passed: bool,
}

/// Splits `data` by the protocol fractions, then for each λ measures
/// uniform stability on the training split with replacements drawn from
/// the unused remainder and the test split as evaluation set, and compares
/// against the closed-form bounds plus solver allowance.
pub fn certify(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<Certificate>> {
    if let Some(l) = cfg.protocol.lambdas.iter().find(|&&l| l == 0.0) {
        return Err(CliError::Config(format!("cannot certify at lambda = {l}")));
    }
    if cfg.protocol.probes == 0 {
        return Err(CliError::Config("certification needs probes >= 1".into()));
    }
    let (train_set, test) = split(data, cfg.protocol.test_frac, cfg.protocol.train_frac, cfg.seed)?;
    let pool = PoolSampler::new(test.clone())?;
    cfg.protocol
        .lambdas
        .iter()
        .map(|&lambda| {
            let tc = cfg.train.to_config(lambda, cfg.seed)?;
            let est = empirical_uniform_stability(&train_set, &tc, cfg.protocol.probes, &pool, &test, cfg.seed)?;
            let inp = BoundInputs::new(est.sigma, est.kappa_sq, lambda, train_set.len());
            let beta_bound = stability_bound_rkhs(&inp)?;
            let gap_bound = norm_gap_bound(&inp)?;
            let passed = est
                .probes
                .iter()
                .all(|p| p.beta <= beta_bound + p.allowance && p.norm_gap <= gap_bound + p.allowance);
            Ok(Certificate {
                lambda,
                n: train_set.len(),
                probes: est.probes.len(),
                beta_hat: est.beta_hat,
                beta_bound,
                norm_gap: est.norm_gap,
                norm_gap_bound: gap_bound,
                allowance: est.allowance,
                passed,
            })
        })
        .collect()
}

pub fn write_certificates(path: &Path, certs: &[Certificate]) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for c in certs {
        w.serialize(c).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(lambda: f64, stab: Option<f64>, beta: Option<f64>) -> StabilityReport {
        StabilityReport {
            lambda,
            repetitions: 3,
            train_size: 10,
            test_size: 5,
            acc_mean: 0.5,
            acc_std: 0.25,
            gamma_mean: 0.75,
            gamma_std: 0.125,
            stab,
            gen_gap: 0.0,
            unconverged: 0,
            beta_hat: beta,
            beta_bound: beta.map(|b| 2.0 * b),
            norm_gap: beta,
            allowance: beta.map(|_| 0.0),
        }
    }

    #[test]
    fn table_leaves_absent_cells_empty() {
        let t = render_table(&[report(0.0, Some(3.5), None), report(0.01, None, Some(0.25))]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "lambda,acc_mean,acc_std,gamma_mean,gamma_std,stab,beta_hat,beta_bound");
        assert_eq!(lines[1], "0,0.5,0.25,0.75,0.125,3.5,,");
        assert_eq!(lines[2], "0.01,0.5,0.25,0.75,0.125,,0.25,0.5");
    }

    #[test]
    fn plot_has_one_marker_per_defined_point() {
        let rs = [report(0.0, Some(4.0), None), report(0.02, Some(2.0), None), report(0.05, None, None)];
        let svg = render_plot(&[("constrained", &rs)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("constrained"));
    }

    #[test]
    fn ticks_are_compact() {
        assert_eq!(tick(0.0), "0");
        assert_eq!(tick(0.05), "0.05");
        assert_eq!(tick(12.5), "12.5");
        assert_eq!(nice_step(4.3), 5.0);
        assert_eq!(nice_step(0.031), 0.05);
        assert_eq!(nice_step(2.0), 2.0);
    }
}
