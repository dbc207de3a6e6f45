//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;
use stablefair::data::{normalize_max_norm, scale_features, Sample};
use stablefair::fairness::statistical_rate;
use stablefair::lab::bounds::{excess_risk_bound, norm_gap_bound, optimal_lambda, stability_bound_rkhs};
use stablefair::lab::bregman::{bregman, Quadratic, SquaredNorm};
use stablefair::lab::metrics::{mean_std, stab_metric};
use stablefair::lab::stability::GeneratorSampler;
use stablefair::lab::{
    empirical_uniform_stability, generalization_gap, run_stability_suite, BoundInputs, GroupGaussian, Protocol,
    StabilityReport,
};
use stablefair::seed::{rng, Stream};
use stablefair::solver::norm_path;
use stablefair::{train, Classifier, Dataset, KernelSpec, Label, LinearClassifier, LossSpec, TrainConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Training set and evaluation set from the balanced two-group law, both
/// scaled by the factor that brings their union to unit max-norm.
fn population(n: usize, n_eval: usize, seed: u64) -> (Dataset, Dataset, f64) {
    let gen = GroupGaussian::default();
    let s = gen.dataset(n, &mut rng(seed, Stream::Synthetic, 0)).unwrap();
    let e = gen.dataset(n_eval, &mut rng(seed, Stream::Synthetic, 1)).unwrap();
    let (_, factor) = normalize_max_norm(&s.concat(&e).unwrap()).unwrap();
    (scale_features(&s, factor).unwrap(), scale_features(&e, factor).unwrap(), factor)
}

fn stability_config(lambda: f64) -> TrainConfig {
    TrainConfig {
        loss: LossSpec::Logistic,
        kernel: KernelSpec::Linear,
        lambda,
        ..TrainConfig::default()
    }
}

/// Mean per-probe β over several datasets of size `n`.
fn mean_beta(n: usize, lambda: f64, datasets: u64, probes: usize) -> f64 {
    let mut betas = Vec::new();
    for k in 0..datasets {
        let (s, e, factor) = population(n, 500, 1000 + k);
        let sampler = GeneratorSampler {
            generator: GroupGaussian::default(),
            scale: factor,
        };
        let est = empirical_uniform_stability(&s, &stability_config(lambda), probes, &sampler, &e, k).unwrap();
        betas.extend(est.probes.iter().map(|p| p.beta));
    }
    mean_std(&betas).0
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let n = 200;
    let (s, e, factor) = population(n, 500, 1);
    let sampler = GeneratorSampler {
        generator: GroupGaussian::default(),
        scale: factor,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [0.05, 0.1] {
        let est = match empirical_uniform_stability(&s, &stability_config(lambda), 20, &sampler, &e, 7) {
            Ok(est) => est,
            Err(err) => return outcome(false, format!("λ={lambda}: {err}")),
        };
        let inp = BoundInputs::new(est.sigma, est.kappa_sq, lambda, n);
        let beta = stability_bound_rkhs(&inp).unwrap();
        let gap = norm_gap_bound(&inp).unwrap();
        let ok = est
            .probes
            .iter()
            .all(|p| p.beta <= beta + p.allowance && p.norm_gap <= gap + p.allowance);
        pass &= ok;
        parts.push(format!(
            "λ={lambda}: max β̂={:.3e} ≤ {:.3e}, max ‖g−gⁱ‖={:.3e} ≤ {:.3e} (κ²={:.4}, allowance {:.1e})",
            est.beta_hat, beta, est.norm_gap, gap, est.kappa_sq, est.allowance
        ));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let base = mean_beta(200, 0.05, 5, 20);
    let double_lambda = mean_beta(200, 0.1, 5, 20);
    let double_n = mean_beta(400, 0.05, 5, 20);
    let r_lambda = base / double_lambda;
    let r_n = base / double_n;
    let band = 1.3..=3.0;
    outcome(
        band.contains(&r_lambda) && band.contains(&r_n),
        format!("mean β̂ ratio for 2λ: {r_lambda:.3}, for 2N: {r_n:.3} (band [1.3, 3.0])"),
    )
}

/// Scores on the grid `k/1024`, where the hinge and squared losses are
/// computed without rounding.
fn dyadic<R: Rng>(r: &mut R, max: f64) -> f64 {
    let k = (max * 1024.0) as i64;
    r.random_range(-k..=k) as f64 / 1024.0
}

fn criterion_3() -> Outcome {
    let mut r = rng(3, Stream::ClassifierSample, 0);
    let cases: [(LossSpec, f64, f64); 4] = [
        (LossSpec::Hinge, 1.0, 8.0),
        (LossSpec::Logistic, 1.0, 8.0),
        (LossSpec::ZeroOne, 0.5, 1.0),
        (LossSpec::Squared { bound: Some(2.0) }, 6.0, 2.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (loss, expected_sigma, range) in cases {
        let sigma = loss.admissibility().unwrap();
        let mut violations = 0;
        for _ in 0..10_000 {
            let y = if r.random::<bool>() { Label::Positive } else { Label::Negative };
            let (s, t) = if loss == LossSpec::ZeroOne {
                let sign = |b: bool| if b { 1.0 } else { -1.0 };
                (sign(r.random()), sign(r.random()))
            } else {
                (dyadic(&mut r, range), dyadic(&mut r, range))
            };
            let lhs = (loss.loss(s, y).unwrap() - loss.loss(t, y).unwrap()).abs();
            if lhs > sigma * (s - t).abs() {
                violations += 1;
            }
        }
        pass &= violations == 0 && sigma == expected_sigma;
        parts.push(format!("{}: σ={sigma}, {violations} violations", loss.name()));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4, Stream::ClassifierSample, 1);
    let mut mismatches = 0;
    let instances = 2000;
    for _ in 0..instances {
        // statistical rate
        let m = r.random_range(1..=20);
        let preds: Vec<bool> = (0..m).map(|_| r.random()).collect();
        let groups: Vec<usize> = (0..m).map(|_| r.random_range(0..2)).collect();
        let labels: Vec<Label> = preds.iter().map(|&p| if p { Label::Positive } else { Label::Negative }).collect();
        let count = |g: usize| {
            let total = groups.iter().filter(|&&z| z == g).count();
            let pos = preds.iter().zip(&groups).filter(|(&p, &z)| p && z == g).count();
            (pos, total)
        };
        let ((a0, n0), (a1, n1)) = (count(0), count(1));
        let got = statistical_rate(&labels, &groups);
        let ok = if n0 == 0 || n1 == 0 {
            got.is_err()
        } else {
            let (p0, p1) = (a0 as f64 / n0 as f64, a1 as f64 / n1 as f64);
            let want = match (a0, a1) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 0.0,
                _ => (p0 / p1).min(p1 / p0),
            };
            got == Ok(want)
        };
        mismatches += usize::from(!ok);

        // stab on integer thresholds
        let k = r.random_range(2..=4);
        let thresholds: Vec<i32> = (0..k).map(|_| r.random_range(-5..=5)).collect();
        let xs: Vec<i32> = (0..m).map(|_| r.random_range(-6..=6)).collect();
        let test = Dataset::from_samples(
            xs.iter()
                .enumerate()
                .map(|(i, &x)| Sample::new(vec![x as f64, 1.0], i % 2, Label::Positive).unwrap())
                .collect(),
        )
        .unwrap();
        let classifiers: Vec<Classifier> = thresholds
            .iter()
            .map(|&t| LinearClassifier::new(vec![1.0, -(t as f64)]).unwrap().into())
            .collect();
        let mut total = 0usize;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    total += xs.iter().filter(|&&x| (x >= thresholds[i]) != (x >= thresholds[j])).count();
                }
            }
        }
        let want = total as f64 / (k * (k - 1)) as f64;
        mismatches += usize::from(stab_metric(&classifiers, &test).unwrap() != want);
    }
    outcome(
        mismatches == 0,
        format!("{instances} instances each for statistical rate and stab, {mismatches} mismatches"),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng(5, Stream::ClassifierSample, 2);
    let mut min_quadratic = f64::INFINITY;
    let mut max_identity_err = 0.0f64;
    for _ in 0..1000 {
        let d = r.random_range(1..=6);
        let mut v = |scale: f64| -> Vec<f64> { (0..d).map(|_| r.random_range(-scale..scale)).collect() };
        let m: Vec<Vec<f64>> = (0..d).map(|_| v(2.0)).collect();
        let b = v(3.0);
        let f = v(5.0);
        let g = v(5.0);
        let q = Quadratic::gram_of(&m, b, 0.5).unwrap();
        min_quadratic = min_quadratic.min(bregman(&q, &f, &g).unwrap());
        let exact: f64 = f.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum();
        let got = bregman(&SquaredNorm { dim: d }, &f, &g).unwrap();
        max_identity_err = max_identity_err.max((got - exact).abs());
    }
    outcome(
        min_quadratic >= -1e-9 && max_identity_err <= 1e-9,
        format!("min divergence {min_quadratic:.3e} (≥ −1e−9), max |d − ‖f−f′‖²| {max_identity_err:.1e} (≤ 1e−9)"),
    )
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let lambda = 0.1;
    let n = 200;
    let gaps: Vec<f64> = (0..50)
        .map(|seed| {
            let (s, holdout, _) = population(n, 2000, 600 + seed);
            let f = train(&s, &stability_config(lambda)).unwrap().classifier;
            generalization_gap(&f, &s, &holdout, &LossSpec::Logistic).unwrap()
        })
        .collect();
    let (mean, std) = mean_std(&gaps);
    let se = std / (gaps.len() as f64).sqrt();
    let bound = stability_bound_rkhs(&BoundInputs::new(1.0, 1.0, lambda, n)).unwrap();
    let elapsed = t.elapsed();
    outcome(
        mean <= bound + 2.0 * se && elapsed < Duration::from_secs(180),
        format!(
            "mean gap {mean:.4} ≤ {bound} + 2·{se:.4} over 50 seeds; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let (s, _, _) = population(200, 1, 8);
    let lambdas = [0.01, 0.02, 0.05, 0.1, 1.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for kernel in [KernelSpec::Linear, KernelSpec::GaussianRbf] {
        let cfg = TrainConfig {
            kernel,
            ..TrainConfig::default()
        };
        let path = norm_path(&s, &cfg, &lambdas).unwrap();
        let ok = path.windows(2).all(|w| w[1].1 <= w[0].1 + 10.0 * cfg.tol);
        pass &= ok;
        let norms: Vec<String> = path.iter().map(|(_, n)| format!("{n:.4}")).collect();
        parts.push(format!("{kernel:?}: ‖f_λ‖ = [{}]", norms.join(", ")));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let a = stability_bound_rkhs(&BoundInputs::new(1.0, 1.0, 0.01, 100)).unwrap();
    let inp = BoundInputs::new(1.0, 1.0, 1.0, 100).with_b(1.0);
    let l = optimal_lambda(&inp).unwrap();
    let b = excess_risk_bound(&BoundInputs { lambda: l, ..inp }).unwrap();
    outcome(
        a == 1.0 && l == 0.1 && b == 0.2,
        format!("stability bound {a}, optimal λ {l}, excess-risk bound there {b}"),
    )
}

struct TrendResult {
    accuracy_drop: f64,
    gamma_std: Vec<f64>,
    stab: Vec<f64>,
    pass: [bool; 3],
}

fn trend(gen: GroupGaussian, n: usize, seed: u64) -> TrendResult {
    let s = gen.dataset(n, &mut rng(seed, Stream::Synthetic, 0)).unwrap();
    let (s, _) = normalize_max_norm(&s).unwrap();
    let reports: Vec<StabilityReport> = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05]
        .iter()
        .map(|&lambda| {
            let cfg = TrainConfig {
                lambda,
                ..TrainConfig::default()
            };
            let p = Protocol {
                repetitions: 10,
                seed,
                ..Protocol::default()
            };
            run_stability_suite(&s, &cfg, &p).unwrap()
        })
        .collect();
    let accuracy_drop = reports[0].acc_mean - reports[5].acc_mean;
    let gamma_std: Vec<f64> = reports.iter().map(|r| r.gamma_std).collect();
    let stab: Vec<f64> = reports.iter().map(|r| r.stab.unwrap()).collect();
    let pass = [
        accuracy_drop <= 0.02,
        gamma_std[1..].iter().all(|&g| g < gamma_std[0]),
        stab[1] < stab[0] || stab[2] < stab[0],
    ];
    TrendResult {
        accuracy_drop,
        gamma_std,
        stab,
        pass,
    }
}

fn describe(t: &TrendResult) -> String {
    let fmt = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.p$}")).collect::<Vec<_>>().join(", ");
    format!(
        "(a) accuracy drop {:.4} {}; (b) γ std [{}] {}; (c) stab [{}] {}",
        t.accuracy_drop,
        if t.pass[0] { "ok" } else { "FAIL" },
        fmt(&t.gamma_std, 4),
        if t.pass[1] { "ok" } else { "FAIL" },
        fmt(&t.stab, 2),
        if t.pass[2] { "ok" } else { "FAIL" },
    )
}

const ADULT_ROWS: usize = 45_222;

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let sex = trend(GroupGaussian::adult_sex(), ADULT_ROWS, 0);
    let elapsed = t.elapsed();
    outcome(
        sex.pass.iter().all(|&p| p) && elapsed < Duration::from_secs(600),
        format!(
            "sex surrogate, N={ADULT_ROWS}, n=10: {}; {:.1}s",
            describe(&sex),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stability-bound compliance", criterion_1),
        ("scaling law", criterion_2),
        ("admissibility", criterion_3),
        ("oracle equivalence", criterion_4),
        ("Bregman identity", criterion_5),
        ("generalization", criterion_6),
        ("regularization path", criterion_7),
        ("bound calculators", criterion_8),
        ("trend reproduction", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }

    // not gated: the race surrogate's γ spread at λ = 0 is already small
    let race = trend(GroupGaussian::adult_race(), ADULT_ROWS, 0);
    println!("INFO 9. race surrogate, N={ADULT_ROWS}, n=10: {}", describe(&race));

    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
