use nalgebra::DMatrix;
use proptest::prelude::*;
use stablefair::kernel::Gram;
use stablefair::*;

fn kernels() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::Linear),
        Just(KernelSpec::GaussianRbf),
        (0.1f64..5.0).prop_map(|c| KernelSpec::Multiquadric { c }),
        (0.1f64..5.0).prop_map(|c| KernelSpec::InverseMultiquadric { c }),
    ]
}

fn psd_kernels() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::Linear),
        Just(KernelSpec::GaussianRbf),
        (0.1f64..5.0).prop_map(|c| KernelSpec::InverseMultiquadric { c }),
    ]
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim)
}

fn expansion(kernel: KernelSpec) -> impl Strategy<Value = (KernelClassifier, Vec<f64>)> {
    (1usize..8).prop_flat_map(move |m| {
        (
            prop::collection::vec(-2.0f64..2.0, m),
            prop::collection::vec(point(3), m),
            point(3),
        )
            .prop_map(move |(alpha, anchors, x)| (KernelClassifier::new(alpha, anchors, kernel).unwrap(), x))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reproducing_bound((f, x) in psd_kernels().prop_flat_map(expansion)) {
        let kxx = f.kernel().eval(&x, &x).unwrap();
        let bound = f.rkhs_norm_sq().unwrap().sqrt() * kxx.sqrt();
        prop_assert!(f.evaluate(&x).unwrap().abs() <= bound + 1e-9);
    }

    #[test]
    fn kernel_is_symmetric(k in kernels(), x in point(4), y in point(4)) {
        prop_assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
    }

    #[test]
    fn kappa_bounds_diagonal(k in kernels(), xs in prop::collection::vec(point(3), 1..10)) {
        let kappa_sq = k.kappa_sq(xs.iter().map(Vec::as_slice)).unwrap();
        for x in &xs {
            prop_assert!(k.eval(x, x).unwrap() <= kappa_sq * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gram_is_positive_semidefinite(k in psd_kernels(), xs in prop::collection::vec(point(3), 1..=8)) {
        let pts: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let g = Gram::new(&k, &pts).unwrap();
        let n = g.size();
        let m = DMatrix::from_fn(n, n, |i, j| g.get(i, j));
        let eig = m.symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&e| e >= -1e-8), "{eig:?}");
    }

    #[test]
    fn linear_expansion_collapses_to_weights((f, x) in expansion(KernelSpec::Linear)) {
        let beta = f.collapse_linear().unwrap();
        let a = f.evaluate(&x).unwrap();
        let b = beta.evaluate(&x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        let na = f.rkhs_norm_sq().unwrap();
        prop_assert!((na - beta.rkhs_norm_sq()).abs() <= 1e-10 * (1.0 + na));
    }

    #[test]
    fn rkhs_distance_is_a_norm_of_the_difference(
        (f, _) in expansion(KernelSpec::GaussianRbf),
        (g, _) in expansion(KernelSpec::GaussianRbf),
    ) {
        let f: Classifier = f.into();
        let g: Classifier = g.into();
        prop_assert!(f.rkhs_distance(&f).unwrap() <= 1e-6);
        let d = f.rkhs_distance(&g).unwrap();
        prop_assert!((d - g.rkhs_distance(&f).unwrap()).abs() <= 1e-9);
        prop_assert!(d <= f.rkhs_norm_sq().unwrap().sqrt() + g.rkhs_norm_sq().unwrap().sqrt() + 1e-9);
    }
}

fn losses() -> impl Strategy<Value = (LossSpec, f64)> {
    prop_oneof![
        Just((LossSpec::Hinge, f64::INFINITY)),
        Just((LossSpec::Logistic, f64::INFINITY)),
        (0.5f64..10.0).prop_map(|b| (LossSpec::Squared { bound: Some(b) }, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn admissibility_is_a_lipschitz_constant(
        (loss, b) in losses(),
        u in -1.0f64..1.0,
        v in -1.0f64..1.0,
        y in prop::bool::ANY,
    ) {
        let y = if y { Label::Positive } else { Label::Negative };
        let scale = if b.is_finite() { b } else { 20.0 };
        let (s, t) = (u * scale, v * scale);
        let sigma = loss.admissibility().unwrap();
        let lhs = (loss.loss(s, y).unwrap() - loss.loss(t, y).unwrap()).abs();
        prop_assert!(lhs <= sigma * (s - t).abs() * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn zero_one_admissibility_on_sign_outputs() {
    let sigma = LossSpec::ZeroOne.admissibility().unwrap();
    for y in [Label::Positive, Label::Negative] {
        for s in [-1.0, 1.0] {
            for t in [-1.0, 1.0] {
                let lhs = (LossSpec::ZeroOne.loss(s, y).unwrap() - LossSpec::ZeroOne.loss(t, y).unwrap()).abs();
                assert!(lhs <= sigma * (s - t) * (s - t).signum());
            }
        }
    }
}
