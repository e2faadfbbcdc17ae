use icbench_core::stats::{
    bootstrap_ci, chisq_sf, fit_logistic_traced, fit_model, log_likelihood, lrt, pearson_r,
    GlmmOptions, LogisticOptions, ModelFrame, ModelSpec,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn logistic_data() -> impl Strategy<Value = (DMatrix<f64>, Vec<f64>)> {
    (40usize..160, 1usize..4).prop_flat_map(|(n, k)| {
        (
            proptest::collection::vec(-2.0f64..2.0, n * k),
            proptest::collection::vec(0.0f64..1.0, n),
            proptest::collection::vec(-1.0f64..1.0, k + 1),
        )
            .prop_map(move |(xs, us, beta)| {
                let mut x = DMatrix::zeros(n, k + 1);
                let mut y = Vec::with_capacity(n);
                for i in 0..n {
                    x[(i, 0)] = 1.0;
                    let mut eta = beta[0];
                    for j in 0..k {
                        x[(i, j + 1)] = xs[i * k + j];
                        eta += beta[j + 1] * xs[i * k + j];
                    }
                    y.push(f64::from(u8::from(us[i] < 1.0 / (1.0 + (-eta).exp()))));
                }
                (x, y)
            })
    })
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("b{i}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn irls_never_decreases_likelihood((x, y) in logistic_data()) {
        let (_, trace) = fit_logistic_traced(&x, &y, &names(x.ncols()), &LogisticOptions::default()).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn score_vanishes_at_the_estimate((x, y) in logistic_data()) {
        let (fit, _) = fit_logistic_traced(&x, &y, &names(x.ncols()), &LogisticOptions::default()).unwrap();
        prop_assume!(fit.converged);
        let beta = DVector::from_vec(fit.coefficients.values.clone());
        let eta = &x * &beta;
        let resid: DVector<f64> = DVector::from_iterator(
            y.len(),
            eta.iter().zip(&y).map(|(e, yi)| yi - 1.0 / (1.0 + (-e).exp())),
        );
        let score = x.transpose() * resid;
        prop_assert!(score.amax() <= 1e-6, "score {}", score.amax());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences(
        (x, y) in logistic_data(),
        shift in proptest::collection::vec(-0.5f64..0.5, 4),
    ) {
        let p = x.ncols();
        let beta = DVector::from_iterator(p, shift.iter().copied().take(p));
        let eta = &x * &beta;
        let resid = DVector::from_iterator(
            y.len(),
            eta.iter().zip(&y).map(|(e, yi)| yi - 1.0 / (1.0 + (-e).exp())),
        );
        let analytic = x.transpose() * resid;
        for k in 0..p {
            let h = 1e-6;
            let mut up = beta.clone();
            up[k] += h;
            let mut dn = beta.clone();
            dn[k] -= h;
            let fd = (log_likelihood(&(&x * &up), &y) - log_likelihood(&(&x * &dn), &y)) / (2.0 * h);
            let scale = analytic[k].abs().max(1.0);
            prop_assert!((fd - analytic[k]).abs() <= 1e-4 * scale, "k={k}: {fd} vs {}", analytic[k]);
        }
    }

    #[test]
    fn interaction_z_ignores_level_sign_convention(
        seed_bits in proptest::collection::vec(0.0f64..1.0, 200),
        effect in -1.5f64..1.5,
    ) {
        let mut y = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, u) in seed_bits.iter().enumerate() {
            let ai = i % 2 == 0;
            let bi = (i / 2) % 2 == 0;
            let ca = if ai { 0.5 } else { -0.5 };
            let cb = if bi { 0.5 } else { -0.5 };
            let eta: f64 = 0.2 + effect * ca * cb;
            y.push(*u < 1.0 / (1.0 + (-eta).exp()));
            a.push(if ai { "p" } else { "n" });
            b.push(if bi { "p" } else { "n" });
        }
        let spec = ModelSpec::parse("y ~ a*b").unwrap();
        let mut f1 = ModelFrame::new();
        f1.add_binary("y", &y).unwrap().add_factor("a", "p", "n", &a).unwrap().add_factor("b", "p", "n", &b).unwrap();
        let mut f2 = ModelFrame::new();
        f2.add_binary("y", &y).unwrap().add_factor("a", "n", "p", &a).unwrap().add_factor("b", "p", "n", &b).unwrap();
        let opts = GlmmOptions::default();
        let z1 = fit_model(&spec, &f1, &opts).unwrap().z_values.get("a:b").unwrap();
        let z2 = fit_model(&spec, &f2, &opts).unwrap().z_values.get("a:b").unwrap();
        prop_assert!((z1.abs() - z2.abs()).abs() <= 1e-6 * z1.abs().max(1.0));
        prop_assert!((z1 + z2).abs() <= 1e-6 * z1.abs().max(1.0));
    }

    #[test]
    fn lrt_of_a_fit_against_itself_is_null((x, y) in logistic_data()) {
        let (fit, _) = fit_logistic_traced(&x, &y, &names(x.ncols()), &LogisticOptions::default()).unwrap();
        prop_assume!(fit.converged);
        let t = lrt(&fit, &fit).unwrap();
        prop_assert_eq!(t.chi_square, 0.0);
        prop_assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn bootstrap_interval_is_ordered_and_bounded(
        obs in proptest::collection::vec(any::<bool>(), 1..200),
        seed in any::<u64>(),
    ) {
        let (lo, hi) = bootstrap_ci(&obs, 200, 0.95, seed).unwrap();
        prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        prop_assert_eq!(bootstrap_ci(&obs, 200, 0.95, seed).unwrap(), (lo, hi));
    }

    #[test]
    fn chisq_tail_is_a_decreasing_probability(x in 0.0f64..200.0, dx in 0.0f64..5.0, df in 1u32..12) {
        let a = chisq_sf(x, df);
        let b = chisq_sf(x + dx, df);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn pearson_is_symmetric_and_bounded(
        pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let Ok(r) = pearson_r(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r.r));
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            prop_assert_eq!(r.r, pearson_r(&y, &x).unwrap().r);
        }
    }
}
