use majorant_newton::certify::order_ratios;
use majorant_newton::registry::{linear_density, problem};
use majorant_newton::{
    a_priori_bound, banach_inverse_bound, check_condition_h, compute_radii, example_model, generalized_model,
    holder_model, holder_radii, newton_solve, operator_norm, scalar_sequence, worst_case_instance, HolderParams,
    LipschitzDensity, NewtonOptions, PolySegment, RootFindOptions, SequenceOptions,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn holder_params() -> impl Strategy<Value = HolderParams> {
    (0.25f64..8.0, 0.2f64..=1.0).prop_map(|(k, p)| HolderParams::new(k, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_newton_map_is_nonpositive_and_contracts(params in holder_params(), frac in 0.001f64..0.999) {
        let m = holder_model(params);
        let t = frac * params.nu();
        prop_assert!(m.newton_map(t).unwrap() <= 0.0);
        let inside = frac * params.rho();
        prop_assert!(m.newton_map(inside).unwrap().abs() < inside);
    }

    #[test]
    fn numeric_radii_match_holder_closed_forms(params in holder_params()) {
        let kappa = 10.0 * params.uniqueness_radius();
        let numeric = compute_radii(&holder_model(params), kappa, &RootFindOptions::default()).unwrap();
        let closed = holder_radii(params, kappa).unwrap();
        prop_assert!((numeric.nu - closed.nu).abs() <= 1e-10 * closed.nu.max(1.0));
        prop_assert!((numeric.rho - closed.rho).abs() <= 1e-10 * closed.rho.max(1.0));
        prop_assert!((numeric.sigma - closed.sigma).abs() <= 1e-10 * closed.sigma.max(1.0));
        prop_assert!(numeric.rho_is_optimal && closed.rho_is_optimal);
    }

    #[test]
    fn holder_sequences_respect_a_priori_bound(params in holder_params(), frac in 0.01f64..0.99) {
        let m = holder_model(params);
        let t0 = frac * params.rho();
        let s = scalar_sequence(&m, t0, params.rho(), &SequenceOptions::default()).unwrap();
        prop_assert!(s.is_strictly_decreasing());
        if s.len() > 1 {
            for (k, &t) in s.t.iter().enumerate() {
                let bound = a_priori_bound(t0, s.t[1], params.p, k as u32).unwrap();
                prop_assert!(t <= bound * (1.0 + 1e-12), "k={} t={} bound={}", k, t, bound);
            }
        }
    }

    #[test]
    fn holder_sequences_have_decreasing_order_ratio(params in holder_params(), frac in 0.01f64..0.99) {
        let m = holder_model(params);
        let rho = params.rho();
        let s = scalar_sequence(&m, frac * rho, rho, &SequenceOptions::default()).unwrap();
        prop_assert!(s.is_strictly_decreasing());
        prop_assert_eq!(s.order_ratio_strictly_decreasing(), Some(true), "{:?}", s.ratio_order);
    }

    #[test]
    fn worst_case_cycles_at_rho(params in holder_params()) {
        let wc = worst_case_instance(&holder_model(params), &RootFindOptions::default()).unwrap();
        let x0 = DVector::from_element(1, wc.rho);
        let trace = newton_solve(&wc.problem, &x0, &NewtonOptions { max_iters: 2, ..Default::default() }).unwrap();
        prop_assert!((trace.iterates[2][0] - wc.rho).abs() <= 1e-10);
    }

    #[test]
    fn constant_density_reproduces_lipschitz_majorant(k in 0.1f64..10.0, frac in 0.0f64..1.0) {
        let gen = generalized_model(&LipschitzDensity::constant(k, 100.0).unwrap());
        let hold = holder_model(HolderParams::new(k, 1.0).unwrap());
        let t = frac * 10.0;
        prop_assert!((gen.f(t) - hold.f(t)).abs() <= 1e-12 * (1.0 + hold.f(t).abs()));
        prop_assert!((gen.fprime(t) - hold.fprime(t)).abs() <= 1e-12 * (1.0 + hold.fprime(t).abs()));
    }

    #[test]
    fn constant_density_rho_is_two_thirds_over_k(k in 0.1f64..10.0) {
        let gen = generalized_model(&LipschitzDensity::constant(k, 100.0 / k).unwrap());
        let r = compute_radii(&gen, 100.0 / k, &RootFindOptions::default()).unwrap();
        prop_assert!((r.rho - 2.0 / (3.0 * k)).abs() <= 1e-12);
    }

    #[test]
    fn cubic_density_integrals_match_refined_trapezoid(
        c in prop::collection::vec(0.0f64..2.0, 4),
        split in 0.2f64..0.8,
        t in 0.05f64..1.0,
    ) {
        // positive cubic on two segments, continuous at the split
        let seg_a = PolySegment { start: 0.0, end: split, coefficients: vec![1.0 + c[0], c[1], c[2], c[3]] };
        let at_split = seg_a.coefficients.iter().rev().fold(0.0, |acc, a| acc * split + a);
        let seg_b = PolySegment { start: split, end: 1.0, coefficients: vec![at_split - c[1] * split, c[1]] };
        let d = LipschitzDensity::piecewise(vec![seg_a, seg_b]).unwrap();
        let oracle = |g: &dyn Fn(f64) -> f64| {
            // Richardson-extrapolated trapezoid, per smooth piece of [0, t]
            let trap = |a: f64, b: f64, n: usize| {
                let h = (b - a) / n as f64;
                let inner: f64 = (1..n).map(|i| g(a + i as f64 * h)).sum();
                h * (0.5 * (g(a) + g(b)) + inner)
            };
            let piece = |a: f64, b: f64| {
                let (coarse, fine) = (trap(a, b, 1 << 12), trap(a, b, 1 << 13));
                fine + (fine - coarse) / 3.0
            };
            if t <= split { piece(0.0, t) } else { piece(0.0, split) + piece(split, t) }
        };
        let int = oracle(&|u| d.value(u));
        let mom = oracle(&|u| u * d.value(u));
        prop_assert!((d.integral(t) - int).abs() <= 1e-10, "{} vs {}", d.integral(t), int);
        prop_assert!((d.moment(t) - mom).abs() <= 1e-10, "{} vs {}", d.moment(t), mom);
    }

    #[test]
    fn affine_invariance_on_poly2d(
        entries in prop::collection::vec(-1.0f64..1.0, 4),
        angle in 0.0f64..std::f64::consts::TAU,
        frac in 0.05f64..0.95,
    ) {
        let p = problem("poly2d").unwrap();
        // well conditioned: 2I plus a perturbation of spectral norm < 2
        let a = DMatrix::from_row_slice(2, 2, &[2.0 + entries[0], entries[1], entries[2], 2.0 + entries[3]]);
        prop_assume!(a.clone().svd(false, false).singular_values.min() > 0.2);
        let composed = p.composed_with(a);
        let x0 = DVector::from_vec(vec![angle.cos(), angle.sin()]) * (frac * 0.4714);
        let opts = NewtonOptions::default();
        let base = newton_solve(&p, &x0, &opts).unwrap();
        let other = newton_solve(&composed, &x0, &opts).unwrap();
        let n = base.iterates.len().min(other.iterates.len());
        for k in 0..n {
            let scale = base.iterates[k].amax().max(if k > 0 { base.iterates[k - 1].amax() } else { 0.0 });
            for i in 0..2 {
                let gap = (base.iterates[k][i] - other.iterates[k][i]).abs();
                prop_assert!(gap <= 1e-10 * scale.max(f64::MIN_POSITIVE), "k={} gap={}", k, gap);
            }
        }
    }
}

#[test]
fn banach_bound_dominates_actual_inverse_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let e = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let scale = rng.random_range(0.0..0.9) / operator_norm(&e).unwrap().max(1e-300);
        let b = DMatrix::identity(n, n) + e * scale;
        let bound = banach_inverse_bound(&b).unwrap();
        let actual = operator_norm(&b.try_inverse().unwrap()).unwrap();
        assert!(actual <= bound * (1.0 + 1e-12), "{actual} > {bound}");
    }
}

#[test]
fn radii_hold_on_a_million_point_grid() {
    let opts = RootFindOptions::default();
    let models = [
        holder_model(HolderParams::new(2.0, 0.5).unwrap()),
        example_model("exp_quadratic", None).unwrap(),
        example_model("power_5_3", None).unwrap(),
        generalized_model(&linear_density()),
    ];
    for m in &models {
        let r = compute_radii(m, 10.0_f64.min(m.domain()), &opts).unwrap();
        let n = 1_000_000;
        for i in 1..n {
            let frac = i as f64 / n as f64;
            let t = frac * r.nu;
            assert!(m.fprime(t) < 0.0, "{}: f'({t}) >= 0", m.name());
            let t = frac * r.rho;
            assert!(m.contraction_ratio(t) < 1.0, "{}: h({t}) >= 1", m.name());
            let t = frac * r.sigma;
            assert!(m.f(t) < 0.0, "{}: f({t}) >= 0", m.name());
        }
    }
}

#[test]
fn newton_matches_power_5_3_closed_form_per_step() {
    let p = problem("power_5_3_1d").unwrap();
    let trace = newton_solve(&p, &DVector::from_element(1, 0.1), &NewtonOptions::default()).unwrap();
    for w in trace.iterates.windows(2) {
        let x = w[0][0];
        let closed = 2.0 * x.signum() * x.abs().powf(5.0 / 3.0) / (5.0 * x.abs().powf(2.0 / 3.0) - 3.0);
        assert!((w[1][0] - closed).abs() <= 1e-13 * x.abs(), "x={x}");
    }
}

#[test]
fn geometric_bound_at_p_zero() {
    // t·(1 + t) is nondecreasing, so L(u) = 1 + u satisfies condition h with p = 0
    let d =
        LipschitzDensity::piecewise(vec![PolySegment { start: 0.0, end: 4.0, coefficients: vec![1.0, 1.0] }]).unwrap();
    let m = generalized_model(&d).with_rate(0.0).unwrap();
    let r = compute_radii(&m, 4.0, &RootFindOptions::default()).unwrap();
    assert!(check_condition_h(&d, 0.0, r.nu, 512));
    for frac in [0.1, 0.5, 0.9] {
        let t0 = frac * r.rho;
        let s = scalar_sequence(&m, t0, r.rho, &SequenceOptions::default()).unwrap();
        for (k, &t) in s.t.iter().enumerate() {
            let bound = a_priori_bound(t0, s.t[1], 0.0, k as u32).unwrap();
            assert!(t <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn power_5_3_is_superlinear_but_not_quadratic() {
    let m = example_model("power_5_3", None).unwrap();
    let s = scalar_sequence(&m, 0.1, 0.4, &SequenceOptions::default()).unwrap();
    let order = order_ratios(&s.t, 5.0 / 3.0);
    assert!(order.windows(2).all(|w| w[1] < w[0]));
    assert!((order[order.len() - 1] - 2.0 / 3.0).abs() < 1e-3);
    let quad = order_ratios(&s.t, 2.0);
    assert!(quad.windows(2).all(|w| w[1] > w[0]));
}
