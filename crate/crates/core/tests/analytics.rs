use cavity_selforg_core::analytics::{
    critical_eta, eta_c_numeric, eta_star_gap, eta_star_numeric, has_secondary_minimum, lambda1_approx,
    quartic_coefficients, quartic_roots, quartic_value, secondary_minimum_closed_form,
};
use cavity_selforg_core::steady_state::{solve_steady, SolverOptions};
use cavity_selforg_core::{Complex64, ModelParams, SpatialGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Red-detuned parameter sets with a finite threshold.
fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (-800.0f64..-1.0, 0.0f64..20.0, 1.0f64..300.0, 1.0f64..400.0).prop_map(|(u0, g, kappa, margin)| ModelParams {
        u0,
        g,
        delta_c: 0.5 * u0 - margin,
        kappa,
        eta: 0.0,
    })
}

fn relative_residual(p: &ModelParams, l: Complex64) -> f64 {
    let c = quartic_coefficients(p);
    let scale = c.iter().enumerate().map(|(k, ck)| ck.norm() * l.norm().powi(k as i32)).sum::<f64>() + l.norm().powi(4);
    quartic_value(p, l).norm() / scale
}

fn smallest_root(p: &ModelParams) -> Complex64 {
    *quartic_roots(p)
        .unwrap()
        .roots
        .iter()
        .min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn threshold_is_where_the_quartic_has_a_zero_root(p in params_strategy()) {
        let eta_c = critical_eta(&p).unwrap();
        let w = (1.0 + 2.0 * p.g).sqrt();
        prop_assert!(smallest_root(&p.with_eta(eta_c)).norm() < 1e-8 * w);
        prop_assert!(smallest_root(&p.with_eta(eta_c * 0.99)).norm() > 1e-6 * w);
        let crossing = eta_c_numeric(&p).unwrap();
        prop_assert!((crossing - eta_c).abs() < 1e-8 * eta_c, "{} vs {}", crossing, eta_c);
    }

    #[test]
    fn quartic_roots_satisfy_the_polynomial(p in params_strategy(), scale in 0.0f64..3.0) {
        let eta = scale * critical_eta(&p).unwrap();
        let p = p.with_eta(eta);
        for r in quartic_roots(&p).unwrap().roots {
            prop_assert!(relative_residual(&p, r) < 1e-10, "{} at {:?}", r, p);
        }
    }

    #[test]
    fn interactions_enter_threshold_like_temperature(p in params_strategy()) {
        let d = p.delta_c_eff();
        let slope = 2.0 * (d * d + p.kappa * p.kappa) / (p.u0 - 2.0 * p.delta_c);
        let e0 = critical_eta(&p.with_g(0.0)).unwrap();
        let eg = critical_eta(&p).unwrap();
        prop_assert!((eg * eg - e0 * e0 - slope * p.g).abs() <= 1e-11 * eg * eg);
    }
}

#[test]
fn decoupled_roots_at_zero_pump() {
    let p = ModelParams::reference(0.0);
    let q = quartic_roots(&p).unwrap();
    let w = 21f64.sqrt();
    let d = p.delta_c_eff();
    let expected = [
        Complex64::new(d, -p.kappa),
        Complex64::new(w, 0.0),
        Complex64::new(-w, 0.0),
        Complex64::new(-d, -p.kappa),
    ];
    for e in expected {
        let best = q.roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-10 * e.norm(), "{e} missing from {:?}", q.roots);
    }
}

#[test]
fn overdamped_window_precedes_threshold() {
    let p = ModelParams::reference(0.0);
    let eta_c = critical_eta(&p).unwrap();
    let eta_star = eta_star_numeric(&p).unwrap();
    assert!(eta_star < eta_c);
    let gap = eta_star_gap(&p).unwrap();
    assert!((gap / (eta_c * eta_c) - (200.0 * 21f64.sqrt() / 102_500.0).powi(2)).abs() < 1e-15);
    // The gap formula is the leading term of a small-recoil expansion.
    let numeric_gap = eta_c * eta_c - eta_star * eta_star;
    assert!((numeric_gap - gap).abs() < 1e-3 * gap, "{numeric_gap} vs {gap}");

    // Below eta_* the lowest pair oscillates; between eta_* and eta_c it is
    // purely damped and both roots stay in the lower half plane.
    let below = smallest_root(&p.with_eta(0.99 * eta_star));
    assert!(below.re.abs() > 1e-3 && below.im < 0.0);
    let between = smallest_root(&p.with_eta(0.5 * (eta_star + eta_c)));
    assert!(between.re.abs() < 1e-7 && between.im < 0.0);
    let above = quartic_roots(&p.with_eta(1.01 * eta_c)).unwrap();
    assert!(above.roots.iter().any(|r| r.im > 0.0));

    let wider = eta_star_gap(&p.with_g(20.0)).unwrap() - eta_star_gap(&p).unwrap();
    assert!(wider > 0.0);
    let wider_numeric = {
        let q = p.with_g(20.0);
        let (c, s) = (critical_eta(&q).unwrap(), eta_star_numeric(&q).unwrap());
        c * c - s * s
    };
    assert!(wider_numeric > numeric_gap);
}

#[test]
fn approximate_lowest_root_limits() {
    let p = ModelParams::reference(0.0);
    assert_eq!(lambda1_approx(&p).unwrap(), Complex64::new(21f64.sqrt(), 0.0));
    let eta_c = critical_eta(&p).unwrap();
    let at_c = lambda1_approx(&p.with_eta(eta_c)).unwrap();
    let d = p.delta_c_eff();
    assert!(at_c.re.abs() < 1e-6);
    assert!((at_c.im + p.kappa * 21.0 / (d * d + p.kappa * p.kappa)).abs() < 1e-12);
    assert!(lambda1_approx(&p.with_eta(1.1 * eta_c)).is_err());
}

#[test]
fn approximate_root_error_is_quadratic_in_recoil_frequency() {
    let error = |g: f64| {
        let p = ModelParams::reference(0.0).with_g(g);
        let p = p.with_eta(0.5 * critical_eta(&p).unwrap());
        let approx = lambda1_approx(&p).unwrap();
        let exact = quartic_roots(&p).unwrap().roots;
        let err = exact.iter().map(|r| (r - approx).norm()).fold(f64::INFINITY, f64::min) / approx.norm();
        let d = p.delta_c_eff();
        let bound = (1.0 + 2.0 * g) / (d * d + p.kappa * p.kappa);
        assert!(err < bound, "g={g}: {err} vs {bound}");
        err
    };
    // Omega_1^2 = 21 at g = 10 and 21/4 at g = 2.125.
    let ratio = error(10.0) / error(2.125);
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn potential_scan_agrees_with_closed_form_condition() {
    let grid = SpatialGrid::new(128).unwrap();
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut tested = 0;
    let mut with_defects = 0;
    while tested < 100 {
        let kappa = rng.gen_range(20.0..300.0);
        let u0 = -rng.gen_range(10.0..1500.0);
        let margin = rng.gen_range(0.0..1.5) * kappa;
        let base = ModelParams { u0, g: rng.gen_range(0.0..10.0), delta_c: u0 - margin, kappa, eta: 0.0 };
        let Ok(eta_c) = critical_eta(&base) else { continue };
        let p = base.with_eta(eta_c * rng.gen_range(1.05..6.0));
        let Ok(s) = solve_steady(&p, &grid, &opts) else { continue };
        if s.theta_op.abs() < 1e-3 {
            continue;
        }
        let scan = has_secondary_minimum(&s, &p, &grid).unwrap();
        assert_eq!(scan, secondary_minimum_closed_form(s.theta_op, s.bunching, &p), "{p:?} theta={}", s.theta_op);
        with_defects += scan as usize;
        tested += 1;
    }
    assert!(with_defects > 5 && with_defects < 95, "{with_defects}");
}
