//! Grid sizing checked against routes that do not go through the bisection
//! solver: Cardano's formula for d = 2, golden-section minimization of the
//! bound for other d, and finite differences of `h`.

use dpgridkm::sizing::{self, h, rugnik_root, GridRounding, DEFAULT_XI_TOL};
use dpgridkm::{deviation_bound, eugkm, make_params, solve_rugnik, theorem_bounds, theta_scaling, xi};
use proptest::prelude::*;

/// Real positive root of `m^3 + p m + q = 0` with `q < 0`.
fn cardano_positive_root(p: f64, q: f64) -> f64 {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc >= 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else {
        let r = (-(p / 3.0).powi(3)).sqrt();
        let phi = (-q / (2.0 * r)).acos();
        2.0 * r.cbrt() * (phi / 3.0).cos()
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-11 * b.abs().max(1.0) {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    (a + b) / 2.0
}

#[test]
fn cubic_case_matches_cardano() {
    for &(n, k, eps) in &[(100usize, 2usize, 0.1), (400, 4, 0.4), (1600, 8, 1.0), (10, 1, 0.01)] {
        let p = make_params(n, 2, k, eps).unwrap();
        let kf = k as f64;
        let oracle = cardano_positive_root(-p.rho() * kf.sqrt(), -p.rho() * (n as f64 / 3.0).sqrt() * kf);
        let got = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
        assert!((got - oracle).abs() < 1e-9 * oracle, "{got} vs {oracle}");
    }
    let p = make_params(100, 2, 2, 0.1).unwrap();
    let m = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
    assert!((m - 2.29).abs() < 0.005);
}

#[test]
fn root_is_argmin_of_bound() {
    for d in 2..=6 {
        for &(n, k, eps) in &[(100usize, 2usize, 0.1), (800, 4, 0.6), (5000, 16, 2.0)] {
            let p = make_params(n, d, k, eps).unwrap();
            let oracle = golden_min(|m| h(m, &p), 1e-3, 1e4);
            let got = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
            assert!((got - oracle).abs() < 1e-5 * oracle, "d={d}: {got} vs {oracle}");
        }
    }
}

#[test]
fn stationarity_of_bound_at_root() {
    for &(n, d, k, eps) in &[(100usize, 2usize, 2usize, 0.1), (400, 3, 4, 0.4), (1600, 5, 8, 1.0)] {
        let p = make_params(n, d, k, eps).unwrap();
        let m = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
        let step = 1e-5 * m;
        let fd = (h(m + step, &p) - h(m - step, &p)) / (2.0 * step);
        assert!(fd.abs() <= 1e-6 * h(m, &p).abs(), "h'={fd}");
    }
}

#[test]
fn derivative_factorization() {
    // h'(m) = d / (sqrt(2) eps K^(2/d) m^3) * xi(m)
    for &(n, d, k, eps, m) in &[(100usize, 2usize, 2usize, 0.1, 1.7), (900, 4, 6, 0.7, 3.3), (50, 7, 3, 2.0, 0.9)] {
        let p = make_params(n, d, k, eps).unwrap();
        let step = 1e-6 * m;
        let fd = (h(m + step, &p) - h(m - step, &p)) / (2.0 * step);
        let kf = k as f64;
        let closed = d as f64 / (2f64.sqrt() * eps * kf.powf(2.0 / d as f64) * m.powi(3)) * xi(m, &p);
        assert!((fd - closed).abs() <= 1e-6 * closed.abs().max(1.0), "{fd} vs {closed}");
    }
}

#[test]
fn table_three_spot_values() {
    let cells = |n, d, k, e| solve_rugnik(&make_params(n, d, k, e).unwrap(), DEFAULT_XI_TOL).unwrap().cells;
    assert_eq!(cells(100, 2, 2, 0.1), 4);
    assert_eq!(cells(100, 2, 2, 0.15), 9);
    assert_eq!(cells(100, 2, 2, 0.4), 16);
    assert_eq!(cells(100, 2, 2, 1.0), 25);
    assert_eq!(cells(100, 3, 2, 0.1), 8);
    assert_eq!(cells(100, 3, 2, 1.0), 27);
}

#[test]
fn lower_bound_equals_k_at_threshold() {
    // at eps = eps0, eta = sqrt(K) and the lower bound is exactly K cells
    for &(n, d, k) in &[(100usize, 2usize, 2usize), (800, 3, 4), (1600, 4, 8)] {
        let eps0 = make_params(n, d, k, 1.0).unwrap().eps0();
        let p = make_params(n, d, k, eps0).unwrap();
        assert!((p.eta() - (k as f64).sqrt()).abs() < 1e-12);
        let m_lower = theorem_bounds(&p).m_lower.unwrap();
        assert!((m_lower.powi(d as i32) - k as f64).abs() < 1e-9);
    }
}

#[test]
fn theta_ratio_stays_in_band() {
    let ratios: Vec<f64> = [1_000usize, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            let p = make_params(n, 2, 4, 1.0).unwrap();
            let m = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
            m.powi(2) / theta_scaling(n, 2, 4, 1.0)
        })
        .collect();
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo <= 4.0, "{ratios:?}");
}

#[test]
fn integer_choice_minimizes_bound_over_neighbours() {
    for &(n, d, k, eps) in &[(400usize, 2usize, 4usize, 0.1), (400, 3, 2, 0.1), (200, 2, 2, 0.6)] {
        let p = make_params(n, d, k, eps).unwrap();
        let g = sizing::solve_rugnik_with(&p, DEFAULT_XI_TOL, GridRounding::BoundArgmin).unwrap();
        let at = |m: usize| h(m as f64, &p);
        assert!(at(g.m) <= at(g.m + 1));
        if g.m > 1 {
            assert!(at(g.m) <= at(g.m - 1));
        }
    }
}

fn params_strategy() -> impl Strategy<Value = (usize, usize, usize, f64)> {
    (10usize..100_000, 2usize..=6, 1usize..=64, 0.01f64..10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn xi_rewrite_agrees((n, d, k, eps) in params_strategy(), m in 0.01f64..50.0) {
        let p = make_params(n, d, k, eps).unwrap();
        let kf = k as f64;
        let df = d as f64;
        let rewritten = m.powf(df / 2.0 + 2.0)
            - p.eta() * p.gamma() * kf.powf(1.0 / df) * m
            - p.eta() * (1.0 - p.gamma()) * kf.powf(2.0 / df);
        let direct = xi(m, &p);
        let scale = m.powf(df / 2.0 + 2.0) + p.rho() * kf.powf(2.0 / df) * (n as f64).sqrt() + 1.0;
        prop_assert!((rewritten - direct).abs() <= 1e-12 * scale);
        prop_assert!((p.eta() * p.gamma() - p.rho()).abs() <= 1e-12 * p.rho());
        prop_assert!(p.gamma() > 0.0 && p.gamma() < 1.0);
    }

    #[test]
    fn xi_has_one_sign_change((n, d, k, eps) in params_strategy()) {
        let p = make_params(n, d, k, eps).unwrap();
        let m_star = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
        let top = 4.0 * m_star;
        let steps = 4000;
        let mut changes = 0;
        let mut prev = xi(1e-9, &p);
        for i in 1..=steps {
            let v = xi(top * i as f64 / steps as f64, &p);
            if (v > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = v;
        }
        prop_assert_eq!(changes, 1);
    }

    #[test]
    fn bound_is_convex(d in 2usize..=10, n in 10usize..50_000, k in 1usize..=64, eps in 0.01f64..10.0, m in 0.2f64..40.0) {
        let p = make_params(n, d, k, eps).unwrap();
        let step = 1e-3 * m;
        let second = (h(m + step, &p) - 2.0 * h(m, &p) + h(m - step, &p)) / (step * step);
        let kf = k as f64;
        let df = d as f64;
        let nf = n as f64;
        let closed = (df / 2.0 - 1.0) * df * m.powf(df / 2.0 - 2.0) / (2f64.sqrt() * eps * kf.powf(2.0 / df))
            + 4.0 / (m.powi(3) * kf.powf(1.0 / df)) * (nf / 3.0).sqrt()
            + 2.0 * nf / m.powi(4);
        prop_assert!(closed >= 0.0);
        prop_assert!((second - closed).abs() <= 1e-3 * closed.abs() + 1e-12 * h(m, &p) / (step * step));
    }

    #[test]
    fn sandwich_when_thresholds_hold((n, d, k, eps) in params_strategy()) {
        let p = make_params(n, d, k, eps).unwrap();
        let m_star = rugnik_root(&p, DEFAULT_XI_TOL).unwrap();
        let b = theorem_bounds(&p);
        if let Some(lo) = b.m_lower {
            prop_assert!(lo <= m_star * (1.0 + 1e-12));
        }
        if let Some(hi) = b.m_upper {
            prop_assert!(m_star <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn root_monotone_in_eps_and_n((n, d, k, eps) in params_strategy()) {
        let base = rugnik_root(&make_params(n, d, k, eps).unwrap(), DEFAULT_XI_TOL).unwrap();
        let more_eps = rugnik_root(&make_params(n, d, k, eps * 1.5).unwrap(), DEFAULT_XI_TOL).unwrap();
        let more_n = rugnik_root(&make_params(n * 2, d, k, eps).unwrap(), DEFAULT_XI_TOL).unwrap();
        prop_assert!(more_eps >= base);
        prop_assert!(more_n >= base);
    }

    #[test]
    fn deviation_identity((n, d, k, eps) in params_strategy(), m in 0.1f64..60.0, r in 0.01f64..100.0) {
        let p = make_params(n, d, k, eps).unwrap();
        let b = deviation_bound(m, &p, r).unwrap();
        prop_assert!(b.t1_bound > 0.0 && b.t2_bound > 0.0 && b.t3_exact > 0.0);
        let lhs = d as f64 * r * r / k as f64 * b.h_value;
        let rhs = (b.t1_bound + 2.0 * b.t2_bound + b.t3_exact) / k as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        prop_assert!((b.objective_bound - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn sizing_ignores_r((n, d, k, eps) in params_strategy()) {
        // neither rule takes r; deviation-bound h is r-free too
        let p = make_params(n, d, k, eps).unwrap();
        let a = deviation_bound(3.0, &p, 1.0).unwrap();
        let b = deviation_bound(3.0, &p, 17.0).unwrap();
        prop_assert_eq!(a.h_value, b.h_value);
        let g1 = solve_rugnik(&p, DEFAULT_XI_TOL).unwrap();
        let g2 = solve_rugnik(&p, DEFAULT_XI_TOL).unwrap();
        prop_assert_eq!(g1, g2);
        prop_assert_eq!(eugkm(n, d, eps).unwrap(), eugkm(n, d, eps).unwrap());
    }
}
