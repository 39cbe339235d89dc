mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use common::{euclid, rel};
use steklov::bounds::{self, Regime};
use steklov::curvature::{self, Constraint, CurvatureFamily};
use steklov::eigen::{self, MethodChoice, Problem};
use steklov::radial::{self, ManifoldSpec, RadialOptions};
use steklov::warp::{check_hypotheses, WarpSpec};

fn value(problem: Problem, mf: &ManifoldSpec, m: usize, method: MethodChoice) -> f64 {
    eigen::eigenvalue(problem, mf, m, method, &RadialOptions::default())
        .unwrap()
        .value
}

/// Sphere, hyperbolic or odd-polynomial warp with a radius inside its domain.
fn admissible() -> impl Strategy<Value = ManifoldSpec> {
    let warp = prop_oneof![
        Just(WarpSpec::sphere()),
        Just(WarpSpec::hyperbolic()),
        (-0.3f64..0.0, -0.05f64..0.05)
            .prop_map(|(a3, a5)| WarpSpec::odd_polynomial(vec![a3, a5]).unwrap()),
    ];
    (warp, 2usize..=5, 0.05f64..0.9).prop_map(|(warp, n, frac)| {
        let cap = warp.max_radius.min(4.0);
        ManifoldSpec::new(n, 0.1 + frac * (cap - 0.1), warp).unwrap()
    })
}

/// Manifolds satisfying the curvature and convexity hypotheses.
fn nonneg_curved() -> impl Strategy<Value = ManifoldSpec> {
    admissible().prop_filter("needs Ric >= 0 and convex boundary", |mf| {
        check_hypotheses(mf, 256).hypotheses_hold
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn space_form_warps_satisfy_their_ode(r in 0.0f64..3.1) {
        let (h, _, d2h) = WarpSpec::sphere().eval(r).unwrap();
        prop_assert_eq!(d2h * h, -h * h);
        let (h, _, d2h) = WarpSpec::hyperbolic().eval(r).unwrap();
        prop_assert_eq!(d2h * h, h * h);
    }

    #[test]
    fn polynomial_warps_are_odd(a3 in -1.0f64..1.0, a5 in -1.0f64..1.0, r in 0.0f64..2.0) {
        let w = WarpSpec::odd_polynomial(vec![a3, a5]).unwrap();
        let (h, dh, d2h) = w.eval_unchecked(r);
        let (hm, dhm, d2hm) = w.eval_unchecked(-r);
        prop_assert_eq!(hm, -h);
        prop_assert_eq!(dhm, dh);
        prop_assert_eq!(d2hm, -d2h);
    }

    #[test]
    fn unit_space_forms_match_named_warps(r in 0.0f64..3.1) {
        let pos = WarpSpec::space_form(1.0).unwrap().eval(r).unwrap();
        let sph = WarpSpec::sphere().eval(r).unwrap();
        let neg = WarpSpec::space_form(-1.0).unwrap().eval(r).unwrap();
        let hyp = WarpSpec::hyperbolic().eval(r).unwrap();
        for (a, b) in [(pos.0, sph.0), (pos.1, sph.1), (pos.2, sph.2),
                       (neg.0, hyp.0), (neg.1, hyp.1), (neg.2, hyp.2)] {
            prop_assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn riccati_and_linear_forms_agree(mf in admissible(), m in 1usize..=4) {
        let z = radial::integrate_z(&mf, m, 1e-10).unwrap();
        let lin = radial::integrate_u(&mf, m, 1e-10, 1e-13).unwrap();
        prop_assert!((z - lin.z_r).abs() <= 1e-7 * z.abs().max(1.0), "{z} vs {}", lin.z_r);
    }

    #[test]
    fn halving_the_start_radius_is_harmless(mf in admissible(), m in 1usize..=4) {
        let rtol = 1e-10;
        let base = radial::integrate_u(&mf, m, rtol, 1e-13).unwrap();
        let opts = RadialOptions {
            start: Some(0.5 * mf.default_start()),
            ..RadialOptions::with_tolerances(rtol, 1e-13)
        };
        let half = radial::integrate_u_with(&mf, m, &opts).unwrap();
        prop_assert!(rel(half.y_r, base.y_r) <= 10.0 * rtol);
        prop_assert!(rel(half.integral_ratio(), base.integral_ratio()) <= 10.0 * rtol);
    }

    #[test]
    fn initial_scale_cancels(mf in admissible(), m in 1usize..=4) {
        let base = radial::integrate_u_with(&mf, m, &RadialOptions::default()).unwrap();
        let opts = RadialOptions { init_scale: 1e3, ..RadialOptions::default() };
        let big = radial::integrate_u_with(&mf, m, &opts).unwrap();
        prop_assert!(rel(big.y_r, base.y_r) <= 1e-12);
        prop_assert!(rel(big.z_r, base.z_r) <= 1e-12);
        prop_assert!(rel(big.integral_ratio(), base.integral_ratio()) <= 1e-12);
    }

    #[test]
    fn riccati_trajectory_rises_from_m(mf in nonneg_curved(), m in 1usize..=4) {
        let path = radial::integrate_z_path(&mf, m, 1e-10).unwrap();
        let floor = m as f64 - 1e-8;
        for w in path.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-10 * w[0].1.abs().max(1.0), "{:?}", w);
            prop_assert!(w[1].1 >= floor);
        }
    }

    #[test]
    fn xi_is_sigma_squared_eta(mf in admissible(), m in 1usize..=4) {
        let s = value(Problem::Sigma, &mf, m, MethodChoice::Auto);
        let x = value(Problem::Xi, &mf, m, MethodChoice::Auto);
        let e = value(Problem::Eta, &mf, m, MethodChoice::Auto);
        prop_assert!((x - s * s * e).abs() <= 1e-7 * x);
    }

    #[test]
    fn eta_zero_is_boundary_to_volume_ratio(mf in admissible()) {
        let e0 = value(Problem::Eta, &mf, 0, MethodChoice::Auto);
        let oracle = common::boundary_volume_ratio(&mf);
        prop_assert!(rel(e0, oracle) <= 1e-10, "{e0} vs {oracle}");
    }

    #[test]
    fn metric_scaling_laws(mf in admissible(), m in 0usize..=3,
                           c in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let scaled = ManifoldSpec::new(mf.n, c * mf.radius, mf.warp.rescaled(c).unwrap()).unwrap();
        for problem in [Problem::Sigma, Problem::Xi, Problem::Eta] {
            if m < problem.min_mode() || (problem == Problem::Sigma && m == 0) {
                continue;
            }
            let base = value(problem, &mf, m, MethodChoice::Auto);
            let back = value(problem, &scaled, m, MethodChoice::Auto) * c.powi(problem.scaling_power());
            prop_assert!(rel(back, base) <= 1e-8, "{problem}: {back} vs {base}");
        }
    }

    #[test]
    fn methods_agree(mf in admissible(), m in 1usize..=3) {
        for problem in [Problem::Xi, Problem::Eta] {
            let ode = value(problem, &mf, m, MethodChoice::Ode);
            let coupled = value(problem, &mf, m, MethodChoice::Coupled);
            prop_assert!(rel(ode, coupled) <= 1e-6, "{problem}: {ode} vs {coupled}");
            if mf.n == 2 && mf.warp.curvature().is_some() {
                let closed = value(problem, &mf, m, MethodChoice::Closed);
                prop_assert!(rel(ode, closed) <= 1e-6, "{problem}: {ode} vs {closed}");
            }
        }
    }

    #[test]
    fn spectra_increase_with_mode(mf in nonneg_curved()) {
        for problem in [Problem::Sigma, Problem::Xi, Problem::Eta] {
            for m in 1..=4 {
                let lo = value(problem, &mf, m, MethodChoice::Auto);
                let hi = value(problem, &mf, m + 1, MethodChoice::Auto);
                prop_assert!(hi > lo, "{problem} m={m}: {lo} !< {hi}");
            }
        }
    }

    #[test]
    fn curvature_continuity_at_flat(problem_idx in 0usize..3, m in 0usize..=3,
                                    use_area in any::<bool>(), sign in prop::bool::ANY) {
        let problem = [Problem::Sigma, Problem::Xi, Problem::Eta][problem_idx];
        prop_assume!(m >= problem.min_mode() && !(problem == Problem::Sigma && m == 0));
        let (constraint, r) = if use_area {
            (Constraint::FixedArea(1.0), (1.0 / PI).sqrt())
        } else {
            (Constraint::FixedRadius(1.0), 1.0)
        };
        let fam = CurvatureFamily::with_default_range(constraint, problem, m).unwrap();
        let k = if sign { 1e-8 } else { -1e-8 };
        let v = curvature::eigen_of_k(&fam, k).unwrap();
        prop_assert!(rel(v, euclid(problem, 2, m, r)) <= 1e-5);
    }

    #[test]
    fn sphere_regime_below_equator(n in 2usize..=5, r in 0.05f64..1.55) {
        let mf = ManifoldSpec::new(n, r, WarpSpec::sphere()).unwrap();
        prop_assert_eq!(bounds::regime(&check_hypotheses(&mf, 512)), Regime::RicciNonneg);
    }

    #[test]
    fn hyperbolic_regime_is_nonpositive(n in 2usize..=5, r in 0.05f64..6.0) {
        let mf = ManifoldSpec::new(n, r, WarpSpec::hyperbolic()).unwrap();
        prop_assert_eq!(bounds::regime(&check_hypotheses(&mf, 512)), Regime::RicciNonpos);
    }

    #[test]
    fn equality_only_on_flat_balls(mf in admissible(), m in 1usize..=3) {
        for rep in [
            bounds::verify_xi_bounds(&mf, m).unwrap(),
            bounds::verify_eta_bounds(&mf, m).unwrap(),
        ] {
            prop_assert!(!rep.equality_flag || rep.hypotheses.max_slope_defect <= 1e-9);
        }
    }
}

#[test]
fn fixed_radius_unit_curvature_is_the_sphere() {
    for problem in [Problem::Sigma, Problem::Xi, Problem::Eta] {
        for m in 1..=3 {
            let fam = CurvatureFamily::with_default_range(Constraint::FixedRadius(0.8), problem, m)
                .unwrap();
            let direct = value(
                problem,
                &ManifoldSpec::new(2, 0.8, WarpSpec::sphere()).unwrap(),
                m,
                MethodChoice::Auto,
            );
            assert_relative_eq!(
                curvature::eigen_of_k(&fam, 1.0).unwrap(),
                direct,
                max_relative = 1e-10
            );
        }
    }
}

#[test]
fn lower_slack_vanishes_near_flat() {
    for n in 2..=4 {
        let slack = |eps: f64| {
            let warp = WarpSpec::odd_polynomial(vec![-eps]).unwrap();
            let mf = ManifoldSpec::new(n, 1.0, warp).unwrap();
            let rep = bounds::verify_eta_bounds(&mf, 1).unwrap();
            assert_eq!(rep.regime, Regime::RicciNonneg);
            rep.lower_slack.unwrap() / rep.value
        };
        let s: Vec<f64> = [1e-2, 1e-3, 1e-4].into_iter().map(slack).collect();
        assert!(s.iter().all(|&x| x >= -1e-8), "n={n}: {s:?}");
        assert!(s[1] < 0.2 * s[0] && s[2] < 0.2 * s[1], "n={n}: {s:?}");
    }
}

#[test]
fn euclidean_radial_solution_is_a_monomial() {
    for n in 2..=6 {
        for m in 1..=5 {
            for r in [0.5, 1.0, 2.0] {
                let mf = ManifoldSpec::new(n, r, WarpSpec::euclidean()).unwrap();
                let sol = radial::integrate_u(&mf, m, 1e-10, 1e-13).unwrap();
                let mr = m as f64 / r;
                assert!((sol.y_r - mr).abs() <= 1e-9 * mr, "n={n} m={m} R={r}");
                let k = (n + 2 * m) as f64;
                let ratio = sol.integral * k / (sol.u_r * sol.u_r * r.powi(n as i32 - 1) * r);
                assert!((ratio - 1.0).abs() <= 1e-8, "n={n} m={m} R={r}: {ratio}");
            }
        }
    }
}
