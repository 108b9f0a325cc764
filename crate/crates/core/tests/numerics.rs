use eif_core::distributions::{make_bump, mix};
use eif_core::engine::DerivativeMode;
use eif_core::functionals::AverageDensity;
use eif_core::numerics::{find_root, integrate, newton_maximize, richardson_derivative, NewtonSettings, QuadratureSettings, RootBracket};
use eif_core::space::{ComponentSpec, SampleSpace};
use eif_core::{presets, DensityModel, Engine, ModelProjector, Settings};
use proptest::prelude::*;

#[test]
fn doubling_panels_changes_smooth_integrals_negligibly() {
    let space = SampleSpace::new(vec![ComponentSpec::continuous(0.0, 1.0).unwrap()]).unwrap();
    let p = presets::beta_3_5();
    let coarse = QuadratureSettings::default();
    let fine = QuadratureSettings { panels: 64, ..coarse };
    for f in [
        Box::new(|u: &[f64]| p.density(u) * p.density(u)) as Box<dyn Fn(&[f64]) -> f64>,
        Box::new(|u: &[f64]| (3.0 * u[0]).cos()),
    ] {
        let a = integrate(|u| f(u), &space, &coarse).unwrap();
        let b = integrate(|u| f(u), &space, &fine).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} {b}");
    }
}

#[test]
fn narrow_bump_mixture_keeps_unit_mass() {
    let p = presets::beta_3_5();
    let h: DensityModel = make_bump(&[0.3], 1e-3, &p).unwrap().into();
    let q = mix(&p, &h, 0.5).unwrap();
    assert!((q.total_mass(&QuadratureSettings::default()).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn richardson_known_derivatives() {
    assert!(richardson_derivative(|e| e * e, 0.1, 4).unwrap().abs() < 1e-15);
    assert!((richardson_derivative(f64::sin, 0.01, 4).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn richardson_agrees_with_secant_on_beta_example() {
    let p = presets::beta_3_5();
    let model = ModelProjector::MeanConstrained { mu: presets::BETA_MU };
    let engine = Engine::new(&p, &model, &AverageDensity, Settings::default()).unwrap();
    let d = engine.derivative(&[0.6], 1e-2, DerivativeMode::default()).unwrap();
    let s = engine.secant(&[0.6], 1e-6, 1e-2).unwrap().value;
    assert!((d - s).abs() <= 1e-3 * s.abs(), "{d} {s}");
}

#[test]
fn newton_reports_last_iterate_on_failure() {
    let s = NewtonSettings { tol: 1e-14, max_iter: 3 };
    // Maximum at infinity.
    let r = newton_maximize(|b| Ok(b[0] - (-b[0]).exp()), |b| Ok(vec![1.0 + (-b[0]).exp()]), |b| Ok(vec![-(-b[0]).exp()]), &[0.0], &s);
    assert!(matches!(r, Err(eif_core::Error::NonConvergence { iterations: 3, .. })));
}

proptest! {
    #[test]
    fn root_is_scale_invariant(r in -5.0f64..5.0, s in 0.1f64..3.0) {
        let g = |x: f64| (x - r) * (1.0 + s * x * x);
        let b = RootBracket::new(-10.0, 10.0).unwrap();
        let a = find_root(g, &b).unwrap().root;
        let c = find_root(|x| 1e6 * g(x), &b).unwrap().root;
        prop_assert!((a - c).abs() <= 1e-12 * r.abs().max(1.0));
        prop_assert!((a - r).abs() <= 1e-12 * r.abs().max(1.0));
    }

    #[test]
    fn newton_one_step_on_concave_quadratic(
        d1 in 0.5f64..5.0, d2 in 0.5f64..5.0, off in -0.4f64..0.4, b1 in -3.0f64..3.0, b2 in -3.0f64..3.0,
    ) {
        let off = off * (d1 * d2).sqrt();
        let h = [-d1, off, off, -d2];
        let obj = |x: &[f64]| Ok(0.5 * (h[0] * x[0] * x[0] + 2.0 * h[1] * x[0] * x[1] + h[3] * x[1] * x[1]) + b1 * x[0] + b2 * x[1]);
        let grad = |x: &[f64]| Ok(vec![h[0] * x[0] + h[1] * x[1] + b1, h[2] * x[0] + h[3] * x[1] + b2]);
        let r = newton_maximize(obj, grad, |_| Ok(h.to_vec()), &[0.0, 0.0], &NewtonSettings { tol: 1e-12, max_iter: 10 }).unwrap();
        prop_assert_eq!(r.iterations, 1);
    }
}
