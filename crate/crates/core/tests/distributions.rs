use eif_core::distributions::{make_bump, mix, mixture, sequential_joint, CondFactor, Family, LinearPredictor, SequentialFactorization};
use eif_core::{presets, DensityModel, Error, Settings};
use proptest::prelude::*;

fn quad() -> eif_core::numerics::QuadratureSettings {
    Settings::default().quadrature
}

fn expit(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

#[test]
fn longitudinal_joint_at_reporting_point() {
    let p = presets::longitudinal_law().unwrap();
    let x = presets::LONGITUDINAL_POINT;
    let normal = (-(2.0f64 + 3.0).powi(2) / 8.0).exp() / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
    // A1 logit: -5 + 2 + 1 + 0 = -2; Y logit: -1 + 1 - 0.5 - 1 = -1.5.
    let expected = 0.2 * expit(-1.0) * normal * expit(-2.0) * expit(-1.5);
    assert!((p.density(&x) - expected).abs() < 1e-15 * expected.max(1.0), "{} vs {expected}", p.density(&x));
}

#[test]
fn sequential_zero_factor_and_single_factor() {
    let one = SequentialFactorization::new(vec![CondFactor::Marginal(Family::beta(2.0, 2.0).unwrap())]).unwrap();
    let b = DensityModel::beta(2.0, 2.0).unwrap();
    for v in [0.1, 0.5, 0.9] {
        assert_eq!(sequential_joint(&one, &[v]).unwrap(), b.density(&[v]));
    }
    let p = presets::binary_markov_toy().unwrap();
    assert_eq!(p.density(&[2.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
    assert!(matches!(sequential_joint(&one, &[0.1, 0.2]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn total_mass_of_constructed_models() {
    let q = quad();
    let p = presets::longitudinal_law().unwrap();
    assert!((p.total_mass(&q).unwrap() - 1.0).abs() < 1e-6);
    let toy = presets::binary_markov_toy().unwrap();
    assert!((toy.total_mass(&q).unwrap() - 1.0).abs() < 1e-14);
    for f in [DensityModel::normal(1.0, 4.0).unwrap(), DensityModel::uniform(-1.0, 3.0).unwrap(), presets::beta_3_5()] {
        assert!((f.total_mass(&q).unwrap() - 1.0).abs() < 1e-8);
    }
    let h: DensityModel = make_bump(&[0.0, 1.0, 2.0, 1.0, 1.0], 0.25, &p).unwrap().into();
    assert!((h.total_mass(&q).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bump_is_truncated_at_the_boundary() {
    let p = presets::beta_3_5();
    let h = make_bump(&[0.02], 0.05, &p).unwrap();
    assert_eq!(h.interval(0), Some((0.0, 0.07)));
    assert!((h.density(&[0.03]) - 1.0 / 0.07).abs() < 1e-12);
    assert_eq!(h.density(&[0.08]), 0.0);
    let m: DensityModel = h.into();
    assert!((m.total_mass(&quad()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bump_domination_errors() {
    let p = presets::beta_3_5();
    assert!(matches!(make_bump(&[1.5], 0.1, &p), Err(Error::Domination(_))));
    let toy = presets::binary_markov_toy().unwrap();
    assert!(matches!(make_bump(&[0.5, 1.0, 0.0, 1.0, 1.0], 0.1, &toy), Err(Error::Domination(_))));
    assert!(make_bump(&[1.0, 1.0, 0.0, 1.0, 1.0], 0.1, &toy).is_ok());
}

#[test]
fn bump_concentration_is_second_order() {
    let p = presets::beta_3_5();
    let x = 0.4;
    let mut errs = Vec::new();
    for l in [1e-1, 1e-2] {
        let h: DensityModel = make_bump(&[x], l, &p).unwrap().into();
        // Symmetric bump: the mean error vanishes, so probe the second moment.
        let m2 = h.expect(|u| u[0] * u[0], &quad()).unwrap();
        errs.push((m2 - x * x).abs());
    }
    let slope = (errs[0] / errs[1]).log10();
    assert!((slope - 2.0).abs() < 0.05, "{slope}");
    let h: DensityModel = make_bump(&[x], 1e-2, &p).unwrap().into();
    assert!((h.expect(|u| u[0], &quad()).unwrap() - x).abs() < 1e-14);
}

#[test]
fn mixture_rejects_bad_weights() {
    let a = DensityModel::beta(2.0, 2.0).unwrap();
    let b = DensityModel::beta(3.0, 2.0).unwrap();
    assert!(mixture(vec![(0.5, a.clone()), (0.6, b.clone())]).is_err());
    assert!(mixture(vec![(-0.1, a.clone()), (1.1, b.clone())]).is_err());
    assert!(mix(&a, &b, 1.5).is_err());
    let n = DensityModel::normal(0.0, 1.0).unwrap();
    assert!(mixture(vec![(0.5, a), (0.5, n)]).is_err());
}

#[test]
fn normal_conditional_bounds_follow_the_predictor() {
    let f = SequentialFactorization::new(vec![
        CondFactor::Marginal(Family::discrete_uniform(vec![0.0, 4.0]).unwrap()),
        CondFactor::Normal {
            mean: LinearPredictor::new(0.0).term(0, 3.0),
            variance: 1.0,
        },
    ])
    .unwrap();
    let (lo, hi) = f.quadrature_bounds(1).unwrap();
    assert_eq!((lo, hi), (-8.0, 20.0));
}

proptest! {
    #[test]
    fn mixture_is_linear(eps in 0.0f64..=1.0, x in 0.05f64..0.95, lam in 1e-3f64..0.2, u in 0.0f64..1.0) {
        let p = presets::beta_3_5();
        let h: DensityModel = make_bump(&[x], lam, &p).unwrap().into();
        let q = mix(&p, &h, eps).unwrap();
        let want = (1.0 - eps) * p.density(&[u]) + eps * h.density(&[u]);
        prop_assert!((q.density(&[u]) - want).abs() <= 4.0 * f64::EPSILON * want.abs().max(1.0));
    }

    #[test]
    fn mixture_mass_is_one(eps in 0.0f64..=1.0, x in 0.01f64..0.99, lam in 1e-3f64..0.3) {
        let p = presets::beta_3_5();
        let h: DensityModel = make_bump(&[x], lam, &p).unwrap().into();
        let q = mix(&p, &h, eps).unwrap();
        prop_assert!((q.total_mass(&quad()).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn beta_mass_is_one(a in 1.0f64..8.0, b in 1.0f64..8.0) {
        let p = DensityModel::beta(a, b).unwrap();
        prop_assert!((p.total_mass(&quad()).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn longitudinal_bump_mass(l0 in 0usize..5, a0 in 0usize..2, l1 in -6.0f64..6.0, a1 in 0usize..2, y in 0usize..2, lam in 0.05f64..1.0) {
        let p = presets::longitudinal_law().unwrap();
        let x = [l0 as f64, a0 as f64, l1, a1 as f64, y as f64];
        let h: DensityModel = make_bump(&x, lam, &p).unwrap().into();
        let q = mix(&p, &h, 0.3).unwrap();
        prop_assert!((q.total_mass(&quad()).unwrap() - 1.0).abs() < 1e-6);
    }
}
