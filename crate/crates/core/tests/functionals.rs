use eif_core::distributions::{make_bump, mix, CondFactor, Family, LinearPredictor, SequentialFactorization};
use eif_core::functionals::{avg_density_diff, avg_density_value, gcomp_diff, gcomp_mean, AverageDensity, Functional, GCompMean};
use eif_core::{presets, DensityModel, ModelProjector, Settings};
use proptest::prelude::*;

fn quad() -> eif_core::numerics::QuadratureSettings {
    Settings::default().quadrature
}

fn expit(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// G-computation mean of the longitudinal example by direct Simpson integration over l1.
fn longitudinal_psi_by_hand() -> f64 {
    let c10 = |u: f64| u.clamp(-10.0, 10.0);
    let mut total = 0.0;
    for l0 in 0..5 {
        let l0 = l0 as f64;
        let mean = 3.0 * l0 - 3.0;
        let (lo, hi) = (mean - 20.0, mean + 20.0);
        let n = 40_000;
        let h = (hi - lo) / n as f64;
        let f = |l1: f64| {
            let dens = (-(l1 - mean).powi(2) / 8.0).exp() / (8.0 * std::f64::consts::PI).sqrt();
            dens * expit(-1.0 + 0.5 * c10(l1) - 0.5 - 1.0)
        };
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += 0.2 * s * h / 3.0;
    }
    total
}

#[test]
fn longitudinal_psi_matches_direct_integration() {
    let p = presets::longitudinal_law().unwrap();
    let psi = gcomp_mean(&p, &quad()).unwrap();
    assert!((psi - longitudinal_psi_by_hand()).abs() < 1e-10, "{psi}");
}

#[test]
fn null_perturbation_leaves_psi_unchanged() {
    let p = presets::beta_3_5();
    let h: DensityModel = make_bump(&[0.6], 0.01, &p).unwrap().into();
    let q = mix(&p, &h, 0.0).unwrap();
    assert_eq!(AverageDensity.evaluate(&q, &quad()).unwrap(), AverageDensity.evaluate(&p, &quad()).unwrap());
    assert_eq!(avg_density_diff(&q, &p, &quad()).unwrap(), 0.0);
    let l = presets::longitudinal_law().unwrap();
    let h: DensityModel = make_bump(&presets::LONGITUDINAL_POINT, 0.25, &l).unwrap().into();
    let q = mix(&l, &h, 0.0).unwrap();
    assert!(gcomp_diff(&q, &l, &quad()).unwrap().abs() < 1e-16);
    assert!((GCompMean.evaluate(&q, &quad()).unwrap() - GCompMean.evaluate(&l, &quad()).unwrap()).abs() < 1e-15);
}

#[test]
fn uniform_average_density_is_one() {
    let u = DensityModel::uniform(0.0, 1.0).unwrap();
    assert!((avg_density_value(&u, &quad()).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn stable_and_naive_differences_agree_for_moderate_eps() {
    let p = presets::beta_3_5();
    let h: DensityModel = make_bump(&[0.6], 0.05, &p).unwrap().into();
    let model = ModelProjector::MeanConstrained { mu: presets::BETA_MU };
    for eps in [1e-3, 1e-2, 0.1] {
        let q = model.project(&mix(&p, &h, eps).unwrap(), &Settings::default()).unwrap().projected;
        let stable = AverageDensity.difference(&q, &p, &quad()).unwrap().unwrap();
        let naive = avg_density_value(&q, &quad()).unwrap() - avg_density_value(&p, &quad()).unwrap();
        assert!((stable - naive).abs() < 1e-10, "{eps}: {stable} {naive}");
    }
    let l = presets::longitudinal_law().unwrap();
    let h: DensityModel = make_bump(&presets::LONGITUDINAL_POINT, 0.5, &l).unwrap().into();
    for eps in [1e-3, 1e-2] {
        let q = ModelProjector::MarkovLongitudinal.project(&mix(&l, &h, eps).unwrap(), &Settings::default()).unwrap().projected;
        let stable = gcomp_diff(&q, &l, &quad()).unwrap();
        let naive = gcomp_mean(&q, &quad()).unwrap() - gcomp_mean(&l, &quad()).unwrap();
        assert!((stable - naive).abs() < 1e-10, "{eps}: {stable} {naive}");
    }
}

#[test]
fn gcomp_difference_is_linear_in_eps() {
    let l = presets::longitudinal_law().unwrap();
    let h: DensityModel = make_bump(&presets::LONGITUDINAL_POINT, 0.5, &l).unwrap().into();
    let slopes: Vec<f64> = [1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&e| {
            let q = ModelProjector::MarkovLongitudinal.project(&mix(&l, &h, e).unwrap(), &Settings::default()).unwrap().projected;
            gcomp_diff(&q, &l, &quad()).unwrap() / e
        })
        .collect();
    assert!((slopes[0] / slopes[2] - 1.0).abs() < 0.01 && (slopes[1] / slopes[2] - 1.0).abs() < 0.01, "{slopes:?}");
}

fn toy_with_l0(p0: f64) -> DensityModel {
    let mut f = vec![CondFactor::Marginal(Family::bernoulli(p0).unwrap())];
    f.extend([
        CondFactor::Logistic(LinearPredictor::new(0.3).term(0, 0.5)),
        CondFactor::Logistic(LinearPredictor::new(-0.2).term(0, 0.8).term(1, -0.4)),
        CondFactor::Logistic(LinearPredictor::new(0.1).term(2, 0.6).term(1, 0.2).term(0, -0.3)),
        CondFactor::Logistic(LinearPredictor::new(-0.5).term(2, 1.1).term(3, -0.4).term(1, 0.2)),
    ]);
    SequentialFactorization::new(f).unwrap().into()
}

#[test]
fn swapping_the_baseline_marginal() {
    let (p, p1) = (toy_with_l0(0.4), toy_with_l0(0.7));
    let m0 = |l0: f64| {
        let pl1 = expit(-0.2 + 0.8 * l0 - 0.4);
        (0..2)
            .map(|l1| {
                let l1 = l1 as f64;
                let w = if l1 == 1.0 { pl1 } else { 1.0 - pl1 };
                w * expit(-0.5 + 1.1 * l1 - 0.4 + 0.2)
            })
            .sum::<f64>()
    };
    let want = (0.7 - 0.4) * (m0(1.0) - m0(0.0));
    assert!((gcomp_diff(&p1, &p, &quad()).unwrap() - want).abs() < 1e-15);
    assert_eq!(gcomp_diff(&p, &p, &quad()).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn average_density_of_beta_exceeds_one(a in 2.0f64..8.0, b in 2.0f64..8.0) {
        let p = DensityModel::beta(a, b).unwrap();
        prop_assert!(avg_density_value(&p, &quad()).unwrap() > 1.0);
    }

    #[test]
    fn gcomp_mean_is_a_probability(p0 in 0.01f64..0.99, eps in 0.0f64..1.0, l1 in -5.0f64..5.0) {
        let p = toy_with_l0(p0);
        prop_assert!((0.0..=1.0).contains(&gcomp_mean(&p, &quad()).unwrap()));
        let l = presets::longitudinal_law().unwrap();
        let h: DensityModel = make_bump(&[1.0, 1.0, l1, 1.0, 0.0], 0.5, &l).unwrap().into();
        let v = gcomp_mean(&mix(&l, &h, eps).unwrap(), &quad()).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
