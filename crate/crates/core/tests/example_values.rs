use eif_core::distributions::Family;
use eif_core::functionals::{avg_density_value, gcomp_mean, AverageDensity, GCompMean};
use eif_core::oracles::{constrained_avg_density_eif, gcomp_markov_eif, np_avg_density_eif};
use eif_core::presets;
use eif_core::{Engine, ModelProjector, Settings};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn beta_density_and_average_density() {
    let p = presets::beta_3_5();
    // 105 x^2 (1 - x)^4
    let x: f64 = 0.6;
    let by_hand = 105.0 * x * x * (1.0 - x).powi(4);
    assert!((p.density(&[x]) - by_hand).abs() < 1e-13);
    assert!((p.density(&[x]) - 0.96768).abs() < 1e-12);
    // B(5, 9) / B(3, 5)^2 = 245 / 143
    let psi = avg_density_value(&p, &Settings::default().quadrature).unwrap();
    assert!((psi - 245.0 / 143.0).abs() < 1e-12, "{psi}");
    assert_eq!(Family::beta(3.0, 5.0).unwrap().mean(), presets::BETA_MU);
}

#[test]
fn beta_oracles() {
    let p = presets::beta_3_5();
    let q = Settings::default().quadrature;
    let np = np_avg_density_eif(&p, &[0.6], &q).unwrap();
    assert!((np - 2.0 * (0.96768 - 245.0 / 143.0)).abs() < 1e-12);
    let c = constrained_avg_density_eif(&p, presets::BETA_MU, &[0.6], &q).unwrap();
    assert!((c + 0.9625421).abs() < 1e-6, "{c}");
}

#[test]
fn beta_secant_is_close_to_constrained_oracle() {
    let p = presets::beta_3_5();
    let model = ModelProjector::MeanConstrained { mu: presets::BETA_MU };
    let engine = Engine::new(&p, &model, &AverageDensity, Settings::default()).unwrap();
    let s = engine.secant(&[0.6], 1e-6, 1e-2).unwrap();
    assert!(s.feasible);
    assert!((s.value + 0.962047).abs() < 1e-5, "{}", s.value);
}

#[test]
fn longitudinal_values() {
    let p = presets::longitudinal_law().unwrap();
    let q = Settings::default().quadrature;
    let psi = gcomp_mean(&p, &q).unwrap();
    assert!((psi - 0.3747092065).abs() < 1e-9, "{psi}");
    let phi = gcomp_markov_eif(&p, &presets::LONGITUDINAL_POINT, &q).unwrap();
    assert!((phi - 7.2506321738).abs() < 1e-8, "{phi}");
    let model = ModelProjector::MarkovLongitudinal;
    let engine = Engine::new(&p, &model, &GCompMean, Settings::default()).unwrap();
    let s = engine.secant(&presets::LONGITUDINAL_POINT, 1e-4, 0.5).unwrap();
    assert!(rel(s.value, phi) < 0.5, "{}", s.value);
}
