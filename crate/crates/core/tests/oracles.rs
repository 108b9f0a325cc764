use eif_core::functionals::{GCompMean, MeanFunctional};
use eif_core::oracles::{
    constrained_avg_density_eif, constrained_avg_density_oracle, gateaux_brute_force, gcomp_markov_oracle, gcomp_np_oracle,
    np_avg_density_oracle, project_onto_one_constraint, tilt_mean_oracle, OracleEif, Provenance,
};
use eif_core::projection::Basis;
use eif_core::{presets, DensityModel, Error, ModelProjector, Settings};

fn quad() -> eif_core::numerics::QuadratureSettings {
    Settings::default().quadrature
}

fn toy_support() -> Vec<[f64; 5]> {
    (0..32u32).map(|b| [0, 1, 2, 3, 4].map(|i| ((b >> i) & 1) as f64)).collect()
}

#[test]
fn constrained_oracle_is_a_projection_of_the_nonparametric_one() {
    let p = presets::beta_3_5();
    let mu = presets::BETA_MU;
    let q = quad();
    let np = np_avg_density_oracle(&p, &q).unwrap();
    let score = OracleEif::new(move |u| u[0] - mu, &p, &q, Provenance::Custom).unwrap();
    let projected = project_onto_one_constraint(&np, &score, &p, &q).unwrap();
    let direct = constrained_avg_density_oracle(&p, mu, &q).unwrap();
    for i in 0..20 {
        let u = [0.05 + 0.9 * i as f64 / 19.0];
        assert!((projected.evaluate(&u) - direct.evaluate(&u)).abs() < 1e-9);
        assert_eq!(direct.evaluate(&u), constrained_avg_density_eif(&p, mu, &u, &q).unwrap());
    }
    assert!(np.centered_residual() < 1e-8);
    assert!(direct.centered_residual() < 1e-8);
    assert!(projected.centered_residual() < 1e-8);
    let orth = p.expect(|u| direct.evaluate(u) * (u[0] - mu), &q).unwrap();
    assert!(orth.abs() < 1e-9);
}

#[test]
fn longitudinal_oracles_are_centered_and_ordered() {
    let p = presets::longitudinal_law().unwrap();
    let q = quad();
    let markov = gcomp_markov_oracle(&p, &q).unwrap();
    let np = gcomp_np_oracle(&p, &q).unwrap();
    assert!(markov.centered_residual() < 1e-5, "{}", markov.centered_residual());
    assert!(np.centered_residual() < 1e-5);
    let vm = p.expect(|u| markov.evaluate(u).powi(2), &q).unwrap();
    let vn = p.expect(|u| np.evaluate(u).powi(2), &q).unwrap();
    assert!(vm <= vn, "{vm} {vn}");
}

#[test]
fn markov_oracle_rejects_non_markov_laws() {
    use eif_core::distributions::{CondFactor, Family, LinearPredictor, SequentialFactorization};
    let law: DensityModel = SequentialFactorization::new(vec![
        CondFactor::Marginal(Family::bernoulli(0.4).unwrap()),
        CondFactor::Logistic(LinearPredictor::new(0.3).term(0, 0.5)),
        CondFactor::Logistic(LinearPredictor::new(-0.2).term(0, 0.8)),
        CondFactor::Logistic(LinearPredictor::new(0.1).term(2, 0.6)),
        // Y depends on L0 directly.
        CondFactor::Logistic(LinearPredictor::new(-0.5).term(2, 1.1).term(0, 1.5)),
    ])
    .unwrap()
    .into();
    assert!(matches!(gcomp_markov_oracle(&law, &quad()), Err(Error::ModelMembership { .. })));
    assert!(gcomp_np_oracle(&law, &quad()).is_ok());
}

#[test]
fn markov_oracle_matches_brute_force_on_the_toy() {
    let p = presets::binary_markov_toy().unwrap();
    let s = Settings::default();
    let oracle = gcomp_markov_oracle(&p, &s.quadrature).unwrap();
    assert!(oracle.centered_residual() < 1e-12);
    for x in toy_support() {
        let bf = gateaux_brute_force(&p, &ModelProjector::MarkovLongitudinal, &GCompMean, &x, &s).unwrap();
        let a = oracle.evaluate(&x);
        assert!((a - bf).abs() <= 1e-6 * a.abs().max(1e-3), "{x:?}: {a} {bf}");
    }
}

#[test]
fn nonparametric_oracle_matches_brute_force_on_the_toy() {
    let p = presets::binary_markov_toy().unwrap();
    let s = Settings::default();
    let oracle = gcomp_np_oracle(&p, &s.quadrature).unwrap();
    for x in toy_support() {
        let bf = gateaux_brute_force(&p, &ModelProjector::Nonparametric, &GCompMean, &x, &s).unwrap();
        let a = oracle.evaluate(&x);
        assert!((a - bf).abs() <= 1e-6 * a.abs().max(1e-3), "{x:?}: {a} {bf}");
    }
}

#[test]
fn tilt_oracle_is_the_centered_statistic() {
    let r = DensityModel::discrete_uniform(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    let s = Settings::default();
    let o = tilt_mean_oracle(&r, &Basis::coordinate(0), 0, &s.quadrature).unwrap();
    for v in 0..5 {
        assert!((o.evaluate(&[v as f64]) - (v as f64 - 2.0)).abs() < 1e-14);
        let model = ModelProjector::TiltedFamily {
            basis: Basis::coordinate(0),
            reference: r.clone(),
        };
        let bf = gateaux_brute_force(&r, &model, &MeanFunctional { component: 0 }, &[v as f64], &s).unwrap();
        assert!((bf - (v as f64 - 2.0)).abs() < 1e-6, "{v}: {bf}");
    }
}

#[test]
fn brute_force_needs_a_discrete_space() {
    let p = presets::beta_3_5();
    let e = gateaux_brute_force(&p, &ModelProjector::Nonparametric, &eif_core::functionals::AverageDensity, &[0.5], &Settings::default());
    assert!(matches!(e, Err(Error::UnsupportedSpace(_))));
}
