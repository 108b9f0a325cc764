use eif::config::{DistributionConfig, FunctionalConfig, ModelConfig};
use eif::RunConfig;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, (1e-12..1e-1f64), Just(0.0), Just(1e-300)]
}

fn name() -> impl Strategy<Value = String> {
    "[a-z_]{1,12}"
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        proptest::option::of((name(), proptest::option::of(finite()), proptest::option::of(prop::collection::vec(finite(), 1..6)))),
        proptest::option::of((name(), proptest::option::of(finite()), proptest::option::of(prop::collection::vec("[ -~]{0,20}", 0..3)))),
        proptest::option::of((name(), proptest::option::of(0usize..9))),
        proptest::option::of(prop::collection::vec(finite(), 1..6)),
        (proptest::option::of(finite()), proptest::option::of(finite())),
        (0u32..8, 1usize..20, 1usize..64, 0u64..=i64::MAX as u64),
    )
        .prop_map(|(d, m, f, x, (e, l), (digits, min_cells, panels, seed))| {
            let mut c = RunConfig::default();
            c.distribution = d.map(|(family, alpha, support)| DistributionConfig {
                family: Some(family),
                alpha,
                support,
                ..Default::default()
            });
            c.model = m.map(|(kind, mu, basis)| ModelConfig {
                kind: Some(kind),
                mu,
                basis,
            });
            c.functional = f.map(|(kind, component)| FunctionalConfig {
                kind: Some(kind),
                component,
            });
            c.point.x = x;
            c.perturbation.epsilon = e;
            c.perturbation.lambda = l;
            c.plateau.digits = digits;
            c.plateau.min_cells = min_cells;
            c.quadrature.panels = panels;
            c.demo.seed = Some(seed);
            c
        })
}

proptest! {
    #[test]
    fn flat_text_round_trips(cfg in config()) {
        let text = cfg.to_flat();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg, "{}", text);
    }
}

#[test]
fn flat_lines_are_dotted_keys() {
    let cfg = RunConfig::parse("model.kind = \"markov\"\npoint.x = [1.0]").unwrap();
    for line in cfg.to_flat().lines() {
        let key = line.split(" = ").next().unwrap();
        assert!(key.contains('.'), "{line}");
    }
}
