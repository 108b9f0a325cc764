//! Run configuration: flat `section.key = value` lines (TOML dotted keys).
//!
//! ```text
//! distribution.family = "beta"
//! distribution.alpha = 3.0
//! distribution.beta = 5.0
//! model.kind = "mean_constrained"
//! model.mu = 0.375
//! functional.kind = "avg_density"
//! point.x = [0.6]
//! perturbation.epsilon = 1e-6
//! perturbation.lambda = 1e-2
//! ```
//!
//! Sequential laws list one factor per component, each a call such as
//! `"bernoulli(expit(-1 + 0.5*x0))"` or `"normal(3*x0 - 3*x1, 4)"`.

use std::fmt::Write as _;
use std::path::Path;

use eif_core::distributions::{CondFactor, CustomFactor, SequentialFactorization};
use eif_core::engine::{default_grid, validate_grid_list, DerivativeMode, PlateauSettings};
use eif_core::functionals::{AverageDensity, GCompMean, MeanFunctional};
use eif_core::numerics::{NewtonSettings, QuadratureSettings};
use eif_core::projection::Basis;
use eif_core::{ComponentSpec, DensityModel, Family, Functional, ModelProjector, Settings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::expr::{self, Expr};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalConfig>,
    #[serde(default)]
    pub point: PointConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub plateau: PlateauConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub root: RootConfig,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub derivative: DerivativeConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub diagnose: DiagnoseConfig,
    #[serde(default)]
    pub demo: DemoConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Tilt statistics as expressions; the reference law is the configured distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateauConfig {
    pub digits: u32,
    pub min_cells: usize,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        let d = PlateauSettings::default();
        PlateauConfig {
            digits: d.digits,
            min_cells: d.min_cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub nodes: usize,
    pub split_at_breakpoints: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let d = QuadratureSettings::default();
        QuadratureConfig {
            panels: d.panels,
            nodes: d.nodes_per_panel,
            split_at_breakpoints: d.split_at_breakpoints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RootConfig {
    pub tol: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            tol: Settings::default().root_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let d = NewtonSettings::default();
        NewtonConfig {
            max_iter: d.max_iter,
            tol: d.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DerivativeConfig {
    /// `"richardson"` or `"closed_form"`.
    pub mode: String,
    pub levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        DerivativeConfig {
            mode: "richardson".into(),
            levels: 4,
            eps0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    /// Defaults to `point.x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { n: 50, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        if let Some(seed) = cfg.demo.seed {
            check_seed(seed)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Every set key as one `section.key = value` line.
    pub fn to_flat(&self) -> String {
        let value = toml::Value::try_from(self).expect("configs serialize");
        let mut out = String::new();
        flatten("", &value, &mut out);
        out
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        let s = Settings {
            quadrature: QuadratureSettings {
                panels: self.quadrature.panels,
                nodes_per_panel: self.quadrature.nodes,
                split_at_breakpoints: self.quadrature.split_at_breakpoints,
            },
            root_tol: self.root.tol,
            newton: NewtonSettings {
                tol: self.newton.tol,
                max_iter: self.newton.max_iter,
            },
        };
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn plateau_settings(&self) -> PlateauSettings {
        PlateauSettings {
            digits: self.plateau.digits,
            min_cells: self.plateau.min_cells,
        }
    }

    pub fn distribution(&self) -> Result<DensityModel, CliError> {
        let d = self.distribution.as_ref().ok_or_else(|| missing("distribution.family"))?;
        let family = d.family.as_deref().ok_or_else(|| missing("distribution.family"))?;
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| missing(&format!("distribution.{k}")));
        let fam = |r: eif_core::Result<Family>| r.map_err(|e| bad("distribution", e));
        let model: DensityModel = match family {
            "beta" => fam(Family::beta(need(d.alpha, "alpha")?, need(d.beta, "beta")?))?.into(),
            "normal" => fam(Family::normal(need(d.mean, "mean")?, need(d.variance, "variance")?))?.into(),
            "uniform" => fam(Family::uniform(need(d.lower, "lower")?, need(d.upper, "upper")?))?.into(),
            "discrete_uniform" => {
                let s = d.support.clone().ok_or_else(|| missing("distribution.support"))?;
                fam(Family::discrete_uniform(s))?.into()
            }
            "bernoulli" => fam(Family::bernoulli(need(d.p, "p")?))?.into(),
            "sequential" => {
                let specs = d.factors.as_ref().ok_or_else(|| missing("distribution.factors"))?;
                let factors = specs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_factor(s).map_err(|m| bad(&format!("distribution.factors[{i}]"), m)))
                    .collect::<Result<Vec<_>, _>>()?;
                SequentialFactorization::new(factors).map_err(|e| bad("distribution.factors", e))?.into()
            }
            other => return Err(bad("distribution.family", format!("unknown family `{other}`"))),
        };
        Ok(model)
    }

    pub fn model(&self, base: &DensityModel) -> Result<ModelProjector, CliError> {
        let m = self.model.as_ref().ok_or_else(|| missing("model.kind"))?;
        let kind = m.kind.as_deref().ok_or_else(|| missing("model.kind"))?;
        Ok(match kind {
            "nonparametric" => ModelProjector::Nonparametric,
            "mean_constrained" => ModelProjector::MeanConstrained {
                mu: m.mu.ok_or_else(|| missing("model.mu"))?,
            },
            "markov" => ModelProjector::MarkovLongitudinal,
            "tilted" => {
                let exprs = m.basis.as_ref().ok_or_else(|| missing("model.basis"))?;
                if exprs.is_empty() {
                    return Err(bad("model.basis", "needs at least one statistic"));
                }
                let mut basis = Basis::new();
                for (i, s) in exprs.iter().enumerate() {
                    let e = expr::parse(s).map_err(|e| bad(&format!("model.basis[{i}]"), e))?;
                    if let Some(v) = e.max_var() {
                        if v >= base.dim() {
                            return Err(bad(&format!("model.basis[{i}]"), format!("x{v} exceeds dimension {}", base.dim())));
                        }
                    }
                    basis = basis.with(move |u: &[f64]| e.eval(u));
                }
                ModelProjector::TiltedFamily {
                    basis,
                    reference: base.clone(),
                }
            }
            other => return Err(bad("model.kind", format!("unknown model `{other}`"))),
        })
    }

    pub fn functional(&self) -> Result<Box<dyn Functional>, CliError> {
        let f = self.functional.as_ref().ok_or_else(|| missing("functional.kind"))?;
        let kind = f.kind.as_deref().ok_or_else(|| missing("functional.kind"))?;
        Ok(match kind {
            "avg_density" => Box::new(AverageDensity),
            "gcomp_mean" => Box::new(GCompMean),
            "mean" => Box::new(MeanFunctional {
                component: f.component.unwrap_or(0),
            }),
            other => return Err(bad("functional.kind", format!("unknown functional `{other}`"))),
        })
    }

    pub fn point(&self, dim: usize) -> Result<Vec<f64>, CliError> {
        let x = self.point.x.clone().ok_or_else(|| missing("point.x"))?;
        if x.len() != dim {
            return Err(bad("point.x", format!("has {} components, the sample space has {dim}", x.len())));
        }
        Ok(x)
    }

    pub fn epsilon(&self) -> Result<f64, CliError> {
        let e = self.perturbation.epsilon.ok_or_else(|| missing("perturbation.epsilon"))?;
        if !(e > 0.0 && e < 1.0) {
            return Err(bad("perturbation.epsilon", format!("must lie in (0, 1), got {e}")));
        }
        Ok(e)
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        let l = self.perturbation.lambda.ok_or_else(|| missing("perturbation.lambda"))?;
        if !(l > 0.0 && l.is_finite()) {
            return Err(bad("perturbation.lambda", format!("must be positive, got {l}")));
        }
        Ok(l)
    }

    pub fn grid_lists(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let e = self.grid.epsilons.clone().unwrap_or_else(default_grid);
        let l = self.grid.lambdas.clone().unwrap_or_else(default_grid);
        validate_grid_list(&e, "epsilon").map_err(|m| bad("grid.epsilons", m))?;
        validate_grid_list(&l, "lambda").map_err(|m| bad("grid.lambdas", m))?;
        if e.iter().any(|v| *v >= 1.0) {
            return Err(bad("grid.epsilons", "values must lie below 1"));
        }
        Ok((e, l))
    }

    pub fn derivative_mode(&self) -> Result<DerivativeMode, CliError> {
        match self.derivative.mode.as_str() {
            "richardson" => Ok(DerivativeMode::Richardson {
                eps0: self.derivative.eps0,
                levels: self.derivative.levels,
            }),
            "closed_form" => Ok(DerivativeMode::ClosedForm),
            other => Err(bad("derivative.mode", format!("unknown mode `{other}`"))),
        }
    }
}

pub(crate) fn check_seed(seed: u64) -> Result<(), CliError> {
    if seed > i64::MAX as u64 {
        return Err(bad("demo.seed", "must fit in a signed 64-bit integer"));
    }
    Ok(())
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut String) {
    match v {
        toml::Value::Table(t) => {
            for (k, child) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        leaf => {
            let _ = writeln!(out, "{prefix} = {leaf}");
        }
    }
}

fn constant_arg(args: &[Expr], i: usize, what: &str) -> Result<f64, String> {
    args.get(i)
        .and_then(Expr::constant)
        .ok_or_else(|| format!("{what} must be a constant"))
}

fn arity(name: &str, args: &[Expr], n: usize) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("`{name}` takes {n} argument(s), got {}", args.len()))
    }
}

/// One conditional factor from its call syntax.
pub fn parse_factor(spec: &str) -> Result<CondFactor, String> {
    let (name, args) = expr::parse_application(spec).map_err(|e| e.to_string())?;
    let fam = |r: eif_core::Result<Family>| r.map(CondFactor::Marginal).map_err(|e| e.to_string());
    match name.as_str() {
        "beta" => {
            arity(&name, &args, 2)?;
            fam(Family::beta(constant_arg(&args, 0, "alpha")?, constant_arg(&args, 1, "beta")?))
        }
        "uniform" => {
            arity(&name, &args, 2)?;
            fam(Family::uniform(constant_arg(&args, 0, "lower")?, constant_arg(&args, 1, "upper")?))
        }
        "discrete_uniform" => {
            let support = (0..args.len()).map(|i| constant_arg(&args, i, "support values")).collect::<Result<_, _>>()?;
            fam(Family::discrete_uniform(support))
        }
        "bernoulli" => {
            arity(&name, &args, 1)?;
            let p = &args[0];
            if let Some(v) = p.constant() {
                return fam(Family::bernoulli(v));
            }
            if let Expr::Call(expr::Func::Expit, inner) = p {
                if let Some(lp) = inner[0].to_linear() {
                    return Ok(CondFactor::Logistic(lp));
                }
            }
            let p = p.clone();
            Ok(CondFactor::Custom(CustomFactor::new(ComponentSpec::binary(), None, move |v, h| {
                let q = p.eval(h).clamp(0.0, 1.0);
                if v == 1.0 {
                    q
                } else if v == 0.0 {
                    1.0 - q
                } else {
                    0.0
                }
            })))
        }
        "normal" => {
            arity(&name, &args, 2)?;
            let variance = constant_arg(&args, 1, "variance")?;
            if let Some(m) = args[0].constant() {
                return fam(Family::normal(m, variance));
            }
            let mean = args[0]
                .to_linear()
                .ok_or("normal mean must be affine in the history, optionally through c10")?;
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(format!("variance must be positive, got {variance}"));
            }
            Ok(CondFactor::Normal { mean, variance })
        }
        other => Err(format!("unknown factor `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_forms() {
        assert!(matches!(parse_factor("bernoulli(expit(-1 + 0.5*x0))"), Ok(CondFactor::Logistic(_))));
        assert!(matches!(parse_factor("bernoulli(0.3)"), Ok(CondFactor::Marginal(_))));
        assert!(matches!(parse_factor("bernoulli(x0 / 5)"), Ok(CondFactor::Custom(_))));
        assert!(matches!(parse_factor("normal(3*x0 - 3*x1, 4)"), Ok(CondFactor::Normal { .. })));
        assert!(parse_factor("normal(x0 * x1, 4)").is_err());
        assert!(parse_factor("normal(0, x0)").is_err());
        assert!(parse_factor("gamma(1, 2)").is_err());
        assert!(parse_factor("beta(3)").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("model.kinds = \"markov\"").is_err());
        assert!(RunConfig::parse("demo.seed = 5").is_ok());
    }
}
