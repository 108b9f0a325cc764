//! Secant and derivative EIF approximations, epsilon-lambda grids and the
//! one-step estimator.

mod grid;

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{make_bump, mix, rule_for, DensityModel};
use crate::error::{Error, Result};
use crate::functionals::{Functional, FunctionalKind};
use crate::numerics::try_richardson_derivative;
use crate::perturbation::mixture_bump;
use crate::projection::{ModelProjector, ProjectionOutcome, SolverMeta};
use crate::settings::Settings;

pub use grid::{default_grid, detect_plateau, validate_grid_list, CellStatus, EifGrid, GridCell, Plateau, PlateauSettings};

/// One secant slope `[Psi(P*) - Psi(P)] / eps`.
#[derive(Debug, Clone)]
pub struct SecantEstimate {
    pub epsilon: f64,
    pub lambda: f64,
    pub value: f64,
    pub psi_base: f64,
    pub psi_star: f64,
    pub difference: f64,
    pub projection_meta: SolverMeta,
    pub feasible: bool,
    /// The functional's stable difference evaluator produced `difference`.
    pub stable_path: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Richardson extrapolation of forward differences; `eps0` defaults to `lambda^2 / 100`.
    Richardson { eps0: Option<f64>, levels: usize },
    /// Registered analytic derivative along the path.
    ClosedForm,
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::Richardson { eps0: None, levels: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneStepResult {
    pub plug_in: f64,
    pub correction: f64,
    pub estimate: f64,
    pub n: usize,
    pub epsilon: f64,
    pub lambda: f64,
}

/// Outcome of moving along a path and projecting once.
#[derive(Debug, Clone)]
pub struct PathDifference {
    pub difference: f64,
    pub psi_star: f64,
    pub outcome: ProjectionOutcome,
    pub stable_path: bool,
}

/// A distribution, a model and a functional.
pub struct Engine<'a> {
    base: DensityModel,
    model: &'a ModelProjector,
    psi: &'a dyn Functional,
    settings: Settings,
    psi_base: f64,
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("lambda must be positive and finite, got {lambda}")))
    }
}

impl<'a> Engine<'a> {
    pub fn new(base: &DensityModel, model: &'a ModelProjector, psi: &'a dyn Functional, settings: Settings) -> Result<Self> {
        settings.validate()?;
        let psi_base = psi.evaluate(base, &settings.quadrature)?;
        Ok(Engine {
            base: base.clone(),
            model,
            psi,
            settings,
            psi_base,
        })
    }

    pub fn base(&self) -> &DensityModel {
        &self.base
    }

    pub fn model(&self) -> &ModelProjector {
        self.model
    }

    pub fn functional(&self) -> &dyn Functional {
        self.psi
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn psi_base(&self) -> f64 {
        self.psi_base
    }

    /// Mixes toward `h` with weight `eps`, projects, and differences the functional.
    pub fn path_difference(&self, h: &DensityModel, epsilon: f64) -> Result<PathDifference> {
        let q = mix(&self.base, h, epsilon)?;
        let outcome = self.model.project(&q, &self.settings)?;
        let quad = &self.settings.quadrature;
        let psi_star = self.psi.evaluate(&outcome.projected, quad)?;
        let (difference, stable_path) = match self.psi.difference(&outcome.projected, &self.base, quad) {
            Some(d) => (d?, true),
            None => (psi_star - self.psi_base, false),
        };
        Ok(PathDifference {
            difference,
            psi_star,
            outcome,
            stable_path,
        })
    }

    pub fn secant(&self, x: &[f64], epsilon: f64, lambda: f64) -> Result<SecantEstimate> {
        check_unit_open("epsilon", epsilon)?;
        check_lambda(lambda)?;
        let h: DensityModel = make_bump(x, lambda, &self.base)?.into();
        let pd = self.path_difference(&h, epsilon)?;
        let value = pd.difference / epsilon;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                location: x.to_vec(),
            });
        }
        Ok(SecantEstimate {
            epsilon,
            lambda,
            value,
            psi_base: self.psi_base,
            psi_star: pd.psi_star,
            difference: pd.difference,
            projection_meta: pd.outcome.meta,
            feasible: pd.outcome.feasible,
            stable_path: pd.stable_path,
        })
    }

    /// Right derivative of `eps -> Psi(P*_eps)` at 0 for fixed `lambda`.
    pub fn derivative(&self, x: &[f64], lambda: f64, mode: DerivativeMode) -> Result<f64> {
        check_lambda(lambda)?;
        let h: DensityModel = make_bump(x, lambda, &self.base)?.into();
        match mode {
            DerivativeMode::Richardson { eps0, levels } => {
                let eps0 = eps0.unwrap_or(lambda * lambda * 1e-2).min(0.5);
                try_richardson_derivative(|e| Ok(self.path_difference(&h, e)?.difference), eps0, levels)
            }
            DerivativeMode::ClosedForm => self.closed_form(&h),
        }
    }

    fn closed_form(&self, h: &DensityModel) -> Result<f64> {
        match (self.model, self.psi.kind()) {
            (ModelProjector::Nonparametric, FunctionalKind::AverageDensity) => {
                let p = &self.base;
                rule_for(&[h, p], &self.settings.quadrature)?.integrate(|u| {
                    let b = p.density(u);
                    2.0 * b * (h.density(u) - b)
                })
            }
            (m, _) => Err(Error::Unsupported(format!(
                "no closed-form derivative registered for the {} model with the {} functional",
                m.name(),
                self.psi.name()
            ))),
        }
    }

    /// Secant at one grid cell; failures are recorded, not raised.
    pub fn grid_cell(&self, x: &[f64], epsilon: f64, lambda: f64) -> GridCell {
        match self.secant(x, epsilon, lambda) {
            Ok(s) => GridCell {
                epsilon,
                lambda,
                value: s.value,
                psi_star: s.psi_star,
                psi_base: s.psi_base,
                stable_path: s.stable_path,
                status: CellStatus::Ok,
            },
            Err(e) => GridCell::failed(epsilon, lambda, self.psi_base, format!("{e}")),
        }
    }

    /// Evaluates every cell in order and detects the plateau.
    pub fn build_grid(&self, x: &[f64], epsilons: &[f64], lambdas: &[f64], plateau: PlateauSettings) -> Result<EifGrid> {
        validate_grid_list(epsilons, "epsilon")?;
        validate_grid_list(lambdas, "lambda")?;
        self.base.space().check_dim(x)?;
        let mut cells = Vec::with_capacity(epsilons.len() * lambdas.len());
        for &e in epsilons {
            for &l in lambdas {
                cells.push(self.grid_cell(x, e, l));
            }
        }
        EifGrid::assemble(epsilons.to_vec(), lambdas.to_vec(), cells, plateau)
    }

    /// `Psi(P) + [Psi(P*) - Psi(P)] / eps` along the uniform mixture of bumps at the data.
    pub fn one_step(&self, data: &[Vec<f64>], epsilon: f64, lambda: f64) -> Result<OneStepResult> {
        check_unit_open("epsilon", epsilon)?;
        check_lambda(lambda)?;
        let h = mixture_bump(data, lambda, &self.base)?;
        let pd = self.path_difference(&h, epsilon)?;
        let estimate = self.psi_base + pd.difference / epsilon;
        if !estimate.is_finite() {
            return Err(Error::NonFinite { location: Vec::new() });
        }
        Ok(OneStepResult {
            plug_in: self.psi_base,
            correction: estimate - self.psi_base,
            estimate,
            n: data.len(),
            epsilon,
            lambda,
        })
    }
}

/// Free-function form of [`Engine::secant`].
pub fn secant_eif(
    p: &DensityModel,
    model: &ModelProjector,
    psi: &dyn Functional,
    x: &[f64],
    epsilon: f64,
    lambda: f64,
    settings: Settings,
) -> Result<SecantEstimate> {
    Engine::new(p, model, psi, settings)?.secant(x, epsilon, lambda)
}
