//! Statistical models represented by their KL projection maps.

mod markov;
mod mean;
mod tilt;

use alloc::vec::Vec;

use crate::distributions::DensityModel;
use crate::error::Result;
use crate::settings::Settings;

pub use markov::{project_markov, MarkovProjected};
pub use mean::project_mean_constraint;
pub use tilt::{project_tilted, Basis};

/// Solver record of a projection.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverMeta {
    Identity,
    MeanConstraint {
        xi: f64,
        iterations: usize,
        bracket: (f64, f64),
        /// The dense-scan fallback located the root.
        dense_scan: bool,
        /// Sign changes counted by the dense scan, when it ran.
        sign_changes: Option<usize>,
    },
    Markov {
        latent_nodes: usize,
        ci_residual: f64,
    },
    Tilt {
        beta: Vec<f64>,
        iterations: usize,
        gradient_norm: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub projected: DensityModel,
    pub meta: SolverMeta,
    /// The model constraint holds within tolerance.
    pub feasible: bool,
}

/// A model, represented by the map `Q -> argmax_{P' in model} E_Q log p'`.
#[derive(Debug, Clone)]
pub enum ModelProjector {
    Nonparametric,
    /// Distributions on a bounded interval with mean `mu`.
    MeanConstrained { mu: f64 },
    /// Longitudinal laws where, under continued treatment, each `L_j` depends
    /// on the past only through `L_{j-1}`.
    MarkovLongitudinal,
    /// Exponential tilts of `reference` along `basis`.
    TiltedFamily { basis: Basis, reference: DensityModel },
}

impl ModelProjector {
    pub fn name(&self) -> &'static str {
        match self {
            ModelProjector::Nonparametric => "nonparametric",
            ModelProjector::MeanConstrained { .. } => "mean_constrained",
            ModelProjector::MarkovLongitudinal => "markov",
            ModelProjector::TiltedFamily { .. } => "tilted",
        }
    }

    pub fn project(&self, q: &DensityModel, settings: &Settings) -> Result<ProjectionOutcome> {
        match self {
            ModelProjector::Nonparametric => Ok(project_nonparametric(q)),
            ModelProjector::MeanConstrained { mu } => project_mean_constraint(q, *mu, settings),
            ModelProjector::MarkovLongitudinal => project_markov(q, settings),
            ModelProjector::TiltedFamily { basis, reference } => project_tilted(q, basis, reference, settings),
        }
    }
}

/// Identity projection.
pub fn project_nonparametric(q: &DensityModel) -> ProjectionOutcome {
    ProjectionOutcome {
        projected: q.clone(),
        meta: SolverMeta::Identity,
        feasible: true,
    }
}
