//! Smoothed point-mass perturbation paths.

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{make_bump, mix, mixture, DensityModel, KernelBump};
use crate::error::{Error, Result};
use crate::math;
use crate::numerics::QuadratureSettings;

/// Densities below this inside a bump's support count as domination failures.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `P_eps = (1 - eps) P + eps H`.
#[derive(Debug, Clone)]
pub struct PerturbationPath {
    base: DensityModel,
    bump: DensityModel,
    epsilon: f64,
    lambda: f64,
    realized: DensityModel,
}

impl PerturbationPath {
    /// Path toward the bump at `x` with half-width `lambda`.
    pub fn new(base: &DensityModel, x: &[f64], lambda: f64, epsilon: f64) -> Result<Self> {
        let bump: DensityModel = make_bump(x, lambda, base)?.into();
        Self::with_bump(base, bump, lambda, epsilon)
    }

    /// Path toward an arbitrary dominated perturbation, e.g. a mixture of bumps.
    pub fn with_bump(base: &DensityModel, bump: DensityModel, lambda: f64, epsilon: f64) -> Result<Self> {
        let realized = mix(base, &bump, epsilon)?;
        Ok(PerturbationPath {
            base: base.clone(),
            bump,
            epsilon,
            lambda,
            realized,
        })
    }

    pub fn base(&self) -> &DensityModel {
        &self.base
    }

    pub fn bump(&self) -> &DensityModel {
        &self.bump
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn realized(&self) -> &DensityModel {
        &self.realized
    }
}

/// `sqrt(int h^2 / p)`, the L2(P) norm of dH/dP.
///
/// Integrates over the support of `h`.
pub fn r_lambda(base: &DensityModel, h: &DensityModel, settings: &QuadratureSettings) -> Result<f64> {
    if base.space() != h.space() {
        return Err(Error::input("bump and base live on different sample spaces"));
    }
    let rule = h.rule(settings)?;
    let mut floor_hit = None;
    let v = rule.integrate(|u| {
        let hv = h.density(u);
        if hv == 0.0 {
            return 0.0;
        }
        let p = base.density(u);
        if p < DENSITY_FLOOR {
            floor_hit.get_or_insert_with(|| u.to_vec());
            return 0.0;
        }
        hv * hv / p
    })?;
    if let Some(at) = floor_hit {
        return Err(Error::Domination(format!("base density vanishes inside the bump support at {at:?}")));
    }
    Ok(math::sqrt(v))
}

/// Same as [`r_lambda`] for a [`KernelBump`].
pub fn r_lambda_bump(bump: &KernelBump, settings: &QuadratureSettings) -> Result<f64> {
    let h: DensityModel = bump.clone().into();
    r_lambda(bump.base(), &h, settings)
}

/// Recommended ceiling on eps for half-width `lambda` and `d1` smoothed components.
pub fn epsilon_guideline(lambda: f64, d1: usize) -> f64 {
    if d1 == 0 {
        1e-2
    } else {
        math::pow(lambda, 2.0 * d1 as f64) / 100.0
    }
}

/// Uniform mixture of bumps centered at each data point.
pub fn mixture_bump(data: &[Vec<f64>], lambda: f64, base: &DensityModel) -> Result<DensityModel> {
    if data.is_empty() {
        return Err(Error::input("mixture of bumps needs at least one point"));
    }
    let w = 1.0 / data.len() as f64;
    let mut parts = Vec::with_capacity(data.len());
    for (i, x) in data.iter().enumerate() {
        let b = make_bump(x, lambda, base).map_err(|e| match e {
            Error::Domination(m) => Error::Domination(format!("observation {i}: {m}")),
            Error::DimensionMismatch { expected, found } => {
                Error::InvalidInput(format!("observation {i} has {found} components, expected {expected}"))
            }
            other => other,
        })?;
        parts.push((w, DensityModel::from(b)));
    }
    if parts.len() == 1 {
        return Ok(parts.pop().map(|(_, m)| m).expect("one part"));
    }
    // Weights n * (1/n) may not add to exactly one in floating point.
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    if let Some(last) = parts.last_mut() {
        last.0 += 1.0 - total;
    }
    mixture(parts)
}
