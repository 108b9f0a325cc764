//! Target parameters with cancellation-stable differences.

use alloc::format;

use crate::distributions::{rule_for, DensityModel};
use crate::error::{Error, Result};
use crate::longitudinal::{Layout, PairRecursion, Recursion};
use crate::numerics::QuadratureSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    AverageDensity,
    GCompMean,
    Mean { component: usize },
    Other,
}

/// A parameter `Psi` of a distribution.
pub trait Functional: Send + Sync {
    fn name(&self) -> &str;

    fn kind(&self) -> FunctionalKind {
        FunctionalKind::Other
    }

    fn evaluate(&self, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64>;

    /// `Psi(p1) - Psi(p)` computed without subtracting nearly equal numbers.
    /// `None` when no stable route relates `p1` to `p`.
    fn difference(&self, _p1: &DensityModel, _p: &DensityModel, _quad: &QuadratureSettings) -> Option<Result<f64>> {
        None
    }
}

/// `Psi(P) = int p(u)^2 du`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AverageDensity;

/// `E[L_{K+1}]` under continued treatment, by G-computation.
#[derive(Debug, Clone, Copy, Default)]
pub struct GCompMean;

/// `E[U_c]`.
#[derive(Debug, Clone, Copy)]
pub struct MeanFunctional {
    pub component: usize,
}

fn require_continuous(p: &DensityModel) -> Result<()> {
    if p.space().is_all_continuous() {
        Ok(())
    } else {
        Err(Error::UnsupportedSpace(
            "the average density value needs an all-continuous space".into(),
        ))
    }
}

pub fn avg_density_value(p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
    require_continuous(p)?;
    p.rule(quad)?.integrate(|u| {
        let d = p.density(u);
        d * d
    })
}

/// `int (p1 - p)(p1 + p)`, with `p1 - p` taken from the construction records when possible.
pub fn avg_density_diff(p1: &DensityModel, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
    require_continuous(p1)?;
    if p1.space() != p.space() {
        return Err(Error::input("average density difference needs a shared space"));
    }
    if p1.same_as(p) {
        return Ok(0.0);
    }
    rule_for(&[p1, p], quad)?.integrate(|u| {
        let b = p.density(u);
        let d = p1.diff(p, u).unwrap_or_else(|| p1.density(u) - b);
        d * (2.0 * b + d)
    })
}

pub fn gcomp_mean(p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
    let layout = Layout::for_space(p.space())?;
    let axes = layout.l_axes(&[p], quad)?;
    Recursion { law: p, layout, axes: &axes }.psi()
}

/// Stage-wise differenced G-computation on a shared grid.
pub fn gcomp_diff(p1: &DensityModel, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
    if p1.space() != p.space() {
        return Err(Error::input("g-computation difference needs a shared space"));
    }
    let layout = Layout::for_space(p.space())?;
    if p1.same_as(p) {
        return Ok(0.0);
    }
    let axes = layout.l_axes(&[p1, p], quad)?;
    PairRecursion {
        q: p1,
        p,
        layout,
        axes: &axes,
    }
    .psi_diff()
}

impl Functional for AverageDensity {
    fn name(&self) -> &str {
        "avg_density"
    }

    fn kind(&self) -> FunctionalKind {
        FunctionalKind::AverageDensity
    }

    fn evaluate(&self, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
        avg_density_value(p, quad)
    }

    fn difference(&self, p1: &DensityModel, p: &DensityModel, quad: &QuadratureSettings) -> Option<Result<f64>> {
        p1.has_stable_diff(p).then(|| avg_density_diff(p1, p, quad))
    }
}

impl Functional for GCompMean {
    fn name(&self) -> &str {
        "gcomp_mean"
    }

    fn kind(&self) -> FunctionalKind {
        FunctionalKind::GCompMean
    }

    fn evaluate(&self, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
        gcomp_mean(p, quad)
    }

    fn difference(&self, p1: &DensityModel, p: &DensityModel, quad: &QuadratureSettings) -> Option<Result<f64>> {
        Some(gcomp_diff(p1, p, quad))
    }
}

impl Functional for MeanFunctional {
    fn name(&self) -> &str {
        "mean"
    }

    fn kind(&self) -> FunctionalKind {
        FunctionalKind::Mean {
            component: self.component,
        }
    }

    fn evaluate(&self, p: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
        let c = self.component;
        if c >= p.dim() {
            return Err(Error::input(format!("mean of component {c} in a {}-dimensional space", p.dim())));
        }
        p.expect(|u| u[c], quad)
    }

    fn difference(&self, p1: &DensityModel, p: &DensityModel, quad: &QuadratureSettings) -> Option<Result<f64>> {
        let c = self.component;
        if !p1.has_stable_diff(p) || c >= p.dim() {
            return None;
        }
        Some(rule_for(&[p1, p], quad).and_then(|rule| {
            rule.integrate(|u| u[c] * p1.diff(p, u).unwrap_or_else(|| p1.density(u) - p.density(u)))
        }))
    }
}
