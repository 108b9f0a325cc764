//! Empirical checks of the conditions behind the secant approximation.

use alloc::vec::Vec;

use crate::distributions::{make_bump, mix, rule_for, DensityModel};
use crate::engine::Engine;
use crate::error::Result;
use crate::functionals::Functional;
use crate::math;
use crate::numerics::QuadratureSettings;
use crate::oracles::OracleEif;
use crate::perturbation::{epsilon_guideline, r_lambda};

/// `R(P1, P) = Psi(P1) - Psi(P) + int phi_{P1} dP`.
pub fn remainder(
    psi: &dyn Functional,
    oracle_at_p1: &OracleEif,
    p1: &DensityModel,
    p: &DensityModel,
    quad: &QuadratureSettings,
) -> Result<f64> {
    let diff = match psi.difference(p1, p, quad) {
        Some(d) => d?,
        None => psi.evaluate(p1, quad)? - psi.evaluate(p, quad)?,
    };
    // int phi dP = int phi dP1 - int phi (p1 - p), the second integrand being O(p1 - p).
    let rule = rule_for(&[p1, p], quad)?;
    let centered = rule.integrate(|u| oracle_at_p1.evaluate(u) * p1.density(u))?;
    let shift = rule.integrate(|u| {
        let d = p1.diff(p, u).unwrap_or_else(|| p1.density(u) - p.density(u));
        oracle_at_p1.evaluate(u) * d
    })?;
    Ok(diff + centered - shift)
}

/// `|int phi* dP_eps|`.
pub fn check_a1(phi_star: &OracleEif, p_eps_lambda: &DensityModel, quad: &QuadratureSettings) -> Result<f64> {
    Ok(p_eps_lambda.expect(|u| phi_star.evaluate(u), quad)?.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderPoint {
    pub epsilon: f64,
    pub lambda: f64,
    pub remainder: f64,
    pub r_lambda: f64,
    pub a1_residual: f64,
}

impl RemainderPoint {
    /// `R / [eps (1 + r)]^2`.
    pub fn bound_ratio(&self) -> f64 {
        let s = self.epsilon * (1.0 + self.r_lambda);
        self.remainder / (s * s)
    }
}

/// Sweep results at one `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub lambda: f64,
    pub r_lambda: f64,
    /// Largest A1 residual over the sweep.
    pub a1_residual: f64,
    pub rows: Vec<RemainderPoint>,
    pub loglog_slope_in_eps: f64,
    /// Every swept eps is at most `lambda^(2 d1) / 100`.
    pub guideline_ok: bool,
}

impl ConditionReport {
    pub fn remainder_values(&self) -> Vec<(f64, f64, f64)> {
        self.rows.iter().map(|r| (r.epsilon, r.lambda, r.remainder)).collect()
    }
}

/// Least-squares slope of `ln|R|` on `ln eps`, skipping zero remainders.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, r)| *e > 0.0 && *r != 0.0 && r.is_finite())
        .map(|(e, r)| (math::ln(*e), math::ln(r.abs())))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Remainder and A1 sweep over `epsilons` x `lambdas`.
///
/// `oracle_at` must return the EIF at a projected distribution.
pub fn condition_sweep<F>(engine: &Engine<'_>, x: &[f64], epsilons: &[f64], lambdas: &[f64], oracle_at: F) -> Result<Vec<ConditionReport>>
where
    F: Fn(&DensityModel) -> Result<OracleEif>,
{
    let p = engine.base();
    let quad = &engine.settings().quadrature;
    let d1 = p.space().continuous_dims();
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let h: DensityModel = make_bump(x, lambda, p)?.into();
        let r = r_lambda(p, &h, quad)?;
        let mut rows = Vec::with_capacity(epsilons.len());
        for &epsilon in epsilons {
            let q = mix(p, &h, epsilon)?;
            let star = engine.model().project(&q, engine.settings())?.projected;
            let phi = oracle_at(&star)?;
            rows.push(RemainderPoint {
                epsilon,
                lambda,
                remainder: remainder(engine.functional(), &phi, &star, p, quad)?,
                r_lambda: r,
                a1_residual: check_a1(&phi, &q, quad)?,
            });
        }
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, r.remainder)).collect();
        out.push(ConditionReport {
            lambda,
            r_lambda: r,
            a1_residual: rows.iter().map(|r| r.a1_residual).fold(0.0, f64::max),
            loglog_slope_in_eps: loglog_slope(&pts),
            guideline_ok: epsilons.iter().all(|e| *e <= epsilon_guideline(lambda, d1)),
            rows,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundProbe {
    /// `(eps, lambda, R / [eps (1 + r)]^2)`.
    pub ratios: Vec<(f64, f64, f64)>,
    /// Largest over smallest non-zero absolute ratio; `None` if all are zero.
    pub max_over_min: Option<f64>,
    /// Some lambda has its ratio grow more than tenfold from the largest to the smallest eps.
    pub growth_flag: bool,
    /// Cells with eps above `lambda^(2 d1) / 100`.
    pub outside_guideline: Vec<(f64, f64)>,
}

/// Tabulates the normalized remainder across a sweep.
pub fn remainder_bound_probe(points: &[RemainderPoint], d1: usize) -> BoundProbe {
    let ratios: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.epsilon, p.lambda, p.bound_ratio())).collect();
    let abs: Vec<f64> = ratios.iter().map(|r| r.2.abs()).filter(|v| *v > 0.0 && v.is_finite()).collect();
    let max_over_min = if abs.is_empty() {
        None
    } else {
        let hi = abs.iter().copied().fold(0.0, f64::max);
        let lo = abs.iter().copied().fold(f64::INFINITY, f64::min);
        Some(hi / lo)
    };
    let mut growth_flag = false;
    let mut lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    for l in lambdas {
        let mut at: Vec<&(f64, f64, f64)> = ratios.iter().filter(|r| r.1 == l).collect();
        at.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let (Some(first), Some(last)) = (at.first(), at.last()) {
            if first.2.abs() > 0.0 && last.2.abs() > 10.0 * first.2.abs() {
                growth_flag = true;
            }
        }
    }
    let outside_guideline = points
        .iter()
        .filter(|p| p.epsilon > epsilon_guideline(p.lambda, d1))
        .map(|p| (p.epsilon, p.lambda))
        .collect();
    BoundProbe {
        ratios,
        max_over_min,
        growth_flag,
        outside_guideline,
    }
}
