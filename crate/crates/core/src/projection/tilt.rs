use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{ProjectionOutcome, SolverMeta};
use crate::distributions::{rule_for, DensityModel, ExpTilted, Node};
use crate::error::{Error, Result};
use crate::math;
use crate::numerics::{newton_maximize, NeumaierSum};
use crate::settings::Settings;

type BasisFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Finite list of sufficient statistics `h_1 .. h_m`.
#[derive(Clone, Default)]
pub struct Basis {
    funcs: Vec<Arc<BasisFn>>,
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis({} functions)", self.funcs.len())
    }
}

impl Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.funcs.push(Arc::new(f));
        self
    }

    /// `h(u) = u[c]`.
    pub fn coordinate(c: usize) -> Self {
        Basis::new().with(move |u: &[f64]| u[c])
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn eval(&self, j: usize, u: &[f64]) -> f64 {
        (self.funcs[j])(u)
    }
}

struct TiltNode {
    /// Centered basis values.
    hc: Vec<f64>,
    /// Quadrature weight times reference density.
    wr: f64,
}

/// KL projection onto `{ p exp(beta . h) / Z(beta) }`, maximizing
/// `beta . E_q h - log Z(beta)` by Newton's method from `beta = 0`.
pub fn project_tilted(q: &DensityModel, basis: &Basis, reference: &DensityModel, settings: &Settings) -> Result<ProjectionOutcome> {
    let m = basis.len();
    if m == 0 {
        return Err(Error::input("the tilt basis is empty"));
    }
    if q.space() != reference.space() {
        return Err(Error::input("tilt target and reference live on different sample spaces"));
    }
    let rule = rule_for(&[q, reference], &settings.quadrature)?;
    let mut raw: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    let mut bad = None;
    rule.for_each(|u, w| {
        let r = reference.density(u);
        let d = q.diff(reference, u).unwrap_or_else(|| q.density(u) - r);
        if r == 0.0 && d == 0.0 {
            return;
        }
        let h: Vec<f64> = (0..m).map(|j| basis.eval(j, u)).collect();
        if !r.is_finite() || !d.is_finite() || h.iter().any(|v| !v.is_finite()) {
            bad.get_or_insert_with(|| u.to_vec());
            return;
        }
        raw.push((h, w * r, w * d));
    });
    if let Some(location) = bad {
        return Err(Error::NonFinite { location });
    }

    let mut centers = alloc::vec![0.0; m];
    let mut target = alloc::vec![0.0; m];
    for (j, (c, t)) in centers.iter_mut().zip(target.iter_mut()).enumerate() {
        *c = raw.iter().map(|(h, wr, _)| wr * h[j]).collect::<NeumaierSum>().value();
        *t = raw.iter().map(|(h, _, wd)| wd * h[j]).collect::<NeumaierSum>().value();
    }
    let nodes: Vec<TiltNode> = raw
        .iter()
        .filter(|(_, wr, _)| *wr != 0.0)
        .map(|(h, wr, _)| TiltNode {
            hc: h.iter().zip(&centers).map(|(v, c)| v - c).collect(),
            wr: *wr,
        })
        .collect();
    let s0: Vec<f64> = (0..m)
        .map(|j| nodes.iter().map(|n| n.wr * n.hc[j]).collect::<NeumaierSum>().value())
        .collect();

    let dot = |b: &[f64], h: &[f64]| -> f64 { b.iter().zip(h).map(|(x, y)| x * y).sum() };
    let excess = |b: &[f64]| -> f64 { nodes.iter().map(|n| n.wr * math::expm1(dot(b, &n.hc))).collect::<NeumaierSum>().value() };
    let tilted_mean = |b: &[f64]| -> (Vec<f64>, f64) {
        let a = excess(b);
        let mut e = alloc::vec![NeumaierSum::new(); m];
        for n in &nodes {
            let x = math::expm1(dot(b, &n.hc));
            for j in 0..m {
                e[j].add(n.wr * n.hc[j] * x);
            }
        }
        ((0..m).map(|j| (e[j].value() + s0[j]) / (1.0 + a)).collect(), a)
    };

    let objective = |b: &[f64]| -> Result<f64> {
        let v = dot(b, &target) - math::ln_1p(excess(b));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { location: b.to_vec() })
        }
    };
    let gradient = |b: &[f64]| -> Result<Vec<f64>> {
        let (mean, _) = tilted_mean(b);
        Ok(target.iter().zip(&mean).map(|(t, e)| t - e).collect())
    };
    let hessian = |b: &[f64]| -> Result<Vec<f64>> {
        let (mean, a) = tilted_mean(b);
        let mut hm = alloc::vec![0.0; m * m];
        for n in &nodes {
            let f = n.wr * (1.0 + math::expm1(dot(b, &n.hc))) / (1.0 + a);
            for i in 0..m {
                for j in 0..m {
                    hm[i * m + j] += f * n.hc[i] * n.hc[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                hm[i * m + j] = -(hm[i * m + j] - mean[i] * mean[j]);
            }
        }
        Ok(hm)
    };
    let beta0 = alloc::vec![0.0; m];
    let report = newton_maximize(objective, gradient, hessian, &beta0, &settings.newton)?;
    let log_norm = math::ln_1p(excess(&report.argmax));

    let projected = DensityModel::from_node(Node::ExpTilted(ExpTilted {
        reference: reference.clone(),
        basis: basis.clone(),
        beta: report.argmax.clone(),
        centers,
        log_norm,
        quadrature: settings.quadrature,
    }));
    Ok(ProjectionOutcome {
        projected,
        meta: SolverMeta::Tilt {
            beta: report.argmax,
            iterations: report.iterations,
            gradient_norm: report.gradient_norm,
        },
        feasible: report.gradient_norm <= settings.newton.tol,
    })
}
