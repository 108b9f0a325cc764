use alloc::vec::Vec;

use super::cholesky_solve;
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Stop when the Euclidean gradient norm is at or below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { tol: 1e-14, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub argmax: Vec<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Maximizes a concave objective by Newton's method with step halving.
///
/// `hessian` returns the row-major m x m matrix. When `-H` is not positive
/// definite the step falls back to the gradient direction.
pub fn newton_maximize<O, G, H>(
    mut objective: O,
    mut gradient: G,
    mut hessian: H,
    beta0: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonReport>
where
    O: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
    H: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let m = beta0.len();
    let mut beta = beta0.to_vec();
    let mut f = objective(&beta)?;
    let mut g = gradient(&beta)?;
    let mut gn = norm(&g);
    let mut iterations = 0;
    while gn > settings.tol {
        if iterations >= settings.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                gradient_norm: gn,
                last: beta,
            });
        }
        iterations += 1;
        let h = hessian(&beta)?;
        let neg: Vec<f64> = h.iter().map(|v| -v).collect();
        let dir = cholesky_solve(&neg, &g).unwrap_or_else(|| g.clone());
        let slack = 64.0 * f64::EPSILON * (1.0 + f.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..m).map(|i| beta[i] + t * dir[i]).collect();
            if let Ok(ft) = objective(&trial) {
                if ft.is_finite() && ft >= f - slack {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            return Err(Error::NonConvergence {
                iterations,
                gradient_norm: gn,
                last: beta,
            });
        };
        beta = next;
        f = fnext;
        g = gradient(&beta)?;
        gn = norm(&g);
        if !gn.is_finite() {
            return Err(Error::NonFinite { location: beta });
        }
    }
    Ok(NewtonReport {
        argmax: beta,
        objective: f,
        gradient_norm: gn,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn scalar_quadratic() {
        let r = newton_maximize(
            |b| Ok(-(b[0] - 1.0) * (b[0] - 1.0)),
            |b| Ok(vec![-2.0 * (b[0] - 1.0)]),
            |_| Ok(vec![-2.0]),
            &[0.0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn vector_quadratic() {
        let b = [1.0, 2.0];
        let r = newton_maximize(
            |x| Ok(-(x[0] * x[0] + x[1] * x[1]) / 2.0 + b[0] * x[0] + b[1] * x[1]),
            |x| Ok(vec![b[0] - x[0], b[1] - x[1]]),
            |_| Ok(vec![-1.0, 0.0, 0.0, -1.0]),
            &[0.0, 0.0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert_eq!(r.argmax, vec![1.0, 2.0]);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let s = NewtonSettings { tol: 1e-14, max_iter: 2 };
        // log-concave but with tiny curvature far out: converges slowly from 0.
        let e = newton_maximize(
            |x| Ok(-libm::cosh(x[0] - 30.0)),
            |x| Ok(vec![-libm::sinh(x[0] - 30.0)]),
            |x| Ok(vec![-libm::cosh(x[0] - 30.0)]),
            &[0.0],
            &s,
        );
        match e {
            Err(Error::NonConvergence { iterations, last, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
