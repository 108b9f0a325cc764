use alloc::format;
use alloc::vec::Vec;

use super::{ProjectionOutcome, SolverMeta};
use crate::distributions::{DensityModel, MeanTilted, Node};
use crate::error::{Error, Result};
use crate::numerics::{find_root, scan_sign_changes, NeumaierSum, RootBracket};
use crate::settings::Settings;
use crate::space::ComponentSpec;

const SCAN_POINTS: usize = 1000;
const FEASIBILITY_TOL: f64 = 1e-9;

/// Projects onto distributions with mean `mu`: `q* = q / (1 - xi (u - mu))`.
///
/// The multiplier solves `G(xi) = E_q[(u - mu) / (1 - xi (u - mu))] = 0`,
/// which is strictly increasing in `xi` on the admissible interval.
pub fn project_mean_constraint(q: &DensityModel, mu: f64, settings: &Settings) -> Result<ProjectionOutcome> {
    let space = q.space();
    if space.dim() != 1 {
        return Err(Error::UnsupportedSpace(format!(
            "the mean constraint needs a univariate space, got dimension {}",
            space.dim()
        )));
    }
    let (a, b) = match space.component(0) {
        ComponentSpec::Continuous { lower, upper } if lower.is_finite() && upper.is_finite() => (*lower, *upper),
        _ => {
            return Err(Error::UnsupportedSpace(
                "the mean constraint needs a bounded continuous support".into(),
            ))
        }
    };
    if !(mu > a && mu < b) {
        return Err(Error::input(format!("mean {mu} must lie strictly inside ({a}, {b})")));
    }

    let rule = q.rule(&settings.quadrature)?;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(rule.size());
    let mut bad = None;
    rule.for_each(|u, w| {
        let d = q.density(u);
        if !d.is_finite() {
            bad.get_or_insert_with(|| u.to_vec());
        } else if d != 0.0 {
            pts.push((u[0] - mu, w * d));
        }
    });
    if let Some(location) = bad {
        return Err(Error::NonFinite { location });
    }
    let g = |xi: f64| -> f64 {
        let s: NeumaierSum = pts.iter().map(|&(t, wq)| wq * t / (1.0 - xi * t)).collect();
        s.value()
    };

    let (lo, hi) = (1.0 / (a - mu), 1.0 / (b - mu));
    let delta = 1e-9 * (hi - lo);
    let bracket = RootBracket::new(lo + delta, hi - delta)?.with_tol(settings.root_tol);
    let (report, dense_scan, sign_changes) = match find_root(g, &bracket) {
        Ok(r) => (r, false, None),
        Err(Error::NoSignChange { .. }) => {
            let scan = scan_sign_changes(g, bracket.lo, bracket.hi, SCAN_POINTS);
            let Some((x0, x1)) = scan.bracket else {
                return Err(Error::Infeasible(format!(
                    "no sign change of the mean-constraint criterion on ({}, {})",
                    bracket.lo, bracket.hi
                )));
            };
            let sub = RootBracket::new(x0, x1)?.with_tol(settings.root_tol);
            (find_root(g, &sub)?, true, Some(scan.sign_changes))
        }
        Err(e) => return Err(e),
    };
    let xi = report.root;

    let mass: NeumaierSum = pts.iter().map(|&(t, wq)| wq / (1.0 - xi * t)).collect();
    let mean_gap = g(xi);
    let feasible = (mass.value() - 1.0).abs() <= FEASIBILITY_TOL && mean_gap.abs() <= FEASIBILITY_TOL;

    let projected = DensityModel::from_node(Node::MeanTilted(MeanTilted {
        source: q.clone(),
        mu,
        xi,
    }));
    Ok(ProjectionOutcome {
        projected,
        meta: SolverMeta::MeanConstraint {
            xi,
            iterations: report.iterations,
            bracket: (bracket.lo, bracket.hi),
            dense_scan,
            sign_changes,
        },
        feasible,
    })
}
