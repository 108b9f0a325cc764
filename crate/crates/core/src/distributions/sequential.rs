use alloc::format;
use alloc::vec::Vec;

use super::factor::{CondFactor, Link};
use crate::error::{Error, Result};
use crate::space::{ComponentSpec, SampleSpace};

/// Joint law written as a product of conditional factors in coordinate order.
#[derive(Debug, Clone)]
pub struct SequentialFactorization {
    space: SampleSpace,
    factors: Vec<CondFactor>,
    bounds: Vec<Option<(f64, f64)>>,
    breakpoints: Vec<Vec<f64>>,
}

impl SequentialFactorization {
    pub fn new(factors: Vec<CondFactor>) -> Result<Self> {
        let space = SampleSpace::new(factors.iter().map(CondFactor::component).collect())?;
        let mut boxes: Vec<(f64, f64)> = Vec::with_capacity(factors.len());
        let mut bounds = Vec::with_capacity(factors.len());
        let mut breakpoints = alloc::vec![Vec::new(); factors.len()];
        for (j, f) in factors.iter().enumerate() {
            if let Some(m) = f.max_history_index() {
                if m >= j {
                    return Err(Error::input(format!(
                        "factor {j} refers to component {m}, which is not in its history"
                    )));
                }
            }
            if let CondFactor::Custom(c) = f {
                if c.component.is_continuous() && c.bounds.is_none() {
                    return Err(Error::input(format!("continuous custom factor {j} needs integration bounds")));
                }
            }
            if let Some(lp) = f.predictor() {
                for t in &lp.terms {
                    if let Link::Clamp(c) = t.link {
                        if space.component(t.index).is_continuous() {
                            breakpoints[t.index].push(-c);
                            breakpoints[t.index].push(c);
                        }
                    }
                }
            }
            let b = match space.component(j) {
                ComponentSpec::Continuous { lower, upper } => {
                    let (lo, hi) = f.quadrature_bounds(&boxes).unwrap_or((*lower, *upper));
                    Some((lo.max(*lower), hi.min(*upper)))
                }
                ComponentSpec::Discrete { .. } => None,
            };
            boxes.push(match (&b, space.component(j)) {
                (Some(r), _) => *r,
                (None, ComponentSpec::Discrete { support }) => {
                    let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                }
                (None, ComponentSpec::Continuous { lower, upper }) => (*lower, *upper),
            });
            bounds.push(b);
        }
        Ok(SequentialFactorization {
            space,
            factors,
            bounds,
            breakpoints,
        })
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn factors(&self) -> &[CondFactor] {
        &self.factors
    }

    /// Factor `c` evaluated at `u[c]` given `u[..c]`.
    pub fn conditional(&self, c: usize, u: &[f64]) -> f64 {
        self.factors[c].eval(u[c], &u[..c])
    }

    /// Joint density of the first `k` components.
    pub fn prefix(&self, k: usize, u: &[f64]) -> f64 {
        let mut p = 1.0;
        for c in 0..k {
            p *= self.conditional(c, u);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }

    pub fn joint(&self, u: &[f64]) -> f64 {
        self.prefix(self.factors.len(), u)
    }

    pub fn quadrature_bounds(&self, c: usize) -> Option<(f64, f64)> {
        self.bounds[c]
    }

    pub fn breakpoints(&self, c: usize) -> &[f64] {
        &self.breakpoints[c]
    }
}

/// Product of the factor evaluations along `u`.
pub fn sequential_joint(fact: &SequentialFactorization, u: &[f64]) -> Result<f64> {
    fact.space.check_dim(u)?;
    Ok(fact.joint(u))
}
