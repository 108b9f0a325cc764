use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::family::{bernoulli_pmf, normal_pdf, Family, NORMAL_SPAN_SD};
use crate::math;
use crate::space::ComponentSpec;

/// Transformation applied to a history coordinate inside a linear predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Identity,
    /// `clamp(u, -c, c)`.
    Clamp(f64),
}

impl Link {
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            Link::Identity => u,
            Link::Clamp(c) => u.clamp(-c, *c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub index: usize,
    pub coef: f64,
    pub link: Link,
}

/// `intercept + sum coef * link(u[index])`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearPredictor {
    pub intercept: f64,
    pub terms: Vec<Term>,
}

impl LinearPredictor {
    pub fn new(intercept: f64) -> Self {
        LinearPredictor {
            intercept,
            terms: Vec::new(),
        }
    }

    pub fn term(mut self, index: usize, coef: f64) -> Self {
        self.terms.push(Term {
            index,
            coef,
            link: Link::Identity,
        });
        self
    }

    pub fn clamped_term(mut self, index: usize, coef: f64, c: f64) -> Self {
        self.terms.push(Term {
            index,
            coef,
            link: Link::Clamp(c),
        });
        self
    }

    pub fn eval(&self, hist: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.intercept, |acc, t| acc + t.coef * t.link.apply(hist[t.index]))
    }

    pub(crate) fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.index).max()
    }

    /// Range of the predictor when each history coordinate ranges over a box.
    pub(crate) fn range(&self, boxes: &[(f64, f64)]) -> (f64, f64) {
        let mut lo = self.intercept;
        let mut hi = self.intercept;
        for t in &self.terms {
            let (a, b) = boxes[t.index];
            let (a, b) = (t.link.apply(a), t.link.apply(b));
            let (x, y) = (t.coef * a, t.coef * b);
            lo += x.min(y);
            hi += x.max(y);
        }
        (lo, hi)
    }
}

type FactorFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// User-supplied conditional density.
#[derive(Clone)]
pub struct CustomFactor {
    pub(crate) component: ComponentSpec,
    pub(crate) bounds: Option<(f64, f64)>,
    pub(crate) eval: Arc<FactorFn>,
}

impl CustomFactor {
    /// `bounds` gives the integration range when the component is continuous.
    pub fn new<F>(component: ComponentSpec, bounds: Option<(f64, f64)>, eval: F) -> Self
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        CustomFactor {
            component,
            bounds,
            eval: Arc::new(eval),
        }
    }
}

impl fmt::Debug for CustomFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFactor")
            .field("component", &self.component)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

/// Conditional density of one component given the earlier ones.
#[derive(Debug, Clone)]
pub enum CondFactor {
    /// Ignores the history.
    Marginal(Family),
    /// Bernoulli on {0, 1} with `P(1) = expit(predictor)`.
    Logistic(LinearPredictor),
    /// Normal with affine mean and fixed variance.
    Normal { mean: LinearPredictor, variance: f64 },
    Custom(CustomFactor),
}

impl CondFactor {
    pub fn component(&self) -> ComponentSpec {
        match self {
            CondFactor::Marginal(f) => f.component(),
            CondFactor::Logistic(_) => ComponentSpec::binary(),
            CondFactor::Normal { .. } => ComponentSpec::real_line(),
            CondFactor::Custom(c) => c.component.clone(),
        }
    }

    pub fn eval(&self, v: f64, hist: &[f64]) -> f64 {
        match self {
            CondFactor::Marginal(f) => f.density(v),
            CondFactor::Logistic(lp) => bernoulli_pmf(v, math::expit(lp.eval(hist))),
            CondFactor::Normal { mean, variance } => normal_pdf(v, mean.eval(hist), *variance),
            CondFactor::Custom(c) => (c.eval)(v, hist),
        }
    }

    pub(crate) fn max_history_index(&self) -> Option<usize> {
        match self {
            CondFactor::Logistic(lp) => lp.max_index(),
            CondFactor::Normal { mean, .. } => mean.max_index(),
            _ => None,
        }
    }

    pub(crate) fn predictor(&self) -> Option<&LinearPredictor> {
        match self {
            CondFactor::Logistic(lp) => Some(lp),
            CondFactor::Normal { mean, .. } => Some(mean),
            _ => None,
        }
    }

    /// Integration range given ranges for the history coordinates.
    pub(crate) fn quadrature_bounds(&self, boxes: &[(f64, f64)]) -> Option<(f64, f64)> {
        match self {
            CondFactor::Marginal(f) => f.quadrature_bounds(),
            CondFactor::Logistic(_) => None,
            CondFactor::Normal { mean, variance } => {
                let (lo, hi) = mean.range(boxes);
                let s = NORMAL_SPAN_SD * math::sqrt(*variance);
                Some((lo - s, hi + s))
            }
            CondFactor::Custom(c) => c.bounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_link() {
        let lp = LinearPredictor::new(-5.0).clamped_term(0, 1.0, 10.0).term(1, 0.5);
        assert_eq!(lp.eval(&[20.0, 2.0]), 6.0);
        assert_eq!(lp.eval(&[-3.0, 0.0]), -8.0);
        assert_eq!(lp.range(&[(-30.0, 30.0), (0.0, 4.0)]), (-15.0, 7.0));
    }

    #[test]
    fn logistic_factor_sums_to_one() {
        let f = CondFactor::Logistic(LinearPredictor::new(-1.0).term(0, 0.5));
        let h = [3.0];
        assert!((f.eval(0.0, &h) + f.eval(1.0, &h) - 1.0).abs() < 1e-15);
        assert!((f.eval(1.0, &h) - math::expit(0.5)).abs() < 1e-15);
    }
}
