use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;
use crate::space::ComponentSpec;

/// Quadrature half-range for Normal laws, in standard deviations.
pub(crate) const NORMAL_SPAN_SD: f64 = 8.0;

/// Standard univariate families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Beta { alpha: f64, beta: f64 },
    Normal { mean: f64, variance: f64 },
    Uniform { lower: f64, upper: f64 },
    DiscreteUniform { support: Vec<f64> },
    Bernoulli { p: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Family {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        positive("beta alpha", alpha)?;
        positive("beta beta", beta)?;
        Ok(Family::Beta { alpha, beta })
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::input("normal mean must be finite"));
        }
        positive("normal variance", variance)?;
        Ok(Family::Normal { mean, variance })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::input(format!("uniform bounds must be finite with lower < upper, got ({lower}, {upper})")));
        }
        Ok(Family::Uniform { lower, upper })
    }

    pub fn discrete_uniform(support: Vec<f64>) -> Result<Self> {
        ComponentSpec::discrete(support.clone())?;
        Ok(Family::DiscreteUniform { support })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("bernoulli probability must lie in [0, 1], got {p}")));
        }
        Ok(Family::Bernoulli { p })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Beta { .. } => "beta",
            Family::Normal { .. } => "normal",
            Family::Uniform { .. } => "uniform",
            Family::DiscreteUniform { .. } => "discrete_uniform",
            Family::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn component(&self) -> ComponentSpec {
        match self {
            Family::Beta { .. } => ComponentSpec::Continuous { lower: 0.0, upper: 1.0 },
            Family::Normal { .. } => ComponentSpec::real_line(),
            Family::Uniform { lower, upper } => ComponentSpec::Continuous {
                lower: *lower,
                upper: *upper,
            },
            Family::DiscreteUniform { support } => ComponentSpec::Discrete { support: support.clone() },
            Family::Bernoulli { .. } => ComponentSpec::binary(),
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        match self {
            Family::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&v) {
                    return 0.0;
                }
                math::pow(v, alpha - 1.0) * math::pow(1.0 - v, beta - 1.0) * math::exp(-math::ln_beta(*alpha, *beta))
            }
            Family::Normal { mean, variance } => normal_pdf(v, *mean, *variance),
            Family::Uniform { lower, upper } => {
                if v >= *lower && v <= *upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            Family::DiscreteUniform { support } => {
                if support.contains(&v) {
                    1.0 / support.len() as f64
                } else {
                    0.0
                }
            }
            Family::Bernoulli { p } => bernoulli_pmf(v, *p),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Family::Beta { alpha, beta } => alpha / (alpha + beta),
            Family::Normal { mean, .. } => *mean,
            Family::Uniform { lower, upper } => 0.5 * (lower + upper),
            Family::DiscreteUniform { support } => support.iter().sum::<f64>() / support.len() as f64,
            Family::Bernoulli { p } => *p,
        }
    }

    /// Finite integration range for continuous families.
    pub fn quadrature_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Family::Beta { .. } => Some((0.0, 1.0)),
            Family::Normal { mean, variance } => {
                let s = NORMAL_SPAN_SD * math::sqrt(*variance);
                Some((mean - s, mean + s))
            }
            Family::Uniform { lower, upper } => Some((*lower, *upper)),
            Family::DiscreteUniform { .. } | Family::Bernoulli { .. } => None,
        }
    }

    /// Panel splits graded toward Beta endpoints where a non-integer shape
    /// makes the density non-smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let Family::Beta { alpha, beta } = self else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let grade = |k: i32| math::pow(2.0, -(k as f64)) / 32.0;
        if *alpha != math::trunc(*alpha) {
            out.extend((1..=GRADED_SPLITS).map(grade));
        }
        if *beta != math::trunc(*beta) {
            out.extend((1..=GRADED_SPLITS).map(|k| 1.0 - grade(k)));
        }
        out
    }
}

const GRADED_SPLITS: i32 = 16;

pub(crate) fn normal_pdf(v: f64, mean: f64, variance: f64) -> f64 {
    let z = v - mean;
    math::exp(-0.5 * z * z / variance) / math::sqrt(2.0 * PI * variance)
}

pub(crate) fn bernoulli_pmf(v: f64, p: f64) -> f64 {
    if v == 1.0 {
        p
    } else if v == 0.0 {
        1.0 - p
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn beta_density_closed_form() {
        let b = Family::beta(3.0, 5.0).unwrap();
        // u^2 (1-u)^4 / B(3,5), B(3,5) = 48 / 5040
        let expected = 0.36 * 0.4f64.powi(4) * 5040.0 / 48.0;
        assert_relative_eq!(b.density(0.6), expected, max_relative = 1e-14);
        assert_relative_eq!(b.density(0.6), 0.96768, max_relative = 1e-12);
        assert_eq!(b.density(1.2), 0.0);
        assert_eq!(b.density(-0.1), 0.0);
    }

    #[test]
    fn discrete_families() {
        let d = Family::discrete_uniform(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.density(2.0), 0.2);
        assert_eq!(d.density(2.5), 0.0);
        let b = Family::bernoulli(0.3).unwrap();
        assert_eq!(b.density(1.0), 0.3);
        assert_eq!(b.density(0.0), 0.7);
    }

    #[test]
    fn validation() {
        assert!(Family::beta(0.0, 1.0).is_err());
        assert!(Family::normal(0.0, -1.0).is_err());
        assert!(Family::bernoulli(1.5).is_err());
        assert!(Family::uniform(1.0, 0.0).is_err());
    }
}
