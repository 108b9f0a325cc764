//! Mixed continuous/discrete product sample spaces.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One coordinate of the sample space.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSpec {
    /// Lebesgue-dominated coordinate on `(lower, upper)`; bounds may be infinite.
    Continuous { lower: f64, upper: f64 },
    /// Counting-measure coordinate on a finite support.
    Discrete { support: Vec<f64> },
}

impl ComponentSpec {
    pub fn continuous(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::input(format!(
                "continuous bounds must satisfy lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(ComponentSpec::Continuous { lower, upper })
    }

    pub fn real_line() -> Self {
        ComponentSpec::Continuous {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn discrete(support: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::input("discrete support is empty"));
        }
        for (i, v) in support.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::input(format!("discrete support value {v} is not finite")));
            }
            if support[..i].contains(v) {
                return Err(Error::input(format!("discrete support repeats the value {v}")));
            }
        }
        Ok(ComponentSpec::Discrete { support })
    }

    pub fn binary() -> Self {
        ComponentSpec::Discrete {
            support: alloc::vec![0.0, 1.0],
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, ComponentSpec::Continuous { .. })
    }

    pub fn contains(&self, v: f64) -> bool {
        match self {
            ComponentSpec::Continuous { lower, upper } => v >= *lower && v <= *upper,
            ComponentSpec::Discrete { support } => support.contains(&v),
        }
    }
}

/// Ordered product of components.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    components: Vec<ComponentSpec>,
}

impl SampleSpace {
    pub fn new(components: Vec<ComponentSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("sample space needs at least one component"));
        }
        for c in &components {
            match c {
                ComponentSpec::Continuous { lower, upper } => {
                    ComponentSpec::continuous(*lower, *upper)?;
                }
                ComponentSpec::Discrete { support } => {
                    ComponentSpec::discrete(support.clone())?;
                }
            }
        }
        Ok(SampleSpace { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentSpec {
        &self.components[i]
    }

    /// Number of continuous components.
    pub fn continuous_dims(&self) -> usize {
        self.components.iter().filter(|c| c.is_continuous()).count()
    }

    pub fn is_all_continuous(&self) -> bool {
        self.continuous_dims() == self.dim()
    }

    pub fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim() && self.components.iter().zip(u).all(|(c, v)| c.contains(*v))
    }
}
