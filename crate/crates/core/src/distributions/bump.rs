use alloc::format;
use alloc::vec::Vec;

use super::model::{AxisHint, DensityModel};
use crate::error::{Error, Result};
use crate::space::{ComponentSpec, SampleSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Piece {
    Interval { lo: f64, hi: f64 },
    Atom(f64),
}

impl Piece {
    fn density(&self, v: f64) -> f64 {
        match *self {
            Piece::Interval { lo, hi } => {
                if v > lo && v < hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Piece::Atom(a) => {
                if v == a {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Uniform product bump of half-width `lambda` on the continuous components
/// and point masses on the discrete ones, truncated to the base support.
#[derive(Debug, Clone)]
pub struct KernelBump {
    center: Vec<f64>,
    lambda: f64,
    pieces: Vec<Piece>,
    base: DensityModel,
}

impl KernelBump {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn base(&self) -> &DensityModel {
        &self.base
    }

    pub fn space(&self) -> &SampleSpace {
        self.base.space()
    }

    /// Support interval of continuous component `c`.
    pub fn interval(&self, c: usize) -> Option<(f64, f64)> {
        match self.pieces[c] {
            Piece::Interval { lo, hi } => Some((lo, hi)),
            Piece::Atom(_) => None,
        }
    }

    pub fn component_density(&self, c: usize, v: f64) -> f64 {
        self.pieces[c].density(v)
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        self.prefix(self.pieces.len(), u)
    }

    pub(crate) fn prefix(&self, k: usize, u: &[f64]) -> f64 {
        let mut p = 1.0;
        for c in 0..k {
            p *= self.pieces[c].density(u[c]);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }

    pub(crate) fn hint(&self, c: usize) -> AxisHint {
        match self.pieces[c] {
            Piece::Interval { lo, hi } => AxisHint {
                bounds: Some((lo, hi)),
                breakpoints: alloc::vec![lo, hi],
            },
            Piece::Atom(_) => AxisHint::default(),
        }
    }
}

/// Builds the bump `H_{x, lambda}` dominated by `base`.
pub fn make_bump(x: &[f64], lambda: f64, base: &DensityModel) -> Result<KernelBump> {
    let space = base.space();
    space.check_dim(x)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!("bump half-width must be positive and finite, got {lambda}")));
    }
    let mut pieces = Vec::with_capacity(x.len());
    for (c, (spec, &xc)) in space.components().iter().zip(x).enumerate() {
        if !xc.is_finite() {
            return Err(Error::input(format!("coordinate {c} of the bump center is not finite")));
        }
        pieces.push(match spec {
            ComponentSpec::Continuous { lower, upper } => {
                let lo = (xc - lambda).max(*lower);
                let hi = (xc + lambda).min(*upper);
                if !(lo < hi) {
                    return Err(Error::Domination(format!(
                        "coordinate {c} = {xc} lies outside the support ({lower}, {upper})"
                    )));
                }
                Piece::Interval { lo, hi }
            }
            ComponentSpec::Discrete { support } => {
                if !support.contains(&xc) {
                    return Err(Error::Domination(format!(
                        "coordinate {c} = {xc} is not in the discrete support {support:?}"
                    )));
                }
                Piece::Atom(xc)
            }
        });
    }
    if !(base.density(x) > 0.0) {
        let mid: Vec<f64> = pieces
            .iter()
            .map(|p| match *p {
                Piece::Interval { lo, hi } => 0.5 * (lo + hi),
                Piece::Atom(a) => a,
            })
            .collect();
        if !(base.density(&mid) > 0.0) {
            return Err(Error::Domination(format!("base density is zero at {x:?}")));
        }
    }
    Ok(KernelBump {
        center: x.to_vec(),
        lambda,
        pieces,
        base: base.clone(),
    })
}
