//! Ready-made laws for the two worked examples and a small discrete toy.

use alloc::vec;

use crate::distributions::{CondFactor, DensityModel, Family, LinearPredictor, SequentialFactorization};
use crate::error::Result;

/// Mean of the Beta(3, 5) example, used as the known-mean constraint.
pub const BETA_MU: f64 = 0.375;

pub const BETA_POINT: f64 = 0.6;

/// Point `(l0, a0, l1, a1, y)` at which the longitudinal EIF is reported.
pub const LONGITUDINAL_POINT: [f64; 5] = [0.0, 1.0, 2.0, 1.0, 1.0];

pub fn beta_3_5() -> DensityModel {
    Family::beta(3.0, 5.0).expect("valid parameters").into()
}

/// Longitudinal law on `(L0, A0, L1, A1, Y)`:
///
/// - `L0` uniform on {0, 1, 2, 3, 4}
/// - `A0 ~ Bernoulli(expit(-1 + 0.5 l0))`
/// - `L1 ~ Normal(3 l0 - 3 a0, 4)`
/// - `A1 ~ Bernoulli(expit(-5 + c10(l1) + a0 + 0.5 l0))`
/// - `Y ~ Bernoulli(expit(-1 + 0.5 c10(l1) - 0.5 a1 - a0))`
///
/// with `c10(u) = clamp(u, -10, 10)`.
pub fn longitudinal_law() -> Result<DensityModel> {
    let factors = vec![
        CondFactor::Marginal(Family::discrete_uniform(vec![0.0, 1.0, 2.0, 3.0, 4.0])?),
        CondFactor::Logistic(LinearPredictor::new(-1.0).term(0, 0.5)),
        CondFactor::Normal {
            mean: LinearPredictor::new(0.0).term(0, 3.0).term(1, -3.0),
            variance: 4.0,
        },
        CondFactor::Logistic(
            LinearPredictor::new(-5.0)
                .clamped_term(2, 1.0, 10.0)
                .term(1, 1.0)
                .term(0, 0.5),
        ),
        CondFactor::Logistic(
            LinearPredictor::new(-1.0)
                .clamped_term(2, 0.5, 10.0)
                .term(3, -0.5)
                .term(1, -1.0),
        ),
    ];
    Ok(SequentialFactorization::new(factors)?.into())
}

/// All-binary Markov toy on `(L0, A0, L1, A1, Y)`; `Y` does not depend on `L0`.
pub fn binary_markov_toy() -> Result<DensityModel> {
    let factors = vec![
        CondFactor::Marginal(Family::bernoulli(0.4)?),
        CondFactor::Logistic(LinearPredictor::new(0.3).term(0, 0.5)),
        CondFactor::Logistic(LinearPredictor::new(-0.2).term(0, 0.8).term(1, -0.4)),
        CondFactor::Logistic(LinearPredictor::new(0.1).term(2, 0.6).term(1, 0.2).term(0, -0.3)),
        CondFactor::Logistic(LinearPredictor::new(-0.5).term(2, 1.1).term(3, -0.4).term(1, 0.2)),
    ];
    Ok(SequentialFactorization::new(factors)?.into())
}
