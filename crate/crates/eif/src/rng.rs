//! Seeded sampling from sequential laws for demo data.

use eif_core::distributions::{CondFactor, Descriptor, Family};
use eif_core::{ComponentSpec, DensityModel};
use rand::{Rng, SeedableRng};
use rand_distr::{Bernoulli, Beta, Distribution, Normal, Uniform};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::CliError;

fn unsupported(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn pick_weighted<R: Rng>(rng: &mut R, support: &[f64], weights: &[f64]) -> Result<f64, CliError> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(unsupported("discrete factor has no mass at this history"));
    }
    let mut u = rng.random::<f64>() * total;
    for (v, w) in support.iter().zip(weights) {
        if u < *w {
            return Ok(*v);
        }
        u -= w;
    }
    Ok(*support.last().expect("support is non-empty"))
}

fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> Result<f64, CliError> {
    let d = Bernoulli::new(p).map_err(|e| unsupported(format!("bernoulli({p}): {e}")))?;
    Ok(if d.sample(rng) { 1.0 } else { 0.0 })
}

fn normal<R: Rng>(rng: &mut R, mean: f64, variance: f64) -> Result<f64, CliError> {
    let d = Normal::new(mean, variance.sqrt()).map_err(|e| unsupported(format!("normal: {e}")))?;
    Ok(d.sample(rng))
}

fn sample_family<R: Rng>(rng: &mut R, f: &Family) -> Result<f64, CliError> {
    match f {
        Family::Beta { alpha, beta } => {
            let d = Beta::new(*alpha, *beta).map_err(|e| unsupported(format!("beta: {e}")))?;
            Ok(d.sample(rng))
        }
        Family::Normal { mean, variance } => normal(rng, *mean, *variance),
        Family::Uniform { lower, upper } => {
            let d = Uniform::new(*lower, *upper).map_err(|e| unsupported(format!("uniform: {e}")))?;
            Ok(d.sample(rng))
        }
        Family::DiscreteUniform { support } => Ok(support[rng.random_range(0..support.len())]),
        Family::Bernoulli { p } => bernoulli(rng, *p),
    }
}

fn sample_factor<R: Rng>(rng: &mut R, f: &CondFactor, hist: &[f64]) -> Result<f64, CliError> {
    match f {
        CondFactor::Marginal(fam) => sample_family(rng, fam),
        CondFactor::Logistic(lp) => bernoulli(rng, crate::expr::expit(lp.eval(hist))),
        CondFactor::Normal { mean, variance } => normal(rng, mean.eval(hist), *variance),
        CondFactor::Custom(_) => match f.component() {
            ComponentSpec::Discrete { support } => {
                let w: Vec<f64> = support.iter().map(|v| f.eval(*v, hist)).collect();
                pick_weighted(rng, &support, &w)
            }
            ComponentSpec::Continuous { .. } => Err(unsupported("cannot sample a continuous custom factor")),
        },
    }
}

/// Draws `n` points from `p`, a family or a sequential law.
pub fn sample(p: &DensityModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    match p.descriptor() {
        Descriptor::Family(f) => {
            for _ in 0..n {
                out.push(vec![sample_family(&mut rng, f)?]);
            }
        }
        Descriptor::Sequential(s) => {
            for _ in 0..n {
                let mut row = Vec::with_capacity(s.factors().len());
                for f in s.factors() {
                    let v = sample_factor(&mut rng, f, &row)?;
                    row.push(v);
                }
                out.push(row);
            }
        }
        _ => return Err(unsupported("demo data needs a family or sequential distribution")),
    }
    Ok(out)
}
