//! Longitudinal layout `(L0, A0, L1, A1, ..., L_K, A_K, L_{K+1})` and the
//! G-computation recursion for the mean of `L_{K+1}` under "always treat".

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{rule_for, DensityModel};
use crate::error::{Error, Result};
use crate::numerics::{for_each_node, Axis, NeumaierSum, QuadratureSettings};
use crate::space::{ComponentSpec, SampleSpace};

/// Index map for a longitudinal data unit with `K` treatment times after baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    k: usize,
}

impl Layout {
    pub fn for_space(space: &SampleSpace) -> Result<Self> {
        let d = space.dim();
        if d < 3 || d % 2 == 0 {
            return Err(Error::UnsupportedSpace(format!(
                "longitudinal data needs 2K + 3 components, got {d}"
            )));
        }
        let layout = Layout { k: (d - 3) / 2 };
        for j in 0..=layout.k {
            match space.component(layout.a(j)) {
                ComponentSpec::Discrete { support } if support.iter().all(|v| *v == 0.0 || *v == 1.0) && support.contains(&1.0) => {}
                _ => {
                    return Err(Error::UnsupportedSpace(format!(
                        "component {} must be a binary treatment",
                        layout.a(j)
                    )))
                }
            }
        }
        Ok(layout)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        2 * self.k + 3
    }

    /// Number of L components, `K + 2`.
    pub fn stages(&self) -> usize {
        self.k + 2
    }

    pub fn l(&self, j: usize) -> usize {
        2 * j
    }

    pub fn a(&self, j: usize) -> usize {
        2 * j + 1
    }

    /// True when every treatment coordinate below `upto` equals 1.
    pub fn treated_before(&self, u: &[f64], upto: usize) -> bool {
        (1..upto).step_by(2).all(|i| u[i] == 1.0)
    }

    /// Quadrature axes for the L components of a rule covering `models`.
    pub fn l_axes(&self, models: &[&DensityModel], settings: &QuadratureSettings) -> Result<Vec<Axis>> {
        let rule = rule_for(models, settings)?;
        Ok((0..self.stages()).map(|j| rule.axes()[self.l(j)].clone()).collect())
    }
}

/// Backward G-computation recursion on a fixed set of L axes.
pub(crate) struct Recursion<'a> {
    pub(crate) law: &'a DensityModel,
    pub(crate) layout: Layout,
    pub(crate) axes: &'a [Axis],
}

impl Recursion<'_> {
    /// `m_j` at the treated history stored in `hist[..=2j]`.
    pub(crate) fn m(&self, j: usize, hist: &mut [f64]) -> Result<f64> {
        let lay = self.layout;
        if j == lay.k() + 1 {
            return Ok(hist[lay.l(j)]);
        }
        hist[lay.a(j)] = 1.0;
        let g = self.law.conditional(lay.a(j), hist);
        if !(g > 0.0) {
            return Err(Error::Positivity {
                history: hist[..=lay.a(j)].to_vec(),
            });
        }
        let next = lay.l(j + 1);
        let mut acc = NeumaierSum::new();
        for (v, w) in self.axes[j + 1].iter() {
            hist[next] = v;
            let c = self.law.conditional(next, hist);
            if c == 0.0 {
                continue;
            }
            acc.add(w * c * self.m(j + 1, hist)?);
        }
        Ok(acc.value())
    }

    pub(crate) fn psi(&self) -> Result<f64> {
        let mut hist = alloc::vec![1.0; self.layout.dim()];
        let mut acc = NeumaierSum::new();
        for (v, w) in self.axes[0].iter() {
            hist[0] = v;
            let c = self.law.conditional(0, &hist);
            if c == 0.0 {
                continue;
            }
            acc.add(w * c * self.m(0, &mut hist)?);
        }
        let v = acc.value();
        if !v.is_finite() {
            return Err(Error::NonFinite { location: Vec::new() });
        }
        Ok(v)
    }
}

/// Paired recursion returning `(m_j under q, m_j(q) - m_j(p))` stage by stage.
pub(crate) struct PairRecursion<'a> {
    pub(crate) q: &'a DensityModel,
    pub(crate) p: &'a DensityModel,
    pub(crate) layout: Layout,
    pub(crate) axes: &'a [Axis],
}

impl PairRecursion<'_> {
    fn check(law: &DensityModel, c: usize, hist: &[f64]) -> Result<()> {
        if law.conditional(c, hist) > 0.0 {
            Ok(())
        } else {
            Err(Error::Positivity {
                history: hist[..=c].to_vec(),
            })
        }
    }

    fn m(&self, j: usize, hist: &mut [f64], reach_q: bool, reach_p: bool) -> Result<(f64, f64)> {
        let lay = self.layout;
        if j == lay.k() + 1 {
            return Ok((hist[lay.l(j)], 0.0));
        }
        hist[lay.a(j)] = 1.0;
        if reach_q {
            Self::check(self.q, lay.a(j), hist)?;
        }
        if reach_p {
            Self::check(self.p, lay.a(j), hist)?;
        }
        let next = lay.l(j + 1);
        let mut mq = NeumaierSum::new();
        let mut dm = NeumaierSum::new();
        for (v, w) in self.axes[j + 1].iter() {
            hist[next] = v;
            let cq = self.q.conditional(next, hist);
            let cp = self.p.conditional(next, hist);
            if cq == 0.0 && cp == 0.0 {
                continue;
            }
            let dc = self.q.conditional_diff(self.p, next, hist);
            let (mq1, dm1) = self.m(j + 1, hist, reach_q && cq > 0.0, reach_p && cp > 0.0)?;
            mq.add(w * cq * mq1);
            dm.add(w * (dc * mq1 + cp * dm1));
        }
        Ok((mq.value(), dm.value()))
    }

    pub(crate) fn psi_diff(&self) -> Result<f64> {
        let mut hist = alloc::vec![1.0; self.layout.dim()];
        let mut acc = NeumaierSum::new();
        for (v, w) in self.axes[0].iter() {
            hist[0] = v;
            let cq = self.q.conditional(0, &hist);
            let cp = self.p.conditional(0, &hist);
            if cq == 0.0 && cp == 0.0 {
                continue;
            }
            let dc = self.q.conditional_diff(self.p, 0, &hist);
            let (mq, dm) = self.m(0, &mut hist, cq > 0.0, cp > 0.0)?;
            acc.add(w * (dc * mq + cp * dm));
        }
        let v = acc.value();
        if !v.is_finite() {
            return Err(Error::NonFinite { location: Vec::new() });
        }
        Ok(v)
    }
}

/// Largest spread, over latent earlier histories, of the treated conditional
/// of each `L_j` (`j >= 2`) given `L_{j-1}`. Zero for laws in the Markov model.
///
/// At most `max_prev` nodes of each `L_{j-1}` axis are visited.
pub fn markov_residual(law: &DensityModel, layout: Layout, axes: &[Axis], max_prev: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 2..layout.stages() {
        let c = layout.l(j);
        let prev_axis = &axes[j - 1];
        let stride = prev_axis.len().div_ceil(max_prev.max(1)).max(1);
        let latent = &axes[..j - 1];
        for prev in prev_axis.nodes().iter().step_by(stride) {
            for (cur, _) in axes[j].iter() {
                let mut reference: Option<f64> = None;
                for_each_node(latent, |lat, _| {
                    let mut h = alloc::vec![1.0; c + 1];
                    for (i, v) in lat.iter().enumerate() {
                        h[2 * i] = *v;
                    }
                    h[c - 2] = *prev;
                    h[c] = cur;
                    if law.prefix_density(c, &h) == 0.0 {
                        return;
                    }
                    let v = law.conditional(c, &h);
                    match reference {
                        None => reference = Some(v),
                        Some(r) => worst = worst.max((v - r).abs()),
                    }
                });
            }
        }
    }
    worst
}

