use alloc::vec::Vec;

use super::{ProjectionOutcome, SolverMeta};
use crate::distributions::{ratio_diff, DensityModel, Node};
use crate::error::{Error, Result};
use crate::longitudinal::{markov_residual, Layout};
use crate::numerics::{for_each_node, Axis};
use crate::settings::Settings;
use crate::space::SampleSpace;

/// L-axis nodes visited per stage when measuring the conditional
/// independence residual of a projection.
const RESIDUAL_NODES: usize = 64;

/// Markov projection of a longitudinal law.
///
/// Under continued treatment the kernel of `L_j` (`j >= 2`) is replaced by
/// `qbar(l_{j-1}, l_j) / int qbar(l_{j-1}, l') dl'`, where `qbar` integrates
/// the earlier L's out of the treated joint. All other factors are the
/// source's own conditionals. Kernels are evaluated exactly on demand.
#[derive(Debug)]
pub struct MarkovProjected {
    source: DensityModel,
    layout: Layout,
    /// Axes for `L_0 .. L_{K-1}`, the possible latent histories.
    latent: Vec<Axis>,
}

struct KernelSums {
    dq: f64,
    dn: f64,
    dd: f64,
    nt: f64,
    dt: f64,
}

impl MarkovProjected {
    pub fn source(&self) -> &DensityModel {
        &self.source
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub(crate) fn space(&self) -> &SampleSpace {
        self.source.space()
    }

    /// Stage `j` when component `c` is a kernel-replaced `L_j` at a treated history.
    fn kernel_stage(&self, c: usize, u: &[f64]) -> Option<usize> {
        if c % 2 == 0 && c >= 4 && self.layout.treated_before(u, c) {
            Some(c / 2)
        } else {
            None
        }
    }

    /// Calls `f(h, w)` for every latent history `h` (length `2j + 1`) that
    /// ends in `(prev, 1, cur)` with all treatments 1.
    fn for_each_latent<F: FnMut(&[f64], f64)>(&self, j: usize, prev: f64, cur: f64, mut f: F) {
        let c = 2 * j;
        let mut h = alloc::vec![1.0; c + 1];
        h[c - 2] = prev;
        h[c] = cur;
        for_each_node(&self.latent[..j - 1], |lat, w| {
            for (i, v) in lat.iter().enumerate() {
                h[2 * i] = *v;
            }
            f(&h, w);
        });
    }

    fn kernel(&self, j: usize, prev: f64, cur: f64) -> f64 {
        let c = 2 * j;
        let (mut n, mut d) = (0.0, 0.0);
        self.for_each_latent(j, prev, cur, |h, w| {
            n += w * self.source.prefix_density(c + 1, h);
            d += w * self.source.prefix_density(c, h);
        });
        if d == 0.0 {
            0.0
        } else {
            n / d
        }
    }

    pub(crate) fn factor(&self, c: usize, u: &[f64]) -> f64 {
        match self.kernel_stage(c, u) {
            Some(j) => self.kernel(j, u[c - 2], u[c]),
            None => self.source.conditional(c, u),
        }
    }

    pub(crate) fn prefix(&self, k: usize, u: &[f64]) -> f64 {
        let mut p = 1.0;
        for c in 0..k {
            p *= self.factor(c, u);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }

    fn kernel_sums(&self, target: &DensityModel, j: usize, prev: f64, cur: f64) -> KernelSums {
        let c = 2 * j;
        let src = &self.source;
        let mut s = KernelSums {
            dq: 0.0,
            dn: 0.0,
            dd: 0.0,
            nt: 0.0,
            dt: 0.0,
        };
        self.for_each_latent(j, prev, cur, |h, w| {
            let qn = src.prefix_density(c + 1, h);
            let qd = src.prefix_density(c, h);
            let tn = target.prefix_density(c + 1, h);
            let td = target.prefix_density(c, h);
            s.dq += w * qd;
            s.nt += w * tn;
            s.dt += w * td;
            s.dn += w * src.prefix_diff(target, c + 1, h).unwrap_or(qn - tn);
            s.dd += w * src.prefix_diff(target, c, h).unwrap_or(qd - td);
        });
        s
    }

    /// Projected factor minus the target's factor for component `c`.
    pub(crate) fn conditional_diff(&self, target: &DensityModel, c: usize, u: &[f64]) -> f64 {
        let Some(j) = self.kernel_stage(c, u) else {
            return ratio_diff(&self.source, target, c, u);
        };
        let s = self.kernel_sums(target, j, u[c - 2], u[c]);
        if s.dq == 0.0 || s.dt == 0.0 {
            return self.factor(c, u) - target.conditional(c, u);
        }
        (s.dn * s.dt - s.nt * s.dd) / (s.dq * s.dt) + (s.nt / s.dt - target.conditional(c, u))
    }

    /// Telescoped difference of prefix densities against `target`.
    pub(crate) fn prefix_diff(&self, me: &DensityModel, target: &DensityModel, k: usize, u: &[f64]) -> f64 {
        let q: Vec<f64> = (0..k).map(|c| self.factor(c, u)).collect();
        let t: Vec<f64> = (0..k).map(|c| target.conditional(c, u)).collect();
        let mut total = 0.0;
        let mut head = 1.0;
        for c in 0..k {
            let tail: f64 = q[c + 1..].iter().product();
            if head != 0.0 && tail != 0.0 {
                total += head * me.conditional_diff(target, c, u) * tail;
            }
            head *= t[c];
        }
        total
    }
}

/// Projects a longitudinal law onto the Markov model.
pub fn project_markov(q: &DensityModel, settings: &Settings) -> Result<ProjectionOutcome> {
    let layout = Layout::for_space(q.space())?;
    let axes = layout.l_axes(&[q], &settings.quadrature)?;
    let latent: Vec<Axis> = axes[..layout.k()].to_vec();
    let node = MarkovProjected {
        source: q.clone(),
        layout,
        latent,
    };
    check_positivity(&node, &axes)?;
    let latent_nodes = node.latent.iter().map(Axis::len).product();
    let projected = DensityModel::from_node(Node::Markov(node));
    let ci_residual = markov_residual(&projected, layout, &axes, RESIDUAL_NODES);
    Ok(ProjectionOutcome {
        projected,
        meta: SolverMeta::Markov {
            latent_nodes,
            ci_residual,
        },
        feasible: ci_residual <= 1e-8,
    })
}

/// Every reachable treated history `(.., L_{j-1})` must keep positive
/// treated mass once `A_{j-1} = 1` is appended.
fn check_positivity(node: &MarkovProjected, axes: &[Axis]) -> Result<()> {
    let src = &node.source;
    for j in 2..node.layout.stages() {
        let c = 2 * j;
        for prev in axes[j - 1].nodes() {
            let (mut reach, mut treated) = (0.0, 0.0);
            node.for_each_latent(j, *prev, 0.0, |h, w| {
                reach += w * src.prefix_density(c - 1, h);
                treated += w * src.prefix_density(c, h);
            });
            if reach > 0.0 && !(treated > 0.0) {
                let mut history = alloc::vec![1.0; c - 1];
                history[c - 2] = *prev;
                return Err(Error::Positivity { history });
            }
        }
    }
    Ok(())
}
