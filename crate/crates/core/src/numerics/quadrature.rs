use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::NeumaierSum;
use crate::error::{Error, Result};
use crate::math;
use crate::space::{ComponentSpec, SampleSpace};

/// Composite Gauss-Legendre settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Subintervals per continuous component, before breakpoint splits.
    pub panels: usize,
    /// Gauss-Legendre order on each panel.
    pub nodes_per_panel: usize,
    /// Split panels at known breakpoints such as bump edges.
    pub split_at_breakpoints: bool,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            panels: 32,
            nodes_per_panel: 16,
            split_at_breakpoints: true,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(Error::input("quadrature panels must be at least 1"));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::input("quadrature nodes per panel must be at least 2"));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// One-dimensional quadrature rule: nodes with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    /// Exact counting-measure sum over a finite support.
    pub fn discrete(support: &[f64]) -> Self {
        Axis {
            nodes: support.to_vec(),
            weights: vec![1.0; support.len()],
        }
    }

    /// Composite Gauss-Legendre on `[lo, hi]`, split at the given breakpoints.
    pub fn continuous(lo: f64, hi: f64, breakpoints: &[f64], settings: &QuadratureSettings) -> Result<Self> {
        settings.validate()?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::input(format!("quadrature bounds must be finite with lo < hi, got [{lo}, {hi}]")));
        }
        let mut edges: Vec<f64> = (0..=settings.panels)
            .map(|i| lo + (hi - lo) * i as f64 / settings.panels as f64)
            .collect();
        edges[settings.panels] = hi;
        if settings.split_at_breakpoints {
            edges.extend(breakpoints.iter().copied().filter(|b| *b > lo && *b < hi));
            edges.sort_by(f64::total_cmp);
            edges.dedup();
        }
        let (gx, gw) = gauss_legendre(settings.nodes_per_panel);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * gx.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[1] + pair[0]);
            if half <= 0.0 {
                continue;
            }
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Ok(Axis { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Tensor product of per-component axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRule {
    axes: Vec<Axis>,
}

impl ProductRule {
    pub fn new(axes: Vec<Axis>) -> Self {
        ProductRule { axes }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Calls `f(u, w)` for every node of the product rule in odometer order.
    pub fn for_each<F: FnMut(&[f64], f64)>(&self, f: F) {
        for_each_node(&self.axes, f)
    }

    /// Compensated sum of `w * f(u)`; fails on the first non-finite value.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = NeumaierSum::new();
        let mut bad = None;
        self.for_each(|u, w| {
            if bad.is_some() {
                return;
            }
            let v = f(u);
            if !v.is_finite() {
                bad = Some(u.to_vec());
                return;
            }
            acc.add(w * v);
        });
        match bad {
            Some(location) => Err(Error::NonFinite { location }),
            None => Ok(acc.value()),
        }
    }
}

/// Calls `f(u, w)` for every node of the tensor product of `axes`.
/// With no axes, `f` is called once with an empty point and weight 1.
pub fn for_each_node<F: FnMut(&[f64], f64)>(axes: &[Axis], mut f: F) {
    let d = axes.len();
    if axes.iter().any(Axis::is_empty) {
        return;
    }
    let mut idx = vec![0usize; d];
    let mut u: Vec<f64> = axes.iter().map(|a| a.nodes[0]).collect();
    loop {
        let w: f64 = axes.iter().zip(&idx).map(|(a, &i)| a.weights[i]).product();
        f(&u, w);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                u[k] = axes[k].nodes[idx[k]];
                break;
            }
            idx[k] = 0;
            u[k] = axes[k].nodes[0];
        }
    }
}

/// Integrates `f` over a sample space with finite continuous bounds.
pub fn integrate<F: FnMut(&[f64]) -> f64>(f: F, space: &SampleSpace, settings: &QuadratureSettings) -> Result<f64> {
    let mut axes = Vec::with_capacity(space.dim());
    for c in space.components() {
        axes.push(match c {
            ComponentSpec::Continuous { lower, upper } => Axis::continuous(*lower, *upper, &[], settings)?,
            ComponentSpec::Discrete { support } => Axis::discrete(support),
        });
    }
    ProductRule::new(axes).integrate(f)
}
