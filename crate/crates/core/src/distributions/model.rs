use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::bump::KernelBump;
use super::family::Family;
use super::sequential::SequentialFactorization;
use crate::error::{Error, Result};
use crate::math;
use crate::numerics::{Axis, ProductRule, QuadratureSettings};
use crate::projection::{Basis, MarkovProjected};
use crate::space::{ComponentSpec, SampleSpace};

/// Integration range and breakpoints suggested for one component.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AxisHint {
    pub bounds: Option<(f64, f64)>,
    pub breakpoints: Vec<f64>,
}

impl AxisHint {
    fn merge(&mut self, other: AxisHint) {
        if let Some((lo, hi)) = other.bounds {
            self.breakpoints.push(lo);
            self.breakpoints.push(hi);
            self.bounds = Some(match self.bounds {
                Some((a, b)) => (a.min(lo), b.max(hi)),
                None => (lo, hi),
            });
        }
        self.breakpoints.extend(other.breakpoints);
    }
}

#[derive(Debug)]
pub(crate) struct MeanTilted {
    pub(crate) source: DensityModel,
    pub(crate) mu: f64,
    pub(crate) xi: f64,
}

impl MeanTilted {
    fn scale(&self, u: f64) -> f64 {
        self.xi * (u - self.mu)
    }
}

#[derive(Debug)]
pub(crate) struct ExpTilted {
    pub(crate) reference: DensityModel,
    pub(crate) basis: Basis,
    pub(crate) beta: Vec<f64>,
    /// Reference means of the basis functions.
    pub(crate) centers: Vec<f64>,
    /// Log normalizer of the centered tilt.
    pub(crate) log_norm: f64,
    pub(crate) quadrature: QuadratureSettings,
}

impl ExpTilted {
    fn exponent(&self, u: &[f64]) -> f64 {
        let mut s = -self.log_norm;
        for (j, b) in self.beta.iter().enumerate() {
            s += b * (self.basis.eval(j, u) - self.centers[j]);
        }
        s
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Family { family: Family, space: SampleSpace },
    Sequential(SequentialFactorization),
    Bump(KernelBump),
    Mixture { space: SampleSpace, parts: Vec<(f64, DensityModel)> },
    MeanTilted(MeanTilted),
    ExpTilted(ExpTilted),
    Markov(MarkovProjected),
}

/// Construction record of a [`DensityModel`].
#[derive(Debug, Clone, Copy)]
pub enum Descriptor<'a> {
    Family(&'a Family),
    Sequential(&'a SequentialFactorization),
    Bump(&'a KernelBump),
    Mixture(&'a [(f64, DensityModel)]),
    MeanProjected { source: &'a DensityModel, mu: f64, xi: f64 },
    TiltProjected { reference: &'a DensityModel, beta: &'a [f64] },
    MarkovProjected { source: &'a DensityModel },
}

/// Immutable, shareable density on a mixed product space.
///
/// Densities are with respect to Lebesgue measure on continuous components
/// and counting measure on discrete ones. Models remember how they were built
/// so that differences between related models can be evaluated without
/// cancellation.
#[derive(Debug, Clone)]
pub struct DensityModel(Arc<Node>);

impl From<Family> for DensityModel {
    fn from(family: Family) -> Self {
        let space = SampleSpace::new(alloc::vec![family.component()]).expect("family component is valid");
        DensityModel::from_node(Node::Family { family, space })
    }
}

impl From<SequentialFactorization> for DensityModel {
    fn from(s: SequentialFactorization) -> Self {
        DensityModel::from_node(Node::Sequential(s))
    }
}

impl From<KernelBump> for DensityModel {
    fn from(b: KernelBump) -> Self {
        DensityModel::from_node(Node::Bump(b))
    }
}

impl DensityModel {
    pub(crate) fn from_node(node: Node) -> Self {
        DensityModel(Arc::new(node))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub fn space(&self) -> &SampleSpace {
        match self.node() {
            Node::Family { space, .. } => space,
            Node::Sequential(s) => s.space(),
            Node::Bump(b) => b.space(),
            Node::Mixture { space, .. } => space,
            Node::MeanTilted(m) => m.source.space(),
            Node::ExpTilted(t) => t.reference.space(),
            Node::Markov(m) => m.space(),
        }
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    /// True when both handles point at the same construction.
    pub fn same_as(&self, other: &DensityModel) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn descriptor(&self) -> Descriptor<'_> {
        match self.node() {
            Node::Family { family, .. } => Descriptor::Family(family),
            Node::Sequential(s) => Descriptor::Sequential(s),
            Node::Bump(b) => Descriptor::Bump(b),
            Node::Mixture { parts, .. } => Descriptor::Mixture(parts),
            Node::MeanTilted(m) => Descriptor::MeanProjected {
                source: &m.source,
                mu: m.mu,
                xi: m.xi,
            },
            Node::ExpTilted(t) => Descriptor::TiltProjected {
                reference: &t.reference,
                beta: &t.beta,
            },
            Node::Markov(m) => Descriptor::MarkovProjected { source: m.source() },
        }
    }

    /// Density at `u`; `u` must have the space's dimension.
    pub fn density(&self, u: &[f64]) -> f64 {
        self.prefix_density(self.dim(), u)
    }

    /// Density with a dimension check.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        self.space().check_dim(u)?;
        Ok(self.density(u))
    }

    /// Joint density of the first `k` components at `u[..k]`.
    pub fn prefix_density(&self, k: usize, u: &[f64]) -> f64 {
        let d = self.dim();
        match self.node() {
            Node::Family { family, .. } => {
                if k == 0 {
                    1.0
                } else {
                    family.density(u[0])
                }
            }
            Node::Sequential(s) => s.prefix(k, u),
            Node::Bump(b) => b.prefix(k, u),
            Node::Mixture { parts, .. } => parts.iter().map(|(w, p)| w * p.prefix_density(k, u)).sum(),
            Node::MeanTilted(m) => {
                if k == 0 {
                    1.0
                } else {
                    m.source.prefix_density(k, u) / (1.0 - m.scale(u[0]))
                }
            }
            Node::ExpTilted(t) => {
                if k == 0 {
                    1.0
                } else if k == d {
                    t.reference.density(u) * math::exp(t.exponent(u))
                } else {
                    self.marginal_by_quadrature(t, k, u).unwrap_or(f64::NAN)
                }
            }
            Node::Markov(m) => m.prefix(k, u),
        }
    }

    fn marginal_by_quadrature(&self, t: &ExpTilted, k: usize, u: &[f64]) -> Result<f64> {
        let rule = rule_for(&[&t.reference], &t.quadrature)?;
        let tail = ProductRule::new(rule.axes()[k..].to_vec());
        let mut full = u[..k].to_vec();
        full.resize(self.dim(), 0.0);
        tail.integrate(|v| {
            full[k..].copy_from_slice(v);
            t.reference.density(&full) * math::exp(t.exponent(&full))
        })
    }

    /// Conditional density of component `c` at `u[c]` given `u[..c]`.
    /// Returns 0 when the history itself has zero density.
    pub fn conditional(&self, c: usize, u: &[f64]) -> f64 {
        match self.node() {
            Node::Sequential(s) => s.conditional(c, u),
            Node::Family { family, .. } => family.density(u[0]),
            Node::Bump(b) => b.component_density(c, u[c]),
            Node::Markov(m) => m.factor(c, u),
            _ => {
                let den = self.prefix_density(c, u);
                if den == 0.0 {
                    0.0
                } else {
                    self.prefix_density(c + 1, u) / den
                }
            }
        }
    }

    /// `self - target` at `u`, evaluated through the construction records so
    /// that no two nearly equal densities are subtracted. `None` when the
    /// records do not relate the two models.
    pub fn diff(&self, target: &DensityModel, u: &[f64]) -> Option<f64> {
        self.prefix_diff(target, self.dim(), u)
    }

    /// Whether [`DensityModel::diff`] is available against `target`.
    pub fn has_stable_diff(&self, target: &DensityModel) -> bool {
        if self.same_as(target) {
            return true;
        }
        match self.node() {
            Node::Mixture { .. } | Node::ExpTilted(_) => true,
            Node::MeanTilted(m) => m.source.has_stable_diff(target),
            Node::Markov(m) => m.source().has_stable_diff(target),
            _ => false,
        }
    }

    pub(crate) fn prefix_diff(&self, target: &DensityModel, k: usize, u: &[f64]) -> Option<f64> {
        if self.same_as(target) {
            return Some(0.0);
        }
        if k == 0 {
            return Some(0.0);
        }
        match self.node() {
            Node::Mixture { parts, .. } => {
                let mut s = 0.0;
                for (w, p) in parts {
                    let d = p
                        .prefix_diff(target, k, u)
                        .unwrap_or_else(|| p.prefix_density(k, u) - target.prefix_density(k, u));
                    s += w * d;
                }
                Some(s)
            }
            Node::MeanTilted(m) => {
                let ds = m.source.prefix_diff(target, k, u)?;
                let s = m.scale(u[0]);
                Some((ds + s * target.prefix_density(k, u)) / (1.0 - s))
            }
            Node::ExpTilted(t) => {
                if k != self.dim() {
                    return None;
                }
                let r = t.reference.density(u);
                let dr = t
                    .reference
                    .prefix_diff(target, k, u)
                    .unwrap_or_else(|| r - target.density(u));
                Some(dr + r * math::expm1(t.exponent(u)))
            }
            Node::Markov(m) => {
                if !m.source().has_stable_diff(target) {
                    return None;
                }
                Some(m.prefix_diff(self, target, k, u))
            }
            _ => None,
        }
    }

    /// `q_c - t_c` for the conditional factor of component `c`.
    pub(crate) fn conditional_diff(&self, target: &DensityModel, c: usize, u: &[f64]) -> f64 {
        if self.same_as(target) {
            return 0.0;
        }
        match self.node() {
            Node::Markov(m) => m.conditional_diff(target, c, u),
            Node::Mixture { .. } | Node::MeanTilted(_) | Node::ExpTilted(_) => ratio_diff(self, target, c, u),
            _ => self.conditional(c, u) - target.conditional(c, u),
        }
    }

    /// Quadrature hint for component `c`.
    pub fn axis_hint(&self, c: usize) -> AxisHint {
        match self.node() {
            Node::Family { family, .. } => AxisHint {
                bounds: family.quadrature_bounds(),
                breakpoints: family.breakpoints(),
            },
            Node::Sequential(s) => AxisHint {
                bounds: s.quadrature_bounds(c),
                breakpoints: s.breakpoints(c).to_vec(),
            },
            Node::Bump(b) => b.hint(c),
            Node::Mixture { parts, .. } => {
                let mut h = AxisHint::default();
                for (_, p) in parts {
                    h.merge(p.axis_hint(c));
                }
                h
            }
            Node::MeanTilted(m) => m.source.axis_hint(c),
            Node::ExpTilted(t) => t.reference.axis_hint(c),
            Node::Markov(m) => m.source().axis_hint(c),
        }
    }

    /// Quadrature rule covering this model.
    pub fn rule(&self, settings: &QuadratureSettings) -> Result<ProductRule> {
        rule_for(&[self], settings)
    }

    /// `E[f(U)]` under this model.
    pub fn expect<F: FnMut(&[f64]) -> f64>(&self, mut f: F, settings: &QuadratureSettings) -> Result<f64> {
        let rule = self.rule(settings)?;
        rule.integrate(|u| {
            let p = self.density(u);
            if p == 0.0 {
                0.0
            } else {
                f(u) * p
            }
        })
    }

    pub fn total_mass(&self, settings: &QuadratureSettings) -> Result<f64> {
        self.expect(|_| 1.0, settings)
    }
}

/// Conditional difference through prefix differences.
pub(crate) fn ratio_diff(q: &DensityModel, t: &DensityModel, c: usize, u: &[f64]) -> f64 {
    let naive = || q.conditional(c, u) - t.conditional(c, u);
    let (Some(dk1), Some(dk)) = (q.prefix_diff(t, c + 1, u), q.prefix_diff(t, c, u)) else {
        return naive();
    };
    let qk = q.prefix_density(c, u);
    let tk = t.prefix_density(c, u);
    if qk == 0.0 || tk == 0.0 {
        return naive();
    }
    let tk1 = t.prefix_density(c + 1, u);
    (dk1 * tk - tk1 * dk) / (qk * tk) + (tk1 / tk - t.conditional(c, u))
}

/// Product rule covering every model in `models`, which share one space.
pub fn rule_for(models: &[&DensityModel], settings: &QuadratureSettings) -> Result<ProductRule> {
    let space = models[0].space();
    let mut axes = Vec::with_capacity(space.dim());
    for (c, spec) in space.components().iter().enumerate() {
        axes.push(match spec {
            ComponentSpec::Discrete { support } => Axis::discrete(support),
            ComponentSpec::Continuous { lower, upper } => {
                let mut h = AxisHint::default();
                for m in models {
                    h.merge(m.axis_hint(c));
                }
                let (lo, hi) = h.bounds.unwrap_or((*lower, *upper));
                let (lo, hi) = (lo.max(*lower), hi.min(*upper));
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::UnsupportedSpace(format!("component {c} has no finite integration range")));
                }
                Axis::continuous(lo, hi, &h.breakpoints, settings)?
            }
        });
    }
    Ok(ProductRule::new(axes))
}

/// Density evaluation with a dimension check.
pub fn density_eval(dist: &DensityModel, u: &[f64]) -> Result<f64> {
    dist.eval(u)
}

/// `(1 - eps) p + eps h`.
pub fn mix(p: &DensityModel, h: &DensityModel, epsilon: f64) -> Result<DensityModel> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::input(format!("mixture weight must lie in [0, 1], got {epsilon}")));
    }
    mixture(alloc::vec![(1.0 - epsilon, p.clone()), (epsilon, h.clone())])
}

/// Finite mixture with non-negative weights summing to one.
pub fn mixture(parts: Vec<(f64, DensityModel)>) -> Result<DensityModel> {
    let Some((_, first)) = parts.first() else {
        return Err(Error::input("mixture needs at least one component"));
    };
    let space = first.space().clone();
    let mut total = 0.0;
    for (i, (w, p)) in parts.iter().enumerate() {
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(Error::input(format!("mixture weight {i} is {w}")));
        }
        if p.space() != &space {
            return Err(Error::input(format!("mixture component {i} lives on a different sample space")));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("mixture weights sum to {total}, not 1")));
    }
    Ok(DensityModel::from_node(Node::Mixture { space, parts }))
}

impl DensityModel {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Family::beta(alpha, beta)?.into())
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        Ok(Family::normal(mean, variance)?.into())
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Ok(Family::uniform(lower, upper)?.into())
    }

    pub fn discrete_uniform(support: Vec<f64>) -> Result<Self> {
        Ok(Family::discrete_uniform(support)?.into())
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Ok(Family::bernoulli(p)?.into())
    }
}
