//! Closed-form efficient influence functions used as ground truth.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{make_bump, mix, DensityModel};
use crate::error::{Error, Result};
use crate::functionals::{avg_density_value, Functional};
use crate::longitudinal::{markov_residual, Layout, Recursion};
use crate::numerics::{cholesky_solve, for_each_node, Axis, QuadratureSettings};
use crate::projection::{Basis, ModelProjector};
use crate::settings::Settings;

/// Which closed form an oracle implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `2 {p(u) - Psi}`.
    NonparametricAverageDensity,
    /// Average density under a known mean.
    ConstrainedAverageDensity,
    /// Residual of a projection onto one score direction.
    OneConstraintProjection,
    /// G-computation mean, nonparametric model.
    GCompNonparametric,
    /// G-computation mean, Markov model.
    GCompMarkov,
    /// Mean functional in an exponential tilt family.
    TiltMean,
    Custom,
}

type EifFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A pointwise EIF together with its centering check under `P`.
#[derive(Clone)]
pub struct OracleEif {
    eval: Arc<EifFn>,
    centered_residual: f64,
    provenance: Provenance,
}

impl fmt::Debug for OracleEif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleEif")
            .field("centered_residual", &self.centered_residual)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl OracleEif {
    /// Wraps `f`, recording `|int f dP|`.
    pub fn new<F>(f: F, p: &DensityModel, quad: &QuadratureSettings, provenance: Provenance) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_arc(Arc::new(f), p, quad, provenance)
    }

    fn from_arc(eval: Arc<EifFn>, p: &DensityModel, quad: &QuadratureSettings, provenance: Provenance) -> Result<Self> {
        let centered_residual = p.expect(|u| eval(u), quad)?.abs();
        Ok(OracleEif {
            eval,
            centered_residual,
            provenance,
        })
    }

    pub fn evaluate(&self, u: &[f64]) -> f64 {
        (self.eval)(u)
    }

    pub fn centered_residual(&self) -> f64 {
        self.centered_residual
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

pub fn np_avg_density_oracle(p: &DensityModel, quad: &QuadratureSettings) -> Result<OracleEif> {
    let psi = avg_density_value(p, quad)?;
    let law = p.clone();
    OracleEif::new(
        move |u| 2.0 * (law.density(u) - psi),
        p,
        quad,
        Provenance::NonparametricAverageDensity,
    )
}

pub fn np_avg_density_eif(p: &DensityModel, u: &[f64], quad: &QuadratureSettings) -> Result<f64> {
    p.space().check_dim(u)?;
    Ok(2.0 * (p.density(u) - avg_density_value(p, quad)?))
}

struct Constrained {
    psi: f64,
    coef: f64,
}

fn constrained_parts(p: &DensityModel, mu: f64, quad: &QuadratureSettings) -> Result<Constrained> {
    let psi = avg_density_value(p, quad)?;
    if p.dim() != 1 {
        return Err(Error::UnsupportedSpace("the mean-constrained oracle needs a univariate space".into()));
    }
    let num = p.expect(|u| (u[0] - mu) * p.density(u), quad)?;
    let var = p.expect(|u| (u[0] - mu) * (u[0] - mu), quad)?;
    if !(var > 0.0) {
        return Err(Error::Degenerate(format!("second moment about {mu} is {var}")));
    }
    Ok(Constrained { psi, coef: num / var })
}

/// `2 {p(u) - Psi - c (u - mu)}` with `c = int (w - mu) p^2 / int (w - mu)^2 p`.
pub fn constrained_avg_density_oracle(p: &DensityModel, mu: f64, quad: &QuadratureSettings) -> Result<OracleEif> {
    let c = constrained_parts(p, mu, quad)?;
    let law = p.clone();
    OracleEif::new(
        move |u| 2.0 * (law.density(u) - c.psi - c.coef * (u[0] - mu)),
        p,
        quad,
        Provenance::ConstrainedAverageDensity,
    )
}

pub fn constrained_avg_density_eif(p: &DensityModel, mu: f64, u: &[f64], quad: &QuadratureSettings) -> Result<f64> {
    p.space().check_dim(u)?;
    let c = constrained_parts(p, mu, quad)?;
    Ok(2.0 * (p.density(u) - c.psi - c.coef * (u[0] - mu)))
}

/// `phi_np - [int phi_np phi_tilde dP / int phi_tilde^2 dP] phi_tilde`.
pub fn project_onto_one_constraint(
    phi_np: &OracleEif,
    phi_tilde: &OracleEif,
    p: &DensityModel,
    quad: &QuadratureSettings,
) -> Result<OracleEif> {
    let cross = p.expect(|u| phi_np.evaluate(u) * phi_tilde.evaluate(u), quad)?;
    let norm = p.expect(
        |u| {
            let t = phi_tilde.evaluate(u);
            t * t
        },
        quad,
    )?;
    if !(norm > 1e-300) {
        return Err(Error::Degenerate("the constraint direction has zero norm".into()));
    }
    let coef = cross / norm;
    let (a, b) = (phi_np.eval.clone(), phi_tilde.eval.clone());
    OracleEif::new(move |u| a(u) - coef * b(u), p, quad, Provenance::OneConstraintProjection)
}

/// EIF of `E[U_c]` in the tilt family of `reference` along `basis`:
/// the projection of `u_c - E u_c` onto the centered basis.
pub fn tilt_mean_oracle(reference: &DensityModel, basis: &Basis, component: usize, quad: &QuadratureSettings) -> Result<OracleEif> {
    let m = basis.len();
    if m == 0 || component >= reference.dim() {
        return Err(Error::input("tilt oracle needs a non-empty basis and a valid component"));
    }
    let means: Vec<f64> = (0..m).map(|j| reference.expect(|u| basis.eval(j, u), quad)).collect::<Result<_>>()?;
    let mean_c = reference.expect(|u| u[component], quad)?;
    let mut cov = alloc::vec![0.0; m * m];
    let mut cross = alloc::vec![0.0; m];
    for i in 0..m {
        cross[i] = reference.expect(|u| (u[component] - mean_c) * (basis.eval(i, u) - means[i]), quad)?;
        for j in 0..m {
            cov[i * m + j] = reference.expect(|u| (basis.eval(i, u) - means[i]) * (basis.eval(j, u) - means[j]), quad)?;
        }
    }
    let coef = cholesky_solve(&cov, &cross).ok_or_else(|| Error::Degenerate("tilt basis covariance is singular".into()))?;
    let b = basis.clone();
    OracleEif::new(
        move |u| (0..b.len()).map(|j| coef[j] * (b.eval(j, u) - means[j])).sum(),
        reference,
        quad,
        Provenance::TiltMean,
    )
}

/// Precomputed G-computation quantities for one longitudinal law.
struct GComp {
    law: DensityModel,
    layout: Layout,
    axes: Vec<Axis>,
    psi: f64,
    /// `m_j` at histories whose L components are all discrete.
    table: BTreeMap<(usize, Vec<u64>), f64>,
}

fn history_key(j: usize, x: &[f64]) -> (usize, Vec<u64>) {
    (j, (0..=j).map(|i| x[2 * i].to_bits()).collect())
}

impl GComp {
    fn new(p: &DensityModel, quad: &QuadratureSettings) -> Result<Self> {
        let layout = Layout::for_space(p.space())?;
        let axes = layout.l_axes(&[p], quad)?;
        let psi = Recursion {
            law: p,
            layout,
            axes: &axes,
        }
        .psi()?;
        let mut state = GComp {
            law: p.clone(),
            layout,
            axes,
            psi,
            table: BTreeMap::new(),
        };
        state.tabulate()?;
        Ok(state)
    }

    fn tabulate(&mut self) -> Result<()> {
        let space = self.law.space();
        for j in 0..=self.layout.k() {
            if !(0..=j).all(|i| !space.component(self.layout.l(i)).is_continuous()) {
                break;
            }
            let mut out = Vec::new();
            let mut err = None;
            {
                let rec = Recursion {
                    law: &self.law,
                    layout: self.layout,
                    axes: &self.axes,
                };
                for_each_node(&self.axes[..=j], |ls, _| {
                    if err.is_some() {
                        return;
                    }
                    let mut hist = alloc::vec![1.0; self.layout.dim()];
                    for (i, v) in ls.iter().enumerate() {
                        hist[2 * i] = *v;
                    }
                    if self.law.prefix_density(2 * j + 1, &hist) == 0.0 {
                        return;
                    }
                    match rec.m(j, &mut hist) {
                        Ok(v) => out.push((history_key(j, &hist), v)),
                        Err(e) => err = Some(e),
                    }
                });
            }
            if let Some(e) = err {
                return Err(e);
            }
            self.table.extend(out);
        }
        Ok(())
    }

    fn treated(&self, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        for j in 0..=self.layout.k() {
            if let Some(a) = h.get_mut(self.layout.a(j)) {
                *a = 1.0;
            }
        }
        h
    }

    fn m(&self, j: usize, x: &[f64]) -> Result<f64> {
        if j == self.layout.k() + 1 {
            return Ok(x[self.layout.l(j)]);
        }
        let mut hist = self.treated(x);
        if let Some(v) = self.table.get(&history_key(j, &hist)) {
            return Ok(*v);
        }
        Recursion {
            law: &self.law,
            layout: self.layout,
            axes: &self.axes,
        }
        .m(j, &mut hist)
    }

    fn g(&self, r: usize, h: &[f64]) -> Result<f64> {
        let g = self.law.conditional(self.layout.a(r), h);
        if g > 0.0 {
            Ok(g)
        } else {
            Err(Error::Positivity {
                history: h[..=self.layout.a(r)].to_vec(),
            })
        }
    }

    fn np_eif(&self, x: &[f64]) -> Result<f64> {
        let mut phi = self.m(0, x)? - self.psi;
        let h = self.treated(x);
        let mut weight = 1.0;
        for j in 1..=self.layout.k() + 1 {
            if x[self.layout.a(j - 1)] != 1.0 {
                break;
            }
            weight /= self.g(j - 1, &h)?;
            phi += weight * (self.m(j, x)? - self.m(j - 1, x)?);
        }
        Ok(phi)
    }

    /// `E[1 / prod_{r<j} g_r | L_j, L_{j-1}, treated]` by Bayes over the earlier L's.
    fn t_weight(&self, j: usize, x: &[f64]) -> Result<f64> {
        let c = self.layout.l(j);
        let mut h = self.treated(&x[..=c]);
        let (mut num, mut den) = (0.0, 0.0);
        let mut err = None;
        for_each_node(&self.axes[..j - 1], |lat, w| {
            for (i, v) in lat.iter().enumerate() {
                h[2 * i] = *v;
            }
            let joint = self.law.prefix_density(c + 1, &h);
            if joint == 0.0 {
                return;
            }
            let mut inv = 1.0;
            for r in 0..j {
                match self.g(r, &h) {
                    Ok(g) => inv /= g,
                    Err(e) => {
                        err.get_or_insert(e);
                        return;
                    }
                }
            }
            num += w * joint * inv;
            den += w * joint;
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    fn markov_eif(&self, x: &[f64]) -> Result<f64> {
        let mut phi = self.m(0, x)? - self.psi;
        for j in 1..=self.layout.k() + 1 {
            if x[self.layout.a(j - 1)] != 1.0 {
                break;
            }
            phi += self.t_weight(j, x)? * (self.m(j, x)? - self.m(j - 1, x)?);
        }
        Ok(phi)
    }
}

/// Nonparametric EIF of the G-computation mean at `x`.
pub fn gcomp_np_eif(p: &DensityModel, x: &[f64], quad: &QuadratureSettings) -> Result<f64> {
    p.space().check_dim(x)?;
    GComp::new(p, quad)?.np_eif(x)
}

pub fn gcomp_np_oracle(p: &DensityModel, quad: &QuadratureSettings) -> Result<OracleEif> {
    let st = Arc::new(GComp::new(p, quad)?);
    OracleEif::new(move |u| st.np_eif(u).unwrap_or(f64::NAN), p, quad, Provenance::GCompNonparametric)
}

fn markov_state(p: &DensityModel, quad: &QuadratureSettings) -> Result<GComp> {
    let st = GComp::new(p, quad)?;
    let residual = markov_residual(p, st.layout, &st.axes, 256);
    if residual > 1e-8 {
        return Err(Error::ModelMembership { residual });
    }
    Ok(st)
}

/// Markov-model EIF of the G-computation mean at `x`.
pub fn gcomp_markov_eif(p: &DensityModel, x: &[f64], quad: &QuadratureSettings) -> Result<f64> {
    p.space().check_dim(x)?;
    markov_state(p, quad)?.markov_eif(x)
}

pub fn gcomp_markov_oracle(p: &DensityModel, quad: &QuadratureSettings) -> Result<OracleEif> {
    let st = Arc::new(markov_state(p, quad)?);
    OracleEif::new(move |u| st.markov_eif(u).unwrap_or(f64::NAN), p, quad, Provenance::GCompMarkov)
}

/// Pathwise derivative of `Psi` along the projected path toward the atom at `x`,
/// for all-discrete spaces: `[4 D(eps) - D(2 eps)] / (2 eps)` with `eps = 1e-7`,
/// where `D(e) = Psi(project((1 - e) P + e delta_x)) - Psi(P)`.
pub fn gateaux_brute_force(
    p: &DensityModel,
    model: &ModelProjector,
    psi: &dyn Functional,
    x: &[f64],
    settings: &Settings,
) -> Result<f64> {
    if p.space().continuous_dims() != 0 {
        return Err(Error::UnsupportedSpace("the brute-force oracle needs an all-discrete space".into()));
    }
    const EPS: f64 = 1e-7;
    let quad = &settings.quadrature;
    let atom: DensityModel = make_bump(x, 1.0, p)?.into();
    let d = |e: f64| -> Result<f64> {
        let q = model.project(&mix(p, &atom, e)?, settings)?.projected;
        match psi.difference(&q, p, quad) {
            Some(v) => v,
            None => Ok(psi.evaluate(&q, quad)? - psi.evaluate(p, quad)?),
        }
    };
    let (d1, d2) = (d(EPS)?, d(2.0 * EPS)?);
    Ok((4.0 * d1 - d2) / (2.0 * EPS))
}
