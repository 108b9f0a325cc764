//! Subcommand bodies. Each reads a [`RunConfig`] and writes one CSV table.

use std::path::{Path, PathBuf};

use eif_core::diagnostics::condition_sweep;
use eif_core::engine::{CellStatus, EifGrid, GridCell};
use eif_core::functionals::FunctionalKind;
use eif_core::numerics::QuadratureSettings;
use eif_core::oracles::{
    constrained_avg_density_oracle, gcomp_markov_oracle, gcomp_np_oracle, np_avg_density_oracle, tilt_mean_oracle, OracleEif,
};
use eif_core::{DensityModel, Engine, Functional, ModelProjector, Settings};
use rayon::prelude::*;

use crate::config::{check_seed, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_atomic, Table};
use crate::rng;

/// Distribution, model, functional and solver settings resolved from a config.
pub struct Problem {
    pub base: DensityModel,
    pub model: ModelProjector,
    pub psi: Box<dyn Functional>,
    pub settings: Settings,
}

impl Problem {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let base = cfg.distribution()?;
        let model = cfg.model(&base)?;
        let psi = cfg.functional()?;
        let settings = cfg.settings()?;
        Ok(Problem {
            base,
            model,
            psi,
            settings,
        })
    }

    pub fn engine(&self) -> Result<Engine<'_>, CliError> {
        Ok(Engine::new(&self.base, &self.model, self.psi.as_ref(), self.settings)?)
    }
}

fn out_path(cfg: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf).or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
}

fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

pub fn point(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let problem = Problem::from_config(cfg)?;
    let x = cfg.point(problem.base.dim())?;
    let (epsilon, lambda) = (cfg.epsilon()?, cfg.lambda()?);
    let s = problem.engine()?.secant(&x, epsilon, lambda)?;
    let mut t = Table::new(&["epsilon", "lambda", "value", "psi_base", "psi_star", "difference", "feasible", "stable_path"]);
    t.push(vec![
        num(s.epsilon),
        num(s.lambda),
        num(s.value),
        num(s.psi_base),
        num(s.psi_star),
        num(s.difference),
        flag(s.feasible),
        flag(s.stable_path),
    ]);
    t.emit(out_path(cfg, out).as_deref())
}

/// Evaluates every cell in parallel; results do not depend on thread count.
pub fn compute_grid(cfg: &RunConfig) -> Result<EifGrid, CliError> {
    let problem = Problem::from_config(cfg)?;
    let x = cfg.point(problem.base.dim())?;
    let (eps, lams) = cfg.grid_lists()?;
    let engine = problem.engine()?;
    let pairs: Vec<(f64, f64)> = eps.iter().flat_map(|&e| lams.iter().map(move |&l| (e, l))).collect();
    let cells: Vec<GridCell> = pairs.par_iter().map(|&(e, l)| engine.grid_cell(&x, e, l)).collect();
    Ok(EifGrid::assemble(eps, lams, cells, cfg.plateau_settings())?)
}

pub fn grid_table(g: &EifGrid) -> Table {
    let mut t = Table::new(&["lambda", "epsilon", "value", "psi_star", "psi_base", "status"]);
    for j in 0..g.lambdas.len() {
        for i in 0..g.epsilons.len() {
            let c = g.cell(i, j);
            let status = match &c.status {
                CellStatus::Ok => "ok".to_string(),
                CellStatus::Failed(why) => format!("failed: {why}"),
            };
            t.push(vec![num(c.lambda), num(c.epsilon), num(c.value), num(c.psi_star), num(c.psi_base), status]);
        }
    }
    t
}

fn range(values: impl Iterator<Item = f64>) -> String {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return String::new();
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{lo:e}:{hi:e}")
}

pub fn plateau_table(g: &EifGrid) -> Table {
    let p = &g.plateau;
    let mut t = Table::new(&["consensus", "digits", "cell_count", "eps_range", "lambda_range"]);
    t.push(vec![
        p.consensus.map(|c| format!("{c:.*}", p.digits as usize)).unwrap_or_default(),
        p.digits.to_string(),
        p.cells.len().to_string(),
        range(p.cells.iter().map(|&(i, _)| g.epsilons[i])),
        range(p.cells.iter().map(|&(_, j)| g.lambdas[j])),
    ]);
    t
}

/// `dir/stem.csv` -> `dir/stem.plateau.csv`.
pub fn plateau_path(grid_path: &Path) -> PathBuf {
    let stem = grid_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "grid".into());
    grid_path.with_file_name(format!("{stem}.plateau.csv"))
}

pub fn grid(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let g = compute_grid(cfg)?;
    let path = out_path(cfg, out);
    grid_table(&g).emit(path.as_deref())?;
    let summary = plateau_table(&g);
    match path {
        Some(p) => summary.emit(Some(&plateau_path(&p)))?,
        None => eprint!("{}", String::from_utf8_lossy(&summary.to_bytes()?)),
    }
    if g.plateau.consensus.is_none() {
        eprintln!("no plateau found");
    }
    Ok(())
}

/// Headerless numeric CSV, one observation per row.
pub fn read_data(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row_no = k + 1;
        let rec = rec.map_err(|e| CliError::Config(format!("data row {row_no}: {e}")))?;
        if rec.len() != dim {
            return Err(CliError::Config(format!("data row {row_no}: expected {dim} values, found {}", rec.len())));
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Config(format!("data row {row_no}: not a finite number")))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!("{} holds no observations", path.display())));
    }
    Ok(rows)
}

pub fn onestep(cfg: &RunConfig, data: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let problem = Problem::from_config(cfg)?;
    let rows = read_data(data, problem.base.dim())?;
    let r = problem.engine()?.one_step(&rows, cfg.epsilon()?, cfg.lambda()?)?;
    let mut t = Table::new(&["plug_in", "correction", "estimate", "n", "epsilon", "lambda"]);
    t.push(vec![num(r.plug_in), num(r.correction), num(r.estimate), r.n.to_string(), num(r.epsilon), num(r.lambda)]);
    t.emit(out_path(cfg, out).as_deref())
}

/// Closed-form EIF at `p` for the configured model and functional.
pub fn oracle_for(model: &ModelProjector, psi: &dyn Functional, p: &DensityModel, quad: &QuadratureSettings) -> Result<OracleEif, CliError> {
    let r = match (model, psi.kind()) {
        (ModelProjector::Nonparametric, FunctionalKind::AverageDensity) => np_avg_density_oracle(p, quad),
        (ModelProjector::MeanConstrained { mu }, FunctionalKind::AverageDensity) => constrained_avg_density_oracle(p, *mu, quad),
        (ModelProjector::Nonparametric, FunctionalKind::GCompMean) => gcomp_np_oracle(p, quad),
        (ModelProjector::MarkovLongitudinal, FunctionalKind::GCompMean) => gcomp_markov_oracle(p, quad),
        (ModelProjector::TiltedFamily { basis, .. }, FunctionalKind::Mean { component }) => tilt_mean_oracle(p, basis, component, quad),
        _ => {
            return Err(CliError::Config(format!(
                "no oracle for the {} model with the {} functional",
                model.name(),
                psi.name()
            )))
        }
    };
    Ok(r?)
}

/// `|e - o| / |o|`; an exact zero oracle value yields the absolute error.
pub fn rel_error(e: f64, o: f64) -> f64 {
    if o == 0.0 {
        (e - o).abs()
    } else {
        (e - o).abs() / o.abs()
    }
}

pub fn validate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let problem = Problem::from_config(cfg)?;
    let dim = problem.base.dim();
    let points = match &cfg.validate.points {
        Some(ps) => ps.clone(),
        None => vec![cfg.point(dim)?],
    };
    if let Some(bad) = points.iter().position(|p| p.len() != dim) {
        return Err(CliError::Config(format!("`validate.points[{bad}]` needs {dim} components")));
    }
    let oracle = oracle_for(&problem.model, problem.psi.as_ref(), &problem.base, &problem.settings.quadrature)?;
    let engine = problem.engine()?;
    let (epsilon, lambda) = (cfg.epsilon()?, cfg.lambda()?);
    let mut t = Table::new(&["point", "engine_value", "oracle_value", "rel_error"]);
    for x in &points {
        let e = engine.secant(x, epsilon, lambda)?.value;
        let o = oracle.evaluate(x);
        let label = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
        t.push(vec![label, num(e), num(o), num(rel_error(e, o))]);
    }
    t.emit(out_path(cfg, out).as_deref())
}

pub fn diagnose(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let problem = Problem::from_config(cfg)?;
    let x = cfg.point(problem.base.dim())?;
    let eps = cfg.diagnose.epsilons.clone().unwrap_or_else(|| vec![1e-3, 1e-4, 1e-5, 1e-6]);
    let lams = cfg.diagnose.lambdas.clone().unwrap_or_else(|| vec![1e-1, 1e-2]);
    for (list, key) in [(&eps, "diagnose.epsilons"), (&lams, "diagnose.lambdas")] {
        eif_core::engine::validate_grid_list(list, key).map_err(|e| CliError::Config(format!("`{key}`: {e}")))?;
    }
    // Fail early with exit 1 when no oracle is registered.
    let quad = problem.settings.quadrature;
    oracle_for(&problem.model, problem.psi.as_ref(), &problem.base, &quad)?;
    let engine = problem.engine()?;
    let reports = condition_sweep(&engine, &x, &eps, &lams, |p| {
        oracle_for(&problem.model, problem.psi.as_ref(), p, &quad).map_err(|e| match e {
            CliError::Core(c) => c,
            other => eif_core::Error::Unsupported(other.to_string()),
        })
    })?;
    let mut t = Table::new(&["epsilon", "lambda", "R", "R_over_eps", "R_over_bound", "a1_residual"]);
    for rep in &reports {
        for r in &rep.rows {
            t.push(vec![
                num(r.epsilon),
                num(r.lambda),
                num(r.remainder),
                num(r.remainder / r.epsilon),
                num(r.bound_ratio()),
                num(r.a1_residual),
            ]);
        }
    }
    t.emit(out_path(cfg, out).as_deref())
}

pub fn demo_data(cfg: &RunConfig, seed: Option<u64>, out: Option<&Path>) -> Result<(), CliError> {
    let seed = seed
        .or(cfg.demo.seed)
        .ok_or_else(|| CliError::Config("demo data needs --seed or `demo.seed`".into()))?;
    check_seed(seed)?;
    let base = cfg.distribution()?;
    let rows = rng::sample(&base, cfg.demo.n, seed)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in &rows {
        w.write_record(r.iter().map(|v| num(*v))).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    match out_path(cfg, out) {
        Some(p) => write_atomic(&p, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
