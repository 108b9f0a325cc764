use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub epsilon: f64,
    pub lambda: f64,
    pub value: f64,
    pub psi_star: f64,
    pub psi_base: f64,
    pub stable_path: bool,
    pub status: CellStatus,
}

impl GridCell {
    pub fn failed(epsilon: f64, lambda: f64, psi_base: f64, reason: String) -> Self {
        GridCell {
            epsilon,
            lambda,
            value: f64::NAN,
            psi_star: f64::NAN,
            psi_base,
            stable_path: false,
            status: CellStatus::Failed(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlateauSettings {
    /// Decimal places used when comparing cells.
    pub digits: u32,
    pub min_cells: usize,
}

impl Default for PlateauSettings {
    fn default() -> Self {
        PlateauSettings { digits: 3, min_cells: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    /// `(epsilon index, lambda index)` pairs.
    pub cells: Vec<(usize, usize)>,
    pub consensus: Option<f64>,
    pub digits: u32,
    pub min_cells: usize,
}

/// Secant values over descending epsilon (rows) and lambda (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EifGrid {
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Row-major: `cells[i * lambdas.len() + j]` holds `(epsilons[i], lambdas[j])`.
    pub cells: Vec<GridCell>,
    pub plateau: Plateau,
}

impl EifGrid {
    /// Wraps cells computed elsewhere (possibly in parallel) and detects the plateau.
    pub fn assemble(epsilons: Vec<f64>, lambdas: Vec<f64>, cells: Vec<GridCell>, settings: PlateauSettings) -> Result<Self> {
        if cells.len() != epsilons.len() * lambdas.len() {
            return Err(Error::input(format!(
                "grid has {} cells, expected {}",
                cells.len(),
                epsilons.len() * lambdas.len()
            )));
        }
        let values: Vec<f64> = cells.iter().map(|c| c.value).collect();
        let plateau = detect_plateau(&values, &epsilons, &lambdas, settings);
        Ok(EifGrid {
            epsilons,
            lambdas,
            cells,
            plateau,
        })
    }

    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.lambdas.len() + j]
    }

    pub fn consensus(&self) -> Option<f64> {
        self.plateau.consensus
    }
}

/// `{1e-1, ..., 1e-8}`.
pub fn default_grid() -> Vec<f64> {
    alloc::vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
}

pub fn validate_grid_list(list: &[f64], name: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::input(format!("{name} grid is empty")));
    }
    if list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::input(format!("{name} grid values must be positive and finite")));
    }
    if list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::input(format!("{name} grid must be strictly descending")));
    }
    Ok(())
}

fn rounded_key(v: f64, scale: f64) -> Option<i64> {
    let s = v * scale;
    if s.is_finite() && s.abs() < 9.0e15 {
        Some(math::round(s) as i64)
    } else {
        None
    }
}

fn mean_log10(idx: &[usize], values: &[f64]) -> f64 {
    idx.iter().map(|&i| math::log10(values[i])).sum::<f64>() / idx.len() as f64
}

/// Largest 4-connected region of cells that agree after rounding to
/// `digits` decimals, reaches the smallest-epsilon row and leans toward
/// small epsilon and large lambda (mean log epsilon at most mean log lambda).
///
/// Ties prefer smaller mean log epsilon, then larger mean log lambda.
/// `values` is row-major over `epsilons` x `lambdas`.
pub fn detect_plateau(values: &[f64], epsilons: &[f64], lambdas: &[f64], settings: PlateauSettings) -> Plateau {
    let (rows, cols) = (epsilons.len(), lambdas.len());
    let mut scale = 1.0;
    for _ in 0..settings.digits {
        scale *= 10.0;
    }
    let keys: Vec<Option<i64>> = values.iter().map(|v| rounded_key(*v, scale)).collect();
    let top = (0..rows)
        .min_by(|&a, &b| epsilons[a].total_cmp(&epsilons[b]))
        .unwrap_or(0);

    let mut seen = alloc::vec![false; rows * cols];
    let mut best: Option<(Vec<(usize, usize)>, i64, f64, f64)> = None;
    for start in 0..rows * cols {
        let Some(key) = keys[start] else { continue };
        if seen[start] {
            continue;
        }
        let mut region = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k / cols, k % cols);
            region.push((i, j));
            let mut visit = |ni: usize, nj: usize| {
                let n = ni * cols + nj;
                if !seen[n] && keys[n] == Some(key) {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < rows {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < cols {
                visit(i, j + 1);
            }
        }
        if region.len() < settings.min_cells || !region.iter().any(|&(i, _)| i == top) {
            continue;
        }
        let ei: Vec<usize> = region.iter().map(|c| c.0).collect();
        let lj: Vec<usize> = region.iter().map(|c| c.1).collect();
        let me = mean_log10(&ei, epsilons);
        let ml = mean_log10(&lj, lambdas);
        if me > ml {
            continue;
        }
        let better = match &best {
            None => true,
            Some((r, _, be, bl)) => {
                region.len() > r.len() || (region.len() == r.len() && (me < *be || (me == *be && ml > *bl)))
            }
        };
        if better {
            best = Some((region, key, me, ml));
        }
    }
    match best {
        Some((mut cells, key, _, _)) => {
            cells.sort_unstable();
            Plateau {
                cells,
                consensus: Some(key as f64 / scale),
                digits: settings.digits,
                min_cells: settings.min_cells,
            }
        }
        None => Plateau {
            cells: Vec::new(),
            consensus: None,
            digits: settings.digits,
            min_cells: settings.min_cells,
        },
    }
}
