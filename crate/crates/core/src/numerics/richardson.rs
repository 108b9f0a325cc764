use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Right derivative at 0 by Richardson extrapolation of forward differences
/// `(f(h) - f(0)) / h` with `h = eps0 / 2^k`, `k = 0..levels`.
pub fn try_richardson_derivative<F>(mut f: F, eps0: f64, levels: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if levels < 2 {
        return Err(Error::input("richardson extrapolation needs at least 2 levels"));
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::input("richardson step must be positive and finite"));
    }
    let f0 = f(0.0)?;
    if !f0.is_finite() {
        return Err(Error::NonFinite { location: alloc::vec![0.0] });
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for k in 0..levels {
        let h = eps0 / (1u64 << k) as f64;
        let fh = f(h)?;
        if !fh.is_finite() {
            return Err(Error::NonFinite { location: alloc::vec![h] });
        }
        let mut row = Vec::with_capacity(k + 1);
        row.push((fh - f0) / h);
        for m in 1..=k {
            let p = (1u64 << m) as f64;
            row.push((p * row[m - 1] - table[k - 1][m - 1]) / (p - 1.0));
        }
        table.push(row);
    }
    Ok(table[levels - 1][levels - 1])
}

/// Infallible-function convenience wrapper.
pub fn richardson_derivative<F: FnMut(f64) -> f64>(mut f: F, eps0: f64, levels: usize) -> Result<f64> {
    try_richardson_derivative(|e| Ok(f(e)), eps0, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_sine() {
        let d = richardson_derivative(|e| e * e, 0.1, 4).unwrap();
        assert!(d.abs() < 1e-15);
        let d = richardson_derivative(libm::sin, 0.01, 4).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(richardson_derivative(|e| e, 0.1, 1).is_err());
        assert!(richardson_derivative(|e| 1.0 / e, 0.1, 3).is_err());
    }
}
