use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

/// Bracket for a sign-changing scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    /// Relative tolerance on the root.
    pub tol: f64,
    /// Absolute floor on the tolerance, for roots at or near zero.
    pub abs_tol: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::input(alloc::format!("root bracket needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(RootBracket {
            lo,
            hi,
            tol: 1e-13,
            abs_tol: 1e-30,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method. The bracket is never widened.
pub fn find_root<F: FnMut(f64) -> f64>(mut g: F, bracket: &RootBracket) -> Result<RootReport> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = g(a);
    let mut fb = g(b);
    if !fa.is_finite() {
        return Err(Error::NonFinite { location: alloc::vec![a] });
    }
    if !fb.is_finite() {
        return Err(Error::NonFinite { location: alloc::vec![b] });
    }
    if fa == 0.0 {
        return Ok(RootReport { root: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootReport { root: b, residual: 0.0, iterations: 0 });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=MAX_ITER {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * bracket.tol * b.abs() + bracket.abs_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(RootReport { root: b, residual: fb, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += if xm > 0.0 { tol1 } else { -tol1 };
        }
        fb = g(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite { location: alloc::vec![b] });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITER,
        gradient_norm: fb.abs(),
        last: alloc::vec![b],
    })
}

/// Result of a dense sign-change scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignScan {
    /// First sub-bracket showing a sign change.
    pub bracket: Option<(f64, f64)>,
    pub sign_changes: usize,
}

/// Evaluates `g` on `points` equally spaced nodes of `[lo, hi]` and counts sign changes.
pub fn scan_sign_changes<F: FnMut(f64) -> f64>(mut g: F, lo: f64, hi: f64, points: usize) -> SignScan {
    let n = points.max(2);
    let mut out = SignScan { bracket: None, sign_changes: 0 };
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = g(x);
        if !v.is_finite() {
            continue;
        }
        if let Some((px, pv)) = prev {
            if (pv < 0.0 && v >= 0.0) || (pv > 0.0 && v <= 0.0) {
                out.sign_changes += 1;
                if out.bracket.is_none() {
                    out.bracket = Some((px, x));
                }
            }
        }
        prev = Some((x, v));
    }
    out
}
