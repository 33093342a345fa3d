//! Bracketing root finder for monotone scalar functions.

use crate::error::{Error, Result};

/// Outcome of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    /// `|f(root)|`.
    pub residual: f64,
    /// Width of the final bracket.
    pub width: f64,
    pub iterations: usize,
}

/// Stopping rules for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOptions {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-10,
            x_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs
/// (or one of them vanish).
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, opts: BisectOptions) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(Bisection {
            root: lo,
            residual: 0.0,
            width: hi - lo,
            iterations: 0,
        });
    }
    if fhi == 0.0 {
        return Ok(Bisection {
            root: hi,
            residual: 0.0,
            width: hi - lo,
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Range(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:.3e}, {fhi:.3e}"
        )));
    }
    let mut best = if flo.abs() < fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    for it in 1..=opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= opts.f_tol || fm == 0.0 {
            return Ok(Bisection {
                root: mid,
                residual: fm.abs(),
                width: hi - lo,
                iterations: it,
            });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= opts.x_tol {
            return Ok(Bisection {
                root: best.0,
                residual: best.1.abs(),
                width: hi - lo,
                iterations: it,
            });
        }
    }
    Ok(Bisection {
        root: best.0,
        residual: best.1.abs(),
        width: hi - lo,
        iterations: opts.max_iter,
    })
}
