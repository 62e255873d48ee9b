//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Finds a root of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs. `df` is the derivative; Newton steps that leave the
/// current bracket or fail to halve it fall back to bisection.
///
/// Iteration stops once the bracket is narrower than
/// `rel_tol * |x| + abs_tol` or `f` vanishes exactly.
pub fn newton_bisect<F, D>(f: F, df: D, lo: f64, hi: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::RootFinding("endpoints do not bracket a root"));
    }
    // orient so that f(lo) < 0 < f(hi)
    let increasing = f_lo < 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..MAX_ITERATIONS {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let tol = rel_tol * x.abs() + abs_tol;
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let step = fx / df(x);
        let candidate = x - step;
        if step.is_finite() && candidate > lo && candidate < hi && step.abs() < 0.5 * last_step {
            if step.abs() <= 0.5 * tol {
                return Ok(candidate);
            }
            last_step = step.abs();
            x = candidate;
        } else {
            last_step = 0.5 * (hi - lo);
            x = 0.5 * (lo + hi);
        }
    }
    Err(Error::RootFinding("iteration limit reached"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let r = newton_bisect(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn decreasing_function() {
        let r = newton_bisect(|x| 1.0 - x * x * x, |x| -3.0 * x * x, 0.0, 3.0, 1e-13, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_at_zero_needs_absolute_floor() {
        let r = newton_bisect(|x| x * (x + 1.0), |x| 2.0 * x + 1.0, -0.5, 1.0, 1e-12, 1e-15).unwrap();
        assert!(r.abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(newton_bisect(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0, 1e-12, 0.0).is_err());
    }
}
