//! Safeguarded Newton iteration for monotone scalar equations.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]` where `f(lo) <= 0 <= f(hi)`, using Newton steps
/// from the right end and falling back to bisection whenever a step leaves
/// the current bracket. `f_df` returns `(f(x), f'(x))`.
pub fn newton_bisect<F>(mut f_df: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f_df(lo);
    let (f_hi, _) = f_df(hi);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::NoConvergence(format!(
            "root not bracketed on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut x = hi;
    for _ in 0..500 {
        let (fx, dfx) = f_df(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= x_tol * (1.0 + x.abs()) || hi - lo <= x_tol * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(format!(
        "Newton/bisection did not converge on [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 4.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisection_fallback_for_flat_derivative() {
        // derivative reported as zero forces bisection steps
        let r = newton_bisect(|x| (x - 0.3, 0.0), 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(newton_bisect(|x| (x + 1.0, 1.0), 0.0, 1.0, 1e-12).is_err());
    }
}
