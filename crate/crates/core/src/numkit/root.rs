use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-12;
const MAX_EXPANSIONS: usize = 200;
const MAX_BISECTIONS: usize = 4096;

/// Root of `f` on the positive axis.
///
/// The bracket `[hint / 2^k, hint * 2^k]` is widened until `f` changes sign
/// (at most 200 times), then bisected until the bracket width is at most
/// `rel_tol * root`.
pub fn bisect_root(f: impl Fn(f64) -> f64, hint: f64, rel_tol: f64) -> Result<f64> {
    if !(hint > 0.0 && hint.is_finite()) {
        return Err(Error::InvalidInput(format!("bracket hint must be positive, got {hint}")));
    }
    let mut lo = hint;
    let mut hi = hint;
    let mut f_lo = f(lo);
    let mut f_hi = f_lo;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut expansions = 0;
    while f_lo.signum() == f_hi.signum() {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::NoBracket { expansions });
        }
        lo *= 0.5;
        hi *= 2.0;
        f_lo = f(lo);
        f_hi = f(hi);
        expansions += 1;
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        // Prefer the tighter half-bracket around the hint when it already changes sign.
        if f_lo.signum() != f(hint).signum() {
            hi = hint;
            f_hi = f(hint);
        } else if f_hi.signum() != f(hint).signum() {
            lo = hint;
            f_lo = f(hint);
        }
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let r = bisect_root(|x| x - 2.0, 1.0, DEFAULT_REL_TOL).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stationarity_condition_of_the_bound_constant() {
        let r = bisect_root(|x| (1.0 + x).ln() - 2.0 * x / (1.0 + x), 3.0, DEFAULT_REL_TOL).unwrap();
        // Newton oracle on the same condition, independent of bisection.
        let mut x: f64 = 4.0;
        for _ in 0..50 {
            let g = (1.0 + x).ln() - 2.0 * x / (1.0 + x);
            let dg = 1.0 / (1.0 + x) - 2.0 / ((1.0 + x) * (1.0 + x));
            x -= g / dg;
        }
        assert!((r - x).abs() < 1e-11 * x);
        assert!((r - 3.92155).abs() < 1e-5);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(matches!(
            bisect_root(|x| x * x + 1.0, 1.0, DEFAULT_REL_TOL),
            Err(Error::NoBracket { expansions: 200 })
        ));
        assert!(bisect_root(|x| x, -1.0, DEFAULT_REL_TOL).is_err());
    }
}
