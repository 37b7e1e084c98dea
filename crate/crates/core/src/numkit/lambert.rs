use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 64;

/// Principal branch `W0` of the Lambert W function on `[-1/e, inf)`.
///
/// Halley iteration from a branch-point series near `-1/e`, `ln(1+x)` for
/// moderate arguments and `ln x - ln ln x` for large ones.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch {
        return Err(Error::Domain { function: "lambert_w0", x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == branch {
        return Ok(-1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.75
    } else {
        let l = x.ln();
        l - l.ln()
    };

    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn below_branch_point_is_domain_error() {
        assert!(matches!(lambert_w0(-0.5), Err(Error::Domain { .. })));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn optimum_constant_of_the_bound() {
        let w = lambert_w0(-2.0 / (E * E)).unwrap();
        let c = -1.0 - 2.0 / w;
        assert!((c - 3.92).abs() < 5e-3);
        // Stationarity of log2(1+x)/sqrt(x).
        assert!(((1.0 + c).ln() - 2.0 * c / (1.0 + c)).abs() < 1e-12);
    }

    #[test]
    fn identity_on_log_grid() {
        let lo: f64 = -1.0 / E + 1e-6;
        // Negative side: linear grid up to 0.
        for i in 0..200 {
            let x = lo + (0.0 - lo) * i as f64 / 200.0;
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1e-300), "x = {x}");
        }
        // Positive side: log-spaced up to 1e6.
        for i in 0..400 {
            let x = 10f64.powf(-12.0 + 18.0 * i as f64 / 399.0);
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x, "x = {x}");
        }
    }
}
