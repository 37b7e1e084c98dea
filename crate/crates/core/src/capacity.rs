//! Water-filling capacity of a fixed channel and the equal-gain rate model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{singular_values, ComplexMat};

/// Optimal power allocation over parallel Gaussian modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfillResult {
    /// Mode gains, descending.
    pub sigma_sq: Vec<f64>,
    /// Power per mode, aligned with `sigma_sq`.
    pub powers: Vec<f64>,
    pub water_level: f64,
    pub capacity_bits: f64,
}

impl WaterfillResult {
    pub fn active_modes(&self) -> usize {
        self.powers.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Exact water-filling of `snr` units of power over gains `sigma_sq`.
///
/// Gains are sorted descending and the water level for the `k` strongest modes
/// is `(snr + sum 1/g_i) / k`. The largest `k` whose weakest mode sits strictly
/// below that level is the optimum; modes with equal gain therefore enter or
/// leave together.
pub fn waterfill(sigma_sq: &[f64], snr: f64) -> Result<WaterfillResult> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
    }
    if sigma_sq.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::InvalidInput("mode gains must be finite and non-negative".into()));
    }
    let mut gains = sigma_sq.to_vec();
    gains.sort_by(|a, b| b.total_cmp(a));
    if gains.first().map_or(true, |&g| g <= 0.0) {
        return Err(Error::InvalidInput("water-filling needs at least one positive gain".into()));
    }

    let mut inv_sum = 0.0;
    let mut level = 0.0;
    let mut active = 0;
    for (k, &g) in gains.iter().enumerate() {
        if g <= 0.0 {
            break;
        }
        let candidate_sum = inv_sum + 1.0 / g;
        let candidate = (snr + candidate_sum) / (k + 1) as f64;
        if candidate <= 1.0 / g {
            break;
        }
        inv_sum = candidate_sum;
        level = candidate;
        active = k + 1;
    }
    // Tied gains at the cut share one inverse, so they were accepted or rejected together above.

    let powers: Vec<f64> = gains
        .iter()
        .enumerate()
        .map(|(i, &g)| if i < active { (level - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    let capacity_bits = gains
        .iter()
        .zip(&powers)
        .map(|(g, p)| (g * p).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2;
    Ok(WaterfillResult {
        sigma_sq: gains,
        powers,
        water_level: level,
        capacity_bits,
    })
}

/// Capacity of `h` with power `snr` water-filled over its squared singular values.
pub fn channel_capacity(h: &ComplexMat, snr: f64) -> Result<WaterfillResult> {
    let sv = singular_values(h)?;
    let gains: Vec<f64> = sv.iter().map(|s| s * s).collect();
    waterfill(&gains, snr)
}

/// Rate with power spread equally over `sigma_sq.len()` modes.
pub fn equal_power_rate(sigma_sq: &[f64], snr: f64) -> f64 {
    let p = snr / sigma_sq.len() as f64;
    sigma_sq.iter().map(|g| (g * p).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// `eta N_min log2(1 + N_max snr / (eta^2 N_min))`: `eta N_min` modes of equal
/// gain `N_max / eta` sharing the power.
pub fn equal_gain_rate(eta: f64, n_min: usize, n_max: usize, snr: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
    }
    if n_min == 0 || n_max < n_min {
        return Err(Error::InvalidInput(format!("need 1 <= n_min <= n_max, got {n_min}, {n_max}")));
    }
    let (nmin, nmax) = (n_min as f64, n_max as f64);
    Ok(eta * nmin * (nmax * snr / (eta * eta * nmin)).ln_1p() / std::f64::consts::LN_2)
}
