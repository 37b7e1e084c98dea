//! SNR-driven choice of array configuration: the optimal `eta`, the receive
//! rotation that realises it, and banks of radial ULAs switched by SNR.

use serde::{Deserialize, Serialize};

use crate::bound::{optimum_constant, BoundCurve};
use crate::error::{Error, Result};

/// `sqrt(N_max snr / (N_min c))` clamped to `[1 / N_min, 1]`.
pub fn continuous_eta(snr: f64, n_tx: usize, n_rx: usize) -> f64 {
    let n_min = n_tx.min(n_rx) as f64;
    let n_max = n_tx.max(n_rx) as f64;
    (n_max * snr / (n_min * optimum_constant()))
        .sqrt()
        .clamp(1.0 / n_min, 1.0)
}

/// How the target `eta` is derived from the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    /// Relaxed real-valued mode count.
    #[default]
    Continuous,
    /// Integer mode count of the bound, `rho(snr) / N_min`.
    Integer,
}

/// Target `eta` for `snr`.
pub fn target_eta(snr: f64, n_tx: usize, n_rx: usize, mode: EtaMode) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
    }
    match mode {
        EtaMode::Continuous => Ok(continuous_eta(snr, n_tx, n_rx)),
        EtaMode::Integer => {
            let curve = BoundCurve::new(n_tx, n_rx)?;
            Ok(curve.rho(snr) as f64 / curve.n_min() as f64)
        }
    }
}

/// Receive elevation `arccos(eta / cos theta_t)` for Rayleigh-spaced arrays.
pub fn rotation_angle(snr: f64, n_tx: usize, n_rx: usize, theta_t: f64, mode: EtaMode) -> Result<f64> {
    let eta = target_eta(snr, n_tx, n_rx, mode)?;
    angle_for_eta(eta, theta_t)
}

/// `arccos(eta / cos theta_t)`; infeasible when the argument exceeds one.
pub fn angle_for_eta(eta: f64, theta_t: f64) -> Result<f64> {
    let arg = eta / theta_t.cos();
    if !(arg > 0.0) || arg > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "eta {eta} cannot be reached with transmit elevation {:.4} rad",
            theta_t
        )));
    }
    Ok(arg.min(1.0).acos())
}

/// Elevations `arccos(n / N_min)` for `n = 1..=N_min`.
pub fn radial_full_bank(n_min: usize) -> Result<Vec<f64>> {
    if n_min == 0 {
        return Err(Error::InvalidInput("n_min must be at least 1".into()));
    }
    Ok((1..=n_min).map(|n| (n as f64 / n_min as f64).acos()).collect())
}

/// Antennas in a bank of `n_ulas` radial ULAs of `n_rx` elements sharing the centre antenna.
pub fn radial_bank_antenna_count(n_ulas: usize, n_rx: usize) -> usize {
    n_ulas * n_rx.saturating_sub(1) + 1
}

/// `log2(1 + c r) / (sqrt(r) log2(1 + c))`.
pub fn guarantee_ratio(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!("ratio must lie in (0, 1], got {r}")));
    }
    let c = optimum_constant();
    Ok((c * r).ln_1p() / (r.sqrt() * c.ln_1p()))
}

/// A bank of ULAs with `eta = 1, r, r^2, ...` and the SNR ranges that select each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPlan {
    pub ratio: f64,
    pub count: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub etas: Vec<f64>,
    /// Receive elevations `arccos(eta_i)`, radians.
    pub angles: Vec<f64>,
    /// `thresholds[i]` separates `etas[i]` (above) from `etas[i + 1]` (at or below).
    pub snr_thresholds: Vec<f64>,
    pub snr_min: Option<f64>,
    pub guarantee: f64,
    /// SNR below which the smallest `eta` is no longer within the guarantee.
    pub guaranteed_floor: f64,
}

/// Number of ULAs needed to reach `eta <= 1 / N_min`.
pub fn full_plan_count(r: f64, n_min: usize) -> usize {
    1 + ((n_min as f64).ln() / (1.0 / r).ln()).floor() as usize
}

/// Builds a geometric plan. With `snr_min`, the bank is truncated to the ULAs
/// needed down to that SNR (never more than the full plan).
pub fn geometric_plan(r: f64, n_tx: usize, n_rx: usize, snr_min: Option<f64>) -> Result<RadialPlan> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("ratio must lie in (0, 1), got {r}")));
    }
    if n_tx == 0 || n_rx == 0 {
        return Err(Error::InvalidInput("antenna counts must be at least 1".into()));
    }
    let n_min = n_tx.min(n_rx);
    let scale = n_min as f64 / n_tx.max(n_rx) as f64 * optimum_constant();
    let full = full_plan_count(r, n_min);
    let count = match snr_min {
        None => full,
        Some(s) if s > 0.0 && s.is_finite() => {
            let k = ((scale / s).ln() / (2.0 * (1.0 / r).ln()) + 1.5).floor();
            (k.max(1.0) as usize).min(full)
        }
        Some(s) => return Err(Error::InvalidInput(format!("snr_min must be positive, got {s}"))),
    };

    let etas: Vec<f64> = (0..count).map(|i| r.powi(i as i32)).collect();
    let angles = etas.iter().map(|e| e.acos()).collect();
    let snr_thresholds = (1..count).map(|i| scale * r.powi(2 * i as i32 - 1)).collect();
    Ok(RadialPlan {
        ratio: r,
        count,
        n_tx,
        n_rx,
        etas,
        angles,
        snr_thresholds,
        snr_min,
        guarantee: guarantee_ratio(r)?,
        guaranteed_floor: scale * r.powi(2 * count as i32 - 1),
    })
}

/// Outcome of choosing a ULA from a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub index: usize,
    pub eta: f64,
    pub angle: f64,
    /// False below the plan's floor, where the ratio guarantee does not apply.
    pub guaranteed: bool,
}

/// Picks the ULA whose SNR interval contains `snr`; thresholds belong to the lower-`eta` side.
pub fn select_configuration(plan: &RadialPlan, snr: f64) -> Result<Selection> {
    if !(snr > 0.0) {
        return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
    }
    let index = plan.snr_thresholds.partition_point(|&t| snr <= t);
    Ok(Selection {
        index,
        eta: plan.etas[index],
        angle: plan.angles[index],
        guaranteed: snr > plan.guaranteed_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::upper_bound_relaxed;
    use crate::capacity::equal_gain_rate;
    use crate::channel::{effective_eta, ArrayLinkGeometry};
    use crate::units::db_to_linear;
    use proptest::prelude::*;

    #[test]
    fn continuous_eta_examples() {
        assert!((continuous_eta(0.1, 256, 256) - 0.16).abs() < 1e-3);
        let c = optimum_constant();
        assert_eq!(continuous_eta(c * 1.0001, 64, 64), 1.0);
        let e = continuous_eta(1.0, 256, 256);
        assert!((e - 0.505).abs() < 5e-4);
        assert!((e.acos().to_degrees() - 59.7).abs() < 0.05);
        assert_eq!(continuous_eta(1e-9, 16, 16), 1.0 / 16.0);
    }

    #[test]
    fn rotation_examples() {
        let a = rotation_angle(1e3, 8, 8, 0.0, EtaMode::Integer).unwrap();
        assert!(a.abs() < 1e-12);
        let a = rotation_angle(0.01, 256, 256, 0.0, EtaMode::Continuous).unwrap();
        assert!((a.to_degrees() - 87.1).abs() < 0.05);
        let a = angle_for_eta(0.4, 60f64.to_radians()).unwrap();
        assert!((a.to_degrees() - 0.8f64.acos().to_degrees()).abs() < 1e-12);
        assert!((a.to_degrees() - 36.87).abs() < 5e-3);
        assert!(matches!(angle_for_eta(0.9, 60f64.to_radians()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rotation_round_trip_through_geometry() {
        for snr_db in [-25.0, -12.0, -3.0, 0.0, 4.0] {
            let snr = db_to_linear(snr_db);
            let theta = rotation_angle(snr, 64, 64, 0.0, EtaMode::Continuous).unwrap();
            let g = ArrayLinkGeometry::rayleigh(0.001, 5.0, 64, 64).with_elevations(0.0, theta);
            let eta = effective_eta(&g).unwrap();
            assert!((eta - continuous_eta(snr, 64, 64)).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_angles_cover_the_full_bank() {
        let n = 6;
        let bank = radial_full_bank(n).unwrap();
        let mut seen: Vec<f64> = Vec::new();
        for i in 0..4000 {
            let snr = 10f64.powf(-5.0 + 9.0 * i as f64 / 3999.0);
            let a = rotation_angle(snr, n, n, 0.0, EtaMode::Integer).unwrap();
            if !seen.iter().any(|s| (s - a).abs() < 1e-12) {
                seen.push(a);
            }
        }
        assert_eq!(seen.len(), n);
        for a in &seen {
            assert!(bank.iter().any(|b| (a - b).abs() < 1e-12));
        }
        assert!(bank.last().unwrap().abs() < 1e-15);
    }

    #[test]
    fn full_bank_examples() {
        assert_eq!(radial_full_bank(1).unwrap(), vec![0.0]);
        let deg: Vec<f64> = radial_full_bank(4).unwrap().iter().map(|a| a.to_degrees()).collect();
        for (a, b) in deg.iter().zip([75.52, 60.0, 41.41, 0.0]) {
            assert!((a - b).abs() < 5e-3);
        }
        assert_eq!(radial_bank_antenna_count(16, 16), 241);
        assert!(radial_full_bank(0).is_err());
    }

    #[test]
    fn truncated_plan_example() {
        let plan = geometric_plan(0.48, 64, 64, Some(0.1)).unwrap();
        assert_eq!(plan.count, 3);
        let deg: Vec<f64> = plan.angles.iter().map(|a| a.to_degrees()).collect();
        assert!(deg[0].abs() < 1e-12);
        assert!((deg[1] - 61.3).abs() < 0.05);
        assert!((deg[2] - 76.7).abs() < 0.05);
        assert!((plan.guarantee - 0.959).abs() < 1e-3);
    }

    #[test]
    fn full_plan_count_example() {
        assert_eq!(geometric_plan(0.48, 256, 256, None).unwrap().count, 8);
        assert!(geometric_plan(1.0, 4, 4, None).is_err());
        assert!(geometric_plan(0.0, 4, 4, None).is_err());
    }

    #[test]
    fn plan_shapes() {
        let plan = geometric_plan(0.6, 32, 48, None).unwrap();
        assert!(plan.etas.windows(2).all(|w| w[0] > w[1]));
        assert!(plan.angles.windows(2).all(|w| w[0] < w[1]));
        assert!(plan.snr_thresholds.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(plan.snr_thresholds.len(), plan.count - 1);
        assert!(*plan.etas.last().unwrap() >= 1.0 / 32.0);
        assert!(plan.etas.last().unwrap() * 0.6 < 1.0 / 32.0);
    }

    #[test]
    fn guarantee_examples() {
        assert!((guarantee_ratio(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((guarantee_ratio(0.48).unwrap() - 0.959).abs() < 1e-3);
        assert!((guarantee_ratio(0.999).unwrap() - 1.0).abs() < 1e-3);
        assert!(guarantee_ratio(0.0).is_err());
    }

    #[test]
    fn guarantee_is_worst_case_of_f_ratio() {
        let c = optimum_constant();
        let f = |x: f64| (1.0 + x).log2() / x.sqrt();
        for r in [0.3, 0.5, 0.7] {
            let (lo, hi) = (c * r, c / r);
            let worst = (0..=100_000)
                .map(|i| f(lo + (hi - lo) * i as f64 / 100_000.0) / f(c))
                .fold(f64::MAX, f64::min);
            assert!((worst - guarantee_ratio(r).unwrap()).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn selection_examples() {
        let plan = geometric_plan(0.48, 256, 256, Some(0.1)).unwrap();
        let c = optimum_constant();
        let s = select_configuration(&plan, c * 0.48 * 1.01).unwrap();
        assert_eq!((s.index, s.eta), (0, 1.0));
        let s = select_configuration(&plan, c * 0.48).unwrap();
        assert_eq!(s.index, 1);
        let s = select_configuration(&plan, 0.1).unwrap();
        assert_eq!(s.index, 2);
        assert!((s.eta - 0.2304).abs() < 1e-12);
        assert!(s.guaranteed);
        let s = select_configuration(&plan, 1e-4).unwrap();
        assert_eq!(s.index, 2);
        assert!(!s.guaranteed);
    }

    #[test]
    fn truncated_plan_covers_snr_min() {
        for (r, snr_min) in [(0.48, 0.1), (0.3, 0.01), (0.7, 0.05), (0.5, 1.0)] {
            let plan = geometric_plan(r, 64, 64, Some(snr_min)).unwrap();
            assert!(plan.guaranteed_floor <= snr_min, "r {r}, floor {}", plan.guaranteed_floor);
        }
    }

    proptest! {
        #[test]
        fn guaranteed_selections_meet_the_ratio(
            r in 0.2f64..0.95,
            n in 2usize..300,
            log_snr in -5.0f64..2.0,
        ) {
            let snr = 10f64.powf(log_snr);
            let plan = geometric_plan(r, n, n, None).unwrap();
            let sel = select_configuration(&plan, snr).unwrap();
            if sel.guaranteed {
                let rate = equal_gain_rate(sel.eta, n, n, snr).unwrap();
                let bound = upper_bound_relaxed(snr, n, n);
                prop_assert!(rate / bound >= plan.guarantee - 1e-9, "ratio {}", rate / bound);
            }
        }
    }
}
