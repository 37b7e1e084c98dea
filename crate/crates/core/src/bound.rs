//! Upper bound on LOS MIMO capacity over every antenna arrangement.
//!
//! With `X = sqrt(N_r N_t snr)` the bound is the best split of the channel
//! energy into `rho` equal modes, `max_rho rho log2(1 + X^2 / rho^2)`. The
//! integer optimum switches at thresholds `zeta_n`; relaxing `rho` to the
//! reals gives a closed form governed by the constant `c`, the maximiser of
//! `log2(1 + x) / sqrt(x)`.

use std::f64::consts::{E, LN_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numkit::{bisect_root, lambert_w0, root::DEFAULT_REL_TOL};

/// `f(x) = log2(1 + x) / sqrt(x)`.
pub fn sqrt_normalized_rate(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain { function: "sqrt_normalized_rate", x });
    }
    Ok(log2_1p(x) / x.sqrt())
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// `c = -1 - 2 / W0(-2 / e^2)`, the unique positive solution of
/// `ln(1 + c) = 2c / (1 + c)`.
pub fn optimum_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let w = lambert_w0(-2.0 / (E * E)).expect("argument lies above the branch point");
        let c = -1.0 - 2.0 / w;
        debug_assert!(((1.0 + c).ln() - 2.0 * c / (1.0 + c)).abs() < 1e-12);
        c
    })
}

/// SNR at which `n` and `n + 1` equal modes give the same bound.
pub fn zeta_threshold(n: usize, n_tx: usize, n_rx: usize) -> Result<f64> {
    let n_min = n_tx.min(n_rx);
    if n == 0 || n >= n_min {
        return Err(Error::InvalidInput(format!(
            "threshold index {n} outside 1..={}",
            n_min.saturating_sub(1)
        )));
    }
    let prod = (n_tx * n_rx) as f64;
    let (a, b) = ((n * n) as f64, ((n + 1) * (n + 1)) as f64);
    // f is unimodal with peak at c, so the crossing puts x/a above c and x/b below it.
    let residual = |zeta: f64| {
        let x = prod * zeta;
        log2_1p(x / a) / (x / a).sqrt() - log2_1p(x / b) / (x / b).sqrt()
    };
    let hint = optimum_constant() * (n * (n + 1)) as f64 / prod;
    bisect_root(residual, hint, DEFAULT_REL_TOL)
}

/// Bound evaluator for one array size, with lazily computed thresholds.
#[derive(Debug)]
pub struct BoundCurve {
    n_tx: usize,
    n_rx: usize,
    c: f64,
    thresholds: OnceLock<Vec<f64>>,
}

impl Clone for BoundCurve {
    fn clone(&self) -> Self {
        let thresholds = OnceLock::new();
        if let Some(t) = self.thresholds.get() {
            let _ = thresholds.set(t.clone());
        }
        Self { n_tx: self.n_tx, n_rx: self.n_rx, c: self.c, thresholds }
    }
}

impl BoundCurve {
    pub fn new(n_tx: usize, n_rx: usize) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 {
            return Err(Error::InvalidInput("antenna counts must be at least 1".into()));
        }
        Ok(Self { n_tx, n_rx, c: optimum_constant(), thresholds: OnceLock::new() })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_min(&self) -> usize {
        self.n_tx.min(self.n_rx)
    }

    pub fn n_max(&self) -> usize {
        self.n_tx.max(self.n_rx)
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// `zeta_1 < ... < zeta_{N_min - 1}`; empty for a single-antenna end.
    pub fn thresholds(&self) -> &[f64] {
        self.thresholds.get_or_init(|| {
            (1..self.n_min())
                .map(|n| {
                    zeta_threshold(n, self.n_tx, self.n_rx)
                        .expect("the crossing always exists for n < N_min")
                })
                .collect()
        })
    }

    /// Number of equal modes that maximises the bound at `snr`.
    pub fn rho(&self, snr: f64) -> usize {
        // zeta_n itself belongs to the n + 1 branch.
        1 + self.thresholds().partition_point(|&z| z <= snr)
    }

    pub fn upper_bound(&self, snr: f64) -> f64 {
        equal_mode_rate(self.rho(snr) as f64, (self.n_tx * self.n_rx) as f64 * snr)
    }

    pub fn rho_tilde(&self, snr: f64) -> f64 {
        rho_tilde(snr, self.n_tx, self.n_rx)
    }

    pub fn upper_bound_relaxed(&self, snr: f64) -> f64 {
        upper_bound_relaxed(snr, self.n_tx, self.n_rx)
    }
}

/// `rho log2(1 + X^2 / rho^2)`.
fn equal_mode_rate(rho: f64, x_sq: f64) -> f64 {
    rho * log2_1p(x_sq / (rho * rho))
}

pub fn rho_of_snr(snr: f64, curve: &BoundCurve) -> usize {
    curve.rho(snr)
}

pub fn upper_bound(snr: f64, curve: &BoundCurve) -> f64 {
    curve.upper_bound(snr)
}

/// Real-valued optimum `sqrt(N_min N_max snr / c)` clamped to `[1, N_min]`.
pub fn rho_tilde(snr: f64, n_tx: usize, n_rx: usize) -> f64 {
    let n_min = n_tx.min(n_rx) as f64;
    ((n_tx * n_rx) as f64 * snr / optimum_constant())
        .sqrt()
        .clamp(1.0, n_min)
}

/// Bound with the number of modes relaxed to `rho_tilde`; never below the integer bound.
pub fn upper_bound_relaxed(snr: f64, n_tx: usize, n_rx: usize) -> f64 {
    let rho = rho_tilde(snr, n_tx, n_rx);
    equal_mode_rate(rho, (n_tx * n_rx) as f64 * snr)
}

/// Exhaustive `max_{rho <= n_modes} rho log2(1 + X^2 / rho^2)`; ties go to the smaller `rho`.
pub fn discrete_allocation_oracle(x: f64, n_modes: usize) -> Result<(usize, f64)> {
    if !(x > 0.0) || n_modes == 0 {
        return Err(Error::InvalidInput(format!("need X > 0 and n_modes >= 1, got {x}, {n_modes}")));
    }
    let x_sq = x * x;
    let mut best = (1, equal_mode_rate(1.0, x_sq));
    for rho in 2..=n_modes {
        let v = equal_mode_rate(rho as f64, x_sq);
        if v > best.1 {
            best = (rho, v);
        }
    }
    Ok(best)
}

/// Repeatedly replaces the largest and smallest entries by their mean.
///
/// Returns the final vector and the sum of squared deviations from the mean
/// after each step (entry 0 is the starting value). Stops early once all
/// entries coincide.
pub fn averaging_process(x: &[f64], iterations: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = x.to_vec();
    if v.is_empty() {
        return (v, vec![0.0]);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64]| v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>();
    let mut trajectory = vec![spread(&v)];
    for _ in 0..iterations {
        let (mut lo, mut hi) = (0, 0);
        for (i, &a) in v.iter().enumerate() {
            if a < v[lo] {
                lo = i;
            }
            if a > v[hi] {
                hi = i;
            }
        }
        if v[hi] == v[lo] {
            break;
        }
        let avg = 0.5 * (v[hi] + v[lo]);
        v[hi] = avg;
        v[lo] = avg;
        trajectory.push(spread(&v));
    }
    (v, trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f_values() {
        let f8 = sqrt_normalized_rate(8.0).unwrap();
        assert!((f8 - 9f64.log2() / 8f64.sqrt()).abs() < 1e-15);
        assert!((f8 - sqrt_normalized_rate(2.0).unwrap()).abs() < 1e-14);
        assert!((f8 - 1.12069).abs() < 1e-4);
        assert_eq!(sqrt_normalized_rate(1.0).unwrap(), 1.0);
        assert!(sqrt_normalized_rate(0.0).is_err());
        assert!(sqrt_normalized_rate(-1.0).is_err());
    }

    #[test]
    fn f_peaks_at_c() {
        let c = optimum_constant();
        let fc = sqrt_normalized_rate(c).unwrap();
        for i in 0..=100_000 {
            let x = 0.1 + 99.9 * i as f64 / 100_000.0;
            assert!(sqrt_normalized_rate(x).unwrap() <= fc + 1e-15);
        }
        assert!(((1.0 + c).ln() - 2.0 * c / (1.0 + c)).abs() < 1e-12);
        assert!((c - 3.92155).abs() < 1e-5);
    }

    #[test]
    fn first_threshold_is_eight_over_product() {
        for (nt, nr) in [(2, 2), (4, 4), (16, 16), (8, 32), (256, 256)] {
            let z = zeta_threshold(1, nt, nr).unwrap();
            let expect = 8.0 / (nt * nr) as f64;
            assert!((z - expect).abs() < 1e-12 * expect, "{nt}x{nr}: {z}");
        }
    }

    #[test]
    fn thresholds_increase() {
        let curve = BoundCurve::new(16, 16).unwrap();
        let t = curve.thresholds();
        assert_eq!(t.len(), 15);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(BoundCurve::new(1, 8).unwrap().thresholds().is_empty());
        assert!(zeta_threshold(0, 4, 4).is_err());
        assert!(zeta_threshold(4, 4, 4).is_err());
    }

    #[test]
    fn second_threshold_is_a_crossing() {
        let z = zeta_threshold(2, 4, 4).unwrap();
        let two = equal_mode_rate(2.0, 16.0 * z);
        let three = equal_mode_rate(3.0, 16.0 * z);
        assert!((two - three).abs() < 1e-9 * two);
    }

    #[test]
    fn threshold_residual_is_small() {
        let (nt, nr) = (12, 20);
        let prod = (nt * nr) as f64;
        for n in 1..12 {
            let z = zeta_threshold(n, nt, nr).unwrap();
            let a = sqrt_normalized_rate(prod * z / (n * n) as f64).unwrap();
            let b = sqrt_normalized_rate(prod * z / ((n + 1) * (n + 1)) as f64).unwrap();
            assert!((a - b).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn rho_branches() {
        let curve = BoundCurve::new(8, 8).unwrap();
        let t = curve.thresholds().to_vec();
        assert_eq!(curve.rho(t[0] / 2.0), 1);
        assert_eq!(curve.rho(*t.last().unwrap()), 8);
        assert_eq!(curve.rho(1e6), 8);
        let big = BoundCurve::new(256, 256).unwrap();
        let (oracle, _) = discrete_allocation_oracle(256.0, 256).unwrap();
        assert_eq!(big.rho(1.0), oracle);
    }

    #[test]
    fn bound_examples() {
        let curve = BoundCurve::new(256, 256).unwrap();
        assert!((curve.upper_bound(10.0) - 256.0 * 11f64.log2()).abs() < 1e-9);
        let small = 1e-7;
        assert!((curve.upper_bound(small) - (1.0 + 65536.0 * small).log2()).abs() < 1e-15);
    }

    #[test]
    fn bound_is_continuous_at_thresholds() {
        let curve = BoundCurve::new(10, 14).unwrap();
        for (n, &z) in curve.thresholds().iter().enumerate() {
            let left = equal_mode_rate((n + 1) as f64, 140.0 * z);
            let right = curve.upper_bound(z);
            assert!((left - right).abs() < 1e-8 * right);
        }
    }

    #[test]
    fn relaxed_branches() {
        let c = optimum_constant();
        let low = 0.5 * c / (16.0 * 16.0);
        assert_eq!(rho_tilde(low, 16, 16), 1.0);
        assert!((upper_bound_relaxed(low, 16, 16) - (1.0 + 256.0 * low).log2()).abs() < 1e-15);

        let rt = rho_tilde(0.1, 256, 256);
        assert!((rt - 256.0 * (0.1 / c).sqrt()).abs() < 1e-9);
        assert!((rt - 40.9).abs() < 0.05);
        assert!((rt / 256.0 - 0.16).abs() < 1e-3);
        let middle = (65536.0 * 0.1 / c).sqrt() * (1.0 + c).log2();
        assert!((upper_bound_relaxed(0.1, 256, 256) - middle).abs() < 1e-9 * middle);
    }

    #[test]
    fn relaxed_dominates_integer() {
        for (nt, nr) in [(4, 4), (16, 16), (8, 64), (256, 256)] {
            let curve = BoundCurve::new(nt, nr).unwrap();
            for i in 0..100 {
                let snr = 10f64.powf(-4.0 + 7.0 * i as f64 / 99.0);
                let int = curve.upper_bound(snr);
                assert!(curve.upper_bound_relaxed(snr) >= int * (1.0 - 1e-8));
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let (rho, v) = discrete_allocation_oracle(8f64.sqrt(), 2).unwrap();
        assert!((equal_mode_rate(1.0, 8.0) - equal_mode_rate(2.0, 8.0)).abs() < 1e-14);
        assert!((v - 9f64.log2()).abs() < 1e-14);
        assert!(rho <= 2);
        assert_eq!(discrete_allocation_oracle(0.1, 10).unwrap().0, 1);
        assert!(discrete_allocation_oracle(0.0, 3).is_err());
    }

    #[test]
    fn oracle_matches_simplex_grid() {
        // Maximise sum log2(1 + x_i^2) over x_i >= 0, sum x_i = 10, on a fine grid.
        let x_total = 10.0;
        let steps = 1000;
        let mut best = f64::MIN;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let a = x_total * i as f64 / steps as f64;
                let b = x_total * j as f64 / steps as f64;
                let c = x_total - a - b;
                let v = (1.0 + a * a).log2() + (1.0 + b * b).log2() + (1.0 + c * c).log2();
                best = best.max(v);
            }
        }
        let (_, v) = discrete_allocation_oracle(x_total, 3).unwrap();
        assert!((v - best).abs() < 1e-3, "oracle {v}, grid {best}");
        assert!(v >= best - 1e-12);
    }

    #[test]
    fn rho_matches_oracle_argmax() {
        let curve = BoundCurve::new(12, 12).unwrap();
        for i in 0..200 {
            let snr = 10f64.powf(-4.0 + 6.0 * i as f64 / 199.0);
            let x = (144.0 * snr).sqrt();
            let (rho, v) = discrete_allocation_oracle(x, 12).unwrap();
            let bound = curve.upper_bound(snr);
            assert!((bound - v).abs() <= 1e-8 * v);
            if curve.thresholds().iter().all(|z| (z - snr).abs() > 1e-9 * z) {
                assert_eq!(curve.rho(snr), rho, "snr {snr}");
            }
        }
    }

    #[test]
    fn averaging_examples() {
        let (v, t) = averaging_process(&[1.0, 1.0, 1.0], 5);
        assert_eq!(v, vec![1.0; 3]);
        assert_eq!(t, vec![0.0]);
        let (v, _) = averaging_process(&[2.0, 0.0], 1);
        assert_eq!(v, vec![1.0, 1.0]);
    }

    #[test]
    fn averaging_contracts_zero_mean_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = x.iter().sum::<f64>() / 8.0;
            x.iter_mut().for_each(|a| *a -= mean);
            let (_, traj) = averaging_process(&x, 40);
            for (t, s) in traj.iter().enumerate() {
                assert!(*s <= (1.0 - 1.0 / 16.0f64).powi(t as i32) * traj[0] * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    proptest! {
        #[test]
        fn averaging_preserves_sum(x in prop::collection::vec(-100.0f64..100.0, 1..20), steps in 0usize..50) {
            let (v, traj) = averaging_process(&x, steps);
            let before: f64 = x.iter().sum();
            let after: f64 = v.iter().sum();
            prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
            prop_assert!(traj.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }

        #[test]
        fn bound_nondecreasing(n in 1usize..24, m in 1usize..24, snr in 1e-4f64..1e3, factor in 1.0f64..4.0) {
            let curve = BoundCurve::new(n, m).unwrap();
            prop_assert!(curve.upper_bound(snr * factor) >= curve.upper_bound(snr) * (1.0 - 1e-12));
        }
    }
}
