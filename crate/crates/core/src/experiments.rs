//! Table and sweep drivers. Grid points are evaluated in parallel and
//! returned in input order, so output is deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::BoundCurve;
use crate::capacity::channel_capacity;
use crate::channel::{vandermonde_channel, UlaChannelSpec};
use crate::error::{Error, Result};
use crate::numkit::hermitian_eigvals;
use crate::planner::continuous_eta;
use crate::transceiver::{
    circulant_surrogate_error, diagonal_power_ratio, mrc_best_streams, mrc_spectral_efficiency,
    transceiver_from_spec, Interference, MrcOptions,
};
use crate::units::{db_to_linear, log_grid};

/// A header row plus formatted records, ready for CSV output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Formats with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn percent(part: f64, whole: f64) -> f64 {
    100.0 * part / whole
}

/// Water-filling capacity of the Vandermonde channel.
pub fn vandermonde_capacity(eta: f64, n_tx: usize, n_rx: usize, snr: f64) -> Result<f64> {
    let h = vandermonde_channel(&UlaChannelSpec::new(eta, n_tx, n_rx)?)?;
    Ok(channel_capacity(&h, snr)?.capacity_bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Table1Options {
    /// Search every stream count for the best MRC rate instead of `floor(eta N)`.
    pub sweep_streams: bool,
    pub interference: Interference,
}

/// One SNR column of the architecture comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub snr_db: f64,
    pub eta: f64,
    pub theta_r_deg: f64,
    pub bound_bits: f64,
    pub parallel_bits: f64,
    pub svd_bits: f64,
    pub mrc_bits: f64,
    pub mrc_streams: usize,
    pub parallel_pct: f64,
    pub svd_pct: f64,
    pub mrc_pct: f64,
}

/// Parallel Rayleigh ULAs, rotated ULAs with SVD, and rotated ULAs with the
/// Fourier/MRC transceiver, each as a share of the bound for `N x N` arrays.
pub fn run_table1(n: usize, snrs_db: &[f64], opts: Table1Options) -> Result<Vec<Table1Row>> {
    if n == 0 {
        return Err(Error::InvalidInput("array size must be at least 1".into()));
    }
    let curve = BoundCurve::new(n, n)?;
    curve.thresholds();
    snrs_db
        .par_iter()
        .map(|&snr_db| {
            let snr = db_to_linear(snr_db);
            let bound_bits = curve.upper_bound(snr);
            let eta = continuous_eta(snr, n, n);
            let parallel_bits = vandermonde_capacity(1.0, n, n, snr)?;
            let svd_bits = vandermonde_capacity(eta, n, n, snr)?;
            let tm = transceiver_from_spec(&UlaChannelSpec::square(eta, n)?)?;
            let mrc = if opts.sweep_streams {
                mrc_best_streams(&tm, snr, opts.interference)?
            } else {
                mrc_spectral_efficiency(&tm, snr, MrcOptions { streams: None, interference: opts.interference })?
            };
            Ok(Table1Row {
                snr_db,
                eta,
                theta_r_deg: eta.acos().to_degrees(),
                bound_bits,
                parallel_bits,
                svd_bits,
                mrc_bits: mrc.rate_bits,
                mrc_streams: mrc.streams,
                parallel_pct: percent(parallel_bits, bound_bits),
                svd_pct: percent(svd_bits, bound_bits),
                mrc_pct: percent(mrc.rate_bits, bound_bits),
            })
        })
        .collect()
}

pub fn table1_table(rows: &[Table1Row]) -> Table {
    let mut t = Table::new(&[
        "snr_db",
        "eta",
        "theta_r_deg",
        "bound_bits_per_s_hz",
        "parallel_pct",
        "rotated_svd_pct",
        "rotated_fourier_mrc_pct",
        "mrc_streams",
    ]);
    for r in rows {
        t.push(vec![
            format_sig(r.snr_db),
            format_sig(r.eta),
            format_sig(r.theta_r_deg),
            format_sig(r.bound_bits),
            format_sig(r.parallel_pct),
            format_sig(r.svd_pct),
            format_sig(r.mrc_pct),
            r.mrc_streams.to_string(),
        ]);
    }
    t
}

/// Default `eta` grid of the sweep envelope: log-spaced over `[1/N, 1]`.
pub fn default_eta_grid(n_min: usize, points: usize) -> Vec<f64> {
    log_grid(1.0 / n_min as f64, 1.0, points.max(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeSpacingRow {
    pub snr_db: f64,
    pub bound_bits: f64,
    pub tight_pct: f64,
    pub mid_pct: f64,
    pub wide_pct: f64,
    pub best_pct: f64,
    pub best_eta: f64,
    /// Best share over the three spacings, the `eta` grid and the continuous optimum.
    pub sweep_pct: f64,
}

/// Switching among three spacings, `eta in {0, 1/sqrt(N), 1}`, against a
/// sweep over `eta_grid` (the continuous optimum is always included).
///
/// `eta = 0` is the limit of co-located antennas: the all-ones channel with
/// capacity `log2(1 + N^2 snr)`.
pub fn run_three_spacing(n: usize, snrs_db: &[f64], eta_grid: &[f64]) -> Result<Vec<ThreeSpacingRow>> {
    if n < 2 {
        return Err(Error::InvalidInput("three-spacing comparison needs N >= 2".into()));
    }
    let curve = BoundCurve::new(n, n)?;
    curve.thresholds();
    let spacings = [0.0, 1.0 / (n as f64).sqrt(), 1.0];
    snrs_db
        .par_iter()
        .map(|&snr_db| {
            let snr = db_to_linear(snr_db);
            let bound_bits = curve.upper_bound(snr);
            let mut shares = [0.0; 3];
            let mut sweep_bits: f64 = 0.0;
            for (s, &eta) in shares.iter_mut().zip(&spacings) {
                let bits = if eta == 0.0 {
                    ((n * n) as f64 * snr).ln_1p() / std::f64::consts::LN_2
                } else {
                    vandermonde_capacity(eta, n, n, snr)?
                };
                sweep_bits = sweep_bits.max(bits);
                *s = percent(bits, bound_bits);
            }
            let (best_idx, best_pct) = shares
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
            sweep_bits = sweep_bits.max(vandermonde_capacity(continuous_eta(snr, n, n), n, n, snr)?);
            for &eta in eta_grid {
                sweep_bits = sweep_bits.max(vandermonde_capacity(eta, n, n, snr)?);
            }
            Ok(ThreeSpacingRow {
                snr_db,
                bound_bits,
                tight_pct: shares[0],
                mid_pct: shares[1],
                wide_pct: shares[2],
                best_pct,
                best_eta: spacings[best_idx],
                sweep_pct: percent(sweep_bits, bound_bits),
            })
        })
        .collect()
}

pub fn three_spacing_table(rows: &[ThreeSpacingRow]) -> Table {
    let mut t = Table::new(&[
        "snr_db",
        "bound_bits_per_s_hz",
        "tight_pct",
        "mid_pct",
        "wide_pct",
        "best_of_three_pct",
        "best_eta",
        "eta_sweep_pct",
    ]);
    for r in rows {
        t.push(vec![
            format_sig(r.snr_db),
            format_sig(r.bound_bits),
            format_sig(r.tight_pct),
            format_sig(r.mid_pct),
            format_sig(r.wide_pct),
            format_sig(r.best_pct),
            format_sig(r.best_eta),
            format_sig(r.sweep_pct),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSweepRow {
    pub snr_db: f64,
    pub eta: f64,
    pub capacity_bits: f64,
    pub bound_bits: f64,
    pub share_pct: f64,
}

/// Capacity of the Vandermonde channel for every `(snr, eta)` pair.
pub fn run_eta_sweep(n_tx: usize, n_rx: usize, etas: &[f64], snrs_db: &[f64]) -> Result<Vec<EtaSweepRow>> {
    let curve = BoundCurve::new(n_tx, n_rx)?;
    curve.thresholds();
    let points: Vec<(f64, f64)> = snrs_db
        .iter()
        .flat_map(|&s| etas.iter().map(move |&e| (s, e)))
        .collect();
    points
        .par_iter()
        .map(|&(snr_db, eta)| {
            let snr = db_to_linear(snr_db);
            let capacity_bits = vandermonde_capacity(eta, n_tx, n_rx, snr)?;
            let bound_bits = curve.upper_bound(snr);
            Ok(EtaSweepRow {
                snr_db,
                eta,
                capacity_bits,
                bound_bits,
                share_pct: percent(capacity_bits, bound_bits),
            })
        })
        .collect()
}

/// Best row per SNR, in SNR order of first appearance.
pub fn eta_sweep_envelope(rows: &[EtaSweepRow]) -> Vec<EtaSweepRow> {
    let mut out: Vec<EtaSweepRow> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|o| o.snr_db == r.snr_db) {
            Some(o) if o.capacity_bits >= r.capacity_bits => {}
            Some(o) => *o = r.clone(),
            None => out.push(r.clone()),
        }
    }
    out
}

pub fn eta_sweep_table(rows: &[EtaSweepRow]) -> Table {
    let mut t = Table::new(&["snr_db", "eta", "capacity_bits_per_s_hz", "bound_bits_per_s_hz", "share_pct"]);
    for r in rows {
        t.push(vec![
            format_sig(r.snr_db),
            format_sig(r.eta),
            format_sig(r.capacity_bits),
            format_sig(r.bound_bits),
            format_sig(r.share_pct),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSweepRow {
    pub snr_db: f64,
    pub rho: usize,
    pub bound_bits: f64,
    pub rho_tilde: f64,
    pub relaxed_bits: f64,
}

pub fn run_bound_sweep(n_tx: usize, n_rx: usize, snrs_db: &[f64]) -> Result<Vec<BoundSweepRow>> {
    let curve = BoundCurve::new(n_tx, n_rx)?;
    curve.thresholds();
    Ok(snrs_db
        .iter()
        .map(|&snr_db| {
            let snr = db_to_linear(snr_db);
            BoundSweepRow {
                snr_db,
                rho: curve.rho(snr),
                bound_bits: curve.upper_bound(snr),
                rho_tilde: curve.rho_tilde(snr),
                relaxed_bits: curve.upper_bound_relaxed(snr),
            }
        })
        .collect())
}

pub fn bound_sweep_table(rows: &[BoundSweepRow]) -> Table {
    let mut t = Table::new(&[
        "snr_db",
        "rho",
        "bound_bits_per_s_hz",
        "rho_tilde",
        "relaxed_bits_per_s_hz",
    ]);
    for r in rows {
        t.push(vec![
            format_sig(r.snr_db),
            r.rho.to_string(),
            format_sig(r.bound_bits),
            format_sig(r.rho_tilde),
            format_sig(r.relaxed_bits),
        ]);
    }
    t
}

/// Spectrum of `(eta / N_max) H^* H` for the Vandermonde channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub eta: f64,
    pub n: usize,
    pub epsilon: f64,
    /// Scaled eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Share of eigenvalues in `(1 - epsilon, 1 + epsilon)`.
    pub near_one: f64,
    /// Share of eigenvalues below `epsilon`.
    pub near_zero: f64,
    /// Diagonal power share of `H^* H` without any precoder.
    pub diagonal_share: f64,
}

pub fn polarization(eta: f64, n: usize, epsilon: f64) -> Result<Polarization> {
    let spec = UlaChannelSpec::square(eta, n)?;
    let gram = vandermonde_channel(&spec)?.gram();
    let scale = eta / n as f64;
    let eigenvalues: Vec<f64> = hermitian_eigvals(&gram)?.into_iter().map(|l| l * scale).collect();
    let count = |pred: &dyn Fn(f64) -> bool| eigenvalues.iter().filter(|&&l| pred(l)).count() as f64 / n as f64;
    let near_one = count(&|l| (l - 1.0).abs() < epsilon);
    let near_zero = count(&|l| l < epsilon);
    Ok(Polarization {
        eta,
        n,
        epsilon,
        near_one,
        near_zero,
        diagonal_share: diagonal_power_ratio(&gram)?,
        eigenvalues,
    })
}

/// Histogram of the scaled eigenvalues over `bins` equal bins on `[0, upper]`;
/// values above `upper` land in the last bin.
pub fn polarization_histogram(p: &Polarization, bins: usize, upper: f64) -> Table {
    let bins = bins.max(1);
    let width = upper / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in &p.eigenvalues {
        let i = ((l.max(0.0) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let mut t = Table::new(&["bin_lo", "bin_hi", "count", "fraction"]);
    for (i, c) in counts.iter().enumerate() {
        t.push(vec![
            format_sig(i as f64 * width),
            format_sig((i + 1) as f64 * width),
            c.to_string(),
            format_sig(*c as f64 / p.n as f64),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRow {
    pub n: usize,
    pub err_sq: f64,
    pub norm_sq: f64,
    /// `||T - C||_F / ||T||_F`.
    pub relative: f64,
}

pub fn run_surrogate_scaling(eta: f64, sizes: &[usize]) -> Result<Vec<SurrogateRow>> {
    sizes
        .par_iter()
        .map(|&n| {
            let (err_sq, norm_sq) = circulant_surrogate_error(eta, n, n)?;
            Ok(SurrogateRow { n, err_sq, norm_sq, relative: (err_sq / norm_sq).sqrt() })
        })
        .collect()
}

pub fn surrogate_table(rows: &[SurrogateRow]) -> Table {
    let mut t = Table::new(&["n", "err_sq", "norm_sq", "relative_frobenius_error"]);
    for r in rows {
        t.push(vec![r.n.to_string(), format_sig(r.err_sq), format_sig(r.norm_sq), format_sig(r.relative)]);
    }
    t
}

/// Capacity of the rotated ULA (continuous `eta`) as a fraction of the bound.
pub fn achievability_ratio(n: usize, snr: f64) -> Result<f64> {
    let curve = BoundCurve::new(n, n)?;
    let eta = continuous_eta(snr, n, n);
    Ok(vandermonde_capacity(eta, n, n, snr)? / curve.upper_bound(snr))
}
