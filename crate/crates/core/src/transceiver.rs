//! Low-complexity transceiver: phase banks at both arrays, a Fourier precoder,
//! per-stream MRC decoding, and an `O(N log N)` receive path.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    approx_channel, dirichlet_symbol, effective_eta, exact_channel, rx_phase_bank, tx_phase_bank,
    vandermonde_channel, ArrayLinkGeometry, UlaChannelSpec,
};
use crate::error::{Error, Result};
use crate::numkit::{fft, toeplitz_apply, ComplexMat};

/// Which channel the transceiver sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// Exact spherical distances.
    Exact,
    /// Factored small-aperture form.
    #[default]
    Approx,
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "approx" => Ok(Self::Approx),
            other => Err(Error::InvalidInput(format!("unknown channel model '{other}'"))),
        }
    }
}

/// Channel, phase banks and the effective Gram `G = F^* D_tx^* H^* H D_tx F`.
#[derive(Debug, Clone)]
pub struct TransceiverMatrices {
    pub h_ula: ComplexMat,
    pub d_tx: Vec<Complex64>,
    pub d_rx: Vec<Complex64>,
    pub eta: f64,
    /// `eta / N_max`: phase slope of the compensated core `exp(j 2 pi scale n m)`.
    pub core_scale: f64,
    pub gram: ComplexMat,
}

impl TransceiverMatrices {
    pub fn n_tx(&self) -> usize {
        self.h_ula.cols()
    }

    pub fn n_rx(&self) -> usize {
        self.h_ula.rows()
    }

    pub fn n_min(&self) -> usize {
        self.n_tx().min(self.n_rx())
    }

    /// Effective channel `H D_tx F` seen by the Fourier streams.
    pub fn effective_channel(&self) -> Result<ComplexMat> {
        precoded_channel(&self.h_ula, &self.d_tx)
    }
}

/// `H D_tx F`: each row of `H D_tx` is forward-transformed.
fn precoded_channel(h: &ComplexMat, d_tx: &[Complex64]) -> Result<ComplexMat> {
    let (rows, cols) = (h.rows(), h.cols());
    let transformed: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let row: Vec<Complex64> = h.row(r).iter().zip(d_tx).map(|(a, b)| a * b).collect();
            fft(&row, false)
        })
        .collect::<Result<_>>()?;
    ComplexMat::from_row_major(rows, cols, transformed.concat())
}

/// Builds the transceiver for a physical link.
pub fn build_transceiver(geom: &ArrayLinkGeometry, model: ChannelModel) -> Result<TransceiverMatrices> {
    let eta = effective_eta(geom)?;
    let h_ula = match model {
        ChannelModel::Exact => exact_channel(geom, true)?,
        ChannelModel::Approx => approx_channel(geom)?.reconstruct(),
    };
    let d_tx = tx_phase_bank(geom);
    let d_rx = rx_phase_bank(geom);
    let gram = precoded_channel(&h_ula, &d_tx)?.gram();
    Ok(TransceiverMatrices {
        h_ula,
        d_tx,
        d_rx,
        eta,
        core_scale: eta / geom.n_max() as f64,
        gram,
    })
}

/// Transceiver for the bare Vandermonde channel, where both phase banks are trivial.
pub fn transceiver_from_spec(spec: &UlaChannelSpec) -> Result<TransceiverMatrices> {
    let h_ula = vandermonde_channel(spec)?;
    let one = Complex64::new(1.0, 0.0);
    let d_tx = vec![one; spec.n_tx];
    let gram = precoded_channel(&h_ula, &d_tx)?.gram();
    Ok(TransceiverMatrices {
        h_ula,
        d_tx,
        d_rx: vec![one; spec.n_rx],
        eta: spec.eta,
        core_scale: spec.eta / spec.n_max() as f64,
        gram,
    })
}

/// Share of `||G||_F^2` on the diagonal.
pub fn diagonal_power_ratio(g: &ComplexMat) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", g.rows(), g.cols())));
    }
    let total = g.frobenius_norm_sq();
    if total == 0.0 {
        return Ok(0.0);
    }
    let diag: f64 = g.diag().iter().map(|z| z.norm_sqr()).sum();
    Ok(diag / total)
}

/// Streams whose cross-talk enters each SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interference {
    /// Every Fourier direction `j != k` of `G` contributes, active or not.
    #[default]
    AllDirections,
    /// Only the other active streams contribute.
    ActiveStreams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MrcOptions {
    /// Number of Fourier streams; defaults to `floor(eta N_min)` clamped to `[1, N_min]`.
    pub streams: Option<usize>,
    pub interference: Interference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrcRate {
    pub streams: usize,
    pub rate_bits: f64,
    pub per_stream_sinr: Vec<f64>,
}

/// `floor(eta N_min)` clamped to `[1, N_min]`.
pub fn default_stream_count(eta: f64, n_min: usize) -> usize {
    ((eta * n_min as f64 + 1e-9).floor() as usize).clamp(1, n_min)
}

/// Sum rate of separately decoded equal-power Fourier streams after MRC.
///
/// Stream `k` sees `y_k = G_kk x_k + sum_{j != k} G_kj x_j + noise` with noise
/// variance `G_kk`, so `SINR_k = G_kk^2 p / (p sum |G_kj|^2 + G_kk)` with `p = snr / S`.
pub fn mrc_spectral_efficiency(tm: &TransceiverMatrices, snr: f64, opts: MrcOptions) -> Result<MrcRate> {
    if !(snr > 0.0) {
        return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
    }
    let n_min = tm.n_min();
    let streams = opts.streams.unwrap_or_else(|| default_stream_count(tm.eta, n_min));
    if streams == 0 || streams > n_min {
        return Err(Error::InvalidInput(format!("stream count {streams} outside 1..={n_min}")));
    }
    let p = snr / streams as f64;
    let reach = match opts.interference {
        Interference::AllDirections => tm.n_tx(),
        Interference::ActiveStreams => streams,
    };
    let per_stream_sinr: Vec<f64> = (0..streams)
        .map(|k| {
            let row = tm.gram.row(k);
            let gain = row[k].re;
            let leak: f64 = row[..reach]
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            if gain <= 0.0 {
                0.0
            } else {
                gain * gain * p / (leak * p + gain)
            }
        })
        .collect();
    let rate_bits = per_stream_sinr.iter().map(|s| s.ln_1p()).sum::<f64>() / LN_2;
    Ok(MrcRate { streams, rate_bits, per_stream_sinr })
}

/// Best MRC rate over every stream count.
pub fn mrc_best_streams(tm: &TransceiverMatrices, snr: f64, interference: Interference) -> Result<MrcRate> {
    let results: Vec<MrcRate> = (1..=tm.n_min())
        .into_par_iter()
        .map(|s| mrc_spectral_efficiency(tm, snr, MrcOptions { streams: Some(s), interference }))
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .fold(None::<MrcRate>, |best, r| match best {
            Some(b) if b.rate_bits >= r.rate_bits => Some(b),
            _ => Some(r),
        })
        .expect("at least one stream count"))
}

/// `(H D_tx F)^* y` through the phase bank, a chirp-Toeplitz product and an inverse FFT.
///
/// Exact for the factored channel; for the exact model it applies the
/// factored approximation of the receive filter.
pub fn fast_receive(tm: &TransceiverMatrices, y: &[Complex64]) -> Result<Vec<Complex64>> {
    let (n_rx, n_tx) = (tm.n_rx(), tm.n_tx());
    if y.len() != n_rx {
        return Err(Error::DimensionMismatch(format!(
            "received vector has length {}, expected {n_rx}",
            y.len()
        )));
    }
    let a = tm.core_scale;
    let chirp = |k: usize, sign: f64| {
        let turns = 0.5 * a * (k * k) as f64;
        Complex64::from_polar(1.0, sign * 2.0 * PI * (turns - turns.floor()))
    };
    // exp(-j 2 pi a n m) = chirp(m)^* chirp(m - n) chirp(n)^*
    let u: Vec<Complex64> = y
        .iter()
        .zip(&tm.d_rx)
        .enumerate()
        .map(|(n, (yn, dn))| yn * dn * chirp(n, -1.0))
        .collect();
    let symbol_len = n_tx.max(n_rx);
    let symbol: Vec<Complex64> = (0..symbol_len).map(|k| chirp(k, 1.0)).collect();
    let v = toeplitz_apply(&symbol[..n_tx], &symbol[..n_rx], &u)?;
    let w: Vec<Complex64> = v.iter().enumerate().map(|(m, z)| z * chirp(m, -1.0)).collect();
    fft(&w, true)
}

/// Dense `(H D_tx F)^* y`.
pub fn dense_receive(tm: &TransceiverMatrices, y: &[Complex64]) -> Result<Vec<Complex64>> {
    tm.effective_channel()?.adjoint().mul_vec(y)
}

/// Squared Frobenius error between the Gram Toeplitz matrix `T = H^* H` of the
/// Vandermonde channel and its circulant surrogate with `floor(eta N_min)`
/// Fourier modes of gain `N_max / eta`, together with `||T||_F^2`.
pub fn circulant_surrogate_error(eta: f64, n_tx: usize, n_rx: usize) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
    }
    let spec = UlaChannelSpec::new(eta, n_tx, n_rx)?;
    let n_t = n_tx as f64;
    let modes = (eta * spec.n_min() as f64 + 1e-9).floor();
    let level = spec.n_max() as f64 / (eta * n_t);
    let surrogate = |lag: i64| -> Complex64 {
        if lag == 0 {
            return Complex64::new(modes * level, 0.0);
        }
        let x = PI * lag as f64 / n_t;
        let mag = level * (x * modes).sin() / x.sin();
        Complex64::from_polar(mag, -x * (modes - 1.0))
    };
    let mut err_sq = 0.0;
    let mut norm_sq = 0.0;
    for lag in -(n_tx as i64 - 1)..=(n_tx as i64 - 1) {
        let weight = (n_tx as i64 - lag.abs()) as f64;
        let t = dirichlet_symbol(&spec, lag);
        err_sq += weight * (t - surrogate(lag)).norm_sqr();
        norm_sq += weight * t.norm_sqr();
    }
    Ok((err_sq, norm_sq))
}

/// Dense circulant surrogate `C = F diag(N_max / eta on the first K modes) F^*`.
pub fn circulant_surrogate_dense(eta: f64, n_tx: usize, n_rx: usize) -> Result<ComplexMat> {
    let spec = UlaChannelSpec::new(eta, n_tx, n_rx)?;
    let modes = (eta * spec.n_min() as f64 + 1e-9).floor() as usize;
    let level = spec.n_max() as f64 / eta;
    let n = n_tx as f64;
    Ok(ComplexMat::from_fn(n_tx, n_tx, |r, c| {
        (0..modes)
            .map(|k| {
                let turns = ((r as i64 - c as i64) * k as i64) as f64 / n;
                Complex64::from_polar(level / n, -2.0 * PI * (turns - turns.floor()))
            })
            .sum()
    }))
}
