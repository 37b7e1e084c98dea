//! Line-of-sight channel synthesis for a pair of uniform linear arrays.
//!
//! Coordinates: the transmit ULA lies in the xz-plane with antenna 0 at the
//! origin, antenna `m` at `m d_t (cos th_t, 0, sin th_t)`. The receive ULA has
//! antenna 0 at `(0, 0, D)` and antenna `n` at
//! `(n d_r cos th_r, n d_r sin th_r sin ph_r, D + n d_r sin th_r cos ph_r)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::ComplexMat;

/// Largest array extent, as a fraction of the range, before small-aperture
/// approximations are flagged.
pub const DEFAULT_APERTURE_LIMIT: f64 = 0.1;

fn default_gain() -> f64 {
    1.0
}

fn default_aperture_limit() -> f64 {
    DEFAULT_APERTURE_LIMIT
}

/// Physical description of a transmit/receive ULA pair. SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayLinkGeometry {
    pub wavelength: f64,
    pub range: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub spacing_tx: f64,
    pub spacing_rx: f64,
    #[serde(default)]
    pub elev_tx: f64,
    #[serde(default)]
    pub elev_rx: f64,
    #[serde(default)]
    pub azim_rel: f64,
    #[serde(default = "default_gain")]
    pub gain_tx: f64,
    #[serde(default = "default_gain")]
    pub gain_rx: f64,
    #[serde(default = "default_aperture_limit")]
    pub aperture_limit: f64,
}

impl ArrayLinkGeometry {
    /// Parallel broadside ULAs with Rayleigh spacing `d = sqrt(lambda D / N_max)` at both ends.
    pub fn rayleigh(wavelength: f64, range: f64, n_tx: usize, n_rx: usize) -> Self {
        let d = rayleigh_spacing(wavelength, range, n_tx.max(n_rx));
        Self {
            wavelength,
            range,
            n_tx,
            n_rx,
            spacing_tx: d,
            spacing_rx: d,
            elev_tx: 0.0,
            elev_rx: 0.0,
            azim_rel: PI / 2.0,
            gain_tx: 1.0,
            gain_rx: 1.0,
            aperture_limit: DEFAULT_APERTURE_LIMIT,
        }
    }

    pub fn with_elevations(mut self, elev_tx: f64, elev_rx: f64) -> Self {
        self.elev_tx = elev_tx;
        self.elev_rx = elev_rx;
        self
    }

    pub fn with_azimuth(mut self, azim_rel: f64) -> Self {
        self.azim_rel = azim_rel;
        self
    }

    pub fn n_min(&self) -> usize {
        self.n_tx.min(self.n_rx)
    }

    pub fn n_max(&self) -> usize {
        self.n_tx.max(self.n_rx)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("range", self.range),
            ("spacing_tx", self.spacing_tx),
            ("spacing_rx", self.spacing_rx),
            ("aperture_limit", self.aperture_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::InvalidInput("antenna counts must be at least 1".into()));
        }
        for (name, v) in [("elev_tx", self.elev_tx), ("elev_rx", self.elev_rx)] {
            if !(v.abs() <= PI / 2.0 + 1e-12) {
                return Err(Error::InvalidInput(format!("|{name}| must be <= pi/2, got {v}")));
            }
        }
        if !self.azim_rel.is_finite() || !(self.gain_tx > 0.0) || !(self.gain_rx > 0.0) {
            return Err(Error::InvalidInput("azimuth and gains must be finite and positive".into()));
        }
        Ok(())
    }

    /// End-to-end length `(N - 1) d` of the transmit array.
    pub fn aperture_tx(&self) -> f64 {
        (self.n_tx.saturating_sub(1)) as f64 * self.spacing_tx
    }

    pub fn aperture_rx(&self) -> f64 {
        (self.n_rx.saturating_sub(1)) as f64 * self.spacing_rx
    }

    /// Whether both arrays are small relative to the range.
    pub fn aperture_valid(&self) -> bool {
        self.aperture_tx().max(self.aperture_rx()) <= self.aperture_limit * self.range
    }

    fn warn_aperture(&self) {
        if !self.aperture_valid() {
            log::warn!(
                "array extent {:.4} m exceeds {} x range ({} m); small-aperture forms are inaccurate",
                self.aperture_tx().max(self.aperture_rx()),
                self.aperture_limit,
                self.range
            );
        }
    }

    /// Distance from transmit antenna `m` to receive antenna `n`.
    pub fn distance(&self, n: usize, m: usize) -> f64 {
        let (n, m) = (n as f64, m as f64);
        let (st, ct) = self.elev_tx.sin_cos();
        let (sr, cr) = self.elev_rx.sin_cos();
        let (sp, cp) = self.azim_rel.sin_cos();
        let z = self.range + n * self.spacing_rx * sr * cp - m * self.spacing_tx * st;
        let x = n * self.spacing_rx * cr - m * self.spacing_tx * ct;
        let y = n * self.spacing_rx * sr * sp;
        (z * z + x * x + y * y).sqrt()
    }
}

/// `d = sqrt(lambda D / N)`.
pub fn rayleigh_spacing(wavelength: f64, range: f64, n: usize) -> f64 {
    (wavelength * range / n as f64).sqrt()
}

/// Configuration of the pure Vandermonde channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaChannelSpec {
    pub eta: f64,
    pub n_tx: usize,
    pub n_rx: usize,
}

impl UlaChannelSpec {
    pub fn new(eta: f64, n_tx: usize, n_rx: usize) -> Result<Self> {
        let spec = Self { eta, n_tx, n_rx };
        spec.validate()?;
        Ok(spec)
    }

    pub fn square(eta: f64, n: usize) -> Result<Self> {
        Self::new(eta, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {}", self.eta)));
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::InvalidInput("antenna counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_min(&self) -> usize {
        self.n_tx.min(self.n_rx)
    }

    pub fn n_max(&self) -> usize {
        self.n_tx.max(self.n_rx)
    }
}

/// Received SNR, either given directly or derived from a power budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub snr: f64,
}

impl LinkBudget {
    pub fn from_snr(snr: f64) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
        }
        Ok(Self { snr })
    }

    /// `SNR = lambda^2 G_t G_r P_t / ((4 pi D)^2 B N0)`.
    pub fn from_power(
        geom: &ArrayLinkGeometry,
        tx_power_w: f64,
        bandwidth_hz: f64,
        noise_psd_w_per_hz: f64,
    ) -> Result<Self> {
        let num = geom.wavelength.powi(2) * geom.gain_tx * geom.gain_rx * tx_power_w;
        let den = (4.0 * PI * geom.range).powi(2) * bandwidth_hz * noise_psd_w_per_hz;
        Self::from_snr(num / den)
    }
}

/// Channel from exact antenna-to-antenna distances.
///
/// With `normalized` the entries are the unit phasors `exp(-j 2 pi D_nm / lambda)`;
/// otherwise each carries the free-space amplitude `sqrt(G_t G_r) lambda / (4 pi D_nm)`.
pub fn exact_channel(geom: &ArrayLinkGeometry, normalized: bool) -> Result<ComplexMat> {
    geom.validate()?;
    geom.warn_aperture();
    let k = 2.0 * PI / geom.wavelength;
    let amp0 = (geom.gain_tx * geom.gain_rx).sqrt() * geom.wavelength / (4.0 * PI);
    Ok(ComplexMat::from_fn(geom.n_rx, geom.n_tx, |n, m| {
        let d = geom.distance(n, m);
        let amp = if normalized { 1.0 } else { amp0 / d };
        // Reduce the phase modulo one wavelength before scaling to keep precision.
        let phase = -k * (d % geom.wavelength);
        Complex64::from_polar(amp, phase)
    }))
}

/// Receive-side phase bank entries `[D_rx]_{n,n}`, which undo the common
/// range phase and the receive-only phase terms of the factored channel.
pub fn rx_phase_bank(geom: &ArrayLinkGeometry) -> Vec<Complex64> {
    let (sr, _) = geom.elev_rx.sin_cos();
    let cp = geom.azim_rel.cos();
    let lam = geom.wavelength;
    let d = geom.spacing_rx;
    let common = 2.0 * PI * (geom.range % lam) / lam;
    (0..geom.n_rx)
        .map(|n| {
            let n = n as f64;
            let lin = 2.0 * n * d * sr * cp / lam;
            let quad = n * n * d * d * (1.0 - sr * sr * cp * cp) / (lam * geom.range);
            Complex64::from_polar(1.0, common + PI * (lin + quad))
        })
        .collect()
}

/// Transmit-side phase bank entries `[D_tx]_{m,m}`.
///
/// Derived from the second-order expansion of the exact distance, which puts
/// the linear term at `-2 m d_t sin th_t / lambda` and the quadratic term at
/// `m^2 d_t^2 cos^2 th_t / (lambda D)`; both agree with the broadside form
/// when `th_t = 0`.
pub fn tx_phase_bank(geom: &ArrayLinkGeometry) -> Vec<Complex64> {
    let (st, ct) = geom.elev_tx.sin_cos();
    let lam = geom.wavelength;
    let d = geom.spacing_tx;
    (0..geom.n_tx)
        .map(|m| {
            let m = m as f64;
            let lin = -2.0 * m * d * st / lam;
            let quad = m * m * d * d * ct * ct / (lam * geom.range);
            Complex64::from_polar(1.0, PI * (lin + quad))
        })
        .collect()
}

/// Factored small-aperture channel.
#[derive(Debug, Clone)]
pub struct FactoredChannel {
    /// `[D_rx]_{n,n}`; the channel carries `conj(d_rx)` on the left.
    pub d_rx: Vec<Complex64>,
    /// Vandermonde core `exp(j 2 pi n m d_r d_t cos th_r cos th_t / (lambda D))`.
    pub core: ComplexMat,
    /// `[D_tx]_{m,m}`; the channel carries `conj(d_tx)` on the right.
    pub d_tx: Vec<Complex64>,
}

impl FactoredChannel {
    /// `H ~= D_rx^* core D_tx^*`.
    pub fn reconstruct(&self) -> ComplexMat {
        let l: Vec<_> = self.d_rx.iter().map(|z| z.conj()).collect();
        let r: Vec<_> = self.d_tx.iter().map(|z| z.conj()).collect();
        self.core
            .scale_rows_cols(&l, &r)
            .expect("factor lengths match by construction")
    }
}

/// Small-aperture factorisation of the normalized channel.
pub fn approx_channel(geom: &ArrayLinkGeometry) -> Result<FactoredChannel> {
    geom.validate()?;
    let scale = geom.spacing_rx * geom.spacing_tx * geom.elev_rx.cos() * geom.elev_tx.cos()
        / (geom.wavelength * geom.range);
    let core = ComplexMat::from_fn(geom.n_rx, geom.n_tx, |n, m| {
        Complex64::from_polar(1.0, 2.0 * PI * wrap_unit(scale * (n * m) as f64))
    });
    Ok(FactoredChannel {
        d_rx: rx_phase_bank(geom),
        core,
        d_tx: tx_phase_bank(geom),
    })
}

fn wrap_unit(x: f64) -> f64 {
    x - x.floor()
}

/// `H[n][m] = exp(j 2 pi eta n m / N_max)`, an `N_r x N_t` Vandermonde matrix.
pub fn vandermonde_channel(spec: &UlaChannelSpec) -> Result<ComplexMat> {
    spec.validate()?;
    let n_max = spec.n_max() as f64;
    // n*m is reduced modulo N_max before scaling by eta when eta is an integer;
    // in general the fractional turn count is reduced after scaling.
    Ok(ComplexMat::from_fn(spec.n_rx, spec.n_tx, |n, m| {
        let turns = spec.eta * (n * m) as f64 / n_max;
        Complex64::from_polar(1.0, 2.0 * PI * wrap_unit(turns))
    }))
}

/// `eta = (d_r cos th_r)(d_t cos th_t) N_max / (lambda D)`.
pub fn effective_eta(geom: &ArrayLinkGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(geom.spacing_rx * geom.elev_rx.cos() * geom.spacing_tx * geom.elev_tx.cos()
        * geom.n_max() as f64
        / (geom.wavelength * geom.range))
}

/// Closed-form `[H^* H]_{n,m}` of the Vandermonde channel (a phase-rotated Dirichlet kernel).
pub fn gram_closed_form(spec: &UlaChannelSpec, n: usize, m: usize) -> Result<Complex64> {
    spec.validate()?;
    if n >= spec.n_tx || m >= spec.n_tx {
        return Err(Error::InvalidInput(format!(
            "Gram index ({n}, {m}) outside {}x{}",
            spec.n_tx, spec.n_tx
        )));
    }
    Ok(dirichlet_symbol(spec, n as i64 - m as i64))
}

/// `t_l = sum_{k < N_r} exp(-j 2 pi eta l k / N_max)` in closed form.
pub(crate) fn dirichlet_symbol(spec: &UlaChannelSpec, lag: i64) -> Complex64 {
    let n_r = spec.n_rx as f64;
    let n_max = spec.n_max() as f64;
    let x = PI * spec.eta * lag as f64 / n_max;
    let den = x.sin();
    if den.abs() < 1e-12 {
        // Removable singularity: every phasor aligned (up to sign flips when x = k pi).
        let turns = spec.eta * lag as f64 / n_max;
        if (turns - turns.round()).abs() < 1e-12 {
            return Complex64::new(n_r, 0.0);
        }
    }
    let mag = (x * n_r).sin() / den;
    Complex64::from_polar(mag, -x * (n_r - 1.0))
}
