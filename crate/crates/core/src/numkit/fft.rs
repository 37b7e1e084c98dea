//! Unitary discrete Fourier transform of arbitrary length.
//!
//! Forward: `X[k] = N^{-1/2} sum_n x[n] exp(-j 2 pi n k / N)`.
//! Powers of two use an iterative radix-2 kernel, every other length goes
//! through Bluestein's chirp-z reformulation on a power-of-two convolution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unitary DFT (`inverse = false`) or its inverse.
pub fn fft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::InvalidInput("FFT of an empty vector".into()));
    }
    let mut out = dft_unscaled(x, inverse);
    let s = 1.0 / (x.len() as f64).sqrt();
    out.iter_mut().for_each(|z| *z *= s);
    Ok(out)
}

/// Unnormalised DFT with sign `-` (forward) or `+` (inverse) in the exponent.
pub(crate) fn dft_unscaled(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    if n.is_power_of_two() {
        let mut buf = x.to_vec();
        radix2_in_place(&mut buf, inverse);
        buf
    } else {
        bluestein(x, inverse)
    }
}

fn radix2_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles computed directly per index rather than by recurrence.
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `exp(sign * j pi n^2 / len)` with `n^2` reduced mod `2 len` to keep the phase accurate.
fn chirp(n: usize, len: usize, sign: f64) -> Complex64 {
    let m = 2 * len as u128;
    let sq = ((n as u128 * n as u128) % m) as f64;
    Complex64::from_polar(1.0, sign * PI * sq / len as f64)
}

fn bluestein(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for (i, &xi) in x.iter().enumerate() {
        a[i] = xi * chirp(i, n, sign);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp(0, n, -sign);
    for i in 1..n {
        let w = chirp(i, n, -sign);
        b[i] = w;
        b[m - i] = w;
    }

    radix2_in_place(&mut a, false);
    radix2_in_place(&mut b, false);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    radix2_in_place(&mut a, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirp(k, n, sign)).collect()
}

/// Circular convolution of two equal-length power-of-two buffers.
pub(crate) fn circular_convolve_pow2(a: &mut [Complex64], b: &mut [Complex64]) {
    debug_assert!(a.len() == b.len() && a.len().is_power_of_two());
    radix2_in_place(a, false);
    radix2_in_place(b, false);
    for (ai, bi) in a.iter_mut().zip(b.iter()) {
        *ai *= bi;
    }
    radix2_in_place(a, true);
    let s = 1.0 / a.len() as f64;
    a.iter_mut().for_each(|z| *z *= s);
}
