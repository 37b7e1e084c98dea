//! Toeplitz matrix-vector products through circulant embedding.

use num_complex::Complex64;

use super::fft::circular_convolve_pow2;
use crate::error::{Error, Result};

/// `T x` for the `m x n` Toeplitz matrix with `T[i][j] = first_col[i - j]`
/// for `i >= j` and `first_row[j - i]` otherwise.
///
/// Costs `O((m + n) log(m + n))`: the symbol is laid out as a circulant of
/// power-of-two size `L >= m + n - 1` and applied with two forward FFTs and
/// one inverse.
pub fn toeplitz_apply(
    first_col: &[Complex64],
    first_row: &[Complex64],
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    let m = first_col.len();
    let n = first_row.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("empty Toeplitz generator".into()));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "Toeplitz with {n} columns applied to vector of length {}",
            x.len()
        )));
    }
    let corner = (first_col[0] - first_row[0]).norm();
    if corner > 1e-12 * first_col[0].norm().max(1.0) {
        return Err(Error::InvalidInput(
            "first_col[0] and first_row[0] disagree".into(),
        ));
    }

    let len = (m + n - 1).next_power_of_two();
    let zero = Complex64::new(0.0, 0.0);
    let mut symbol = vec![zero; len];
    symbol[..m].copy_from_slice(first_col);
    for j in 1..n {
        symbol[len - j] = first_row[j];
    }
    let mut padded = vec![zero; len];
    padded[..n].copy_from_slice(x);
    circular_convolve_pow2(&mut symbol, &mut padded);
    symbol.truncate(m);
    Ok(symbol)
}

/// Dense reference product, `O(mn)`.
pub fn toeplitz_apply_dense(
    first_col: &[Complex64],
    first_row: &[Complex64],
    x: &[Complex64],
) -> Vec<Complex64> {
    (0..first_col.len())
        .map(|i| {
            x.iter()
                .enumerate()
                .map(|(j, &xj)| {
                    let t = if i >= j { first_col[i - j] } else { first_row[j - i] };
                    t * xj
                })
                .sum()
        })
        .collect()
}
