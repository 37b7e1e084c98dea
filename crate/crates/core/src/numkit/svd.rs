use num_complex::Complex64;

use super::eig::{hermitian_eig, hermitian_eigvals};
use super::matrix::ComplexMat;
use crate::error::Result;

/// Modes with `sigma < RANK_TOL * sigma_max` are treated as numerically zero.
pub const RANK_TOL: f64 = 1e-10;

/// Thin SVD `H = U diag(sigma) V^*` with `min(rows, cols)` modes.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMat,
    pub sigma: Vec<f64>,
    pub v: ComplexMat,
}

/// SVD through the eigendecomposition of the smaller Gram matrix.
///
/// The partner factor is recovered as `H v / sigma` (or `H^* u / sigma`);
/// columns belonging to numerically zero modes are filled with an orthonormal
/// completion so that both factors keep orthonormal columns.
pub fn svd_via_gram(h: &ComplexMat) -> Result<Svd> {
    let (rows, cols) = (h.rows(), h.cols());
    let k = rows.min(cols);
    let tall = rows >= cols;
    let gram = if tall { h.gram() } else { h.outer_gram() };
    let eig = hermitian_eig(&gram)?;
    let sigma: Vec<f64> = eig.values.iter().take(k).map(|&l| l.max(0.0).sqrt()).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);

    // `small` holds Gram eigenvectors (length k); `big` the recovered partner (length rows or cols).
    let big_len = if tall { rows } else { cols };
    let mut big_cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for i in 0..k {
        if smax > 0.0 && sigma[i] >= RANK_TOL * smax {
            let v = eig.vectors.column(i);
            let hv = if tall {
                h.mul_vec(&v)?
            } else {
                h.adjoint().mul_vec(&v)?
            };
            big_cols.push(hv.into_iter().map(|z| z / sigma[i]).collect());
        } else {
            big_cols.push(Vec::new());
        }
    }
    complete_orthonormal(&mut big_cols, big_len);

    let small = ComplexMat::from_fn(k, k, |r, c| eig.vectors[(r, c)]);
    let big = ComplexMat::from_fn(big_len, k, |r, c| big_cols[c][r]);
    let (u, v) = if tall { (big, small) } else { (small, big) };
    Ok(Svd { u, sigma, v })
}

/// Singular values (descending) along the same Gram route, without vectors.
pub fn singular_values(h: &ComplexMat) -> Result<Vec<f64>> {
    let k = h.rows().min(h.cols());
    let gram = if h.rows() >= h.cols() { h.gram() } else { h.outer_gram() };
    let vals = hermitian_eigvals(&gram)?;
    Ok(vals.into_iter().take(k).map(|l| l.max(0.0).sqrt()).collect())
}

/// Fills empty slots with unit vectors orthogonal to every other column
/// (modified Gram-Schmidt against the standard basis).
fn complete_orthonormal(cols: &mut [Vec<Complex64>], len: usize) {
    let mut candidate = 0usize;
    for slot in 0..cols.len() {
        if !cols[slot].is_empty() {
            continue;
        }
        while candidate < len {
            let mut v = vec![Complex64::new(0.0, 0.0); len];
            v[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let ip: Complex64 = other.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, o) in v.iter_mut().zip(other) {
                        *x -= ip * o;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols[slot] = v.into_iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}
