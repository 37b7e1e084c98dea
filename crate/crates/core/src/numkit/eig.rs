//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of `A[p][q]` with a diagonal unitary
//! and then applies the real symmetric Jacobi rotation, so the combined
//! transform is `J = diag(1, e^{-i phi}) * R(c, s)` acting on the `(p, q)` plane.
//!
//! Sweeps follow a round-robin tournament: every round pairs all indices
//! into `n / 2` disjoint planes, whose rotations commute. A round is applied
//! as one pass over rows (`J^* A`) and one pass over columns (`A J`), both
//! row-contiguous and parallel. Eigenvectors are accumulated as rows of
//! `W = V^T` for the same reason.

use num_complex::Complex64;
use rayon::prelude::*;

use super::matrix::ComplexMat;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with matching unit-norm eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMat,
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMat) -> Result<EigenSpectrum> {
    let (values, w) = jacobi(a, true)?;
    let w = w.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let vectors = ComplexMat::from_fn(n, n, |row, col| w[(order[col], row)]);
    Ok(EigenSpectrum {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
    })
}

/// Eigenvalues only, sorted descending.
///
/// Uses Householder reduction to a real tridiagonal matrix followed by
/// implicit QL, which is an order of magnitude cheaper than Jacobi sweeps
/// when no eigenvectors are needed.
pub fn hermitian_eigvals(a: &ComplexMat) -> Result<Vec<f64>> {
    validate(a)?;
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Reduces `A` to Hermitian tridiagonal form `Q^* A Q` and returns its
/// diagonal and the moduli of its off-diagonal (`e[n - 1] = 0`). A diagonal
/// unitary similarity makes the off-diagonal real, so the moduli suffice.
fn tridiagonalize(a: &ComplexMat) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut m = ComplexMat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let mut e = vec![0.0; n];
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        // Householder vector from column k below the diagonal (conjugate of row k).
        let mut v: Vec<Complex64> = m.row(k)[k + 1..].iter().map(|z| z.conj()).collect();
        let alpha = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        e[k] = alpha;
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        v[0] += phase * alpha;
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();

        let off = k + 1;
        let size = n - off;
        // p = tau A22 v
        let p: Vec<Complex64> = (0..size)
            .map(|i| {
                let row = &m.row(off + i)[off..];
                tau * row.iter().zip(&v).map(|(a, b)| a * b).sum::<Complex64>()
            })
            .collect();
        // w = p - (tau / 2) (v^* p) v
        let vp: Complex64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kappa = 0.5 * tau * vp;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        // A22 <- A22 - v w^* - w v^*
        for i in 0..size {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut m.row_mut(off + i)[off..];
            for j in 0..size {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        // Row and column k now hold the single off-diagonal entry.
        for j in off + 1..n {
            m[(k, j)] = zero;
            m[(j, k)] = zero;
        }
    }
    if n >= 2 {
        e[n - 2] = m[(n - 1, n - 2)].norm();
    }
    let d = (0..n).map(|i| m[(i, i)].re).collect();
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix;
/// `e[i]` couples `d[i]` and `d[i + 1]`. Eigenvalues are left in `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    // Off-diagonals below eps * ||T|| are negligible even inside clusters of tiny eigenvalues.
    let norm = (0..n).map(|i| d[i].abs() + e[i].abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NoConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn validate(a: &ComplexMat) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let asymmetry = a.hermitian_defect();
    if asymmetry > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Below this size rounds run sequentially.
const PARALLEL_MIN: usize = 96;

#[derive(Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    phase: Complex64,
}

fn jacobi(a: &ComplexMat, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMat>)> {
    validate(a)?;
    let n = a.rows();
    // Symmetrize: average A and A^*.
    let mut m = ComplexMat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    for i in 0..n {
        m[(i, i)].im = 0.0;
    }
    let mut w = want_vectors.then(|| ComplexMat::identity(n));

    let total = m.frobenius_norm_sq();
    if total == 0.0 || n == 1 {
        let values = (0..n).map(|i| m[(i, i)].re).collect();
        return Ok((values, w));
    }
    let stop = (f64::EPSILON * f64::EPSILON) * total;
    let parallel = n >= PARALLEL_MIN;
    let schedule = tournament(n);

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_mass(&m, parallel) <= stop {
            break;
        }
        for round in &schedule {
            let rotations: Vec<Rotation> = round.iter().filter_map(|&(p, q)| plan_rotation(&mut m, p, q)).collect();
            if rotations.is_empty() {
                continue;
            }
            apply_round(&mut m, &rotations, parallel);
            if let Some(w) = w.as_mut() {
                rotate_vector_rows(w, &rotations, parallel);
            }
        }
    }

    let values = (0..n).map(|i| m[(i, i)].re).collect();
    Ok((values, w))
}

/// Round-robin pairings: `n - 1` rounds (`n` when odd) covering every pair once.
fn tournament(n: usize) -> Vec<Vec<(usize, usize)>> {
    let players = n + n % 2;
    let mut ring: Vec<usize> = (0..players).collect();
    let mut rounds = Vec::with_capacity(players - 1);
    for _ in 0..players - 1 {
        let round = (0..players / 2)
            .map(|i| (ring[i], ring[players - 1 - i]))
            .filter(|&(a, b)| a < n && b < n)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        rounds.push(round);
        ring[1..].rotate_right(1);
    }
    rounds
}

fn off_diagonal_mass(m: &ComplexMat, parallel: bool) -> f64 {
    let n = m.rows();
    let row_mass = |i: usize| -> f64 { m.row(i)[i + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>() };
    let sum: f64 = if parallel {
        (0..n).into_par_iter().map(row_mass).sum()
    } else {
        (0..n).map(row_mass).sum()
    };
    2.0 * sum
}

/// Rotation that annihilates `A[p][q]`, or `None` when the entry is negligible
/// (in which case it is zeroed in place).
fn plan_rotation(m: &mut ComplexMat, p: usize, q: usize) -> Option<Rotation> {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return None;
    }
    let app = m[(p, p)].re.abs();
    let aqq = m[(q, q)].re.abs();
    // Entries below the resolution of both diagonals are dropped.
    let g = 100.0 * mag;
    if app + g == app && aqq + g == aqq {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return None;
    }
    let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    Some(Rotation { p, q, c, s: t * c, phase: apq / mag })
}

/// `A <- J^* A J` for a set of rotations on disjoint planes.
fn apply_round(m: &mut ComplexMat, rotations: &[Rotation], parallel: bool) {
    let n = m.cols();
    // Each 2x2 block transforms only through its own rotation; keep its exact result.
    let blocks: Vec<(f64, f64)> = rotations
        .iter()
        .map(|r| {
            let mag = m[(r.p, r.q)].norm();
            let t = r.s / r.c;
            (m[(r.p, r.p)].re - t * mag, m[(r.q, r.q)].re + t * mag)
        })
        .collect();

    // Left factor: rows p and q.
    // row_p' = c row_p - s e^{i phi} row_q, row_q' = s row_p + c e^{i phi} row_q.
    {
        let mut pairs = row_pairs(m.as_mut_slice(), n, rotations);
        let update = |(r, lo, hi): &mut (Rotation, &mut [Complex64], &mut [Complex64])| {
            for k in 0..lo.len() {
                let a = lo[k];
                let b = hi[k] * r.phase;
                lo[k] = a * r.c - b * r.s;
                hi[k] = a * r.s + b * r.c;
            }
        };
        if parallel {
            pairs.par_iter_mut().for_each(update);
        } else {
            pairs.iter_mut().for_each(update);
        }
    }

    // Right factor: columns p and q of every row.
    // a_kp' = c a_kp - s e^{-i phi} a_kq, a_kq' = s a_kp + c e^{-i phi} a_kq.
    let update_row = |row: &mut [Complex64]| {
        for r in rotations {
            let a = row[r.p];
            let b = row[r.q] * r.phase.conj();
            row[r.p] = a * r.c - b * r.s;
            row[r.q] = a * r.s + b * r.c;
        }
    };
    if parallel {
        m.as_mut_slice().par_chunks_mut(n).for_each(update_row);
    } else {
        m.as_mut_slice().chunks_mut(n).for_each(update_row);
    }

    for (r, (dp, dq)) in rotations.iter().zip(blocks) {
        m[(r.p, r.p)] = Complex64::new(dp, 0.0);
        m[(r.q, r.q)] = Complex64::new(dq, 0.0);
        m[(r.p, r.q)] = Complex64::new(0.0, 0.0);
        m[(r.q, r.p)] = Complex64::new(0.0, 0.0);
    }
}

/// Column update of `V J` expressed on rows of `W = V^T`:
/// `w_p' = c w_p - s e^{-i phi} w_q`, `w_q' = s w_p + c e^{-i phi} w_q`.
fn rotate_vector_rows(w: &mut ComplexMat, rotations: &[Rotation], parallel: bool) {
    let n = w.cols();
    let mut pairs = row_pairs(w.as_mut_slice(), n, rotations);
    let update = |(r, lo, hi): &mut (Rotation, &mut [Complex64], &mut [Complex64])| {
        let conj = r.phase.conj();
        for k in 0..lo.len() {
            let a = lo[k];
            let b = hi[k] * conj;
            lo[k] = a * r.c - b * r.s;
            hi[k] = a * r.s + b * r.c;
        }
    };
    if parallel {
        pairs.par_iter_mut().for_each(update);
    } else {
        pairs.iter_mut().for_each(update);
    }
}

/// Disjoint mutable borrows of rows `p` and `q` for each rotation.
fn row_pairs<'a>(
    data: &'a mut [Complex64],
    n: usize,
    rotations: &[Rotation],
) -> Vec<(Rotation, &'a mut [Complex64], &'a mut [Complex64])> {
    let mut rows: Vec<Option<&'a mut [Complex64]>> = data.chunks_mut(n).map(Some).collect();
    rotations
        .iter()
        .map(|r| {
            let lo = rows[r.p].take().expect("planes are disjoint");
            let hi = rows[r.q].take().expect("planes are disjoint");
            (*r, lo, hi)
        })
        .collect()
}
