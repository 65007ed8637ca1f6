//! Complex Schur decomposition by Householder reduction to Hessenberg form
//! followed by single-shift QR sweeps, and eigenvectors by triangular
//! back-substitution.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::CMatrix;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues and unit-norm right eigenvectors (`vectors[k]` belongs to
/// `values[k]`).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Reduces `a` to upper Hessenberg form in place and returns the unitary
/// `Q` with `A_in = Q H Q^H`.
fn hessenberg(a: &mut CMatrix, want_q: bool) -> Option<CMatrix> {
    let n = a.dim();
    let mut q = want_q.then(|| CMatrix::identity(n));
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for item in v.iter_mut().take(n).skip(k + 1) {
            *item /= vnorm;
        }
        // A <- (I - 2 v v^H) A
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            let s2 = s * 2.0;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= vi * s2;
            }
        }
        // A <- A (I - 2 v v^H)
        apply_right(a, &v, k + 1);
        if let Some(q) = q.as_mut() {
            apply_right(q, &v, k + 1);
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
    q
}

fn apply_right(m: &mut CMatrix, v: &[Complex64], from: usize) {
    let n = m.dim();
    for i in 0..n {
        let row = &mut m.data[i * n..(i + 1) * n];
        let s: Complex64 = (from..n).map(|j| row[j] * v[j]).sum();
        let s2 = s * 2.0;
        for j in from..n {
            row[j] -= s2 * v[j].conj();
        }
    }
}

/// Givens rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let norm = ax.hypot(ay);
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Runs the shifted QR iteration on an upper Hessenberg matrix, leaving the
/// upper triangular Schur factor in `h` and accumulating rotations into `z`.
fn schur(h: &mut CMatrix, mut z: Option<&mut CMatrix>) -> Result<()> {
    let n = h.dim();
    if n < 2 {
        return Ok(());
    }
    let norm = h.frobenius_norm();
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64) / eps;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let full = z.is_some();
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let mut tst = cabs1(h[(lo - 1, lo - 1)]) + cabs1(h[(lo, lo)]);
            if tst == 0.0 {
                tst = norm;
            }
            if sub <= small.max(eps * tst) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::EigenFailure { index: hi, norm });
        }
        let shift = if iter % 10 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        let col_end = if full { n } else { hi + 1 };
        let row_start = if full { 0 } else { lo };
        for k in lo..hi {
            let (x, y) = if k == lo {
                (h[(lo, lo)] - shift, h[(lo + 1, lo)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let start = if k == lo { lo } else { k - 1 };
            for j in start..col_end {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = t1 * c + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let row_end = (k + 2).min(hi);
            for i in row_start..=row_end {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * c + t2 * s.conj();
                h[(i, k + 1)] = -t1 * s + t2 * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let t1 = z[(i, k)];
                    let t2 = z[(i, k + 1)];
                    z[(i, k)] = t1 * c + t2 * s.conj();
                    z[(i, k + 1)] = -t1 * s + t2 * c;
                }
            }
        }
    }
    Ok(())
}

fn check_input(a: &CMatrix) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::EigenFailure {
            index: 0,
            norm: f64::NAN,
        });
    }
    Ok(())
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    check_input(a)?;
    let mut h = a.clone();
    hessenberg(&mut h, false);
    schur(&mut h, None)?;
    Ok((0..h.dim()).map(|i| h[(i, i)]).collect())
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
pub fn eigen(a: &CMatrix) -> Result<Eigen> {
    check_input(a)?;
    let n = a.dim();
    let mut t = a.clone();
    let mut z = hessenberg(&mut t, true).unwrap_or_else(|| CMatrix::identity(n));
    schur(&mut t, Some(&mut z))?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let tnorm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e10);
    let mut y = vec![ZERO; n];
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];
        for item in y.iter_mut() {
            *item = ZERO;
        }
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[i] = -s / d;
            if y[i].norm() > 1e150 {
                let scale = 1.0 / y[i].norm();
                for v in y.iter_mut().take(k + 1) {
                    *v *= scale;
                }
            }
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|r| (0..=k).map(|j| z[(r, j)] * y[j]).sum())
            .collect();
        let nv = super::vec_norm(&v);
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(Error::EigenFailure { index: k, norm: tnorm });
        }
        for c in v.iter_mut() {
            *c /= nv;
        }
        vectors.push(v);
    }
    Ok(Eigen { values, vectors })
}
