//! Small dense routines: non-Hermitian eigenvalues, linear solves, least
//! squares and singular values. Sizes here are tiny (a handful of sources,
//! a few filter taps), so clarity wins over blocking.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::deflation::Reflector;
use crate::linalg::mat::Mat;
use crate::scalar::Scalar;

const QR_ITERS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a small general complex matrix (Hessenberg reduction
/// followed by single-shift QR with Wilkinson shifts).
pub fn small_general_eig(a: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut its = 0;
    let mut total = 0;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if h[(l, l - 1)].norm() <= f64::EPSILON * s.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > QR_ITERS_PER_EIGENVALUE * n {
            return Err(Error::NonConvergence {
                index: hi,
                iterations: total,
            });
        }
        let mu = if its % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, l, hi, mu);
    }
    Ok(eig)
}

fn hessenberg(a: &Mat<Complex64>) -> Mat<Complex64> {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let idx: Vec<usize> = (k + 1..n).collect();
        let x: Vec<Complex64> = idx.iter().map(|&i| h[(i, k)]).collect();
        if x[1..].iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let Some(r) = Reflector::new(idx, &x) else {
            continue;
        };
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            (0..n).for_each(|i| col[i] = h[(i, j)]);
            r.apply(&mut col);
            (0..n).for_each(|i| h[(i, j)] = col[i]);
        }
        // right-multiply by Hᴴ: row ← conj(H conj(row))
        for i in 0..n {
            (0..n).for_each(|j| col[j] = h[(i, j)].conj());
            r.apply(&mut col);
            (0..n).for_each(|j| h[(i, j)] = col[j].conj());
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let (e1, e2) = (m + disc, m - disc);
    if (e1 - d).norm() < (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = a.norm().hypot(b.norm());
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    (a.norm() / r, a.phase_c() * b.conj() / r)
}

trait PhaseC {
    fn phase_c(self) -> Complex64;
}

impl PhaseC for Complex64 {
    fn phase_c(self) -> Complex64 {
        Scalar::phase(self)
    }
}

fn qr_step(h: &mut Mat<Complex64>, l: usize, hi: usize, mu: Complex64) {
    for i in l..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for i in l..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        for j in i..=hi {
            let (x, y) = (h[(i, j)], h[(i + 1, j)]);
            h[(i, j)] = x * c + s * y;
            h[(i + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let i = l + off;
        for r in l..=(i + 2).min(hi) {
            let (x, y) = (h[(r, i)], h[(r, i + 1)]);
            h[(r, i)] = x * c + s.conj() * y;
            h[(r, i + 1)] = -s * x + y * c;
        }
    }
    for i in l..=hi {
        h[(i, i)] += mu;
    }
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting; `None`
/// when a pivot vanishes.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Option<Mat<T>> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n);
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))?;
        if lu[(p, k)].abs() == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..m {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..m {
            let mut acc = x[(k, j)];
            for c in k + 1..n {
                acc -= lu[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = acc / lu[(k, k)];
        }
    }
    Some(x)
}

/// One-norm condition number `‖A‖₁ ‖A⁻¹‖₁`; infinite when singular.
pub fn condition_1<T: Scalar>(a: &Mat<T>) -> f64 {
    let norm1 = |m: &Mat<T>| {
        (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match solve(a, &Mat::identity(a.rows())) {
        Some(inv) if inv.as_slice().iter().all(|v| v.is_finite()) => norm1(a) * norm1(&inv),
        _ => f64::INFINITY,
    }
}

/// Least-squares solution of `A x ≈ b` (`rows ≥ cols`) by Householder QR.
pub fn least_squares(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n && b.len() == m);
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..n {
            let d: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vv;
            (k..m).for_each(|i| r[(i, j)] -= d * v[i - k]);
        }
        let d: f64 = (k..m).map(|i| v[i - k] * y[i]).sum::<f64>() * 2.0 / vv;
        (k..m).for_each(|i| y[i] -= d * v[i - k]);
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let acc = y[k] - (k + 1..n).map(|c| r[(k, c)] * x[c]).sum::<f64>();
        x[k] = if r[(k, k)] == 0.0 { 0.0 } else { acc / r[(k, k)] };
    }
    x
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values(a: &Mat<f64>) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
