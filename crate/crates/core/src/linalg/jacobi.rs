//! Cyclic two-sided Jacobi diagonalization of Hermitian matrices.
//!
//! This is the reference ("oracle") eigensolver used to check the secular
//! update path. It shares no code with that path.

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching unit eigenvectors of a Hermitian
/// matrix.
#[derive(Debug, Clone)]
pub struct DenseEig<T> {
    pub values: Vec<f64>,
    pub vectors: Mat<T>,
}

/// Diagonalizes `matrix` with cyclic Jacobi rotations.
///
/// Rejects inputs whose Hermitian defect exceeds `1e-10 · max(1, max|a_ij|)`.
pub fn dense_eig_oracle<T: Scalar>(matrix: &Mat<T>) -> Result<DenseEig<T>> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.rows(),
            got: matrix.cols(),
        });
    }
    let n = matrix.rows();
    let scale = matrix.max_abs().max(1.0);
    let defect = matrix.hermitian_defect();
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian { asymmetry: defect });
    }

    // symmetrize exactly so rotations act on a Hermitian matrix
    let mut a = Mat::from_fn(n, n, |i, j| {
        if i == j {
            T::from_real(matrix[(i, i)].re())
        } else {
            (matrix[(i, j)] + matrix[(j, i)].conj()).scale(0.5)
        }
    });
    let mut u = Mat::<T>::identity(n);
    let total = a.norm_fro();

    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].abs_sq())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut u, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re().total_cmp(&a[(i, i)].re()));
    let values = order.iter().map(|&i| a[(i, i)].re()).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok(DenseEig { values, vectors })
}

/// Annihilates `a[p][q]` with `A ← Gᴴ A G`, `U ← U G`.
fn rotate<T: Scalar>(a: &mut Mat<T>, u: &mut Mat<T>, p: usize, q: usize) {
    let beta = a[(p, q)];
    let mag = beta.abs();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re();
    let aqq = a[(q, q)].re();
    // skip rotations that cannot change anything at working precision
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = T::zero();
        a[(q, p)] = T::zero();
        return;
    }
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s], [-s·e, c·e]] with e = conj(β)/|β|
    let e = beta.conj().scale(1.0 / mag);
    let g_pp = T::from_real(c);
    let g_pq = T::from_real(s);
    let g_qp = e.scale(-s);
    let g_qq = e.scale(c);
    let n = a.rows();

    // A ← A G (columns p, q)
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * g_pp + aiq * g_qp;
        a[(i, q)] = aip * g_pq + aiq * g_qq;
    }
    // A ← Gᴴ A (rows p, q)
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
        a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
    }
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
    a[(p, p)] = T::from_real(a[(p, p)].re());
    a[(q, q)] = T::from_real(a[(q, q)].re());
    for i in 0..n {
        let uip = u[(i, p)];
        let uiq = u[(i, q)];
        u[(i, p)] = uip * g_pp + uiq * g_qp;
        u[(i, q)] = uip * g_pq + uiq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual<T: Scalar>(m: &Mat<T>, e: &DenseEig<T>) -> f64 {
        let lhs = m.matmul(&e.vectors);
        let rhs = e.vectors.matmul(&Mat::diag(&e.values));
        lhs.sub(&rhs).norm_fro() / m.norm_fro().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = dense_eig_oracle(&Mat::<f64>::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let e = dense_eig_oracle(&Mat::<f64>::diag(&[5.0, 2.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![5.0, 2.0, -1.0]);
        assert_eq!(e.vectors, Mat::identity(3));
    }

    #[test]
    fn swap_matrix() {
        let m = Mat::from_rows(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        let e = dense_eig_oracle(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_rows(2, 2, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            dense_eig_oracle(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_complex_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 12, 30] {
            let b = Mat::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let h = b.add(&b.adjoint());
            let e = dense_eig_oracle(&h).unwrap();
            assert!(residual(&h, &e) < 1e-12, "n={n}");
            assert!(e.vectors.orthonormality_residual() < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
