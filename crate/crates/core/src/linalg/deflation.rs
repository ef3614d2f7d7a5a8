//! Deflation of a rank-one update before the secular solve.
//!
//! Two situations leave an eigenpair of `Λ` untouched by `ρ z zᴴ`:
//! a negligible component `z_i`, and a cluster of (numerically) repeated
//! eigenvalues, where a unitary reflector confined to the cluster maps the
//! cluster's part of `z` onto a single coordinate. What remains is a
//! strictly descending diagonal with a fully nonzero `z`.
//!
//! All indices in a [`DeflationRecord`] refer to the caller's original
//! ordering of `Λ`; the descending sort is used only to find clusters.

use crate::linalg::mat::Mat;
use crate::linalg::secular::{DiagonalSpectrum, RankOneUpdate};
use crate::scalar::{dot, norm2, Scalar};

/// Relative size below which a component of `z` counts as zero.
pub const ZERO_Z_TOL: f64 = 1e-10;
/// Relative gap below which two eigenvalues count as repeated.
pub const REPEAT_TOL: f64 = 1e-10;

/// Unitary `H = I − c v vᴴ / ‖v‖²` acting on a subset of coordinates, with
/// `H z_b = ‖z_b‖ e_1`.
#[derive(Debug, Clone)]
pub struct Reflector<T> {
    /// Original indices of the cluster; the first one keeps the mass of `z`.
    pub indices: Vec<usize>,
    v: Vec<T>,
    c: T,
    v_norm_sq: f64,
}

impl<T: Scalar> Reflector<T> {
    /// Builds the reflector sending `zb` to `‖zb‖ e_1`. Returns `None` when
    /// `zb` is already a nonnegative multiple of `e_1`.
    pub fn new(indices: Vec<usize>, zb: &[T]) -> Option<Self> {
        debug_assert_eq!(indices.len(), zb.len());
        let norm = norm2(zb);
        let mut v = zb.to_vec();
        // v_1 = z_1 − ‖z‖, without cancellation when z_1 is close to ‖z‖
        let z1 = zb[0];
        let r = z1.abs();
        let rest = norm2(&zb[1..]).powi(2);
        let modulus_part = -rest / (r + norm);
        let (re, im) = (z1.re(), z1.im());
        let re_minus_r = if re > 0.0 { -(im * im) / (re + r) } else { re - r };
        v[0] = T::from_parts(modulus_part + re_minus_r, im);
        let v_norm_sq = norm2(&v).powi(2);
        if v_norm_sq <= (f64::EPSILON * norm).powi(2) {
            return None;
        }
        let a = dot(&v, zb);
        let c = T::one() + a.conj() * inverse(a);
        Some(Reflector {
            indices,
            v,
            c,
            v_norm_sq,
        })
    }

    fn apply_with(&self, x: &mut [T], c: T) {
        let proj: T = self
            .indices
            .iter()
            .zip(&self.v)
            .map(|(&i, vi)| vi.conj() * x[i])
            .sum();
        let factor = (c * proj).scale(1.0 / self.v_norm_sq);
        for (&i, vi) in self.indices.iter().zip(&self.v) {
            x[i] -= factor * *vi;
        }
    }

    /// `x ← H x` on the cluster coordinates of a full-length vector.
    pub fn apply(&self, x: &mut [T]) {
        self.apply_with(x, self.c);
    }

    /// `x ← Hᴴ x`.
    pub fn apply_adjoint(&self, x: &mut [T]) {
        self.apply_with(x, self.c.conj());
    }

    /// The dense `m × m` block of `H`.
    pub fn block(&self) -> Mat<T> {
        let m = self.indices.len();
        Mat::from_fn(m, m, |i, j| {
            let id = if i == j { T::one() } else { T::zero() };
            id - (self.c * self.v[i] * self.v[j].conj()).scale(1.0 / self.v_norm_sq)
        })
    }
}

fn inverse<T: Scalar>(a: T) -> T {
    a.conj().scale(1.0 / a.abs_sq())
}

/// What deflation removed and how to undo it.
#[derive(Debug, Clone)]
pub struct DeflationRecord<T> {
    /// Original size.
    pub n: usize,
    /// Original indices kept for the secular solve, descending in value.
    pub kept: Vec<usize>,
    /// Eigenpairs passed through unchanged, as `(original index, value)`,
    /// descending in value.
    pub passthrough: Vec<(usize, f64)>,
    /// Cluster reflectors; their product `Q` acts on disjoint coordinates.
    pub reflectors: Vec<Reflector<T>>,
}

impl<T: Scalar> DeflationRecord<T> {
    /// `x ← Q x`.
    pub fn apply_q(&self, x: &mut [T]) {
        self.reflectors.iter().for_each(|r| r.apply(x));
    }

    /// `x ← Qᴴ x`.
    pub fn apply_q_adjoint(&self, x: &mut [T]) {
        self.reflectors.iter().for_each(|r| r.apply_adjoint(x));
    }

    /// Dense `Q`.
    pub fn q_matrix(&self) -> Mat<T> {
        let mut q = Mat::identity(self.n);
        for r in &self.reflectors {
            let b = r.block();
            for (a, &i) in r.indices.iter().enumerate() {
                for (c, &j) in r.indices.iter().enumerate() {
                    q[(i, j)] = b[(a, c)];
                }
            }
        }
        q
    }
}

/// Deflates `(Λ, ρ, z)`; `values` may be in any order.
///
/// Returns the reduced strictly descending spectrum, the reduced update
/// (indexed like `record.kept`) and the record.
pub fn deflate<T: Scalar>(
    values: &[f64],
    rho: f64,
    z: &[T],
) -> (DiagonalSpectrum, RankOneUpdate<T>, DeflationRecord<T>) {
    let n = values.len();
    assert_eq!(z.len(), n, "z must match the spectrum length");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let znorm = norm2(z);
    let mut kept = Vec::new();
    let mut kept_z = Vec::new();
    let mut passthrough = Vec::new();
    let mut reflectors = Vec::new();
    let all_zero = rho == 0.0 || znorm == 0.0;

    let mut pos = 0;
    while pos < n {
        let head = values[order[pos]];
        let mut end = pos + 1;
        while end < n && (head - values[order[end]]).abs() <= REPEAT_TOL * head.abs().max(1.0) {
            end += 1;
        }
        // index order inside a cluster, so noise in the values cannot
        // change which member keeps the mass of z
        order[pos..end].sort_unstable();
        let live: Vec<usize> = order[pos..end]
            .iter()
            .copied()
            .filter(|&i| !all_zero && z[i].abs() > ZERO_Z_TOL * znorm)
            .collect();
        for &i in &order[pos..end] {
            if !live.contains(&i) {
                passthrough.push((i, values[i]));
            }
        }
        match live.len() {
            0 => {}
            1 => {
                kept.push(live[0]);
                kept_z.push(z[live[0]]);
            }
            _ => {
                let zb: Vec<T> = live.iter().map(|&i| z[i]).collect();
                let norm = norm2(&zb);
                if let Some(r) = Reflector::new(live.clone(), &zb) {
                    reflectors.push(r);
                }
                kept.push(live[0]);
                kept_z.push(T::from_real(norm));
                for &i in &live[1..] {
                    passthrough.push((i, values[i]));
                }
            }
        }
        pos = end;
    }
    passthrough.sort_by(|a, b| b.1.total_cmp(&a.1));
    order_ties(&mut passthrough, |p| p.1, |p| p.0);

    let kept_values: Vec<f64> = kept.iter().map(|&i| values[i]).collect();
    let spectrum = DiagonalSpectrum::new(kept_values)
        .expect("cluster heads are separated by more than the repeat tolerance");
    (
        spectrum,
        RankOneUpdate::new(rho, kept_z),
        DeflationRecord {
            n,
            kept,
            passthrough,
            reflectors,
        },
    )
}

/// Reorders runs of repeated values (within [`REPEAT_TOL`] of the run
/// head) by `key`, leaving the descending order between runs intact.
pub(crate) fn order_ties<E, K: Ord>(items: &mut [E], value: impl Fn(&E) -> f64, key: impl Fn(&E) -> K) {
    let mut pos = 0;
    while pos < items.len() {
        let head = value(&items[pos]);
        let mut end = pos + 1;
        while end < items.len() && (head - value(&items[end])).abs() <= REPEAT_TOL * head.abs().max(1.0) {
            end += 1;
        }
        items[pos..end].sort_by_key(&key);
        pos = end;
    }
}
