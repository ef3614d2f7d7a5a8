//! Roots of the secular function of a rank-one modified diagonal matrix.
//!
//! For `Λ + ρ z zᴴ` with `Λ = diag(λ_1 > … > λ_N)` and all `z_i ≠ 0`, the
//! updated eigenvalues are the zeros of
//!
//! ```text
//! f(λ) = 1 + ρ Σ |z_i|² / (λ_i − λ)
//! ```
//!
//! Each zero is bracketed by two consecutive poles (the top one by `λ_1` and
//! `λ_1 + ρ‖z‖²`). Within the bracket the function is split into the part
//! with poles above the bracket and the part with poles at or below it; each
//! part is replaced by a one-pole rational model matching value and slope
//! at the current iterate, and the model equation (a quadratic) gives the
//! next iterate. A shrinking sign bracket guards every step.
//!
//! Negative `ρ` is handled by solving the mirrored problem
//! `−λ_{N−i+1}`, `−ρ`.
//!
//! Iterates are stored as an offset from the nearer pole so that the
//! distances `λ_i − λ̄_k` stay accurate even when a root sits very close to
//! a pole; the eigenvector formula depends on those distances.

use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

/// Iteration cap for a single root.
pub const MAX_SECULAR_ITERATIONS: usize = 200;

/// Eigenvalues of a diagonal matrix, strictly descending.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpectrum {
    values: Vec<f64>,
}

impl DiagonalSpectrum {
    /// Validates strict descending order and finiteness.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidBracket {
                index: bad,
                lower: values[bad],
                upper: values[bad],
            });
        }
        for (k, w) in values.windows(2).enumerate() {
            if w[0] <= w[1] {
                return Err(Error::InvalidBracket {
                    index: k + 1,
                    lower: w[1],
                    upper: w[0],
                });
            }
        }
        Ok(DiagonalSpectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The pair `(ρ, z)` of a rank-one modification `ρ z zᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneUpdate<T> {
    pub rho: f64,
    pub z: Vec<T>,
}

impl<T: Scalar> RankOneUpdate<T> {
    pub fn new(rho: f64, z: Vec<T>) -> Self {
        RankOneUpdate { rho, z }
    }

    pub fn norm_sq(&self) -> f64 {
        norm2(&self.z).powi(2)
    }
}

/// One solved root with its eigenvector.
#[derive(Debug, Clone)]
pub struct SecularSolveResult<T> {
    pub root: f64,
    pub iterations: usize,
    /// `|f(root)|`.
    pub residual: f64,
    /// Unit-norm `(Λ − root·I)⁻¹ z`.
    pub eigenvector: Vec<T>,
}

/// A root in the working (positive-ρ) frame, as `d[origin] + offset`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub origin: usize,
    pub offset: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Secular problem normalized to positive ρ.
///
/// `d` is strictly descending, `w_i = |ρ| |z_i|² > 0`. When the original ρ was
/// negative the problem is mirrored and `flipped` is set.
#[derive(Debug, Clone)]
pub(crate) struct SecularSystem {
    d: Vec<f64>,
    w: Vec<f64>,
    flipped: bool,
}

struct Evaluation {
    f: f64,
    psi: f64,
    dpsi: f64,
    phi: f64,
    dphi: f64,
}

impl SecularSystem {
    /// `values` strictly descending, `weights[i] = |z_i|²`.
    pub fn new(values: &[f64], rho: f64, weights: &[f64]) -> Self {
        let n = values.len();
        let scale = rho.abs();
        if rho > 0.0 {
            SecularSystem {
                d: values.to_vec(),
                w: weights.iter().map(|x| x * scale).collect(),
                flipped: false,
            }
        } else {
            SecularSystem {
                d: (0..n).map(|i| -values[n - 1 - i]).collect(),
                w: (0..n).map(|i| weights[n - 1 - i] * scale).collect(),
                flipped: true,
            }
        }
    }

    fn to_work(&self, i: usize) -> usize {
        if self.flipped {
            self.d.len() - 1 - i
        } else {
            i
        }
    }

    /// Solves for the `k`-th largest eigenvalue (0-based, original order).
    pub fn solve(&self, k: usize, xi: f64) -> Result<Root> {
        let kw = self.to_work(k);
        self.solve_work(kw, xi).map_err(|e| match e {
            Error::NonConvergence { iterations, .. } => Error::NonConvergence {
                index: k,
                iterations,
            },
            other => other,
        })
    }

    /// Eigenvalue of a root in original coordinates.
    pub fn eigenvalue(&self, root: &Root) -> f64 {
        let v = self.d[root.origin] + root.offset;
        if self.flipped {
            -v
        } else {
            v
        }
    }

    /// `λ_i − λ̄` in original coordinates, computed from the pole offset.
    pub fn pole_gap(&self, i: usize, root: &Root) -> f64 {
        let iw = self.to_work(i);
        let delta = (self.d[iw] - self.d[root.origin]) - root.offset;
        if self.flipped {
            -delta
        } else {
            delta
        }
    }

    /// `|ρ| |ẑ_i|²` consistent with the computed roots (Löwner's formula), in
    /// original coordinates. `roots[k]` must be the root for original index
    /// `k`.
    pub fn consistent_weights(&self, roots: &[Root]) -> Vec<f64> {
        let n = self.d.len();
        let mut work_roots = roots.to_vec();
        for (k, r) in roots.iter().enumerate() {
            work_roots[self.to_work(k)] = *r;
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            // Π_j (λ̄_j − d_i) / Π_{j≠i} (d_j − d_i), as a product of ratios
            let mut prod = (self.d[work_roots[i].origin] - self.d[i]) + work_roots[i].offset;
            for j in (0..n).filter(|&j| j != i) {
                let num = (self.d[work_roots[j].origin] - self.d[i]) + work_roots[j].offset;
                prod *= num / (self.d[j] - self.d[i]);
            }
            let wi = prod.abs();
            out[self.to_work(i)] = if wi.is_finite() && wi > 0.0 { wi } else { self.w[i] };
        }
        out
    }

    fn evaluate(&self, k: usize, origin: usize, x: f64) -> Evaluation {
        let base = self.d[origin];
        let (mut psi, mut dpsi, mut phi, mut dphi) = (0.0, 0.0, 0.0, 0.0);
        for (i, (&di, &wi)) in self.d.iter().zip(&self.w).enumerate() {
            let delta = (di - base) - x;
            let t = wi / delta;
            if i < k {
                psi += t;
                dpsi += t / delta;
            } else {
                phi += t;
                dphi += t / delta;
            }
        }
        Evaluation {
            f: 1.0 + psi + phi,
            psi,
            dpsi,
            phi,
            dphi,
        }
    }

    fn solve_work(&self, k: usize, xi: f64) -> Result<Root> {
        let n = self.d.len();
        assert!(k < n, "root index out of range");
        let total_w: f64 = self.w.iter().sum();

        let (origin, mut lo, mut hi, mut x) = if k == 0 {
            (0, 0.0, total_w, 0.5 * total_w)
        } else {
            let gap = self.d[k - 1] - self.d[k];
            let mid = 0.5 * gap;
            let fmid = self.evaluate(k, k, mid).f;
            if fmid >= 0.0 {
                (k, 0.0, mid, mid)
            } else {
                let lo = mid - gap;
                (k - 1, lo, 0.0, lo)
            }
        };

        let upper_pole = if k == 0 {
            None
        } else {
            Some(self.d[k - 1] - self.d[origin])
        };
        let lower_pole = self.d[k] - self.d[origin];

        for iter in 1..=MAX_SECULAR_ITERATIONS {
            let ev = self.evaluate(k, origin, x);
            if ev.f == 0.0 {
                return Ok(Root {
                    origin,
                    offset: x,
                    iterations: iter,
                    residual: 0.0,
                });
            }
            if ev.f < 0.0 {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }

            // noise floor of the evaluation itself
            let floor = 8.0 * f64::EPSILON * n as f64 * (1.0 + ev.psi.abs() + ev.phi.abs());
            let collapsed = hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
            if ev.f.abs() <= floor || collapsed {
                return Ok(Root {
                    origin,
                    offset: x,
                    iterations: iter,
                    residual: ev.f.abs(),
                });
            }

            let a2 = lower_pole - x;
            let s = ev.dphi * a2 * a2;
            let r = ev.phi - ev.dphi * a2;
            let step = match upper_pole {
                None => {
                    let a = 1.0 + r;
                    if a != 0.0 {
                        Some(a2 + s / a)
                    } else {
                        None
                    }
                }
                Some(up) => {
                    let a1 = up - x;
                    let q = ev.dpsi * a1 * a1;
                    let p = ev.psi - ev.dpsi * a1;
                    let a = 1.0 + p + r;
                    let b = a * (a1 + a2) + q + s;
                    let c = a1 * a2 * ev.f;
                    quadratic_step(a, b, c, x, lo, hi)
                }
            };

            let mut next = step.map(|eta| x + eta).unwrap_or(f64::NAN);
            if !admissible(next, lo, hi) {
                next = 0.5 * (lo + hi);
            }
            let eta = next - x;
            x = next;
            if eta.abs() < xi * x.abs().min(1.0) || eta == 0.0 {
                let ev = self.evaluate(k, origin, x);
                return Ok(Root {
                    origin,
                    offset: x,
                    iterations: iter,
                    residual: ev.f.abs(),
                });
            }
        }
        Err(Error::NonConvergence {
            index: k,
            iterations: MAX_SECULAR_ITERATIONS,
        })
    }
}

/// Whether `x` may be the next iterate: inside the bracket and not on the
/// origin pole (offset zero). Bracket ends other than the pole are
/// admissible; for a single pole the root is the upper end itself.
fn admissible(x: f64, lo: f64, hi: f64) -> bool {
    x.is_finite() && x >= lo && x <= hi && x != 0.0
}

/// Root of `a η² − b η + c = 0` that lands inside the bracket when added to
/// `x`. `None` (bisect) when neither or both do.
fn quadratic_step(a: f64, b: f64, c: f64, x: f64, lo: f64, hi: f64) -> Option<f64> {
    let inside = |eta: f64| admissible(x + eta, lo, hi);
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return None;
    }
    if a.abs() <= f64::EPSILON * scale {
        let eta = c / b;
        return inside(eta).then_some(eta);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = b + b.signum() * disc.sqrt();
    match (2.0 * c / t, t / (2.0 * a)) {
        (e1, e2) if inside(e1) && !inside(e2) => Some(e1),
        (e1, e2) if inside(e2) && !inside(e1) => Some(e2),
        _ => None,
    }
}

/// Solves for the `k`-th largest eigenvalue (0-based) of `Λ + ρ z zᴴ`.
///
/// The problem must already be deflated: `spectrum` strictly descending and
/// every `z_i` nonzero. The eigenvector is the normalized
/// `(Λ − λ̄_k I)⁻¹ z`.
pub fn secular_root<T: Scalar>(
    spectrum: &DiagonalSpectrum,
    update: &RankOneUpdate<T>,
    k: usize,
    xi: f64,
) -> Result<SecularSolveResult<T>> {
    let n = spectrum.len();
    if update.z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: update.z.len(),
        });
    }
    assert!(k < n, "root index {k} out of range for size {n}");
    assert!(xi > 0.0, "tolerance must be positive");
    if update.rho == 0.0 || !update.rho.is_finite() {
        return Err(Error::InvalidBracket {
            index: k,
            lower: spectrum.values()[k],
            upper: spectrum.values()[k],
        });
    }
    if let Some(i) = update.z.iter().position(|z| z.abs_sq() == 0.0) {
        return Err(Error::InvalidBracket {
            index: i,
            lower: spectrum.values()[i],
            upper: spectrum.values()[i],
        });
    }
    let weights: Vec<f64> = update.z.iter().map(|z| z.abs_sq()).collect();
    let sys = SecularSystem::new(spectrum.values(), update.rho, &weights);
    let root = sys.solve(k, xi)?;
    let mut v: Vec<T> = (0..n)
        .map(|i| update.z[i].scale(1.0 / sys.pole_gap(i, &root)))
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
    Ok(SecularSolveResult {
        root: sys.eigenvalue(&root),
        iterations: root.iterations,
        residual: root.residual,
        eigenvector: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn diag(v: &[f64]) -> DiagonalSpectrum {
        DiagonalSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn one_by_one() {
        let r = secular_root(&diag(&[0.0]), &RankOneUpdate::new(1.0, vec![2.0]), 0, 1e-12).unwrap();
        assert!((r.root - 4.0).abs() < 1e-12);
        assert!((r.eigenvector[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_matches_quadratic() {
        let s = diag(&[2.0, 1.0]);
        let u = RankOneUpdate::new(1.0, vec![1.0, 1.0]);
        let hi = secular_root(&s, &u, 0, 1e-12).unwrap();
        let lo = secular_root(&s, &u, 1, 1e-12).unwrap();
        let sq5 = 5f64.sqrt();
        assert!((hi.root - (5.0 + sq5) / 2.0).abs() < 1e-12);
        assert!((lo.root - (5.0 - sq5) / 2.0).abs() < 1e-12);
        // interlacing and the upper bound λ_1 + ρ zᵀz
        assert!(hi.root < 4.0 && hi.root > 2.0);
        assert!(2.0 > lo.root && lo.root > 1.0);
        let d: f64 = hi.eigenvector.iter().zip(&lo.eigenvector).map(|(a, b)| a * b).sum();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn negative_rho_mirrors() {
        let s = diag(&[2.0, 1.0]);
        let u = RankOneUpdate::new(-1.0, vec![1.0, 1.0]);
        // eigenvalues of [[1,-1],[-1,0]]: (1 ± √5)/2
        let a = secular_root(&s, &u, 0, 1e-12).unwrap();
        let b = secular_root(&s, &u, 1, 1e-12).unwrap();
        let sq5 = 5f64.sqrt();
        assert!((a.root - (1.0 + sq5) / 2.0).abs() < 1e-12);
        assert!((b.root - (1.0 - sq5) / 2.0).abs() < 1e-12);
        assert!(2.0 > a.root && a.root > 1.0 && 1.0 > b.root);
    }

    #[test]
    fn complex_weights_use_modulus() {
        let s = diag(&[2.0, 1.0]);
        let z = vec![Complex64::new(0.6, 0.8), Complex64::new(0.0, -1.0)];
        let r = secular_root(&s, &RankOneUpdate::new(1.0, z), 0, 1e-12).unwrap();
        assert!((r.root - (5.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_undeflated_input() {
        assert!(DiagonalSpectrum::new(vec![1.0, 1.0]).is_err());
        let e = secular_root(&diag(&[2.0, 1.0]), &RankOneUpdate::new(1.0, vec![1.0, 0.0]), 0, 1e-12);
        assert!(matches!(e, Err(Error::InvalidBracket { .. })));
    }

    #[test]
    fn root_hugging_a_pole() {
        // tiny weight on the lower pole: root sits ~1e-20 above it
        let s = diag(&[1.0, 0.0]);
        let u = RankOneUpdate::new(1.0, vec![1.0, 1e-10]);
        let r = secular_root(&s, &u, 1, 1e-12).unwrap();
        assert!(r.root > 0.0 && r.root < 1e-15);
        assert!(r.residual < 1e-8);
    }
}
