//! Full eigen-update of `Λ + ρ z zᴴ`.
//!
//! The update matrix `V` (columns are the new eigenvectors in the basis of
//! the old ones) is never required in dense form: [`RankOneSolution::column`]
//! streams single columns and [`RankOneSolution::update_row`] maps a row of
//! the old eigenvector matrix to the corresponding row of the new one in
//! `O(N²)` time and `O(N)` extra memory.

use crate::error::{Error, Result};
use crate::linalg::deflation::{deflate, order_ties, DeflationRecord};
use crate::linalg::mat::Mat;
use crate::linalg::secular::{Root, SecularSystem};
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone, Copy)]
enum Source {
    /// Secular root `j` of the deflated problem.
    Root(usize),
    /// Unchanged eigenpair at this original index.
    Passthrough(usize),
}

/// Eigen-decomposition of `Λ + ρ z zᴴ` in factored form.
#[derive(Debug, Clone)]
pub struct RankOneSolution<T> {
    eigenvalues: Vec<f64>,
    sources: Vec<Source>,
    record: DeflationRecord<T>,
    system: Option<SecularSystem>,
    roots: Vec<Root>,
    /// `ẑ` consistent with the computed roots, indexed like `record.kept`.
    zhat: Vec<T>,
    iterations: usize,
}

/// Eigenvalues and factored eigenvectors of `diag(values) + ρ z zᴴ`.
///
/// `values` may be in any order and contain repeats. Eigenvalues come back
/// descending. Within a run of repeated values the columns are ordered roots
/// first, then passed-through pairs by original index, so that copies of the
/// problem differing only by rounding agree on the column order.
pub fn rank_one_eigenupdate<T: Scalar>(
    values: &[f64],
    rho: f64,
    z: &[T],
    xi: f64,
) -> Result<RankOneSolution<T>> {
    if z.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: z.len(),
        });
    }
    let (spectrum, update, record) = deflate(values, rho, z);
    let m = spectrum.len();

    let mut roots = Vec::with_capacity(m);
    let mut zhat = Vec::with_capacity(m);
    let mut system = None;
    let mut iterations = 0;
    if m > 0 {
        let weights: Vec<f64> = update.z.iter().map(|x| x.abs_sq()).collect();
        let sys = SecularSystem::new(spectrum.values(), rho, &weights);
        for k in 0..m {
            let r = sys.solve(k, xi)?;
            iterations = iterations.max(r.iterations);
            roots.push(r);
        }
        let w = sys.consistent_weights(&roots);
        zhat = update
            .z
            .iter()
            .zip(&w)
            .map(|(zi, wi)| zi.phase().scale((wi / rho.abs()).sqrt()))
            .collect();
        system = Some(sys);
    }

    let mut cands: Vec<(f64, Source)> = Vec::with_capacity(values.len());
    if let Some(sys) = &system {
        cands.extend(roots.iter().enumerate().map(|(j, r)| (sys.eigenvalue(r), Source::Root(j))));
    }
    cands.extend(record.passthrough.iter().map(|&(i, v)| (v, Source::Passthrough(i))));
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sorted: Vec<f64> = cands.iter().map(|c| c.0).collect();
    order_ties(&mut cands, |c| c.0, |c| match c.1 {
        Source::Root(j) => (0, j),
        Source::Passthrough(i) => (1, i),
    });

    Ok(RankOneSolution {
        eigenvalues: sorted,
        sources: cands.iter().map(|c| c.1).collect(),
        record,
        system,
        roots,
        zhat,
        iterations,
    })
}

impl<T: Scalar> RankOneSolution<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Updated eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn record(&self) -> &DeflationRecord<T> {
        &self.record
    }

    /// Number of roots that went through the secular solver.
    pub fn secular_roots(&self) -> usize {
        self.roots.len()
    }

    /// Largest iteration count over all roots.
    pub fn max_iterations(&self) -> usize {
        self.iterations
    }

    /// Column `k` of `W` (before undoing the reflectors), written into `out`.
    fn raw_column(&self, k: usize, out: &mut [T]) {
        out.iter_mut().for_each(|x| *x = T::zero());
        match self.sources[k] {
            Source::Passthrough(i) => out[i] = T::one(),
            Source::Root(j) => {
                let sys = self.system.as_ref().expect("roots imply a secular system");
                let root = &self.roots[j];
                for (m, &i) in self.record.kept.iter().enumerate() {
                    out[i] = self.zhat[m].scale(1.0 / sys.pole_gap(m, root));
                }
                let nv = norm2(out);
                out.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
            }
        }
    }

    /// Column `k` of the update matrix `V`, written into `out`.
    pub fn column(&self, k: usize, out: &mut [T]) {
        self.raw_column(k, out);
        self.record.apply_q_adjoint(out);
    }

    /// Dense `V`.
    pub fn matrix(&self) -> Mat<T> {
        let n = self.len();
        let mut v = Mat::zeros(n, n);
        let mut col = vec![T::zero(); n];
        for k in 0..n {
            self.column(k, &mut col);
            v.set_column(k, &col);
        }
        v
    }

    /// `rowᵀ V`: the new row of the eigenvector matrix from the old one.
    /// `scratch` must have length `N`.
    pub fn update_row(&self, row: &[T], out: &mut [T], scratch: &mut [T]) {
        let n = self.len();
        assert_eq!(row.len(), n);
        assert_eq!(out.len(), n);
        // y = conj(Q conj(row)) so that rowᵀ Qᴴ = yᵀ
        for (s, r) in scratch.iter_mut().zip(row) {
            *s = r.conj();
        }
        self.record.apply_q(scratch);
        scratch.iter_mut().for_each(|s| *s = s.conj());

        let sys = self.system.as_ref();
        for (k, o) in out.iter_mut().enumerate() {
            *o = match self.sources[k] {
                Source::Passthrough(i) => scratch[i],
                Source::Root(j) => {
                    let sys = sys.expect("roots imply a secular system");
                    let root = &self.roots[j];
                    let mut acc = T::zero();
                    let mut nrm = 0.0;
                    for (m, &i) in self.record.kept.iter().enumerate() {
                        let w = self.zhat[m].scale(1.0 / sys.pole_gap(m, root));
                        nrm += w.abs_sq();
                        acc += scratch[i] * w;
                    }
                    acc.scale(1.0 / nrm.sqrt())
                }
            };
        }
    }
}
