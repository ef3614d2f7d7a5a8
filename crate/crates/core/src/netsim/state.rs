use crate::scalar::Scalar;

/// Everything a node stores between tracker steps.
///
/// A node owning one entry keeps six length-`N` arrays: its previous and
/// current eigenvector row, previous and current eigenvalue copies, the
/// local update vector and one scratch vector. Nodes owning several entries
/// keep one row pair per entry.
#[derive(Debug, Clone)]
pub struct NodeState<T> {
    pub id: usize,
    /// Global entry indices owned by this node.
    pub entries: Vec<usize>,
    pub u_rows_prev: Vec<Vec<T>>,
    pub u_rows_curr: Vec<Vec<T>>,
    pub lambda_prev: Vec<f64>,
    pub lambda_curr: Vec<f64>,
    pub z_local: Vec<T>,
    pub v_scratch: Vec<T>,
}

impl<T: Scalar> NodeState<T> {
    /// Zero spectrum and unit rows `e_entryᵀ`.
    pub fn new(id: usize, entries: Vec<usize>, n: usize) -> Self {
        let unit = |e: usize| {
            let mut r = vec![T::zero(); n];
            r[e] = T::one();
            r
        };
        let rows: Vec<Vec<T>> = entries.iter().map(|&e| unit(e)).collect();
        NodeState {
            id,
            u_rows_prev: rows.clone(),
            u_rows_curr: rows,
            entries,
            lambda_prev: vec![0.0; n],
            lambda_curr: vec![0.0; n],
            z_local: vec![T::zero(); n],
            v_scratch: vec![T::zero(); n],
        }
    }

    /// Stored values, in units of `T`.
    pub fn storage_words(&self) -> usize {
        self.u_rows_prev.iter().chain(&self.u_rows_curr).map(Vec::len).sum::<usize>()
            + self.lambda_prev.len()
            + self.lambda_curr.len()
            + self.z_local.len()
            + self.v_scratch.len()
    }
}
