//! Undirected simple graphs and their matrix views.
//!
//! A [`Graph`] is an immutable snapshot: edits return a new graph with the
//! generation counter bumped, together with the [`EdgeEvent`] describing the
//! rank-one change of the Laplacian.

mod builtin;
mod generators;
mod io;
mod protocol;

pub use builtin::{six_node_array_network, ten_node_benchmark};
pub use generators::{gen_d_regular, gen_small_world, MAX_CONNECTIVITY_RETRIES};
pub use io::{parse_edge_list, to_edge_list};
pub use protocol::{node_sequence_protocol, EdgeVisitOrder};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::Mat;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<NodeId>>,
    n_edges: usize,
    generation: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Add,
    Remove,
}

/// A single edge edit and the rank-one Laplacian change it causes:
/// `L' = L + ρ b bᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEvent {
    pub kind: EdgeKind,
    /// `(i, j)` with `i < j`.
    pub edge: (NodeId, NodeId),
    pub rho: f64,
    /// Signed incidence column: `+1` at `i`, `−1` at `j`.
    pub b: Vec<f64>,
}

impl EdgeEvent {
    pub fn new(kind: EdgeKind, i: NodeId, j: NodeId, n: usize) -> Self {
        let (a, c) = if i < j { (i, j) } else { (j, i) };
        EdgeEvent {
            kind,
            edge: (a, c),
            rho: match kind {
                EdgeKind::Add => 1.0,
                EdgeKind::Remove => -1.0,
            },
            b: incidence_column(n, a, c),
        }
    }
}

/// `e_head − e_tail` of length `n`.
pub fn incidence_column(n: usize, head: NodeId, tail: NodeId) -> Vec<f64> {
    let mut b = vec![0.0; n];
    b[head] = 1.0;
    b[tail] = -1.0;
    b
}

impl Graph {
    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); n],
            n_edges: 0,
            generation: 0,
        }
    }

    /// Rejects self-loops, out-of-range endpoints and duplicates.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i == j || i >= n || j >= n || g.adj[i].contains(&j) {
                return Err(Error::InvalidEdge(i, j));
            }
            g.adj[i].insert(j);
            g.adj[j].insert(i);
            g.n_edges += 1;
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &e).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three nodes");
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edges(n, &e).expect("complete edges are valid")
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn neighbors(&self, i: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adj[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Two-colourable. Push-sum and average consensus with zero self-weight
    /// oscillate instead of converging on such graphs.
    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![None; self.n_nodes()];
        for root in 0..self.n_nodes() {
            if side[root].is_some() {
                continue;
            }
            side[root] = Some(false);
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                let su = side[u];
                for &v in &self.adj[u] {
                    match side[v] {
                        None => {
                            side[v] = su.map(|b| !b);
                            stack.push(v);
                        }
                        s if s == su => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        i < self.n_nodes() && self.adj[i].contains(&j)
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, a)| a.range(i + 1..).map(move |&j| (i, j)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// New snapshot with `(i, j)` added.
    pub fn with_edge_added(&self, i: NodeId, j: NodeId) -> Result<(Graph, EdgeEvent)> {
        if i == j || i >= self.n_nodes() || j >= self.n_nodes() || self.has_edge(i, j) {
            return Err(Error::InvalidEdge(i, j));
        }
        let mut g = self.clone();
        g.adj[i].insert(j);
        g.adj[j].insert(i);
        g.n_edges += 1;
        g.generation += 1;
        Ok((g, EdgeEvent::new(EdgeKind::Add, i, j, self.n_nodes())))
    }

    /// New snapshot with `(i, j)` removed.
    pub fn with_edge_removed(&self, i: NodeId, j: NodeId) -> Result<(Graph, EdgeEvent)> {
        if !self.has_edge(i, j) {
            return Err(Error::InvalidEdge(i, j));
        }
        let mut g = self.clone();
        g.adj[i].remove(&j);
        g.adj[j].remove(&i);
        g.n_edges -= 1;
        g.generation += 1;
        Ok((g, EdgeEvent::new(EdgeKind::Remove, i, j, self.n_nodes())))
    }

    pub fn apply(&self, event: &EdgeEvent) -> Result<Graph> {
        let (i, j) = event.edge;
        match event.kind {
            EdgeKind::Add => self.with_edge_added(i, j).map(|r| r.0),
            EdgeKind::Remove => self.with_edge_removed(i, j).map(|r| r.0),
        }
    }

    pub fn adjacency(&self) -> Mat<f64> {
        let n = self.n_nodes();
        Mat::from_fn(n, n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    pub fn laplacian(&self) -> Mat<f64> {
        let n = self.n_nodes();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.degree(i) as f64
            } else if self.has_edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Oriented incidence columns, one per edge in [`Graph::edges`] order.
    pub fn incidence(&self) -> Vec<Vec<f64>> {
        self.edges()
            .into_iter()
            .map(|(i, j)| incidence_column(self.n_nodes(), i, j))
            .collect()
    }

    fn require_no_isolated(&self) -> Result<()> {
        match (0..self.n_nodes()).find(|&i| self.degree(i) == 0) {
            Some(node) => Err(Error::IsolatedNode { node }),
            None => Ok(()),
        }
    }

    /// `D^{-1/2} A D^{-1/2}`.
    pub fn normalized_adjacency(&self) -> Result<Mat<f64>> {
        self.require_no_isolated()?;
        let n = self.n_nodes();
        Ok(Mat::from_fn(n, n, |i, j| {
            if self.has_edge(i, j) {
                1.0 / ((self.degree(i) * self.degree(j)) as f64).sqrt()
            } else {
                0.0
            }
        }))
    }

    /// `I − D^{-1/2} A D^{-1/2}`.
    pub fn sym_normalized_laplacian(&self) -> Result<Mat<f64>> {
        let a = self.normalized_adjacency()?;
        Ok(Mat::identity(self.n_nodes()).sub(&a))
    }

    /// Incidence columns of the normalized Laplacian, `D^{-1/2} b_g`.
    pub fn normalized_incidence(&self) -> Result<Vec<Vec<f64>>> {
        self.require_no_isolated()?;
        let scale: Vec<f64> = (0..self.n_nodes())
            .map(|i| 1.0 / (self.degree(i) as f64).sqrt())
            .collect();
        Ok(self
            .incidence()
            .into_iter()
            .map(|b| b.iter().zip(&scale).map(|(x, s)| x * s).collect())
            .collect())
    }
}

/// The pair `(x̃(t), x̄(t))` whose rank-two step
/// `x̃ x̃ᵀ − x̄ x̄ᵀ` contributes row and column `t` of `L` (from the diagonal
/// down). Summed over `t` the steps rebuild `L` exactly.
///
/// `entry(i, j)` returns `ℓ_{ij}`.
pub fn rank_two_laplacian_vectors(
    n: usize,
    t: usize,
    entry: impl Fn(usize, usize) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ltt = entry(t, t);
    if ltt <= 0.0 {
        return Err(Error::IsolatedNode { node: t });
    }
    let root = ltt.sqrt();
    let mut tilde = vec![0.0; n];
    let mut bar = vec![0.0; n];
    tilde[t] = root;
    for j in t + 1..n {
        let v = entry(j, t) / root;
        tilde[j] = v;
        bar[j] = v;
    }
    Ok((tilde, bar))
}
