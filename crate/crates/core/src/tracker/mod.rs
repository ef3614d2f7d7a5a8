//! Online distributed eigendecomposition.
//!
//! Each step absorbs `ρ x xᴴ`: the network first agrees on
//! `z = U(t−1)ᴴ x` (entry `k` is a consensus sum of `conj(u_jk) x_j`), then
//! every node independently solves the rank-one update of its own copy of
//! the spectrum and maps its own row of `U` through the update matrix.
//! Nothing but the consensus sums crosses the network.

use std::io::Write;

use crate::consensus::{nc_weighted_sum, ConsensusConfig};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::graph::Graph;
use crate::linalg::{rank_one_eigenupdate, Mat};
use crate::netsim::{NodeState, RoundEngine, RoundMetrics};
use crate::scalar::Scalar;

/// Default stopping tolerance of the secular iteration.
pub const DEFAULT_XI: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TrackerNetwork<T> {
    engine: RoundEngine,
    nodes: Vec<NodeState<T>>,
    /// `owner[e]` is the node holding entry `e`.
    owner: Vec<usize>,
    /// Position of entry `e` within its owner's rows.
    slot: Vec<usize>,
    consensus: ConsensusConfig,
    xi: f64,
    t: usize,
}

impl<T: Scalar> TrackerNetwork<T> {
    /// One entry per node.
    pub fn new(graph: Graph, consensus: ConsensusConfig, mode: ExecMode) -> Result<Self> {
        let owner = (0..graph.n_nodes()).collect();
        Self::with_owners(graph, owner, consensus, mode)
    }

    /// Entry `e` of the tracked vectors lives at node `owner[e]`.
    pub fn with_owners(graph: Graph, owner: Vec<usize>, consensus: ConsensusConfig, mode: ExecMode) -> Result<Self> {
        let n_nodes = graph.n_nodes();
        if let Some(&bad) = owner.iter().find(|&&o| o >= n_nodes) {
            return Err(Error::InvalidScenario(format!("entry owner {bad} is not a node")));
        }
        if let Some(node) = (0..n_nodes).find(|i| !owner.contains(i)) {
            return Err(Error::InvalidScenario(format!("node {node} owns no entry")));
        }
        consensus.validate(&graph)?;
        let m = owner.len();
        let mut entries = vec![Vec::new(); n_nodes];
        let mut slot = vec![0; m];
        for (e, &o) in owner.iter().enumerate() {
            slot[e] = entries[o].len();
            entries[o].push(e);
        }
        let nodes = entries
            .into_iter()
            .enumerate()
            .map(|(i, es)| NodeState::new(i, es, m))
            .collect();
        Ok(TrackerNetwork {
            engine: RoundEngine::new(graph, mode),
            nodes,
            owner,
            slot,
            consensus,
            xi: DEFAULT_XI,
            t: 0,
        })
    }

    pub fn set_xi(&mut self, xi: f64) {
        assert!(xi > 0.0, "tolerance must be positive");
        self.xi = xi;
    }

    /// Number of completed steps.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Dimension of the tracked matrix.
    pub fn n_entries(&self) -> usize {
        self.owner.len()
    }

    pub fn graph(&self) -> &Graph {
        self.engine.graph()
    }

    pub fn nodes(&self) -> &[NodeState<T>] {
        &self.nodes
    }

    pub fn consensus(&self) -> &ConsensusConfig {
        &self.consensus
    }

    pub fn metrics(&self) -> RoundMetrics {
        self.engine.metrics_snapshot()
    }

    /// Switches the consensus backend, e.g. once graph eigenvalues are known.
    pub fn set_consensus(&mut self, consensus: ConsensusConfig) -> Result<()> {
        consensus.validate(self.engine.graph())?;
        self.consensus = consensus;
        Ok(())
    }

    /// Replaces the communication graph (same node set).
    pub fn set_graph(&mut self, graph: Graph) -> Result<()> {
        if graph.n_nodes() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                got: graph.n_nodes(),
            });
        }
        self.consensus.validate(&graph)?;
        self.engine.set_graph(graph);
        Ok(())
    }

    /// Network sums of per-node summands through the configured backend,
    /// charged to this network's counters.
    pub fn network_sum(&mut self, summands: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        nc_weighted_sum(&mut self.engine, summands, &self.consensus)
    }

    /// Node `i`'s current row of `U` for entry `e`, if it owns `e`.
    pub fn row(&self, node: usize, e: usize) -> Option<&[T]> {
        (self.owner.get(e) == Some(&node)).then(|| self.nodes[node].u_rows_curr[self.slot[e]].as_slice())
    }

    pub fn mode(&self) -> ExecMode {
        self.engine.mode()
    }

    /// Node `i`'s copy of the spectrum, descending.
    pub fn eigenvalues(&self, node: usize) -> &[f64] {
        &self.nodes[node].lambda_curr
    }

    /// Absorbs `ρ x xᴴ`; `x` is indexed by entry.
    pub fn step(&mut self, x: &[T], rho: f64) -> Result<()> {
        let m = self.n_entries();
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        // local summands conj(u_ek) x_e, combined over the node's own entries
        let summands: Vec<Vec<T>> = self
            .nodes
            .iter()
            .map(|node| {
                let mut s = vec![T::zero(); m];
                for (row, &e) in node.u_rows_curr.iter().zip(&node.entries) {
                    for (acc, u) in s.iter_mut().zip(row) {
                        *acc += u.conj() * x[e];
                    }
                }
                s
            })
            .collect();
        let z = nc_weighted_sum(&mut self.engine, &summands, &self.consensus)?;

        let xi = self.xi;
        let t = self.t + 1;
        let mode = self.engine.mode();
        let mut work: Vec<(&mut NodeState<T>, Vec<T>)> = self.nodes.iter_mut().zip(z).collect();
        exec::try_for_each_mut(mode, &mut work, |i, (node, z)| {
            std::mem::swap(&mut node.lambda_prev, &mut node.lambda_curr);
            std::mem::swap(&mut node.u_rows_prev, &mut node.u_rows_curr);
            node.z_local.copy_from_slice(z);
            let sol = rank_one_eigenupdate(&node.lambda_prev, rho, &node.z_local, xi).map_err(|e| {
                let k = match e {
                    Error::NonConvergence { index, .. } => index,
                    _ => 0,
                };
                Error::Tracker {
                    node: i,
                    k,
                    t,
                    source: Box::new(e),
                }
            })?;
            node.lambda_curr.copy_from_slice(sol.eigenvalues());
            for (prev, curr) in node.u_rows_prev.iter().zip(node.u_rows_curr.iter_mut()) {
                sol.update_row(prev, curr, &mut node.v_scratch);
            }
            Ok(())
        })?;
        self.t = t;
        Ok(())
    }

    /// Multiplies every node's spectrum by `alpha` (no communication).
    pub fn scale_spectrum(&mut self, alpha: f64) {
        for node in &mut self.nodes {
            node.lambda_curr.iter_mut().for_each(|l| *l *= alpha);
        }
    }

    /// Exponentially weighted step `R ← α R + (1 − α) x xᴴ`.
    pub fn ewma_step(&mut self, x: &[T], alpha: f64) -> Result<()> {
        self.scale_spectrum(alpha);
        if alpha == 1.0 {
            return Ok(());
        }
        self.step(x, 1.0 - alpha)
    }

    /// `R ← R + x₊x₊ᴴ − x₋x₋ᴴ` as two consecutive rank-one steps.
    pub fn rank_two_step(&mut self, x_plus: &[T], x_minus: &[T]) -> Result<()> {
        self.step(x_plus, 1.0)?;
        self.step(x_minus, -1.0)
    }

    /// Node 0's spectrum and the eigenvector matrix assembled from every
    /// node's rows. Diagnostic only.
    pub fn gather_global(&self) -> (Vec<f64>, Mat<T>) {
        let m = self.n_entries();
        let mut u = Mat::zeros(m, m);
        for e in 0..m {
            let row = &self.nodes[self.owner[e]].u_rows_curr[self.slot[e]];
            u.row_mut(e).copy_from_slice(row);
        }
        (self.nodes[0].lambda_curr.clone(), u)
    }

    /// `max_k (max_i λ_ik − min_i λ_ik)` over node copies.
    pub fn node_disagreement(&self) -> f64 {
        (0..self.n_entries()).map(|k| self.spread(k)).fold(0.0, f64::max)
    }

    /// Spread of eigenvalue `k` across node copies.
    pub fn spread(&self, k: usize) -> f64 {
        let (lo, hi) = self.nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| {
            (lo.min(n.lambda_curr[k]), hi.max(n.lambda_curr[k]))
        });
        hi - lo
    }

    /// Rows of the trajectory CSV for the current step.
    pub fn trajectory_rows(&self) -> Vec<TrajectoryRow> {
        let rounds = self.metrics().consensus_rounds;
        (0..self.n_entries())
            .map(|k| TrajectoryRow {
                t: self.t,
                k,
                lambda_k: self.nodes[0].lambda_curr[k],
                node_disagreement: self.spread(k),
                consensus_rounds: rounds,
            })
            .collect()
    }
}

/// Free-function form of [`TrackerNetwork::step`].
pub fn tracker_step<T: Scalar>(net: &mut TrackerNetwork<T>, x: &[T], rho: f64) -> Result<()> {
    net.step(x, rho)
}

/// Free-function form of [`TrackerNetwork::rank_two_step`].
pub fn tracker_rank_two_step<T: Scalar>(net: &mut TrackerNetwork<T>, x_plus: &[T], x_minus: &[T]) -> Result<()> {
    net.rank_two_step(x_plus, x_minus)
}

/// Free-function form of [`TrackerNetwork::gather_global`].
pub fn gather_global<T: Scalar>(net: &TrackerNetwork<T>) -> (Vec<f64>, Mat<T>) {
    net.gather_global()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub k: usize,
    pub lambda_k: f64,
    pub node_disagreement: f64,
    pub consensus_rounds: u64,
}

/// Writes `t,k,lambda_k,node_disagreement,consensus_rounds`.
pub fn write_trajectory_csv(mut w: impl Write, rows: &[TrajectoryRow]) -> std::io::Result<()> {
    writeln!(w, "t,k,lambda_k,node_disagreement,consensus_rounds")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{}",
            r.t, r.k, r.lambda_k, r.node_disagreement, r.consensus_rounds
        )?;
    }
    Ok(())
}
