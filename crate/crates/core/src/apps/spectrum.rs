//! Graph Laplacian spectrum learning and tracking.
//!
//! Learning builds `L` from nothing by rank-one incidence steps (one per
//! edge, in the order fixed by the node-sequence protocol) or by rank-two
//! column steps (one per node). Afterwards every topology change is one
//! `±b bᵀ` step.
//!
//! A node that leaves keeps its entry of the tracked vectors, so `N` stays
//! fixed and its Laplacian row is zero. It stays reachable for consensus
//! through one relay link to the lowest-index connected node.

use std::io::Write;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{node_sequence_protocol, rank_two_laplacian_vectors, EdgeEvent, EdgeKind, Graph, NodeId};
use crate::linalg::{dense_eig_oracle, Mat};
use crate::netsim::{RngStream, RoundMetrics, StreamPurpose};
use crate::tracker::TrackerNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearningMode {
    /// One rank-one step per edge.
    Incidence,
    /// One rank-two step per node.
    RankTwo,
    /// Incidence steps on `D^{-1/2} b`, learning `I − D^{-1/2} A D^{-1/2}`.
    NormalizedIncidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectrumEvent {
    AddEdge(NodeId, NodeId),
    RemoveEdge(NodeId, NodeId),
    NodeLeave(NodeId),
    NodeJoin { node: NodeId, neighbors: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScenario {
    pub graph: Graph,
    pub learning: LearningMode,
    /// First Head of the node-sequence protocol.
    pub start: NodeId,
    pub events: Vec<SpectrumEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub t: usize,
    pub k: usize,
    pub lambda_est: f64,
    pub lambda_true: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    /// Tracker steps spent learning (rank-two steps count once).
    pub learning_steps: usize,
    /// `max_k |λ_k − λ_k^true|` right after learning, node 0.
    pub learning_error: f64,
    /// `(t, relative λ_1 error)` after each event.
    pub event_errors: Vec<(usize, f64)>,
    pub final_graph: Graph,
    pub metrics: RoundMetrics,
}

impl SpectrumReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,k,lambda_est,lambda_true,eta")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:e},{:e},{:e}", r.t, r.k, r.lambda_est, r.lambda_true, r.eta)?;
        }
        Ok(())
    }
}

fn rel(a: f64, reference: f64) -> f64 {
    let d = (a - reference).abs();
    if reference.abs() > 1e-12 {
        d / reference.abs()
    } else {
        d
    }
}

/// Consensus graph for a tracked graph: itself when connected, otherwise
/// with each isolated node relayed to the lowest-index connected node.
pub fn communication_graph(tracked: &Graph) -> Result<Graph> {
    let n = tracked.n_nodes();
    let Some(hub) = (0..n).find(|&i| tracked.degree(i) > 0) else {
        return Ok(tracked.clone());
    };
    let mut edges = tracked.edges();
    edges.extend((0..n).filter(|&i| tracked.degree(i) == 0).map(|i| (i.min(hub), i.max(hub))));
    let g = Graph::from_edges(n, &edges)?;
    if g.is_connected() {
        Ok(g)
    } else {
        Err(Error::Disconnected)
    }
}

/// Edge events realizing a scenario event on `g`.
fn expand(g: &Graph, event: &SpectrumEvent) -> Result<Vec<EdgeEvent>> {
    let n = g.n_nodes();
    match event {
        SpectrumEvent::AddEdge(i, j) => Ok(vec![g.with_edge_added(*i, *j)?.1]),
        SpectrumEvent::RemoveEdge(i, j) => Ok(vec![g.with_edge_removed(*i, *j)?.1]),
        SpectrumEvent::NodeLeave(i) => {
            if *i >= n || g.degree(*i) == 0 {
                return Err(Error::InvalidScenario(format!("node {i} is not in the network")));
            }
            Ok(g.neighbors(*i).map(|j| EdgeEvent::new(EdgeKind::Remove, *i, j, n)).collect())
        }
        SpectrumEvent::NodeJoin { node, neighbors } => {
            if *node >= n || g.degree(*node) != 0 || neighbors.is_empty() {
                return Err(Error::InvalidScenario(format!("node {node} cannot join")));
            }
            neighbors
                .iter()
                .map(|&j| {
                    if j >= n || j == *node || g.degree(j) == 0 {
                        Err(Error::InvalidEdge(*node, j))
                    } else {
                        Ok(EdgeEvent::new(EdgeKind::Add, *node, j, n))
                    }
                })
                .collect()
        }
    }
}

fn target(g: &Graph, mode: LearningMode) -> Result<Mat<f64>> {
    match mode {
        LearningMode::NormalizedIncidence => g.sym_normalized_laplacian(),
        _ => Ok(g.laplacian()),
    }
}

/// Learns the spectrum of `scenario.graph`, then applies the events.
/// `net` must have been built on `scenario.graph` with one entry per node.
pub fn run_spectrum(scenario: &SpectrumScenario, net: &mut TrackerNetwork<f64>) -> Result<SpectrumReport> {
    let g0 = &scenario.graph;
    let n = g0.n_nodes();
    if net.n_entries() != n || net.nodes().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: net.n_entries(),
        });
    }
    if scenario.learning == LearningMode::NormalizedIncidence && !scenario.events.is_empty() {
        return Err(Error::InvalidScenario(
            "topology events change degrees, which is not a rank-one change of the normalized Laplacian".into(),
        ));
    }
    let mut rows = Vec::new();
    let record = |net: &TrackerNetwork<f64>, truth: &[f64], rows: &mut Vec<SpectrumRow>| {
        let est = net.eigenvalues(0);
        for k in 0..n {
            rows.push(SpectrumRow {
                t: net.t(),
                k,
                lambda_est: est[k],
                lambda_true: truth[k],
                eta: rel(est[k], truth[k]),
            });
        }
    };

    let truth0 = dense_eig_oracle(&target(g0, scenario.learning)?)?.values;
    let before = net.t();
    match scenario.learning {
        LearningMode::Incidence | LearningMode::NormalizedIncidence => {
            let order = node_sequence_protocol(g0, scenario.start)?;
            let scale: Vec<f64> = (0..n)
                .map(|i| match scenario.learning {
                    LearningMode::NormalizedIncidence => 1.0 / (g0.degree(i) as f64).sqrt(),
                    _ => 1.0,
                })
                .collect();
            for &(head, tail) in &order.pairs {
                let ev = EdgeEvent::new(EdgeKind::Add, head, tail, n);
                let b: Vec<f64> = ev.b.iter().zip(&scale).map(|(x, s)| x * s).collect();
                net.step(&b, 1.0)?;
                record(net, &truth0, &mut rows);
            }
        }
        LearningMode::RankTwo => {
            let l = g0.laplacian();
            for t in 0..n {
                let (tilde, bar) = rank_two_laplacian_vectors(n, t, |i, j| l[(i, j)])?;
                net.rank_two_step(&tilde, &bar)?;
                record(net, &truth0, &mut rows);
            }
        }
    }
    let learning_steps = match scenario.learning {
        LearningMode::RankTwo => (net.t() - before) / 2,
        _ => net.t() - before,
    };
    let learning_error = net
        .eigenvalues(0)
        .iter()
        .zip(&truth0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut g = g0.clone();
    let mut event_errors = Vec::with_capacity(scenario.events.len());
    for event in &scenario.events {
        for ev in expand(&g, event)? {
            net.step(&ev.b, ev.rho)?;
            g = g.apply(&ev)?;
        }
        net.set_graph(communication_graph(&g)?)?;
        let truth = dense_eig_oracle(&g.laplacian())?.values;
        record(net, &truth, &mut rows);
        event_errors.push((net.t(), rel(net.eigenvalues(0)[0], truth[0])));
    }
    Ok(SpectrumReport {
        rows,
        learning_steps,
        learning_error,
        event_errors,
        final_graph: g,
        metrics: net.metrics(),
    })
}

/// `count` random edge additions and removals; removals never disconnect.
pub fn random_edge_events(g: &Graph, count: usize, rng: RngStream) -> Result<Vec<SpectrumEvent>> {
    let mut r = rng.stream(StreamPurpose::Events, 0, 0);
    let n = g.n_nodes();
    let mut g = g.clone();
    let mut events = Vec::with_capacity(count);
    while events.len() < count {
        if r.random_bool(0.5) {
            let removable: Vec<(NodeId, NodeId)> = g
                .edges()
                .into_iter()
                .filter(|&(i, j)| g.with_edge_removed(i, j).is_ok_and(|(h, _)| h.is_connected()))
                .collect();
            if let Some(&(i, j)) = removable.choose(&mut r) {
                g = g.with_edge_removed(i, j)?.0;
                events.push(SpectrumEvent::RemoveEdge(i, j));
            }
        } else {
            let i = r.random_range(0..n);
            let j = r.random_range(0..n);
            if i != j && !g.has_edge(i, j) {
                g = g.with_edge_added(i, j)?.0;
                events.push(SpectrumEvent::AddEdge(i.min(j), i.max(j)));
            }
        }
    }
    Ok(events)
}
