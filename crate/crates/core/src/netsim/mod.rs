//! Synchronous message-passing substrate.
//!
//! Nodes advance in lock step. In each round every node broadcasts one
//! message built from its own state, then updates its own state from the
//! messages of its neighbors. The [`Inbox`] a node sees holds neighbor
//! messages only, so a round closure cannot read non-local data.

mod metrics;
mod rng;
mod state;

pub use metrics::{write_metrics_csv, MetricsRow, RoundMetrics};
pub use rng::{RngStream, StreamPurpose};
pub use state::NodeState;

use crate::exec::{self, ExecMode};
use crate::graph::{Graph, NodeId};

/// Anything that can be sent; reports its size in scalars for accounting.
pub trait Payload {
    fn scalar_count(&self) -> usize;
}

impl Payload for () {
    fn scalar_count(&self) -> usize {
        0
    }
}

impl Payload for f64 {
    fn scalar_count(&self) -> usize {
        1
    }
}

impl Payload for Vec<f64> {
    fn scalar_count(&self) -> usize {
        self.len()
    }
}

/// Messages from the neighbors of one node.
pub struct Inbox<'a, M> {
    neighbors: &'a [NodeId],
    messages: &'a [M],
}

impl<'a, M> Inbox<'a, M> {
    /// `(sender, message)` pairs in ascending sender order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &'a M)> + '_ {
        self.neighbors.iter().map(move |&j| (j, &self.messages[j]))
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Drives synchronous rounds over a fixed communication graph.
#[derive(Debug, Clone)]
pub struct RoundEngine {
    graph: Graph,
    neighbors: Vec<Vec<NodeId>>,
    metrics: RoundMetrics,
    mode: ExecMode,
}

impl RoundEngine {
    pub fn new(graph: Graph, mode: ExecMode) -> Self {
        let neighbors = (0..graph.n_nodes()).map(|i| graph.neighbors(i).collect()).collect();
        RoundEngine {
            graph,
            neighbors,
            metrics: RoundMetrics::default(),
            mode,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Swaps the communication graph, keeping the metrics.
    pub fn set_graph(&mut self, graph: Graph) {
        self.neighbors = (0..graph.n_nodes()).map(|i| graph.neighbors(i).collect()).collect();
        self.graph = graph;
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    pub fn metrics(&self) -> &RoundMetrics {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut RoundMetrics {
        &mut self.metrics
    }

    pub fn n_nodes(&self) -> usize {
        self.neighbors.len()
    }

    /// One synchronous round: every node broadcasts `send(i, state_i)` to
    /// its neighbors, then `recv(i, state_i, inbox_i)` runs at every node.
    pub fn run_round<S, M>(
        &mut self,
        states: &mut [S],
        send: impl Fn(NodeId, &S) -> M + Sync,
        recv: impl Fn(NodeId, &mut S, &Inbox<M>) + Sync,
    ) where
        S: Send + Sync,
        M: Payload + Send + Sync,
    {
        assert_eq!(states.len(), self.n_nodes(), "one state per node");
        let outbox: Vec<M> = {
            let states = &*states;
            exec::map_indices(self.mode, states.len(), |i| send(i, &states[i]))
        };
        let sent: usize = outbox
            .iter()
            .zip(&self.neighbors)
            .map(|(m, nb)| m.scalar_count() * nb.len())
            .sum();
        let neighbors = &self.neighbors;
        let outbox = &outbox;
        exec::for_each_mut(self.mode, states, |i, s| {
            let inbox = Inbox {
                neighbors: &neighbors[i],
                messages: outbox,
            };
            recv(i, s, &inbox);
        });
        self.metrics.scalar_messages += sent as u64;
        self.metrics.wall_rounds += 1;
    }

    pub fn metrics_snapshot(&self) -> RoundMetrics {
        self.metrics
    }
}
