//! Head/tail edge visitation.
//!
//! One node at a time is the active Head. On activation it pairs with every
//! neighbor that has never been Head, each pair being one edge visit. The
//! role then moves to the lowest-index neighbor that still has unvisited
//! edges, or falls back to the previous Head when none does. An edge is
//! unvisited exactly when neither endpoint has been Head, which keeps the
//! bookkeeping local.

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Edge visits as `(head, tail)` pairs in visiting order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeVisitOrder {
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Nodes in the order they became Head.
    pub heads: Vec<NodeId>,
}

pub fn node_sequence_protocol(g: &Graph, start: NodeId) -> Result<EdgeVisitOrder> {
    let n = g.n_nodes();
    assert!(start < n, "start node {start} out of range");
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut is_head = vec![false; n];
    let mut pairs = Vec::with_capacity(g.n_edges());
    let mut heads = Vec::new();
    let mut trail = Vec::new();
    let mut current = start;
    loop {
        if !is_head[current] {
            is_head[current] = true;
            heads.push(current);
            pairs.extend(g.neighbors(current).filter(|&j| !is_head[j]).map(|j| (current, j)));
        }
        let has_open_edge = |j: NodeId| g.neighbors(j).any(|k| !is_head[k]);
        let next = g.neighbors(current).find(|&j| !is_head[j] && has_open_edge(j));
        match next {
            Some(j) => {
                trail.push(current);
                current = j;
            }
            None => match trail.pop() {
                Some(p) => current = p,
                None => break,
            },
        }
    }
    Ok(EdgeVisitOrder { pairs, heads })
}
