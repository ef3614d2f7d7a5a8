//! Small fixed topologies used by the shipped scenarios.

use super::Graph;

/// Ten nodes: a five-cycle with one pendant per cycle node. Its Laplacian
/// has five distinct nonzero eigenvalues.
pub fn ten_node_benchmark() -> Graph {
    let e = [(0, 1), (0, 4), (0, 5), (1, 2), (1, 6), (2, 3), (2, 7), (3, 4), (3, 8), (4, 9)];
    Graph::from_edges(10, &e).expect("static edge list is valid")
}

/// Six nodes: two triangles joined by a bridge.
pub fn six_node_array_network() -> Graph {
    let e = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)];
    Graph::from_edges(6, &e).expect("static edge list is valid")
}
