use eigtrack::graph::{gen_d_regular, node_sequence_protocol, rank_two_laplacian_vectors, Graph};
use eigtrack::linalg::{dense_eig_oracle, Mat};
use proptest::prelude::*;

/// Random connected graph: a random tree plus extra edges.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..=20)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
                prop::collection::vec((0..n, 0..n), 0..2 * n),
            )
        })
        .prop_map(|(n, parents, extra)| {
            let mut g = Graph::empty(n);
            for (i, p) in parents.iter().enumerate() {
                let child = i + 1;
                g = g.with_edge_added(p.index(child), child).unwrap().0;
            }
            for (a, b) in extra {
                if a != b && !g.has_edge(a, b) {
                    g = g.with_edge_added(a, b).unwrap().0;
                }
            }
            g
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn laplacian_is_psd_with_zero_row_sums(g in connected_graph()) {
        let l = g.laplacian();
        let n = g.n_nodes();
        for i in 0..n {
            let s: f64 = l.row(i).iter().sum();
            prop_assert_eq!(s, 0.0);
        }
        let e = dense_eig_oracle(&l).unwrap();
        prop_assert!(e.values.iter().all(|v| *v > -1e-10));
        // connected: exactly one zero eigenvalue
        prop_assert!(e.values[n - 2] > 1e-10);
    }

    #[test]
    fn incidence_outer_products_sum_to_laplacian(g in connected_graph()) {
        let n = g.n_nodes();
        let mut sum = Mat::zeros(n, n);
        for b in g.incidence() {
            prop_assert_eq!(b.iter().filter(|x| **x != 0.0).count(), 2);
            prop_assert_eq!(b.iter().sum::<f64>(), 0.0);
            sum = sum.add_outer(1.0, &b);
        }
        prop_assert_eq!(sum, g.laplacian());
    }

    #[test]
    fn edge_round_trip_restores_laplacian(g in connected_graph(), a in 0usize..20, b in 0usize..20) {
        let n = g.n_nodes();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let back = if g.has_edge(a, b) {
            g.with_edge_removed(a, b).unwrap().0.with_edge_added(a, b).unwrap().0
        } else {
            g.with_edge_added(a, b).unwrap().0.with_edge_removed(a, b).unwrap().0
        };
        prop_assert_eq!(back.laplacian(), g.laplacian());
    }

    #[test]
    fn visit_order_is_a_permutation_of_edges(g in connected_graph(), start in 0usize..20) {
        let start = start % g.n_nodes();
        let order = node_sequence_protocol(&g, start).unwrap();
        let mut seen: Vec<(usize, usize)> =
            order.pairs.iter().map(|&(h, t)| (h.min(t), h.max(t))).collect();
        seen.sort();
        prop_assert_eq!(seen, g.edges());
        // a former head never serves as tail
        for (pos, &(_, tail)) in order.pairs.iter().enumerate() {
            let became_head = order.pairs[..pos].iter().any(|&(h, _)| h == tail);
            prop_assert!(!became_head);
        }
        prop_assert_eq!(order.heads[0], start);
    }

    #[test]
    fn rank_two_steps_rebuild_laplacian(g in connected_graph()) {
        let l = g.laplacian();
        let n = g.n_nodes();
        let mut acc = Mat::zeros(n, n);
        for t in 0..n {
            let (tilde, bar) = rank_two_laplacian_vectors(n, t, |i, j| l[(i, j)]).unwrap();
            let step = Mat::zeros(n, n).add_outer(1.0, &tilde).add_outer(-1.0, &bar);
            for j in t + 1..n {
                for k in t + 1..n {
                    prop_assert!(step[(j, k)].abs() < 1e-15);
                }
            }
            acc = acc.add(&step);
        }
        prop_assert!(acc.sub(&l).max_abs() < 1e-12);
    }
}

#[test]
fn regular_fifty_visits_every_edge_once() {
    let g = gen_d_regular(50, 4, 2).unwrap();
    let order = node_sequence_protocol(&g, 0).unwrap();
    assert_eq!(order.pairs.len(), 100);
    let mut seen: Vec<_> = order.pairs.iter().map(|&(h, t)| (h.min(t), h.max(t))).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen, g.edges());
}
