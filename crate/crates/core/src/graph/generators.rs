//! Seeded random topologies. Both generators redraw with `seed + 1`,
//! `seed + 2`, … until the result is connected.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

pub const MAX_CONNECTIVITY_RETRIES: usize = 200;
const MAX_PAIRING_ATTEMPTS: usize = 10_000;

fn retry_until_connected(seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> Option<Graph>) -> Result<Graph> {
    for attempt in 0..MAX_CONNECTIVITY_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        if let Some(g) = draw(&mut rng) {
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::ConnectivityRetryExhausted {
        retries: MAX_CONNECTIVITY_RETRIES,
    })
}

/// Random connected `d`-regular graph (configuration model with rejection
/// of loops and multi-edges).
pub fn gen_d_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n == 0 || d >= n || !(n * d).is_multiple_of(2) || (d == 0 && n > 1) {
        return Err(Error::InfeasibleParameters(format!(
            "no connected {d}-regular graph on {n} nodes"
        )));
    }
    retry_until_connected(seed, |rng| {
        let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
        'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
            stubs.shuffle(rng);
            let mut g = Graph::empty(n);
            for p in stubs.chunks(2) {
                let (i, j) = (p[0], p[1]);
                if i == j || g.has_edge(i, j) {
                    continue 'attempt;
                }
                g.adj[i].insert(j);
                g.adj[j].insert(i);
                g.n_edges += 1;
            }
            return Some(g);
        }
        None
    })
}

/// Ring lattice with `k` neighbors per node, each edge rewired with
/// probability `p` to a uniformly chosen new endpoint.
pub fn gen_small_world(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph> {
    if !k.is_multiple_of(2) || k == 0 || k >= n || !(0.0..=1.0).contains(&p) {
        return Err(Error::InfeasibleParameters(format!(
            "small world needs even 0 < k < n and p in [0, 1]; got n={n}, k={k}, p={p}"
        )));
    }
    retry_until_connected(seed, |rng| {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for s in 1..=k / 2 {
                let j = (i + s) % n;
                g.adj[i].insert(j);
                g.adj[j].insert(i);
            }
        }
        g.n_edges = n * k / 2;
        for s in 1..=k / 2 {
            for i in 0..n {
                let j = (i + s) % n;
                if !rng.random_bool(p) || !g.has_edge(i, j) {
                    continue;
                }
                if g.degree(i) >= n - 1 {
                    continue;
                }
                let target = loop {
                    let u = rng.random_range(0..n);
                    if u != i && !g.has_edge(i, u) {
                        break u;
                    }
                };
                g.adj[i].remove(&j);
                g.adj[j].remove(&i);
                g.adj[i].insert(target);
                g.adj[target].insert(i);
            }
        }
        Some(g)
    })
}
