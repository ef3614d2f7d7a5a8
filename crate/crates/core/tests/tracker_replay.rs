use eigtrack::consensus::ConsensusConfig;
use eigtrack::graph::{gen_d_regular, rank_two_laplacian_vectors, Graph};
use eigtrack::linalg::{dense_eig_oracle, Mat};
use eigtrack::tracker::TrackerNetwork;
use eigtrack::{ExecMode, Scalar};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn compare<T: Scalar>(net: &TrackerNetwork<T>, r: &Mat<T>, eig_tol: f64) -> Result<(), String> {
    let (lam, u) = net.gather_global();
    let oracle = dense_eig_oracle(r).map_err(|e| e.to_string())?;
    let scale = r.max_abs().max(1.0);
    for (k, (a, b)) in lam.iter().zip(&oracle.values).enumerate() {
        if (a - b).abs() > eig_tol * scale {
            return Err(format!("eigenvalue {k}: {a} vs {b}"));
        }
    }
    let orth = u.orthonormality_residual();
    if orth > 1e-8 {
        return Err(format!("orthonormality residual {orth}"));
    }
    // columns with a clear gap are unique up to phase
    let n = lam.len();
    for k in 0..n {
        let gap = (0..n)
            .filter(|&j| j != k)
            .map(|j| (oracle.values[j] - oracle.values[k]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < 1e-3 * scale {
            continue;
        }
        let overlap: T = (0..n).map(|i| u[(i, k)].conj() * oracle.vectors[(i, k)]).sum();
        if (overlap.abs() - 1.0).abs() > 1e-6 {
            return Err(format!("column {k} overlap {}", overlap.abs()));
        }
    }
    Ok(())
}

fn random_vec<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n)
        .map(|_| T::from_parts(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn small_real_replay_matches_oracle_each_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut net = TrackerNetwork::<f64>::new(Graph::cycle(4), ConsensusConfig::exact(), ExecMode::Sequential).unwrap();
    let mut r = Mat::zeros(4, 4);
    for _ in 0..6 {
        let x: Vec<f64> = random_vec(&mut rng, 4);
        r = r.add_outer(1.0, &x);
        net.step(&x, 1.0).unwrap();
        compare(&net, &r, 1e-8).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mixed_sign_streams_match_oracle(n in 2usize..=10, t_max in 1usize..=30, seed in any::<u64>(), complex in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = if n >= 3 { Graph::cycle(n) } else { Graph::path(n) };
        if complex {
            let mut net = TrackerNetwork::<Complex64>::new(g, ConsensusConfig::exact(), ExecMode::Parallel).unwrap();
            let mut r = Mat::zeros(n, n);
            let mut energy = 0.0;
            for t in 0..t_max {
                let rho = if t % 3 == 2 { -0.5 } else { 1.0 };
                let x: Vec<Complex64> = random_vec(&mut rng, n);
                r = r.add_outer(rho, &x);
                energy += rho * x.iter().map(|v| v.norm_sqr()).sum::<f64>();
                net.step(&x, rho).unwrap();
                compare(&net, &r, 1e-8).map_err(TestCaseError::fail)?;
            }
            let tr: f64 = net.eigenvalues(0).iter().sum();
            prop_assert!((tr - energy).abs() <= 1e-8 * energy.abs().max(1.0));
        } else {
            let mut net = TrackerNetwork::<f64>::new(g, ConsensusConfig::exact(), ExecMode::Sequential).unwrap();
            let mut r = Mat::zeros(n, n);
            let mut energy = 0.0;
            for t in 0..t_max {
                let rho = if t % 3 == 2 { -0.5 } else { 1.0 };
                let x: Vec<f64> = random_vec(&mut rng, n);
                r = r.add_outer(rho, &x);
                energy += rho * x.iter().map(|v| v * v).sum::<f64>();
                net.step(&x, rho).unwrap();
                compare(&net, &r, 1e-8).map_err(TestCaseError::fail)?;
            }
            let tr: f64 = net.eigenvalues(0).iter().sum();
            prop_assert!((tr - energy).abs() <= 1e-8 * energy.abs().max(1.0));
        }
    }
}

#[test]
fn exact_backend_keeps_node_copies_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut net = TrackerNetwork::<f64>::new(Graph::complete(6), ConsensusConfig::exact(), ExecMode::Parallel).unwrap();
    for _ in 0..20 {
        let x: Vec<f64> = random_vec(&mut rng, 6);
        net.step(&x, 1.0).unwrap();
        assert!(net.node_disagreement() <= 1e-10);
    }
}

#[test]
fn push_sum_nodes_stay_close() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = gen_d_regular(8, 3, 1).unwrap();
    let mut net = TrackerNetwork::<f64>::new(g, ConsensusConfig::push_sum(100), ExecMode::Parallel).unwrap();
    for _ in 0..10 {
        let x: Vec<f64> = random_vec(&mut rng, 8);
        net.step(&x, 1.0).unwrap();
    }
    let top = net.eigenvalues(0)[0];
    assert!(net.node_disagreement() < 1e-4 * top, "spread {}", net.node_disagreement());
}

#[test]
fn add_then_remove_restores_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net = TrackerNetwork::<f64>::new(Graph::cycle(6), ConsensusConfig::exact(), ExecMode::Sequential).unwrap();
    for _ in 0..8 {
        let x: Vec<f64> = random_vec(&mut rng, 6);
        net.step(&x, 1.0).unwrap();
    }
    let before = net.eigenvalues(0).to_vec();
    let y: Vec<f64> = random_vec(&mut rng, 6);
    net.rank_two_step(&y, &y).unwrap();
    for (a, b) in net.eigenvalues(0).iter().zip(&before) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn sliding_window_matches_windowed_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 6;
    let beta = 10;
    let samples: Vec<Vec<f64>> = (0..40).map(|_| random_vec(&mut rng, n)).collect();
    let mut net = TrackerNetwork::<f64>::new(Graph::cycle(n), ConsensusConfig::exact(), ExecMode::Sequential).unwrap();
    for (t, x) in samples.iter().enumerate() {
        if t < beta {
            net.step(x, 1.0).unwrap();
        } else {
            net.rank_two_step(x, &samples[t - beta]).unwrap();
        }
        let lo = (t + 1).saturating_sub(beta);
        let mut r = Mat::zeros(n, n);
        for s in &samples[lo..=t] {
            r = r.add_outer(1.0, s);
        }
        compare(&net, &r, 1e-8).unwrap();
    }
}

#[test]
fn rank_two_laplacian_learning_recovers_spectrum() {
    let g = gen_d_regular(12, 4, 6).unwrap();
    let l = g.laplacian();
    let mut net = TrackerNetwork::<f64>::new(g.clone(), ConsensusConfig::exact(), ExecMode::Sequential).unwrap();
    for t in 0..12 {
        let (tilde, bar) = rank_two_laplacian_vectors(12, t, |i, j| l[(i, j)]).unwrap();
        net.rank_two_step(&tilde, &bar).unwrap();
    }
    compare(&net, &l, 1e-8).unwrap();
}

#[test]
fn multi_entry_nodes_track_the_full_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let owners = vec![0, 0, 1, 1, 2, 2];
    let mut net =
        TrackerNetwork::<Complex64>::with_owners(Graph::complete(3), owners, ConsensusConfig::exact(), ExecMode::Parallel)
            .unwrap();
    let mut r = Mat::zeros(6, 6);
    for _ in 0..9 {
        let x: Vec<Complex64> = random_vec(&mut rng, 6);
        r = r.add_outer(1.0, &x);
        net.step(&x, 1.0).unwrap();
    }
    compare(&net, &r, 1e-8).unwrap();
}

#[test]
fn execution_modes_are_bit_identical() {
    let run = |mode| {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = gen_d_regular(10, 3, 2).unwrap();
        let mut net = TrackerNetwork::<f64>::new(g, ConsensusConfig::push_sum(30), mode).unwrap();
        for _ in 0..8 {
            let x: Vec<f64> = random_vec(&mut rng, 10);
            net.ewma_step(&x, 0.9).unwrap();
        }
        (net.gather_global(), net.metrics())
    };
    let (a, ma) = run(ExecMode::Sequential);
    let (b, mb) = run(ExecMode::Parallel);
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(ma, mb);
}

#[test]
fn more_consensus_iterations_do_not_hurt() {
    let err = |gamma| {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = gen_d_regular(10, 4, 3).unwrap();
        let mut net = TrackerNetwork::<f64>::new(g, ConsensusConfig::push_sum(gamma), ExecMode::Parallel).unwrap();
        let mut r = Mat::zeros(10, 10);
        for t in 1..=30 {
            let x: Vec<f64> = random_vec(&mut rng, 10);
            let alpha = (t as f64 - 1.0) / t as f64;
            r = r.scaled(alpha).add_outer(1.0 - alpha, &x);
            net.ewma_step(&x, alpha).unwrap();
        }
        let truth = dense_eig_oracle(&r).unwrap().values[0];
        (net.eigenvalues(0)[0] - truth).abs() / truth
    };
    assert!(err(100) <= err(20));
}
