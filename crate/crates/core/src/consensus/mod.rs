//! Network consensus backends for distributed sums.
//!
//! Every backend computes, at each node, an estimate of `Σ_j y_j` from one
//! local value `y_i` per node, using only neighbor exchanges on the
//! [`RoundEngine`]. Backends are batched: each node holds a vector of
//! values and all instances share the same rounds, which is how the `N`
//! entries of an update vector travel together.

mod filter;

pub use filter::{
    filter_consensus, filter_consensus_batch, filter_consensus_trace, fit_filter_coefficients, uniform_grid,
    FilterDesign, FilterTrace, ShiftOperator, MAX_FIT_CONDITION,
};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::graph::Graph;
use crate::linalg::dense_eig_oracle;
use crate::netsim::{Payload, RoundEngine, RoundMetrics};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    PushSum,
    Average,
    FiniteTime,
    Filter,
    /// Direct global sum; used to isolate numerical error from consensus
    /// error.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusConfig {
    pub protocol: Protocol,
    /// Iterations for push-sum and average consensus.
    pub gamma: usize,
    /// Average-consensus step; `None` selects `1 / d_max`.
    pub epsilon: Option<f64>,
    /// Distinct nonzero Laplacian eigenvalues for finite-time consensus.
    pub distinct_eigenvalues: Vec<f64>,
    pub filter: Option<FilterDesign>,
}

impl ConsensusConfig {
    pub fn push_sum(gamma: usize) -> Self {
        ConsensusConfig {
            protocol: Protocol::PushSum,
            gamma,
            epsilon: None,
            distinct_eigenvalues: Vec::new(),
            filter: None,
        }
    }

    pub fn average(gamma: usize, epsilon: Option<f64>) -> Self {
        ConsensusConfig {
            protocol: Protocol::Average,
            epsilon,
            ..ConsensusConfig::push_sum(gamma)
        }
    }

    pub fn finite_time(distinct_eigenvalues: Vec<f64>) -> Self {
        ConsensusConfig {
            protocol: Protocol::FiniteTime,
            distinct_eigenvalues,
            ..ConsensusConfig::push_sum(0)
        }
    }

    pub fn filter(design: FilterDesign) -> Self {
        ConsensusConfig {
            protocol: Protocol::Filter,
            filter: Some(design),
            ..ConsensusConfig::push_sum(0)
        }
    }

    pub fn exact() -> Self {
        ConsensusConfig {
            protocol: Protocol::Exact,
            ..ConsensusConfig::push_sum(0)
        }
    }

    /// Rounds charged per consensus instance.
    pub fn rounds_per_instance(&self) -> u64 {
        match self.protocol {
            Protocol::PushSum => 2,
            _ => 1,
        }
    }

    /// Checks the configuration against the graph it will run on.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self.protocol {
            Protocol::PushSum | Protocol::Average => {
                if let Some(node) = (0..g.n_nodes()).find(|&i| g.degree(i) == 0) {
                    if g.n_nodes() > 1 {
                        return Err(Error::IsolatedNode { node });
                    }
                }
                if self.protocol == Protocol::Average {
                    if let Some(eps) = self.epsilon {
                        let bound = 2.0 / laplacian_lambda_max(g)?;
                        if !(eps > 0.0 && eps < bound) {
                            return Err(Error::StepSizeTooLarge { epsilon: eps, bound });
                        }
                    }
                }
                Ok(())
            }
            Protocol::FiniteTime => {
                let l = &self.distinct_eigenvalues;
                if l.iter().any(|&v| !(v.is_finite() && v != 0.0)) {
                    return Err(Error::InvalidConsensus("finite-time eigenvalues must be finite and nonzero".into()));
                }
                for (i, a) in l.iter().enumerate() {
                    if l[i + 1..].contains(a) {
                        return Err(Error::InvalidConsensus(format!("repeated finite-time eigenvalue {a}")));
                    }
                }
                Ok(())
            }
            Protocol::Filter => match &self.filter {
                None => Err(Error::InvalidConsensus("filter protocol needs a design".into())),
                Some(d) if d.shift == ShiftOperator::NormalizedAdjacency => g.normalized_adjacency().map(|_| ()),
                Some(_) => Ok(()),
            },
            Protocol::Exact => Ok(()),
        }
    }
}

fn laplacian_lambda_max(g: &Graph) -> Result<f64> {
    Ok(dense_eig_oracle(&g.laplacian())?.values.first().copied().unwrap_or(0.0))
}

/// Distinct nonzero values of a spectrum, descending. Values within
/// `rel_gap` (relative to the largest magnitude) of zero or of each other
/// are merged.
pub fn distinct_nonzero(values: &[f64], rel_gap: f64) -> Vec<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.abs() > rel_gap * scale).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<f64> = Vec::new();
    for v in sorted {
        match out.last() {
            Some(&last) if (last - v).abs() <= rel_gap * last.abs().max(v.abs()) => {}
            _ => out.push(v),
        }
    }
    out
}

/// Output of a standalone consensus run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    pub estimates: Vec<f64>,
    pub metrics: RoundMetrics,
}

struct PushSumState {
    s: Vec<f64>,
    w: f64,
}

struct Share(Vec<f64>, f64);

impl Payload for Share {
    fn scalar_count(&self) -> usize {
        self.0.len() + 1
    }
}

fn push_sum_rounds(engine: &mut RoundEngine, values: Vec<Vec<f64>>, gamma: usize) -> Vec<PushSumState> {
    let n = engine.n_nodes();
    let mut states: Vec<PushSumState> = values.into_iter().map(|s| PushSumState { s, w: 1.0 }).collect();
    let degree: Vec<f64> = (0..n).map(|i| engine.graph().degree(i) as f64).collect();
    for _ in 0..gamma {
        engine.run_round(
            &mut states,
            |i, st| {
                let share = 1.0 / degree[i];
                Share(st.s.iter().map(|v| v * share).collect(), st.w * share)
            },
            |_, st, inbox| {
                st.s.iter_mut().for_each(|v| *v = 0.0);
                st.w = 0.0;
                for (_, Share(s, w)) in inbox.iter() {
                    st.s.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                    st.w += w;
                }
            },
        );
    }
    states
}

/// Push-sum with shares `1/d_i` to each neighbor; returns `N s_i / w_i`.
pub fn push_sum_batch(engine: &mut RoundEngine, values: Vec<Vec<f64>>, gamma: usize) -> Result<Vec<Vec<f64>>> {
    let n = engine.n_nodes() as f64;
    push_sum_rounds(engine, values, gamma)
        .into_iter()
        .enumerate()
        .map(|(node, st)| {
            if st.w == 0.0 {
                return Err(Error::ZeroWeight { node });
            }
            let f = n / st.w;
            Ok(st.s.into_iter().map(|v| v * f).collect())
        })
        .collect()
}

/// Laplacian iterations `s ← s − ε_γ L s`, one round per step; returns
/// `N s_i`.
fn laplacian_iterations(engine: &mut RoundEngine, values: Vec<Vec<f64>>, steps: &[f64]) -> Vec<Vec<f64>> {
    let mut states = values;
    for &eps in steps {
        engine.run_round(
            &mut states,
            |_, s| s.clone(),
            |_, s, inbox| {
                let own = s.clone();
                for (_, nb) in inbox.iter() {
                    for ((v, o), x) in s.iter_mut().zip(&own).zip(nb) {
                        *v -= eps * (o - x);
                    }
                }
            },
        );
    }
    let n = engine.n_nodes() as f64;
    states
        .into_iter()
        .map(|s| s.into_iter().map(|v| v * n).collect())
        .collect()
}

/// Average consensus with a constant step (default `1 / d_max`).
pub fn average_consensus_batch(
    engine: &mut RoundEngine,
    values: Vec<Vec<f64>>,
    gamma: usize,
    epsilon: Option<f64>,
) -> Vec<Vec<f64>> {
    let eps = epsilon.unwrap_or_else(|| 1.0 / engine.graph().max_degree().max(1) as f64);
    laplacian_iterations(engine, values, &vec![eps; gamma])
}

/// Finite-time consensus: one step `1/λ*` per distinct nonzero eigenvalue,
/// applied in descending order.
pub fn ft_average_consensus_batch(
    engine: &mut RoundEngine,
    values: Vec<Vec<f64>>,
    distinct_eigenvalues: &[f64],
) -> Vec<Vec<f64>> {
    let mut eig = distinct_eigenvalues.to_vec();
    eig.sort_by(|a, b| b.total_cmp(a));
    let steps: Vec<f64> = eig.iter().map(|l| 1.0 / l).collect();
    laplacian_iterations(engine, values, &steps)
}

fn standalone(
    g: &Graph,
    values: &[f64],
    run: impl FnOnce(&mut RoundEngine, Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>>,
) -> Result<ConsensusOutcome> {
    if values.len() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: values.len(),
        });
    }
    let mut engine = RoundEngine::new(g.clone(), ExecMode::Sequential);
    let out = run(&mut engine, values.iter().map(|&v| vec![v]).collect())?;
    Ok(ConsensusOutcome {
        estimates: out.into_iter().map(|v| v[0]).collect(),
        metrics: *engine.metrics(),
    })
}

/// Single-instance push-sum on `g`.
pub fn push_sum(g: &Graph, values: &[f64], gamma: usize) -> Result<ConsensusOutcome> {
    ConsensusConfig::push_sum(gamma).validate(g)?;
    standalone(g, values, |e, v| push_sum_batch(e, v, gamma))
}

/// Single-instance average consensus on `g`.
pub fn average_consensus(g: &Graph, values: &[f64], gamma: usize, epsilon: Option<f64>) -> Result<ConsensusOutcome> {
    ConsensusConfig::average(gamma, epsilon).validate(g)?;
    standalone(g, values, |e, v| Ok(average_consensus_batch(e, v, gamma, epsilon)))
}

/// Single-instance finite-time consensus on `g`.
pub fn ft_average_consensus(g: &Graph, values: &[f64], distinct_eigenvalues: &[f64]) -> Result<ConsensusOutcome> {
    ConsensusConfig::finite_time(distinct_eigenvalues.to_vec()).validate(g)?;
    standalone(g, values, |e, v| Ok(ft_average_consensus_batch(e, v, distinct_eigenvalues)))
}

/// Network sum of per-node summands, one consensus instance per column.
///
/// `summands[i]` holds node `i`'s contribution to every instance. Complex
/// instances run as paired real instances and are charged as one.
pub fn nc_weighted_sum<T: Scalar>(
    engine: &mut RoundEngine,
    summands: &[Vec<T>],
    config: &ConsensusConfig,
) -> Result<Vec<Vec<T>>> {
    let n = engine.n_nodes();
    if summands.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: summands.len(),
        });
    }
    let width = summands.first().map_or(0, Vec::len);
    let metrics = engine.metrics_mut();
    metrics.consensus_rounds += width as u64 * config.rounds_per_instance();
    metrics.nc_invocations += width as u64;

    if config.protocol == Protocol::Exact {
        let mut total = vec![T::zero(); width];
        for row in summands {
            total.iter_mut().zip(row).for_each(|(a, b)| *a += *b);
        }
        return Ok(vec![total; n]);
    }

    let real: Vec<Vec<f64>> = summands
        .iter()
        .map(|row| {
            if T::IS_COMPLEX {
                row.iter().flat_map(|v| [v.re(), v.im()]).collect()
            } else {
                row.iter().map(|v| v.re()).collect()
            }
        })
        .collect();
    let out = match config.protocol {
        Protocol::PushSum => push_sum_batch(engine, real, config.gamma)?,
        Protocol::Average => average_consensus_batch(engine, real, config.gamma, config.epsilon),
        Protocol::FiniteTime => ft_average_consensus_batch(engine, real, &config.distinct_eigenvalues),
        Protocol::Filter => {
            let design = config
                .filter
                .as_ref()
                .ok_or_else(|| Error::InvalidConsensus("filter protocol needs a design".into()))?;
            filter_consensus_batch(engine, real, design, None)?
        }
        Protocol::Exact => unreachable!("handled above"),
    };
    Ok(out
        .into_iter()
        .map(|row| {
            if T::IS_COMPLEX {
                row.chunks(2).map(|p| T::from_parts(p[0], p[1])).collect()
            } else {
                row.into_iter().map(T::from_real).collect()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ten_node_benchmark;
    use num_complex::Complex64;

    #[test]
    fn push_sum_on_path() {
        let o = push_sum(&Graph::path(3), &[0.0, 3.0, 6.0], 100).unwrap();
        assert!(o.estimates.iter().all(|e| (e - 9.0).abs() < 1e-8));
        assert_eq!(o.metrics.wall_rounds, 100);
    }

    #[test]
    fn push_sum_conserves_sums_and_weights() {
        let g = crate::graph::gen_d_regular(12, 3, 4).unwrap();
        let y: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 - 3.5]).collect();
        for gamma in [1, 2, 9, 30] {
            let mut e = RoundEngine::new(g.clone(), ExecMode::Sequential);
            let st = push_sum_rounds(&mut e, y.clone(), gamma);
            let s: f64 = st.iter().map(|x| x.s[0]).sum();
            let w: f64 = st.iter().map(|x| x.w).sum();
            assert!((s - 12.0 * 5.5 - 12.0 * -3.5).abs() < 1e-12);
            assert!((w - 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn push_sum_constant_input_is_exact_at_any_gamma() {
        let g = Graph::cycle(5);
        for gamma in [0, 1, 7] {
            let o = push_sum(&g, &[2.5; 5], gamma).unwrap();
            assert!(o.estimates.iter().all(|e| (e - 12.5).abs() < 1e-12));
        }
    }

    #[test]
    fn average_consensus_complete_graph_one_step() {
        let o = average_consensus(&Graph::complete(4), &[1.0, 2.0, 3.0, 6.0], 1, Some(0.25)).unwrap();
        assert!(o.estimates.iter().all(|e| (e - 12.0).abs() < 1e-12));
    }

    #[test]
    fn average_consensus_default_step_on_path() {
        let o = average_consensus(&Graph::path(3), &[0.0, 3.0, 6.0], 200, None).unwrap();
        assert!(o.estimates.iter().all(|e| (e - 9.0).abs() < 1e-6));
    }

    #[test]
    fn step_size_bound_enforced() {
        let e = average_consensus(&Graph::path(3), &[0.0; 3], 10, Some(0.7));
        assert!(matches!(e, Err(Error::StepSizeTooLarge { .. })));
    }

    #[test]
    fn finite_time_cases() {
        let o = ft_average_consensus(&Graph::complete(4), &[1.0, 0.0, 0.0, 3.0], &[4.0]).unwrap();
        assert!(o.estimates.iter().all(|e| (e - 4.0).abs() < 1e-12));
        assert_eq!(o.metrics.wall_rounds, 1);
        let o = ft_average_consensus(&Graph::path(3), &[0.0, 3.0, 6.0], &[1.0, 3.0]).unwrap();
        assert!(o.estimates.iter().all(|e| (e - 9.0).abs() < 1e-12));
        assert_eq!(o.metrics.wall_rounds, 2);
    }

    #[test]
    fn finite_time_on_benchmark_graph() {
        let g = ten_node_benchmark();
        let eig = dense_eig_oracle(&g.laplacian()).unwrap().values;
        let list = distinct_nonzero(&eig, 1e-6);
        assert_eq!(list.len(), 5);
        let y: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let total: f64 = y.iter().sum();
        let o = ft_average_consensus(&g, &y, &list).unwrap();
        assert!(o.estimates.iter().all(|e| (e - total).abs() < 1e-9));
        assert_eq!(o.metrics.wall_rounds, 5);
    }

    #[test]
    fn exact_backend_and_complex_pairs() {
        let g = Graph::cycle(4);
        let mut eng = RoundEngine::new(g.clone(), ExecMode::Sequential);
        let mut s = vec![vec![0.0]; 4];
        s[2][0] = 1.0;
        let out = nc_weighted_sum(&mut eng, &s, &ConsensusConfig::exact()).unwrap();
        assert!(out.iter().all(|r| r[0] == 1.0));
        assert_eq!(eng.metrics().consensus_rounds, 1);

        let z: Vec<Vec<Complex64>> = (0..5).map(|i| vec![Complex64::new(i as f64, 1.0)]).collect();
        let mut eng = RoundEngine::new(Graph::cycle(5), ExecMode::Sequential);
        let out = nc_weighted_sum(&mut eng, &z, &ConsensusConfig::push_sum(200)).unwrap();
        for r in out {
            assert!((r[0] - Complex64::new(10.0, 5.0)).norm() < 1e-9);
        }
        assert_eq!(eng.metrics().consensus_rounds, 2);
        assert_eq!(eng.metrics().nc_invocations, 1);
    }

    #[test]
    fn distinct_merges_close_values() {
        assert_eq!(distinct_nonzero(&[3.0, 3.0 + 1e-9, 1e-12, 0.0, 1.0], 1e-6), vec![3.0 + 1e-9, 1.0]);
    }
}
