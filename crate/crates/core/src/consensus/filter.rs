//! Polynomial graph filters as a consensus backend.
//!
//! The output `y = Σ_m h_m S^m x` needs `K` neighbor exchanges. With the
//! normalized adjacency `D^{-1/2} A D^{-1/2}` as shift, the low-frequency
//! eigenvector is `D^{1/2}𝟙/‖D^{1/2}𝟙‖` instead of `𝟙/√N`, so the signal is
//! mapped in and out with `V = (‖D^{1/2}𝟙‖/√N) D^{-1/2}`; then a response
//! of one at the low frequency and zero elsewhere yields the exact average.

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::graph::Graph;
use crate::linalg::{least_squares, singular_values, Mat};
use crate::netsim::RoundEngine;

use super::ConsensusOutcome;

/// Fits whose column-equilibrated Vandermonde condition exceeds this fail.
pub const MAX_FIT_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOperator {
    Laplacian,
    NormalizedAdjacency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    /// `h_0..h_K`.
    pub coefficients: Vec<f64>,
    pub shift: ShiftOperator,
}

impl FilterDesign {
    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// `ĥ(λ) = Σ h_m λ^m` by Horner's rule.
    pub fn response(&self, lambda: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, h| acc * lambda + h)
    }
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Polynomial of order `k` matching `desired` at `frequencies`: exact
/// interpolation when there are at most `k + 1` frequencies, least squares
/// otherwise.
pub fn fit_filter_coefficients(
    frequencies: &[f64],
    desired: &[f64],
    k: usize,
    shift: ShiftOperator,
) -> Result<FilterDesign> {
    if frequencies.is_empty() || frequencies.len() != desired.len() {
        return Err(Error::InvalidFit(format!(
            "need matching nonempty frequency and response lists, got {} and {}",
            frequencies.len(),
            desired.len()
        )));
    }
    for (i, f) in frequencies.iter().enumerate() {
        if !f.is_finite() || frequencies[i + 1..].contains(f) {
            return Err(Error::InvalidFit(format!("frequency {f} repeated or not finite")));
        }
    }
    let m = frequencies.len();
    let cols = (k + 1).min(m);
    let mut v = Mat::from_fn(m, cols, |i, j| frequencies[i].powi(j as i32));
    let mut scale = vec![1.0; cols];
    for (j, s) in scale.iter_mut().enumerate() {
        let nrm = (0..m).map(|i| v[(i, j)].powi(2)).sum::<f64>().sqrt();
        if nrm > 0.0 {
            *s = 1.0 / nrm;
            (0..m).for_each(|i| v[(i, j)] *= *s);
        }
    }
    let sv = singular_values(&v);
    let condition = sv[0] / sv[cols - 1];
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::IllConditionedFit { condition });
    }
    let x = least_squares(&v, desired);
    let mut coefficients: Vec<f64> = x.iter().zip(&scale).map(|(a, s)| a * s).collect();
    coefficients.resize(k + 1, 0.0);
    Ok(FilterDesign { coefficients, shift })
}

/// Per-round diagnostics of a filter run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterTrace {
    /// Post-transformed partial outputs `Σ_{m≤r} h_m S^m x̃` for
    /// `r = 0..=K`, per node.
    pub partial_outputs: Vec<Vec<f64>>,
    /// `max_i |(S^r x̃)_i|` for `r = 0..=K`.
    pub peak_magnitudes: Vec<f64>,
}

struct FilterState {
    cur: Vec<f64>,
    acc: Vec<f64>,
}

fn transform(g: &Graph, shift: ShiftOperator) -> Result<Vec<f64>> {
    let n = g.n_nodes();
    match shift {
        ShiftOperator::Laplacian => Ok(vec![1.0; n]),
        ShiftOperator::NormalizedAdjacency => {
            g.normalized_adjacency()?;
            let c = ((2 * g.n_edges()) as f64).sqrt() / (n as f64).sqrt();
            Ok((0..n).map(|i| c / (g.degree(i) as f64).sqrt()).collect())
        }
    }
}

/// Batched filter consensus; returns `N y_i`. When `trace` is given it
/// receives the width-0 instance's per-round diagnostics.
pub fn filter_consensus_batch(
    engine: &mut RoundEngine,
    values: Vec<Vec<f64>>,
    design: &FilterDesign,
    mut trace: Option<&mut FilterTrace>,
) -> Result<Vec<Vec<f64>>> {
    let g = engine.graph().clone();
    let n = g.n_nodes();
    let pre = transform(&g, design.shift)?;
    let inv_sqrt_deg: Vec<f64> = (0..n).map(|i| 1.0 / (g.degree(i).max(1) as f64).sqrt()).collect();
    let degree: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
    let h = &design.coefficients;
    let h0 = h.first().copied().unwrap_or(0.0);
    let mut states: Vec<FilterState> = values
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let cur: Vec<f64> = x.iter().map(|v| v * pre[i]).collect();
            let acc = cur.iter().map(|v| v * h0).collect();
            FilterState { cur, acc }
        })
        .collect();
    let record = |tr: &mut FilterTrace, states: &[FilterState]| {
        tr.peak_magnitudes
            .push(states.iter().map(|s| s.cur.first().map_or(0.0, |v| v.abs())).fold(0.0, f64::max));
        tr.partial_outputs
            .push(states.iter().enumerate().map(|(i, s)| s.acc.first().map_or(0.0, |v| v * pre[i])).collect());
    };
    if let Some(tr) = trace.as_deref_mut() {
        record(tr, &states);
    }
    for &hm in h.iter().skip(1) {
        match design.shift {
            ShiftOperator::Laplacian => engine.run_round(
                &mut states,
                |_, s| s.cur.clone(),
                |i, s, inbox| {
                    let mut next: Vec<f64> = s.cur.iter().map(|v| v * degree[i]).collect();
                    for (_, nb) in inbox.iter() {
                        next.iter_mut().zip(nb).for_each(|(a, b)| *a -= b);
                    }
                    s.acc.iter_mut().zip(&next).for_each(|(a, b)| *a += hm * b);
                    s.cur = next;
                },
            ),
            ShiftOperator::NormalizedAdjacency => engine.run_round(
                &mut states,
                |i, s| s.cur.iter().map(|v| v * inv_sqrt_deg[i]).collect::<Vec<f64>>(),
                |i, s, inbox| {
                    let mut next = vec![0.0; s.cur.len()];
                    for (_, nb) in inbox.iter() {
                        next.iter_mut().zip(nb).for_each(|(a, b)| *a += b);
                    }
                    next.iter_mut().for_each(|v| *v *= inv_sqrt_deg[i]);
                    s.acc.iter_mut().zip(&next).for_each(|(a, b)| *a += hm * b);
                    s.cur = next;
                },
            ),
        }
        if let Some(tr) = trace.as_deref_mut() {
            record(tr, &states);
        }
    }
    Ok(states
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.acc.into_iter().map(|v| v * pre[i] * n as f64).collect())
        .collect())
}

/// Single-instance filter consensus; estimates are of the network sum.
pub fn filter_consensus(g: &Graph, values: &[f64], design: &FilterDesign) -> Result<ConsensusOutcome> {
    let (outcome, _) = run_single(g, values, design, false)?;
    Ok(outcome)
}

/// Like [`filter_consensus`], also returning per-round diagnostics.
pub fn filter_consensus_trace(
    g: &Graph,
    values: &[f64],
    design: &FilterDesign,
) -> Result<(ConsensusOutcome, FilterTrace)> {
    run_single(g, values, design, true)
}

fn run_single(g: &Graph, values: &[f64], design: &FilterDesign, traced: bool) -> Result<(ConsensusOutcome, FilterTrace)> {
    if values.len() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            got: values.len(),
        });
    }
    let mut engine = RoundEngine::new(g.clone(), ExecMode::Sequential);
    let mut trace = FilterTrace::default();
    let out = filter_consensus_batch(
        &mut engine,
        values.iter().map(|&v| vec![v]).collect(),
        design,
        traced.then_some(&mut trace),
    )?;
    Ok((
        ConsensusOutcome {
            estimates: out.into_iter().map(|v| v[0]).collect(),
            metrics: *engine.metrics(),
        },
        trace,
    ))
}
