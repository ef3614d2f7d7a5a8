//! Low-pass graph filter designs for average consensus.
//!
//! Every design has response one at the low graph frequency and is pushed
//! to zero elsewhere. Graph-dependent designs target the actual nonzero
//! frequencies (exactly when at most `K` of them are distinct, in the least
//! squares sense otherwise); graph-independent designs target a continuous
//! band whose edge is either the network size or `λ_max(L)`.

use std::io::Write;

use crate::consensus::{distinct_nonzero, filter_consensus_trace, fit_filter_coefficients, uniform_grid, FilterDesign, ShiftOperator, MAX_FIT_CONDITION};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{dense_eig_oracle, least_squares, singular_values, Mat};

/// Relative gap below which two frequencies are treated as one.
pub const FREQUENCY_MERGE_TOL: f64 = 1e-8;

/// Band samples for the graph-independent designs.
pub const BAND_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// Normalized-adjacency shift, actual frequencies.
    GdnA,
    /// Laplacian shift, actual frequencies.
    Gdl,
    /// Laplacian shift, band `(0, N]`.
    Gidn,
    /// Laplacian shift, band `(0, λ_max]`.
    Gidm,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [FilterKind::GdnA, FilterKind::Gdl, FilterKind::Gidn, FilterKind::Gidm];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::GdnA => "gdna",
            FilterKind::Gdl => "gdl",
            FilterKind::Gidn => "gidn",
            FilterKind::Gidm => "gidm",
        }
    }
}

/// Learned (or exact) spectra of `L` and of `I − D^{-1/2} A D^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFrequencies {
    pub laplacian: Vec<f64>,
    pub normalized_laplacian: Vec<f64>,
}

impl GraphFrequencies {
    pub fn exact(g: &Graph) -> Result<Self> {
        Ok(GraphFrequencies {
            laplacian: dense_eig_oracle(&g.laplacian())?.values,
            normalized_laplacian: dense_eig_oracle(&g.sym_normalized_laplacian()?)?.values,
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Order-`k` polynomial with `h(anchor) = 1` and minimal `Σ h(p)²` over
/// `points`; interpolating when `points.len() ≤ k`.
pub fn fit_lowpass(anchor: f64, points: &[f64], k: usize, shift: ShiftOperator) -> Result<FilterDesign> {
    if points.contains(&anchor) {
        return Err(Error::InvalidFit(format!("stopband point {anchor} equals the passband point")));
    }
    if points.len() <= k {
        let mut freqs = vec![anchor];
        freqs.extend_from_slice(points);
        let mut desired = vec![0.0; freqs.len()];
        desired[0] = 1.0;
        return fit_filter_coefficients(&freqs, &desired, k, shift);
    }
    // h(λ) = 1 + Σ_{m≥1} g_m (λ − a)^m, least squares on the stopband
    let mut v = Mat::from_fn(points.len(), k, |i, j| (points[i] - anchor).powi(j as i32 + 1));
    let mut scale = vec![1.0; k];
    for (j, s) in scale.iter_mut().enumerate() {
        let nrm = (0..points.len()).map(|i| v[(i, j)].powi(2)).sum::<f64>().sqrt();
        *s = 1.0 / nrm;
        (0..points.len()).for_each(|i| v[(i, j)] *= *s);
    }
    let sv = singular_values(&v);
    let condition = sv[0] / sv[k - 1];
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::IllConditionedFit { condition });
    }
    let g = least_squares(&v, &vec![-1.0; points.len()]);
    let mut shifted = vec![1.0];
    shifted.extend(g.iter().zip(&scale).map(|(x, s)| x * s));
    let coefficients = (0..=k)
        .map(|i| {
            (i..=k)
                .map(|m| shifted[m] * binomial(m, i) * (-anchor).powi((m - i) as i32))
                .sum()
        })
        .collect();
    Ok(FilterDesign { coefficients, shift })
}

/// Design of the given kind for an `n_nodes` graph with spectra `freqs`.
pub fn design_filter(kind: FilterKind, freqs: &GraphFrequencies, n_nodes: usize, k: usize) -> Result<FilterDesign> {
    if k == 0 {
        return Err(Error::InvalidFit("filter order must be positive".into()));
    }
    let lap = &freqs.laplacian;
    let lambda_max = lap.iter().copied().fold(0.0, f64::max);
    match kind {
        FilterKind::Gdl => fit_lowpass(0.0, &distinct_nonzero(lap, FREQUENCY_MERGE_TOL), k, ShiftOperator::Laplacian),
        FilterKind::GdnA => {
            // adjacency frequency 1 − μ; the low frequency sits at 1
            let points: Vec<f64> = distinct_nonzero(&freqs.normalized_laplacian, FREQUENCY_MERGE_TOL)
                .into_iter()
                .map(|mu| 1.0 - mu)
                .collect();
            fit_lowpass(1.0, &points, k, ShiftOperator::NormalizedAdjacency)
        }
        FilterKind::Gidn | FilterKind::Gidm => {
            let hi = if kind == FilterKind::Gidn { n_nodes as f64 } else { lambda_max };
            let band = uniform_grid(hi / BAND_POINTS as f64, hi, BAND_POINTS);
            fit_lowpass(0.0, &band, k, ShiftOperator::Laplacian)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult {
    pub kind: FilterKind,
    pub design: FilterDesign,
    /// `‖y_r − x̄𝟙‖² / ‖x̄𝟙‖²` after each filter tap `r = 0..=K`.
    pub eta: Vec<f64>,
    /// Largest intermediate-signal magnitude after each shift.
    pub peak_magnitudes: Vec<f64>,
}

impl FilterResult {
    pub fn final_eta(&self) -> f64 {
        self.eta.last().copied().unwrap_or(f64::NAN)
    }

    pub fn peak(&self) -> f64 {
        self.peak_magnitudes.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs every design on signal `x` over `g`.
pub fn run_filter_design(g: &Graph, freqs: &GraphFrequencies, k: usize, x: &[f64]) -> Result<Vec<FilterResult>> {
    let n = g.n_nodes();
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom = mean * mean * n as f64;
    FilterKind::ALL
        .iter()
        .map(|&kind| {
            let design = design_filter(kind, freqs, n, k)?;
            let (_, trace) = filter_consensus_trace(g, x, &design)?;
            let eta = trace
                .partial_outputs
                .iter()
                .map(|y| y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / denom)
                .collect();
            Ok(FilterResult {
                kind,
                design,
                eta,
                peak_magnitudes: trace.peak_magnitudes,
            })
        })
        .collect()
}

/// Writes `filter,iteration,eta,peak_magnitude`.
pub fn write_filter_csv(mut w: impl Write, results: &[FilterResult]) -> std::io::Result<()> {
    writeln!(w, "filter,iteration,eta,peak_magnitude")?;
    for r in results {
        for (i, (e, p)) in r.eta.iter().zip(&r.peak_magnitudes).enumerate() {
            writeln!(w, "{},{},{:e},{:e}", r.kind.name(), i, e, p)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_first_order_is_exact() {
        let g = Graph::complete(3);
        let f = GraphFrequencies::exact(&g).unwrap();
        let res = run_filter_design(&g, &f, 1, &[1.0, 4.0, -2.0]).unwrap();
        let gdl = res.iter().find(|r| r.kind == FilterKind::Gdl).unwrap();
        assert!(gdl.final_eta() < 1e-10);
    }

    #[test]
    fn regular_graph_gdna_is_polynomial_in_laplacian() {
        // D = dI, so the adjacency filter at (1 − λ/d) matches a Laplacian one
        let g = Graph::cycle(7);
        let f = GraphFrequencies::exact(&g).unwrap();
        let a = design_filter(FilterKind::GdnA, &f, 7, 3).unwrap();
        let l = design_filter(FilterKind::Gdl, &f, 7, 3).unwrap();
        for lam in [0.0, 0.7, 1.9, 3.3] {
            assert!((a.response(1.0 - lam / 2.0) - l.response(lam)).abs() < 1e-9);
        }
    }

    #[test]
    fn shifted_basis_expansion_is_exact() {
        let d = fit_lowpass(1.0, &[0.5, -0.5, 0.2, 0.9], 2, ShiftOperator::NormalizedAdjacency).unwrap();
        assert!((d.response(1.0) - 1.0).abs() < 1e-12);
    }
}
