//! Moving sample covariance spectrum tracking.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dense_eig_oracle, Mat};
use crate::netsim::{RngStream, RoundMetrics, StreamPurpose};
use crate::scalar::Scalar;
use crate::tracker::TrackerNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceMode {
    /// `R(t) = α R(t−1) + (1 − α) x xᴴ`.
    Ewma(f64),
    /// Sum of the last `β` outer products.
    SlidingWindow(usize),
    /// Running mean, `α_t = (t − 1)/t`.
    FiniteSample,
}

/// Zero-mean Gaussian samples with covariance `Q diag(λ) Qᴴ`, `Q` a seeded
/// random unitary (orthogonal for real scalars).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    pub eigenvalues: Vec<f64>,
}

impl SignalModel {
    /// Geometrically decaying spectrum `λ_k = ratio^k`.
    pub fn geometric(n: usize, ratio: f64) -> Self {
        SignalModel {
            eigenvalues: (0..n).map(|k| ratio.powi(k as i32)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceScenario {
    pub mode: CovarianceMode,
    pub steps: usize,
    pub signal: SignalModel,
    pub seed: u64,
}

impl CovarianceScenario {
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            CovarianceMode::Ewma(a) if !(a > 0.0 && a < 1.0) => {
                return Err(Error::InvalidScenario(format!("forgetting factor {a} outside (0, 1)")))
            }
            CovarianceMode::SlidingWindow(0) => return Err(Error::InvalidScenario("window length must be positive".into())),
            _ => {}
        }
        if self.signal.eigenvalues.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidScenario("true eigenvalues must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Expected `R(t)` eigenvalue scale relative to the true covariance.
    fn reference_scale(&self, t: usize) -> f64 {
        match self.mode {
            CovarianceMode::Ewma(a) => 1.0 - a.powi(t as i32),
            CovarianceMode::SlidingWindow(b) => t.min(b) as f64,
            CovarianceMode::FiniteSample => 1.0,
        }
    }
}

/// Seeded sample source for a [`SignalModel`].
#[derive(Debug, Clone)]
pub struct SampleSource<T> {
    /// `Q diag(√λ)`.
    factor: Mat<T>,
    rng: RngStream,
}

impl<T: Scalar> SampleSource<T> {
    pub fn new(model: &SignalModel, rng: RngStream) -> Result<Self> {
        let n = model.dim();
        let mut g = rng.stream(StreamPurpose::Geometry, 0, 0);
        let a: Mat<T> = Mat::from_fn(n, n, |_, _| gaussian(&mut g));
        let herm = a.add(&a.adjoint());
        let q = dense_eig_oracle(&herm)?.vectors;
        let factor = Mat::from_fn(n, n, |i, j| q[(i, j)].scale(model.eigenvalues[j].sqrt()));
        Ok(SampleSource { factor, rng })
    }

    /// The true covariance `Q diag(λ) Qᴴ`.
    pub fn covariance(&self) -> Mat<T> {
        self.factor.matmul(&self.factor.adjoint())
    }

    /// Sample at time `t`; reproducible per `(seed, t)`.
    pub fn sample(&self, t: usize) -> Vec<T> {
        let mut g = self.rng.stream(StreamPurpose::Signal, 0, t as u64);
        let w: Vec<T> = (0..self.factor.cols()).map(|_| gaussian(&mut g)).collect();
        self.factor.matvec(&w)
    }
}

/// Unit-variance Gaussian scalar (circular for complex).
pub(crate) fn gaussian<T: Scalar>(rng: &mut impl Rng) -> T {
    let re: f64 = rng.sample(StandardNormal);
    if T::IS_COMPLEX {
        let im: f64 = rng.sample(StandardNormal);
        T::from_parts(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
    } else {
        T::from_real(re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceRow {
    pub t: usize,
    pub k: usize,
    /// Node 0's estimate.
    pub lambda_est: f64,
    pub lambda_central: f64,
    pub lambda_true: f64,
    /// Node-averaged error of the distributed estimate against the truth.
    pub eta: f64,
    /// Centralized estimate against the truth.
    pub eta_tilde: f64,
    /// Node-averaged error of the distributed estimate against the
    /// centralized replay.
    pub eta_central: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub rows: Vec<CovarianceRow>,
    pub metrics: RoundMetrics,
}

impl CovarianceReport {
    /// Rows of the last step.
    pub fn last(&self) -> &[CovarianceRow] {
        let t = self.rows.last().map_or(0, |r| r.t);
        let start = self.rows.iter().position(|r| r.t == t).unwrap_or(0);
        &self.rows[start..]
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,k,lambda_est,lambda_central,lambda_true,eta,eta_tilde,eta_central")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.t, r.k, r.lambda_est, r.lambda_central, r.lambda_true, r.eta, r.eta_tilde, r.eta_central
            )?;
        }
        Ok(())
    }
}

/// Relative error with the denominator floored at `floor`, so eigenvalues
/// that are zero in exact arithmetic do not divide by rounding noise.
fn rel(a: f64, reference: f64, floor: f64) -> f64 {
    (a - reference).abs() / reference.abs().max(floor)
}

/// Streams `scenario.steps` samples through the tracker while replaying the
/// same recursion centrally.
pub fn run_covariance<T: Scalar>(scenario: &CovarianceScenario, net: &mut TrackerNetwork<T>) -> Result<CovarianceReport> {
    scenario.validate()?;
    let n = scenario.signal.dim();
    if net.n_entries() != n {
        return Err(Error::DimensionMismatch {
            expected: net.n_entries(),
            got: n,
        });
    }
    let source = SampleSource::<T>::new(&scenario.signal, RngStream::new(scenario.seed))?;
    let mut truth = scenario.signal.eigenvalues.clone();
    truth.sort_by(|a, b| b.total_cmp(a));
    let mut central = Mat::<T>::zeros(n, n);
    let mut history: Vec<Vec<T>> = Vec::new();
    let mut rows = Vec::with_capacity(scenario.steps * n);
    for t in 1..=scenario.steps {
        let x = source.sample(t);
        match scenario.mode {
            CovarianceMode::Ewma(a) => {
                net.ewma_step(&x, a)?;
                central = central.scaled(a).add_outer(1.0 - a, &x);
            }
            CovarianceMode::FiniteSample => {
                let a = (t - 1) as f64 / t as f64;
                net.ewma_step(&x, a)?;
                central = central.scaled(a).add_outer(1.0 - a, &x);
            }
            CovarianceMode::SlidingWindow(b) => {
                if t > b {
                    let old = &history[t - 1 - b];
                    net.rank_two_step(&x, old)?;
                    central = central.add_outer(1.0, &x).add_outer(-1.0, old);
                } else {
                    net.step(&x, 1.0)?;
                    central = central.add_outer(1.0, &x);
                }
                history.push(x);
            }
        }
        let replay = dense_eig_oracle(&central)?.values;
        let scale = scenario.reference_scale(t);
        let floor = 1e-6 * replay.iter().fold(truth[0] * scale, |m, v| m.max(v.abs()));
        for k in 0..n {
            let lt = truth[k] * scale;
            let nodes = net.nodes();
            let mean = |reference: f64| {
                nodes.iter().map(|s| rel(s.lambda_curr[k], reference, floor)).sum::<f64>() / nodes.len() as f64
            };
            rows.push(CovarianceRow {
                t,
                k,
                lambda_est: nodes[0].lambda_curr[k],
                lambda_central: replay[k],
                lambda_true: lt,
                eta: mean(lt),
                eta_tilde: rel(replay[k], lt, floor),
                eta_central: mean(replay[k]),
            });
        }
    }
    Ok(CovarianceReport {
        rows,
        metrics: net.metrics(),
    })
}
