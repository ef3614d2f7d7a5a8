//! Suite runners: build the scenario from a validated configuration, run
//! it, write CSV artifacts and collect the summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eigtrack::apps::{
    design_filter, monte_carlo_doa, random_edge_events, run_covariance, run_doa_track, run_filter_design, run_spectrum,
    CovarianceMode, CovarianceScenario, DoaScenario, FilterKind, GraphFrequencies, LearningMode, SignalModel,
    SpectrumScenario, SubarrayGeometry, Trajectory,
};
use eigtrack::apps::doa::write_doa_csv;
use eigtrack::apps::filter_design::write_filter_csv;
use eigtrack::consensus::{distinct_nonzero, ConsensusConfig};
use eigtrack::graph::{gen_d_regular, gen_small_world, parse_edge_list, six_node_array_network, ten_node_benchmark, Graph};
use eigtrack::linalg::{dense_eig_oracle, rank_one_eigenupdate, Mat};
use eigtrack::netsim::{write_metrics_csv, MetricsRow, RngStream, RoundMetrics, StreamPurpose};
use eigtrack::tracker::TrackerNetwork;
use eigtrack::{ExecMode, Scalar};
use num_complex::Complex64;
use rand::Rng;

use crate::config::{CovarianceModeName, LearningName, ProtocolName, ScenarioConfig, Suite, TopologyKind};

#[derive(Debug)]
pub enum SuiteError {
    /// The configuration referenced something unusable (e.g. a graph file).
    Config(String),
    Run(eigtrack::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for SuiteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SuiteError::Config(m) => write!(f, "configuration error: {m}"),
            SuiteError::Run(e) => write!(f, "suite failed: {e}"),
            SuiteError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<eigtrack::Error> for SuiteError {
    fn from(e: eigtrack::Error) -> Self {
        SuiteError::Run(e)
    }
}

impl From<std::io::Error> for SuiteError {
    fn from(e: std::io::Error) -> Self {
        SuiteError::Io(e)
    }
}

/// Ordered `key=value` pairs printed after a run.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    fn costs(&mut self, m: &RoundMetrics) {
        self.push("consensus_rounds", m.consensus_rounds);
        self.push("scalar_messages", m.scalar_messages);
        self.push("wall_rounds", m.wall_rounds);
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn exp(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn build_graph(cfg: &ScenarioConfig) -> Result<Graph, SuiteError> {
    let t = &cfg.topology;
    let n = cfg.nodes as usize;
    let seed = t.seed.unwrap_or(cfg.seed);
    let g = match t.kind {
        TopologyKind::DRegular => gen_d_regular(n, t.degree.unwrap_or(0) as usize, seed)?,
        TopologyKind::SmallWorld => gen_small_world(n, t.neighbors.unwrap_or(0) as usize, t.rewire.unwrap_or(0.0), seed)?,
        TopologyKind::Cycle => Graph::cycle(n),
        TopologyKind::Path => Graph::path(n),
        TopologyKind::Complete => Graph::complete(n),
        TopologyKind::TenNode => ten_node_benchmark(),
        TopologyKind::SixNode => six_node_array_network(),
        TopologyKind::File => {
            let path = t.path.as_deref().unwrap_or_default();
            let text = fs::read_to_string(path).map_err(|e| SuiteError::Config(format!("cannot read graph file {path}: {e}")))?;
            parse_edge_list(&text).map_err(|e| SuiteError::Config(format!("graph file {path}: {e}")))?
        }
    };
    if g.n_nodes() != n {
        return Err(SuiteError::Config(format!("topology has {} nodes but `nodes = {n}`", g.n_nodes())));
    }
    if cfg.protocol == ProtocolName::Ps && g.n_nodes() > 1 && g.is_bipartite() {
        eprintln!("warning: the topology is bipartite; push-sum will not converge on it");
    }
    Ok(g)
}

/// Consensus backend for `g`. Finite-time and filter backends use the exact
/// Laplacian spectrum of `g`.
pub fn build_consensus(cfg: &ScenarioConfig, g: &Graph) -> Result<ConsensusConfig, SuiteError> {
    let gamma = cfg.gamma as usize;
    Ok(match cfg.protocol {
        ProtocolName::Ps => ConsensusConfig::push_sum(gamma),
        ProtocolName::Ac => ConsensusConfig::average(gamma, cfg.epsilon),
        ProtocolName::Exact => ConsensusConfig::exact(),
        ProtocolName::Ftac => {
            let lap = dense_eig_oracle(&g.laplacian())?.values;
            ConsensusConfig::finite_time(distinct_nonzero(&lap, 1e-9))
        }
        ProtocolName::Filter => {
            let freqs = GraphFrequencies::exact(g)?;
            ConsensusConfig::filter(design_filter(FilterKind::GdnA, &freqs, g.n_nodes(), cfg.filter.order as usize)?)
        }
    })
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, SuiteError> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_metrics(out: &Path, t: usize, m: RoundMetrics) -> Result<(), SuiteError> {
    let mut w = create(out, "metrics.csv")?;
    write_metrics_csv(&mut w, &[MetricsRow { t, metrics: m }])?;
    w.flush()?;
    Ok(())
}

/// Runs the configured suite, writing artifacts under `cfg.out`.
pub fn run(cfg: &ScenarioConfig) -> Result<Summary, SuiteError> {
    let out = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out)?;
    let mut s = Summary::default();
    s.push(
        "suite",
        match cfg.suite {
            Suite::Covariance => "covariance",
            Suite::Doa => "doa",
            Suite::DoaTrack => "doa-track",
            Suite::Spectrum => "spectrum",
            Suite::SpectrumTrack => "spectrum-track",
            Suite::FilterDesign => "filter-design",
            Suite::EigBench => "eig-bench",
        },
    );
    s.push("seed", cfg.seed);
    match cfg.suite {
        Suite::Covariance => {
            if cfg.covariance.complex {
                covariance::<Complex64>(cfg, &out, &mut s)?
            } else {
                covariance::<f64>(cfg, &out, &mut s)?
            }
        }
        Suite::Doa => doa(cfg, &out, &mut s)?,
        Suite::DoaTrack => doa_track(cfg, &out, &mut s)?,
        Suite::Spectrum | Suite::SpectrumTrack => spectrum(cfg, &out, &mut s)?,
        Suite::FilterDesign => filter(cfg, &out, &mut s)?,
        Suite::EigBench => eig_bench(cfg, &out, &mut s)?,
    }
    Ok(s)
}

fn mode(cfg: &ScenarioConfig) -> ExecMode {
    if cfg.trials_parallel > 1 {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

fn covariance<T: Scalar>(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let g = build_graph(cfg)?;
    let consensus = build_consensus(cfg, &g)?;
    let c = &cfg.covariance;
    let scenario = CovarianceScenario {
        mode: match c.mode {
            CovarianceModeName::Finite => CovarianceMode::FiniteSample,
            CovarianceModeName::Ewma => CovarianceMode::Ewma(c.alpha.unwrap_or(0.9)),
            CovarianceModeName::Window => CovarianceMode::SlidingWindow(c.window.unwrap_or(1) as usize),
        },
        steps: cfg.steps as usize,
        signal: SignalModel::geometric(g.n_nodes(), c.decay),
        seed: cfg.seed,
    };
    let mut net = TrackerNetwork::<T>::new(g, consensus, mode(cfg))?;
    net.set_xi(cfg.xi);
    let rep = run_covariance(&scenario, &mut net)?;
    let mut w = create(out, "covariance.csv")?;
    rep.write_csv(&mut w)?;
    w.flush()?;
    write_metrics(out, scenario.steps, rep.metrics)?;
    let last = &rep.last()[0];
    s.push("lambda1_est", exp(last.lambda_est));
    s.push("lambda1_central", exp(last.lambda_central));
    s.push("lambda1_true", exp(last.lambda_true));
    s.push("eta1", exp(last.eta));
    s.push("eta_tilde1", exp(last.eta_tilde));
    s.push("eta_central1", exp(last.eta_central));
    s.costs(&rep.metrics);
    Ok(())
}

fn geometry(cfg: &ScenarioConfig) -> SubarrayGeometry {
    let d = cfg.doa.as_ref().expect("validated");
    SubarrayGeometry::random_disc(cfg.nodes as usize, d.radius, d.delta, RngStream::new(d.geometry_seed))
}

fn doa_scenario(cfg: &ScenarioConfig, snr_db: f64) -> DoaScenario {
    let d = cfg.doa.as_ref().expect("validated");
    let sources = match &d.end_sources {
        Some(end) => d
            .sources
            .iter()
            .zip(end)
            .map(|(&from, &to)| Trajectory::Linear { from, to })
            .collect(),
        None => d.sources.iter().map(|&a| Trajectory::Static(a)).collect(),
    };
    DoaScenario {
        sources,
        snr_db,
        steps: cfg.steps as usize,
        alpha: d.alpha,
        seed: cfg.seed,
    }
}

fn snr_label(snr: f64) -> String {
    format!("{snr}").replace('-', "m").replace('.', "p")
}

fn doa(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let g = build_graph(cfg)?;
    let consensus = build_consensus(cfg, &g)?;
    let geo = geometry(cfg);
    let d = cfg.doa.as_ref().expect("validated");
    let mut total = RoundMetrics::default();
    for &snr in &d.snr_db {
        let mc = monte_carlo_doa(
            &doa_scenario(cfg, snr),
            &geo,
            &g,
            &consensus,
            d.trials as usize,
            cfg.trials_parallel as usize,
        )?;
        let label = snr_label(snr);
        let mut w = create(out, &format!("doa_snr{label}.csv"))?;
        write_doa_csv(&mut w, &mc.rows)?;
        w.flush()?;
        s.push(format!("rmse_distributed_snr{label}"), exp(mc.rmse_distributed));
        s.push(format!("rmse_central_snr{label}"), exp(mc.rmse_central));
        s.push(format!("flagged_trials_snr{label}"), mc.flagged_trials);
        total.consensus_rounds += mc.metrics.consensus_rounds;
        total.scalar_messages += mc.metrics.scalar_messages;
        total.wall_rounds += mc.metrics.wall_rounds;
        total.nc_invocations += mc.metrics.nc_invocations;
    }
    write_metrics(out, cfg.steps as usize, total)?;
    s.costs(&total);
    Ok(())
}

fn doa_track(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let g = build_graph(cfg)?;
    let consensus = build_consensus(cfg, &g)?;
    let geo = geometry(cfg);
    let d = cfg.doa.as_ref().expect("validated");
    let mut net = TrackerNetwork::<Complex64>::with_owners(g, geo.owners(), consensus, mode(cfg))?;
    net.set_xi(cfg.xi);
    let tr = run_doa_track(&doa_scenario(cfg, d.snr_db[0]), &geo, &mut net)?;
    let mut w = create(out, "doa_track.csv")?;
    write_doa_csv(&mut w, &tr.rows)?;
    w.flush()?;
    write_metrics(out, cfg.steps as usize, tr.metrics)?;
    s.push("rmse", exp(tr.rmse));
    s.push("flagged_estimates", tr.flagged);
    s.costs(&tr.metrics);
    Ok(())
}

fn spectrum(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let g = build_graph(cfg)?;
    let consensus = build_consensus(cfg, &g)?;
    let events = if cfg.suite == Suite::SpectrumTrack {
        random_edge_events(&g, cfg.spectrum.events as usize, RngStream::new(cfg.seed))?
    } else {
        Vec::new()
    };
    let learning = match cfg.spectrum.learning {
        LearningName::Incidence => LearningMode::Incidence,
        LearningName::RankTwo => LearningMode::RankTwo,
        LearningName::Normalized => LearningMode::NormalizedIncidence,
    };
    let scenario = SpectrumScenario {
        graph: g.clone(),
        learning,
        start: cfg.spectrum.start as usize,
        events,
    };
    let mut net = TrackerNetwork::<f64>::new(g, consensus, mode(cfg))?;
    net.set_xi(cfg.xi);
    let rep = run_spectrum(&scenario, &mut net)?;
    let mut w = create(out, "spectrum.csv")?;
    rep.write_csv(&mut w)?;
    w.flush()?;
    write_metrics(out, net.t(), rep.metrics)?;
    let learned_end = rep.learning_steps.min(rep.rows.len() / cfg.nodes as usize);
    let row = &rep.rows[(learned_end.max(1) - 1) * cfg.nodes as usize];
    s.push("learning_steps", rep.learning_steps);
    s.push("lambda1_learned", exp(row.lambda_est));
    s.push("lambda1_central", exp(row.lambda_true));
    s.push("learning_error", exp(rep.learning_error));
    if cfg.suite == Suite::SpectrumTrack {
        let worst = rep.event_errors.iter().map(|e| e.1).fold(0.0, f64::max);
        s.push("events", rep.event_errors.len());
        s.push("max_event_eta1", exp(worst));
    }
    s.costs(&rep.metrics);
    Ok(())
}

fn filter(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let g = build_graph(cfg)?;
    let consensus = build_consensus(cfg, &g)?;
    let n = g.n_nodes();
    // learn both spectra with the configured backend
    let mut learned = Vec::new();
    let mut cost = RoundMetrics::default();
    for learning in [LearningMode::Incidence, LearningMode::NormalizedIncidence] {
        let mut net = TrackerNetwork::<f64>::new(g.clone(), consensus.clone(), mode(cfg))?;
        net.set_xi(cfg.xi);
        let scenario = SpectrumScenario {
            graph: g.clone(),
            learning,
            start: 0,
            events: Vec::new(),
        };
        let rep = run_spectrum(&scenario, &mut net)?;
        s.push(format!("{}_learning_error", if learning == LearningMode::Incidence { "laplacian" } else { "normalized" }), exp(rep.learning_error));
        cost.consensus_rounds += rep.metrics.consensus_rounds;
        cost.scalar_messages += rep.metrics.scalar_messages;
        cost.wall_rounds += rep.metrics.wall_rounds;
        cost.nc_invocations += rep.metrics.nc_invocations;
        learned.push(net.eigenvalues(0).to_vec());
    }
    let freqs = GraphFrequencies {
        laplacian: learned[0].clone(),
        normalized_laplacian: learned[1].clone(),
    };
    let mut rng = RngStream::new(cfg.seed).stream(StreamPurpose::Signal, 0, 0);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let res = run_filter_design(&g, &freqs, cfg.filter.order as usize, &x)?;
    let mut w = create(out, "filters.csv")?;
    write_filter_csv(&mut w, &res)?;
    w.flush()?;
    write_metrics(out, 0, cost)?;
    for r in &res {
        s.push(format!("final_eta_{}", r.kind.name()), exp(r.final_eta()));
        s.push(format!("peak_{}", r.kind.name()), exp(r.peak()));
    }
    s.costs(&cost);
    Ok(())
}

fn eig_bench(cfg: &ScenarioConfig, out: &Path, s: &mut Summary) -> Result<(), SuiteError> {
    let n = cfg.nodes as usize;
    let down = cfg.bench.downdate_fraction.unwrap_or(0.25);
    let mut rng = RngStream::new(cfg.seed).stream(StreamPurpose::Trial, 0, 0);
    let mut values = vec![0.0; n];
    let mut basis = Mat::<f64>::identity(n);
    let mut r = Mat::<f64>::zeros(n, n);
    let mut w = create(out, "eig_bench.csv")?;
    writeln!(w, "t,rho,max_eig_error,max_secular_iterations")?;
    let mut worst = 0.0f64;
    for t in 1..=cfg.steps as usize {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = if rng.random_bool(down) { -0.5 } else { 1.0 };
        let z = basis.adjoint().matvec(&x);
        let sol = rank_one_eigenupdate(&values, rho, &z, cfg.xi)?;
        basis = basis.matmul(&sol.matrix());
        values = sol.eigenvalues().to_vec();
        r = r.add_outer(rho, &x);
        let oracle = dense_eig_oracle(&r)?.values;
        let err = values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        writeln!(w, "{t},{rho},{err:e},{}", sol.max_iterations())?;
    }
    w.flush()?;
    s.push("n", n);
    s.push("steps", cfg.steps);
    s.push("max_eig_error", exp(worst));
    s.push("orthonormality_residual", exp(basis.orthonormality_residual()));
    s.costs(&RoundMetrics::default());
    Ok(())
}
