//! Experiment suites built on the tracker.

pub mod covariance;
pub mod doa;
pub mod filter_design;
pub mod spectrum;

pub use covariance::{run_covariance, CovarianceMode, CovarianceReport, CovarianceRow, CovarianceScenario, SampleSource, SignalModel};
pub use doa::{
    crossing_scenario, esprit_angles, esprit_from_covariance, monte_carlo_doa, phase_to_angle, run_doa_estimate,
    run_doa_track, three_source_scenario, DoaMonteCarlo, DoaScenario, DoaTrack, DoaTrial, SubarrayGeometry, Trajectory,
};
pub use filter_design::{design_filter, run_filter_design, FilterKind, FilterResult, GraphFrequencies};
pub use spectrum::{random_edge_events, run_spectrum, LearningMode, SpectrumEvent, SpectrumReport, SpectrumScenario};
