//! Scenario configuration: flat `key = value` sections in TOML syntax.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed text or an unknown key, at a 1-based line.
    Parse { line: usize, message: String },
    /// A well-formed value that is out of range or inconsistent.
    Validation { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            ConfigError::Validation { key, message } => write!(f, "invalid value for `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Covariance,
    Doa,
    DoaTrack,
    Spectrum,
    SpectrumTrack,
    FilterDesign,
    EigBench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Ps,
    Ac,
    Ftac,
    Filter,
    Exact,
}

impl std::str::FromStr for ProtocolName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ps" => Ok(ProtocolName::Ps),
            "ac" => Ok(ProtocolName::Ac),
            "ftac" => Ok(ProtocolName::Ftac),
            "filter" => Ok(ProtocolName::Filter),
            "exact" => Ok(ProtocolName::Exact),
            other => Err(format!("unknown protocol `{other}` (expected ps, ac, ftac, filter or exact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    DRegular,
    SmallWorld,
    Cycle,
    Path,
    Complete,
    TenNode,
    SixNode,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbors: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewire: Option<f64>,
    /// Edge-list file, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Generator seed; defaults to the top-level seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            kind: TopologyKind::Cycle,
            degree: None,
            neighbors: None,
            rewire: None,
            path: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceModeName {
    Finite,
    Ewma,
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceConfig {
    #[serde(default = "CovarianceConfig::default_mode")]
    pub mode: CovarianceModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    /// Ratio of consecutive true eigenvalues.
    #[serde(default = "CovarianceConfig::default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub complex: bool,
}

impl CovarianceConfig {
    fn default_mode() -> CovarianceModeName {
        CovarianceModeName::Finite
    }
    fn default_decay() -> f64 {
        0.7
    }
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig {
            mode: Self::default_mode(),
            alpha: None,
            window: None,
            decay: Self::default_decay(),
            complex: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoaConfig {
    /// Source angles in degrees (start angles when tracking).
    pub sources: Vec<f64>,
    /// End angles for linear tracks; static sources when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_sources: Option<Vec<f64>>,
    #[serde(default = "DoaConfig::default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "DoaConfig::default_trials")]
    pub trials: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "DoaConfig::default_delta")]
    pub delta: f64,
    /// Radius of the disc holding the subarray references, wavelengths.
    #[serde(default = "DoaConfig::default_radius")]
    pub radius: f64,
    #[serde(default = "DoaConfig::default_geometry_seed")]
    pub geometry_seed: u64,
}

impl DoaConfig {
    fn default_snr() -> Vec<f64> {
        vec![20.0]
    }
    fn default_trials() -> i64 {
        100
    }
    fn default_delta() -> f64 {
        0.5
    }
    fn default_radius() -> f64 {
        3.0
    }
    fn default_geometry_seed() -> u64 {
        17
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningName {
    Incidence,
    RankTwo,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "SpectrumConfig::default_learning")]
    pub learning: LearningName,
    /// Random edge events after learning (`spectrum-track` only).
    #[serde(default = "SpectrumConfig::default_events")]
    pub events: i64,
    #[serde(default)]
    pub start: i64,
}

impl SpectrumConfig {
    fn default_learning() -> LearningName {
        LearningName::Incidence
    }
    fn default_events() -> i64 {
        20
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            learning: Self::default_learning(),
            events: Self::default_events(),
            start: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default = "FilterConfig::default_order")]
    pub order: i64,
}

impl FilterConfig {
    fn default_order() -> i64 {
        12
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            order: Self::default_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Fraction of negative-sign updates in the random stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downdate_fraction: Option<f64>,
}

/// A complete scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub suite: Suite,
    #[serde(default)]
    pub seed: u64,
    pub nodes: i64,
    #[serde(rename = "T", default = "ScenarioConfig::default_steps")]
    pub steps: i64,
    #[serde(default = "ScenarioConfig::default_xi")]
    pub xi: f64,
    #[serde(default = "ScenarioConfig::default_protocol")]
    pub protocol: ProtocolName,
    #[serde(default = "ScenarioConfig::default_gamma")]
    pub gamma: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "ScenarioConfig::default_out")]
    pub out: String,
    #[serde(default = "ScenarioConfig::default_trials_parallel")]
    pub trials_parallel: i64,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub covariance: CovarianceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doa: Option<DoaConfig>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub bench: BenchConfig,
}

impl ScenarioConfig {
    fn default_steps() -> i64 {
        100
    }
    fn default_xi() -> f64 {
        1e-12
    }
    fn default_protocol() -> ProtocolName {
        ProtocolName::Ps
    }
    fn default_gamma() -> i64 {
        100
    }
    fn default_out() -> String {
        "out".to_string()
    }
    fn default_trials_parallel() -> i64 {
        1
    }

    /// Range and consistency checks that need more than the type system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nodes < 1 {
            return Err(invalid("nodes", "must be at least 1"));
        }
        if self.steps < 1 {
            return Err(invalid("T", "must be at least 1"));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(invalid("xi", "must lie in (0, 1)"));
        }
        if self.gamma < 1 {
            return Err(invalid("gamma", "must be a positive iteration count"));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(invalid("epsilon", "must be positive"));
            }
            if self.protocol != ProtocolName::Ac {
                return Err(invalid("epsilon", "only applies to protocol = \"ac\""));
            }
        }
        if self.trials_parallel < 1 {
            return Err(invalid("trials_parallel", "must be at least 1"));
        }
        if self.out.is_empty() {
            return Err(invalid("out", "must not be empty"));
        }
        self.validate_topology()?;
        match self.suite {
            Suite::Covariance => self.validate_covariance(),
            Suite::Doa | Suite::DoaTrack => self.validate_doa(),
            Suite::Spectrum | Suite::SpectrumTrack => self.validate_spectrum(),
            Suite::FilterDesign => {
                if self.filter.order < 1 {
                    return Err(invalid("filter.order", "must be at least 1"));
                }
                Ok(())
            }
            Suite::EigBench => match self.bench.downdate_fraction {
                Some(f) if !(0.0..=1.0).contains(&f) => Err(invalid("bench.downdate_fraction", "must lie in [0, 1]")),
                _ => Ok(()),
            },
        }
    }

    fn validate_topology(&self) -> Result<(), ConfigError> {
        let t = &self.topology;
        let n = self.nodes;
        match t.kind {
            TopologyKind::DRegular => match t.degree {
                Some(d) if d >= 1 && d < n && (n * d) % 2 == 0 => Ok(()),
                Some(_) => Err(invalid("topology.degree", "need 1 <= degree < nodes with nodes * degree even")),
                None => Err(invalid("topology.degree", "required for d-regular topologies")),
            },
            TopologyKind::SmallWorld => {
                match t.neighbors {
                    Some(k) if k >= 2 && k % 2 == 0 && k < n => {}
                    Some(_) => return Err(invalid("topology.neighbors", "need an even count in [2, nodes)")),
                    None => return Err(invalid("topology.neighbors", "required for small-world topologies")),
                }
                match t.rewire {
                    Some(p) if (0.0..=1.0).contains(&p) => Ok(()),
                    _ => Err(invalid("topology.rewire", "required, in [0, 1]")),
                }
            }
            TopologyKind::Cycle if n < 3 => Err(invalid("nodes", "a cycle needs at least 3 nodes")),
            TopologyKind::TenNode if n != 10 => Err(invalid("nodes", "the ten-node graph has 10 nodes")),
            TopologyKind::SixNode if n != 6 => Err(invalid("nodes", "the six-node graph has 6 nodes")),
            TopologyKind::File if t.path.is_none() => Err(invalid("topology.path", "required for file topologies")),
            _ => Ok(()),
        }
    }

    fn validate_covariance(&self) -> Result<(), ConfigError> {
        let c = &self.covariance;
        if !(c.decay > 0.0 && c.decay <= 1.0) {
            return Err(invalid("covariance.decay", "must lie in (0, 1]"));
        }
        match c.mode {
            CovarianceModeName::Ewma => match c.alpha {
                Some(a) if a > 0.0 && a < 1.0 => Ok(()),
                _ => Err(invalid("covariance.alpha", "ewma mode needs 0 < alpha < 1")),
            },
            CovarianceModeName::Window => match c.window {
                Some(w) if w >= 1 => Ok(()),
                _ => Err(invalid("covariance.window", "window mode needs a window of at least 1")),
            },
            CovarianceModeName::Finite => Ok(()),
        }
    }

    fn validate_doa(&self) -> Result<(), ConfigError> {
        let Some(d) = &self.doa else {
            return Err(invalid("doa", "section required for DoA suites"));
        };
        if d.sources.is_empty() || d.sources.len() as i64 > self.nodes {
            return Err(invalid("doa.sources", "need between 1 and `nodes` sources"));
        }
        let all = d.sources.iter().chain(d.end_sources.iter().flatten());
        if all.clone().any(|a| !(a.abs() < 90.0)) {
            return Err(invalid("doa.sources", "angles must lie in (-90, 90) degrees"));
        }
        if let Some(end) = &d.end_sources {
            if end.len() != d.sources.len() {
                return Err(invalid("doa.end_sources", "must match `sources` in length"));
            }
        }
        if d.snr_db.is_empty() || d.snr_db.iter().any(|s| s.is_nan()) {
            return Err(invalid("doa.snr_db", "need at least one SNR value"));
        }
        if d.trials < 1 {
            return Err(invalid("doa.trials", "must be at least 1"));
        }
        if let Some(a) = d.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid("doa.alpha", "must lie in (0, 1)"));
            }
        }
        if !(d.delta > 0.0) || !(d.radius >= 0.0) {
            return Err(invalid("doa.delta", "displacement must be positive and radius nonnegative"));
        }
        if self.suite == Suite::DoaTrack && d.alpha.is_none() {
            return Err(invalid("doa.alpha", "tracking needs a forgetting factor"));
        }
        Ok(())
    }

    fn validate_spectrum(&self) -> Result<(), ConfigError> {
        let s = &self.spectrum;
        if s.start < 0 || s.start >= self.nodes {
            return Err(invalid("spectrum.start", "must be a node index"));
        }
        if s.events < 0 {
            return Err(invalid("spectrum.events", "must be nonnegative"));
        }
        if self.suite == Suite::SpectrumTrack && s.learning == LearningName::Normalized && s.events > 0 {
            return Err(invalid(
                "spectrum.learning",
                "normalized learning cannot follow topology events",
            ));
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal configuration.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and fully validates a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
