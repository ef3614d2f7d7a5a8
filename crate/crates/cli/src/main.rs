use std::process::ExitCode;

use clap::Parser;
use eigtrack_cli::config::{ProtocolName, Suite};
use eigtrack_cli::{parse_config, run, ConfigError, SuiteError};

/// Exit status for configuration problems.
const EXIT_CONFIG: u8 = 2;
/// Exit status for failed suites, including solver non-convergence.
const EXIT_SUITE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "eigtrack", about = "Decentralized online eigendecomposition simulator")]
struct Args {
    /// covariance | doa | doa-track | spectrum | spectrum-track | filter-design | eig-bench
    suite: String,
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
    /// ps | ac | ftac | filter | exact
    #[arg(long)]
    protocol: Option<ProtocolName>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    trials_parallel: Option<i64>,
}

fn suite_from_name(name: &str) -> Option<Suite> {
    Some(match name {
        "covariance" => Suite::Covariance,
        "doa" => Suite::Doa,
        "doa-track" => Suite::DoaTrack,
        "spectrum" => Suite::Spectrum,
        "spectrum-track" => Suite::SpectrumTrack,
        "filter-design" => Suite::FilterDesign,
        "eig-bench" => Suite::EigBench,
        _ => return None,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let Some(suite) = suite_from_name(&args.suite) else {
        eprintln!("unknown suite `{}`", args.suite);
        return ExitCode::from(EXIT_CONFIG);
    };
    let cfg = parse_config(&text).and_then(|mut cfg| {
        if cfg.suite != suite {
            return Err(ConfigError::Validation {
                key: "suite".into(),
                message: format!("config is for `{:?}` but `{}` was requested", cfg.suite, args.suite),
            });
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        if let Some(o) = args.out.clone() {
            cfg.out = o;
        }
        if let Some(p) = args.protocol {
            cfg.protocol = p;
        }
        if let Some(g) = args.gamma {
            cfg.gamma = g;
        }
        if let Some(w) = args.trials_parallel {
            cfg.trials_parallel = w;
        }
        cfg.validate()?;
        Ok(cfg)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cfg) {
        Ok(summary) => {
            print!("{}", summary.render());
            ExitCode::SUCCESS
        }
        Err(e @ SuiteError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_SUITE)
        }
    }
}
