use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eigtrack::graph::gen_d_regular;
use eigtrack::linalg::dense_eig_oracle;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eigtrack-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, suite: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("scenario.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_eigtrack"))
        .arg(suite)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn summary(out: &Output) -> Vec<(String, String)> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn value(out: &Output, key: &str) -> f64 {
    let s = summary(out);
    let (_, v) = s.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no `{key}` in {s:?}"));
    v.parse().unwrap()
}

#[test]
fn minimal_config_runs_with_defaults() {
    let dir = scratch("minimal");
    let out = run(&dir, "covariance", "suite = \"covariance\"\nnodes = 5\nT = 20\n", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("out/covariance.csv").exists());
    assert!(value(&out, "consensus_rounds") > 0.0);
}

#[test]
fn invalid_gamma_exits_with_config_status() {
    let dir = scratch("gamma");
    let out = run(&dir, "covariance", "suite = \"covariance\"\nnodes = 5\ngamma = -1\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let out = run(&dir, "covariance", "suite = \"covariance\"\nnodes = 5\n", &["--gamma", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_and_suite_mismatch_are_rejected() {
    let dir = scratch("reject");
    let out = run(&dir, "covariance", "suite = \"covariance\"\nnodes = 5\nbogus = 1\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run(&dir, "spectrum", "suite = \"covariance\"\nnodes = 5\n", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_config_gives_identical_output() {
    let cfg = "suite = \"covariance\"\nseed = 7\nnodes = 6\nT = 30\ngamma = 40\n[topology]\nkind = \"complete\"\n[covariance]\nmode = \"ewma\"\nalpha = 0.9\ncomplex = true\n";
    let a = scratch("det-a");
    let b = scratch("det-b");
    let oa = run(&a, "covariance", cfg, &[]);
    let ob = run(&b, "covariance", cfg, &[]);
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(oa.stdout, ob.stdout);
    for f in ["covariance.csv", "metrics.csv"] {
        assert_eq!(fs::read(a.join("out").join(f)).unwrap(), fs::read(b.join("out").join(f)).unwrap(), "{f}");
    }
    let oc = run(&b, "covariance", cfg, &["--seed", "8"]);
    assert_ne!(fs::read(a.join("out/covariance.csv")).unwrap(), fs::read(b.join("out/covariance.csv")).unwrap());
    assert!(oc.status.success());
}

#[test]
fn eig_bench_reports_oracle_error() {
    let dir = scratch("bench");
    let out = run(&dir, "eig-bench", "suite = \"eig-bench\"\nnodes = 12\nT = 40\n", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(value(&out, "max_eig_error") < 1e-8);
}

#[test]
fn spectrum_prints_learned_and_central_lambda1() {
    let dir = scratch("spectrum");
    let cfg = "suite = \"spectrum\"\nseed = 3\nnodes = 50\nprotocol = \"exact\"\n[topology]\nkind = \"d-regular\"\ndegree = 4\n";
    let out = run(&dir, "spectrum", cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let learned = value(&out, "lambda1_learned");
    let central = value(&out, "lambda1_central");
    let truth = dense_eig_oracle(&gen_d_regular(50, 4, 3).unwrap().laplacian()).unwrap().values[0];
    assert!((central - truth).abs() < 1e-5 * truth, "{central} vs {truth}");
    assert!((learned - truth).abs() < 1e-5 * truth, "{learned} vs {truth}");
    assert_eq!(value(&out, "learning_steps"), 100.0);
}

#[test]
fn spectrum_track_reads_an_edge_list() {
    let dir = scratch("track");
    let graph = dir.join("g.txt");
    fs::write(&graph, "# ring\nnodes 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n0 3\n").unwrap();
    let cfg = format!(
        "suite = \"spectrum-track\"\nnodes = 6\nprotocol = \"exact\"\n[topology]\nkind = \"file\"\npath = {:?}\n[spectrum]\nevents = 3\n",
        graph.to_str().unwrap()
    );
    let out = run(&dir, "spectrum-track", &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(value(&out, "max_event_eta1") < 1e-6);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = fs::read_to_string(&path).unwrap();
            let cfg = eigtrack_cli::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(eigtrack_cli::parse_config(&cfg.to_text()).unwrap(), cfg);
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
