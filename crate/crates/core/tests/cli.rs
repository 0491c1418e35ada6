use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spgg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spgg")).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn generate_torus_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("torus.txt");
    let out = spgg(&["generate", "torus", "4", "3", "-o", path_str(&file)]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let edges = fs::read_to_string(&file).unwrap();
    assert!(edges.starts_with("12 24\n"));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("effective: generate torus 4 3"));
    assert!(stdout.contains("diameter=3"));
}

#[test]
fn degenerate_torus_is_a_usage_error() {
    let out = spgg(&["generate", "torus", "2", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_regular_prints_summary_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for f in [&a, &b] {
        let out = spgg(&["generate", "regular", "100", "4", "--seed", "3", "-o", path_str(f)]);
        assert!(out.status.success());
        assert!(text(&out.stdout).contains("min_degree=4"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

const GRID: [&str; 6] = ["--e-h", "0.1", "--rho-h", "0.23", "--rho-d", "0.45"];

#[test]
fn simulate_grid_converges() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let mut args = vec!["simulate", "--torus", "50x50", "--rounds", "60", "-o", path_str(&csv)];
    args.extend(GRID);
    let out = spgg(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("converged: yes (round"), "{stdout}");
    assert!(stdout.contains("conditions: Satisfied"));
    assert!(stdout.contains("seed=0"));
    let trace = fs::read_to_string(&csv).unwrap();
    assert_eq!(trace.lines().next(), Some("round,defectors,hypocritical,cooperators"));
    assert_eq!(trace.lines().count(), 62);
    assert_eq!(trace.lines().last(), Some("60,0,0,2500"));
}

#[test]
fn simulate_without_hypocrisy_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let mut args = vec!["simulate", "--torus", "50x50", "--no-hypocrisy", "-o", path_str(&csv)];
    args.extend(GRID);
    let out = spgg(&args);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("converged: no"));
}

#[test]
fn simulate_reads_config_file_and_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    assert!(spgg(&["generate", "torus", "8", "8", "-o", path_str(&graph)]).status.success());
    let config = dir.path().join("p.json");
    fs::write(&config, r#"{"e_h": 0.1, "rho_h": 0.3, "rho_d": 0.45, "epsilon": 0.2}"#).unwrap();
    let csv = dir.path().join("t.csv");
    let args = [
        "simulate", "--graph", path_str(&graph), "--config", path_str(&config), "--seed", "4", "--early-stop", "-o",
        path_str(&csv),
    ];
    let first = spgg(&args);
    assert!(first.status.success(), "{}", text(&first.stderr));
    let trace = fs::read(&csv).unwrap();
    let stdout = text(&first.stdout);
    assert!(stdout.contains("epsilon=0.2"));
    assert!(stdout.contains("seed=4"));
    assert!(spgg(&args).status.success());
    assert_eq!(fs::read(&csv).unwrap(), trace);
}

#[test]
fn simulate_two_order_out_of_regime_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = spgg(&[
        "simulate", "--torus", "10x10", "--two-order", "--alpha1", "1", "--alpha2", "0.5", "--beta1", "0.1",
        "--beta2", "0.2", "--rounds", "10", "-o", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("conditions: BothFail"));
    let trace = fs::read_to_string(&csv).unwrap();
    assert!(trace.starts_with("round,defectors,hypocritical,cooperators,private_cooperators\n"));
}

#[test]
fn inconsistent_or_missing_inputs_are_usage_errors() {
    let cases: [&[&str]; 5] = [
        &["simulate", "--torus", "5x5", "--two-order", "--no-hypocrisy"],
        &["simulate", "--torus", "5x5", "--noisy", "0.9", "--two-order"],
        &["simulate", "--torus", "5x5"],
        &["simulate", "--torus", "5by5", "--e-h", "0.1", "--rho-h", "0.3", "--rho-d", "0.45"],
        &["simulate", "--e-h", "0.1", "--rho-h", "0.3", "--rho-d", "0.45"],
    ];
    for args in cases {
        assert_eq!(spgg(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.txt");
    fs::write(&config, "e_h = zero\n").unwrap();
    let out = spgg(&["simulate", "--torus", "5x5", "--config", path_str(&config)]);
    assert_eq!(out.status.code(), Some(2));
}

fn write_sweep_config(dir: &Path, body: &str) -> String {
    let file = dir.join("sweep.txt");
    fs::write(&file, body).unwrap();
    path_str(&file).to_string()
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(
        dir.path(),
        "network = torus\nwidth = 10\nheight = 10\ne_h_count = 5\ne_h_min = 0\ne_h_max = 1\n\
         rho_h_count = 5\nrho_h_min = 0\nrho_h_max = 0.45\nrho_d = 0.45\nrounds = 20\nrepetitions = 3\n\
         rule = greedy\nmaster_seed = 8\n",
    );
    let one = dir.path().join("one");
    let eight = dir.path().join("eight");
    for (prefix, workers) in [(&one, "1"), (&eight, "8")] {
        let out = spgg(&["sweep", &config, "--out", path_str(prefix), "--workers", workers]);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    let csv = fs::read(one.with_extension("csv")).unwrap();
    assert_eq!(csv, fs::read(eight.with_extension("csv")).unwrap());
    assert_eq!(fs::read(one.with_extension("ppm")).unwrap(), fs::read(eight.with_extension("ppm")).unwrap());
    assert_eq!(text(&csv).lines().count(), 26);
}

#[test]
fn minimal_sweep_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(
        dir.path(),
        r#"{"network": "torus", "width": 5, "height": 5, "e_h_count": 2, "e_h_min": 0.1, "e_h_max": 0.5,
            "rho_h_count": 2, "rho_h_min": 0.1, "rho_h_max": 0.3, "rho_d": 0.45, "rounds": 1,
            "repetitions": 1, "rule": "greedy", "master_seed": 1}"#,
    );
    let prefix = dir.path().join("small");
    assert!(spgg(&["sweep", &config, "--out", path_str(&prefix)]).status.success());
    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let ppm = fs::read_to_string(prefix.with_extension("ppm")).unwrap();
    assert!(ppm.starts_with("P3\n"));
}

#[test]
fn regular_sweep_with_fresh_networks_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(
        dir.path(),
        "network = regular\nn = 100\ndegree = 10\ne_h_count = 2\ne_h_min = 0\ne_h_max = 1\nrho_h_count = 2\n\
         rho_h_min = 0\nrho_h_max = 0.22\nrho_d = 0.22\nrounds = 10\nrepetitions = 2\nrule = greedy\n\
         master_seed = 5\nfresh_network = true\n",
    );
    let prefix = dir.path().join("reg");
    let out = spgg(&["sweep", &config, "--out", path_str(&prefix)]);
    assert!(out.status.success(), "{}", text(&out.stderr));
}

#[test]
fn sweep_requires_master_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(
        dir.path(),
        "network = torus\nwidth = 5\nheight = 5\ne_h_count = 2\ne_h_min = 0\ne_h_max = 1\nrho_h_count = 2\n\
         rho_h_min = 0\nrho_h_max = 0.45\nrho_d = 0.45\nrounds = 2\nrepetitions = 1\nrule = greedy\n",
    );
    let out = spgg(&["sweep", &config, "--out", path_str(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites_pass_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let out = spgg(&["verify", "contagion", "--seed", "1", "--instances", "200", "--report", path_str(&report)]);
    assert!(out.status.success(), "{}", text(&out.stdout));
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 200);

    let out = spgg(&["verify", "reduction", "--seed", "2", "--instances", "100"]);
    assert!(out.status.success());
    let out = spgg(&["verify", "oscillation", "--seed", "3"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("oscillation: pass (20 instances, 0 failures)"));
}

#[test]
fn verify_rejects_unknown_suite_and_missing_seed() {
    assert_eq!(spgg(&["verify", "nonsense", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(spgg(&["verify", "contagion"]).status.code(), Some(2));
}
