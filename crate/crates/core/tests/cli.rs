use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 9

[potential]
family = "cosine_lattice"
c = 1.5

[domain]
rho = 1.0

[landscape]
expected_counts = [1, 4, 4]

[rates]
h = [0.5, 0.3]

[spectral]
delta = [0.02]
count_h = 0.3

[mixed]
enabled = true
lower = [-0.6, -0.6]
upper = [1.0, 0.6]
face = "+x"
h = [0.4, 0.3]
delta = 0.02

[langevin]
enabled = false

[kmc]
n = 5000

[agmon]
delta = 0.02
n_pairs = 100
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kramers-exit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn print_config_lists_every_default() {
    let o = cli(&["--print-config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for section in [
        "[potential]",
        "[domain]",
        "[spectral]",
        "[langevin]",
        "[kmc]",
        "[agmon]",
        "[sweep]",
        "[output]",
    ] {
        assert!(text.contains(section), "missing {section}");
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &text);
    let again = cli(&["critical", "--config", &path, "--print-config"]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), text);
}

#[test]
fn print_config_reflects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let o = cli(&["rates", "--config", &path, "--seed", "77", "--print-config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("seed = 77"), "{text}");
    assert!(text.contains("c = 1.5"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[potential]\nfamily = \"mexican_hat\"\n");
    let o = cli(&["critical", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mexican_hat"));

    let missing = dir.path().join("nope.cfg");
    let o = cli(&["critical", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let typo = write_config(dir.path(), "[spectral]\ndelt = [0.01]\n");
    assert_eq!(cli(&["spectrum", "--config", &typo]).status.code(), Some(2));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(cli(&[]).status.code(), Some(2));
}

#[test]
fn critical_writes_points_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = cli(&[
        "critical",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let table = fs::read_to_string(out.join("critical_points.csv")).unwrap();
    assert!(table.starts_with("location,value,kind,index,face,mu"));
    assert_eq!(table.lines().count(), 10);
    assert!(stdout(&o).contains("PASS generalized_counts"));
}

#[test]
fn spectrum_writes_comparison_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = cli(&[
        "spectrum",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(csv.starts_with("h,quantity,label,value,se,source\n"));
    assert!(csv
        .lines()
        .any(|l| l.contains(",lambda,,") && l.ends_with(",spectral")));
    assert!(csv.lines().any(|l| l.contains(",mixed_lambda,")));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 9);
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    let assertions = fs::read_to_string(out.join("assertions.csv")).unwrap();
    assert!(assertions.contains("rate_identity,true"));
}

#[test]
fn kmc_writes_events() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = cli(&["kmc", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let events = fs::read_to_string(out.join("kmc_events.csv")).unwrap();
    assert_eq!(events.lines().count(), 5001);
}

#[test]
fn failing_assertion_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let wrong = SMALL.replace("expected_counts = [1, 4, 4]", "expected_counts = [1, 2, 4]");
    let path = write_config(dir.path(), &wrong);
    let out = dir.path().join("out");
    let o = cli(&[
        "critical",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL generalized_counts"));
    assert!(out.join("report.json").exists());
}

#[test]
fn sweep_over_h() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = cli(&[
        "sweep",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
        "--axis",
        "h",
        "--values",
        "0.5,0.4,0.3",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(stdout(&o).contains("PASS sweep_exponent_law"));
}

#[test]
fn simulate_writes_exits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace(
        "[langevin]\nenabled = false",
        "[langevin]\nh = 0.8\nn = 200\ndt_halving = false",
    );
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = cli(&[
        "simulate",
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
    ]);
    let exits = fs::read_to_string(out.join("exits.csv")).unwrap();
    assert!(exits.starts_with("index,tau,x,y,patch,restarts\n"));
    assert_eq!(exits.lines().count(), 201);
    assert!(stdout(&o).contains("mc_ks"), "{}", stdout(&o));
}

#[test]
fn rates_and_agmon_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = cli(&["rates", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let rates = fs::read_to_string(out.join("rates.csv")).unwrap();
    assert!(rates
        .starts_with("h,saddle,barrier,prefactor,rate,probability,lambda_asym,mixed_eig_asym\n"));
    assert_eq!(rates.lines().count(), 1 + 2 * 4);

    let o = cli(&["agmon", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let mut rdr = csv::Reader::from_path(out.join("agmon_field.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "y", "d_a"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101 * 101);
    let origin = rows
        .iter()
        .find(|r| r[0].abs() < 1e-12 && r[1].abs() < 1e-12)
        .unwrap();
    assert_eq!(origin[2], 0.0);
    let boundary = fs::read_to_string(out.join("agmon_boundary.csv")).unwrap();
    assert_eq!(boundary.lines().count(), 5);
}
