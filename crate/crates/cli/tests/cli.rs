use std::path::Path;
use std::process::{Command, Output};

fn photon_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-sim"))
        .args(args)
        .env_remove("PHOTON_SIM_OUT_DIR")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().expect("header").split(',').map(str::to_string).collect();
        let rows = lines
            .map(|l| l.split(',').map(|c| if c.is_empty() { None } else { Some(c.parse().unwrap()) }).collect())
            .collect();
        Self { header, rows }
    }

    fn get(&self, row: usize, col: &str) -> Option<f64> {
        let j = self.header.iter().position(|h| h == col).unwrap_or_else(|| panic!("no column {col}"));
        self.rows[row][j]
    }
}

fn stdout_table(args: &[&str]) -> Table {
    let out = photon_sim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Table::parse(&String::from_utf8(out.stdout).unwrap())
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("stderr has an error record");
    serde_json::from_str(last).expect("error record is JSON")
}

#[test]
fn dsv_at_moderate_squeezing() {
    let t = stdout_table(&["run", "dsv", "--r", "0.36"]);
    assert_eq!(t.rows.len(), 1);
    let p = t.get(0, "herald_prob").unwrap();
    assert!((p - 0.105).abs() < 1e-3, "{p}");
    assert!((t.get(0, "purity").unwrap() - 1.0).abs() < 1e-10);
    assert!(t.get(0, "abs_diff").unwrap() < 1e-8);
}

#[test]
fn dsv_without_squeezing_never_heralds() {
    let t = stdout_table(&["run", "dsv", "--r", "0"]);
    assert_eq!(t.get(0, "herald_prob"), Some(0.0));
    assert_eq!(t.get(0, "purity"), None);
}

#[test]
fn three_copy_gives_one_photon() {
    let t = stdout_table(&["run", "three-copy", "--phi", "1.5708", "--nu", "0.7854"]);
    assert!((t.get(0, "purity").unwrap() - 1.0).abs() < 1e-10);
    assert!(t.get(0, "vacuum_prob").unwrap() < 1e-20);
    assert!(t.get(0, "abs_diff").unwrap() < 1e-12);
}

#[test]
fn perturbed_run_matches_series() {
    let t = stdout_table(&["run", "perturbed-bs", "--delta1", "0.2", "--delta2", "-0.1"]);
    assert!(t.get(0, "abs_diff").unwrap() < 1e-8);
    assert!(t.get(0, "purity").unwrap() < 1.0);
}

#[test]
fn optimize_finds_asinh_one() {
    let t = stdout_table(&["run", "optimize"]);
    assert!((t.get(0, "r_star").unwrap() - 1f64.asinh()).abs() < 1e-5);
    assert!((t.get(0, "herald_prob").unwrap() - 0.25).abs() < 1e-10);
}

#[test]
fn eta_sweep_has_figure_endpoints() {
    let t = stdout_table(&["sweep", "eta"]);
    assert_eq!(t.rows.len(), 51);
    assert_eq!(
        t.header,
        ["eta", "herald_prob", "purity", "closed_form_herald_prob", "closed_form_purity", "abs_diff", "leakage"]
    );
    assert_eq!(t.get(0, "eta"), Some(0.0));
    assert_eq!(t.get(0, "herald_prob"), Some(0.0));
    assert_eq!(t.get(50, "eta"), Some(1.0));
    assert!((t.get(50, "herald_prob").unwrap() - 0.25).abs() < 1e-10);
    assert!((t.get(50, "purity").unwrap() - 1.0).abs() < 1e-10);
    for i in 0..51 {
        assert!(t.get(i, "abs_diff").unwrap() < 1e-8);
        for col in ["herald_prob", "purity"] {
            if let Some(p) = t.get(i, col) {
                assert!((0.0..=1.0).contains(&p), "{col} = {p}");
            }
        }
    }
}

#[test]
fn dark_sweep_without_dark_counts_matches_eta_sweep() {
    let eta = stdout_table(&["sweep", "eta", "--points", "11"]);
    let dark = stdout_table(&["sweep", "dark", "--points", "11"]);
    assert_eq!(dark.rows.len(), 121);
    for i in 0..11 {
        // p_d = 0 is the first point of each η block
        let j = 11 * i;
        assert_eq!(dark.get(j, "p_dark"), Some(0.0));
        assert_eq!(dark.get(j, "eta"), eta.get(i, "eta"));
        assert_eq!(dark.get(j, "herald_prob"), eta.get(i, "herald_prob"));
        assert_eq!(dark.get(j, "purity"), eta.get(i, "purity"));
    }
}

#[test]
fn axis_overrides() {
    let t = stdout_table(&["sweep", "perturbed", "--points", "3", "--axis1", "-0.2:0.2", "--axis2", "0:0.1"]);
    assert_eq!(t.rows.len(), 9);
    assert_eq!(t.get(0, "delta1"), Some(-0.2));
    assert_eq!(t.get(8, "delta2"), Some(0.1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        let out = photon_sim(&["sweep", "dark", "--points", "7", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert!(!a.contains(&b'\r'));
}

#[test]
fn json_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eta.json");
    let out = photon_sim(&["sweep", "eta", "--points", "5", "--r", "0.5", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["config"]["command"], "sweep");
    assert_eq!(doc["config"]["target"], "eta");
    assert_eq!(doc["config"]["params"]["r"], 0.5);
    assert_eq!(doc["result"]["kind"], "eta");
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 5);
    assert_eq!(doc["result"]["metadata"]["r"], 0.5);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested");
    let out = Command::new(env!("CARGO_BIN_EXE_photon-sim"))
        .args(["run", "dsv", "--r", "0.3"])
        .env("PHOTON_SIM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = target.join("dsv.csv");
    assert!(Path::new(&written).exists());
    let t = Table::parse(&std::fs::read_to_string(written).unwrap());
    assert_eq!(t.get(0, "r"), Some(0.3));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let out = photon_sim(&["run", "fig7"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "usage");
    assert!(out.stdout.is_empty());
}

#[test]
fn inapplicable_parameter_is_rejected() {
    let out = photon_sim(&["run", "dsv", "--phi", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "invalid-argument");
    assert!(rec["message"].as_str().unwrap().contains("--phi"));
}

#[test]
fn singular_angles_are_invalid() {
    let out = photon_sim(&["run", "three-copy", "--phi", "1.0", "--nu", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn leakage_violation_exits_three() {
    let out = photon_sim(&["run", "dsv", "--r", "1.2", "--cutoff", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"], "leakage-exceeded");
}
