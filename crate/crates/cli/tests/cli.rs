use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn netbec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netbec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn report(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

#[test]
fn classify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = netbec(&["classify-walk", "--builtin", "z1", "--nmax", "400"], dir.path());
    assert!(o.status.success());
    let j = report(dir.path(), "walk.json");
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["config"]["nmax"], 400);
    assert_eq!(j["config"]["seed"], 0);
    assert_eq!(j["result"]["classification"]["verdict"], "recurrent");
    let csv = fs::read_to_string(dir.path().join("walk.csv")).unwrap();
    assert!(csv.starts_with("n,q,p,cumulative_q,mc_q,mc_q_sigma\n"));
    assert_eq!(csv.lines().count(), 402);
    let timing = report(dir.path(), "timing.json");
    assert!(timing["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn user_graph_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "graph 4\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 0\n").unwrap();
    let out = dir.path().join("o");
    let o = netbec(&["classify-walk", "--graph", g.to_str().unwrap(), "--nmax", "100", "--seed", "9"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = report(&out, "walk.json");
    assert_eq!(j["result"]["monte_carlo"]["seed"], 9);
    assert_eq!(j["result"]["classification"]["verdict"], "recurrent");
}

#[test]
fn bec_report_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let o = netbec(&["bec-report", "--builtin", "z2", "--rho", "0.5", "--stages", "4,8,16"], dir.path());
    assert!(o.status.success());
    let j = report(dir.path(), "bec.json");
    assert_eq!(j["result"]["regime"], "normal");
    assert!(j["result"]["rho_bar"].is_null());

    let o = netbec(&["bec-report", "--builtin", "z3", "--rho", "0.0336", "--stages", "4..6"], dir.path());
    assert!(o.status.success());
    let j = report(dir.path(), "bec.json");
    assert_eq!(j["result"]["regime"], "normal");
    assert!(j["result"]["infinite_volume"]["z"].as_f64().unwrap() < 1.0);

    let o = netbec(&["bec-report", "--builtin", "z3", "--rho", "0.1345", "--stages", "4..8"], dir.path());
    assert!(o.status.success());
    let j = report(dir.path(), "bec.json");
    assert_eq!(j["result"]["regime"], "condensed");
    let frac = j["result"]["condensate"]["expected"].as_f64().unwrap();
    assert!((frac - 0.0672487).abs() < 1e-5, "{frac}");
    let csv = fs::read_to_string(dir.path().join("stages.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn bloch_bands_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbec(&["bloch-bands", "--builtin", "z1"], dir.path()).status.success());
    let j = report(dir.path(), "bloch.json");
    assert_eq!(j["result"]["criterion"]["verdict"], "no_bec");
    assert!(!j["result"]["criterion"]["power_fit"].is_null());
    assert!(j["result"]["rho_beta"].is_null());

    assert!(netbec(&["bloch-bands", "--builtin", "z3", "--grid", "8"], dir.path()).status.success());
    let j = report(dir.path(), "bloch.json");
    assert_eq!(j["result"]["criterion"]["verdict"], "bec_possible");
    assert!((j["result"]["rho_beta"].as_f64().unwrap() - 0.0672513).abs() < 1e-6);
    let csv = fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert!(csv.starts_with("p1,p2,p3,e1\n"));
    assert_eq!(csv.lines().count(), 1 + 512);
}

#[test]
fn potential_adds_sandwich() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.txt");
    fs::write(&v, "0.5 2.0 # two orbits\n").unwrap();
    let out = dir.path().join("o");
    let o = netbec(&["bloch-bands", "--builtin", "cubic2", "--potential", v.to_str().unwrap(), "--grid", "8"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = report(&out, "bloch.json");
    assert_eq!(j["result"]["sandwich"]["m2_line_holds"], true);
    assert!(j["result"]["sandwich"]["m"].as_f64().unwrap() > 1.0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["bloch-bands", "--builtin", "comb2d"],
        &["bec-report", "--builtin", "z3"],
        &["bec-report", "--builtin", "z3", "--rho", "-1"],
        &["classify-walk", "--builtin", "z7"],
        &["classify-walk", "--builtin", "z1", "--lattice", "x.json"],
        &["classify-walk"],
    ];
    for args in cases {
        let o = netbec(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn lattice_file_and_non_periodic_input() {
    let dir = tempfile::tempdir().unwrap();
    let lat = dir.path().join("lat.json");
    fs::write(
        &lat,
        r#"{"nu": 1, "fundamental_vertices": 2, "internal_edges": [[0, 1]], "bridge_edges": [[0, 0, [1]], [1, 1, [1]]]}"#,
    )
    .unwrap();
    let o = netbec(&["bloch-bands", "--lattice", lat.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(dir.path(), "bloch.json")["result"]["criterion"]["verdict"], "no_bec");

    let g = dir.path().join("g.txt");
    fs::write(&g, "graph 3\nedge 0 1\nedge 1 2\n").unwrap();
    let o = netbec(&["bloch-bands", "--graph", g.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
