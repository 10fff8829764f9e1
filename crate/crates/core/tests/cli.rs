use netjacobi::net::NetName;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_netjacobi"));
    cmd.args(args).env_remove("NETJACOBI_CATALOG_DIR");
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

#[test]
fn list_reports_ten_nets() {
    let a = run(&["list", "--json"], None);
    assert_eq!(a.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().filter(|r| r["polyhedral"] == true).count(), 8);
    let text = run(&["list"], None);
    assert_eq!(stdout(&text).lines().count(), 10);
    assert_eq!(text.stdout, run(&["list"], None).stdout);
}

#[test]
fn reports_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in NetName::ALL {
        let name = name.as_str();
        let one = run(&["report", name, "--json"], Some(1));
        assert_eq!(one.status.code(), Some(0), "{name}");
        let four = run(&["report", name, "--json"], Some(4));
        assert_eq!(one.stdout, four.stdout, "{name}: thread count changed the report");
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &one.stdout).unwrap();
        } else {
            let want = std::fs::read(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
            assert!(want == one.stdout, "{name}: report differs from golden file");
        }
    }
}

#[test]
fn report_contents() {
    let tet: serde_json::Value =
        serde_json::from_slice(&run(&["report", "tetrahedron", "--json"], None).stdout).unwrap();
    assert!(tet["stationarity_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(tet["edge_lengths"][0]["degrees"], 109.471);
    assert_eq!(tet["integrability"]["integrable"], true);
    assert_eq!(tet["multiplicity_1"], 3);

    let susp: serde_json::Value =
        serde_json::from_slice(&run(&["report", "y_suspension", "--json"], None).stdout).unwrap();
    assert_eq!(susp["polyhedral"], false);
    assert!(susp["integrability"].is_null());
    assert!(susp["note"].as_str().unwrap().contains("skipped"));

    let wide: serde_json::Value =
        serde_json::from_slice(&run(&["report", "tetrahedron", "--codim", "3", "--json"], None).stdout).unwrap();
    assert_eq!(wide["integrability"]["dim_solutions"], 9);
    assert_eq!(wide["integrability"]["dim_rotations"], 9);
    assert_eq!(wide["integrability"]["integrable"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["report", "no_such_net"], None).status.code(), Some(2));
    assert_eq!(run(&["spine", "--lambda", "-1"], None).status.code(), Some(2));
    assert_eq!(run(&["spine", "--rho", "2"], None).status.code(), Some(2));
    assert_eq!(run(&["integrability", "great_circle"], None).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(run(&["spine", "--sweep"], None).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"ambient_dim": 3, "vertices": [[1, 0, 0]], "arcs": [{"from": 0, "to": 4}]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--file", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("arc 0"));

    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"ambient_dim": 3, "vertice": []}"#).unwrap();
    let out = run(&["validate", "--file", typo.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertice"));
}

#[test]
fn validate_file_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tet.json");
    let tet = netjacobi::net::catalog(NetName::Tetrahedron).unwrap();
    std::fs::write(&path, tet.to_json()).unwrap();
    let out = run(&["validate", "--file", path.to_str().unwrap(), "--json"], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stationary"], true);

    let out = run(&["spectrum", "tetrahedron", "--json", "--lambda-max", "200"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["eigenvalues"][0]["multiplicity"], 3);
    let count = v["weyl"]["count"].as_f64().unwrap();
    let predicted = v["weyl"]["predicted"].as_f64().unwrap();
    assert!((count - predicted).abs() <= 4.0);
}

#[test]
fn spine_dump_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = run(&["spine", "--samples", "5", "--dump", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("r,gamma,dgamma\n"));
    assert!(text.lines().count() > 10);
}
