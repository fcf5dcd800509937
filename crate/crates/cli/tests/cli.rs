use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tfic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfic")).args(args).output().expect("binary runs")
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect()
}

#[test]
fn evolve_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["evolve", "--model", "ising-rwa", "-N", "20", "--t-max", "60", "--dt", "0.02", "--measures", "mi,qd,eof,cfzz", "--output", out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let path = dir.path().join("evolve_ising-rwa_N20.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# tfic "));
    assert!(text.contains("# columns: time,cf_zz,cf_xx,mi,cc,qd,eof\n"));
    assert!(!text.contains('\r'));
    let lines = data_lines(&path);
    assert_eq!(lines[0], "time,cf_zz,cf_xx,mi,cc,qd,eof");
    assert_eq!(lines.len(), 1 + 3001);
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(v.len(), 7);
        assert!(v[1] <= 0.0 && v[2].abs() < 1e-12);
        assert!((v[3] - v[4] - v[5]).abs() < 1e-9);
    }
}

#[test]
fn evolve_full_model_dumps_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["evolve", "--model", "ising-full", "-N", "3", "--t-max", "1", "--dt", "0.5", "--output", out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let path = dir.path().join("evolve_ising-full_N3_state.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("# basis: "));
    let lines = data_lines(&path);
    assert_eq!(lines[0], "time,index,re,im");
    assert_eq!(lines.len(), 1 + 3 * 8);
    // Spin 1 flipped is the basis state 0b100.
    let first: Vec<f64> = lines[5].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first[1], 4.0);
    assert!((first[2] - 1.0).abs() < 1e-12 && first[3].abs() < 1e-12);
}

#[test]
fn scan_outputs_and_refit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["scan", "--measure", "mi", "--delta", "1e-4,1e-5", "--n", "2:40", "--output", out]);
    assert!(matches!(r.status.code(), Some(0)), "{}", String::from_utf8_lossy(&r.stderr));
    for stem in ["scan_mi_delta1e-4.csv", "scan_mi_delta1e-5.csv", "scan_summary.json"] {
        assert!(dir.path().join(stem).exists(), "{stem}");
    }
    let lines = data_lines(&dir.path().join("scan_mi_delta1e-5.csv"));
    assert_eq!(lines[0], "n_sites,startup_time");
    assert_eq!(lines.len(), 40);

    let summary = dir.path().join("scan_summary.json");
    let refit_dir = dir.path().join("refit");
    let r = tfic(&["refit", summary.to_str().unwrap(), "--output", refit_dir.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(refit_dir.join("refit_summary.json")).unwrap()).unwrap();
    assert_eq!(report["matches_input"], true);
    let stored: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(report["scans"], stored["scans"]);
}

#[test]
fn peaks_and_refit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["peaks", "--n", "20:100:10", "--measures", "mi,eof", "--output", out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let lines = data_lines(&dir.path().join("peaks_mi.csv"));
    assert_eq!(lines[0], "n_sites,peak,time,value");
    assert_eq!(lines.len(), 1 + 9 * 2);
    let summary = dir.path().join("peaks_summary.json");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(doc["fits"].as_array().unwrap().len(), 4);
    let r = tfic(&["refit", summary.to_str().unwrap(), "--output", out]);
    assert_eq!(r.status.code(), Some(0));
}

#[test]
fn validate_rwa_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["validate-rwa", "-N", "3", "--ratios", "0.1:20:200", "--output", out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let lines = data_lines(&dir.path().join("validate_rwa_N3.csv"));
    assert!(lines[0].starts_with("field_ratio,overlap_ground,overlap_first,overlap_second,full_e0,"));
    assert_eq!(lines[0].split(',').count(), 4 + 16);
    assert_eq!(lines.len(), 201);
    let last: Vec<f64> = lines[200].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(last[0], 20.0);
    assert!(last[1..4].iter().all(|&o| o > 0.999 && o <= 1.0));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["scan", "--measures", "mi,qd", "--delta", "1e-5", "--n", "2:50", "--workers", "2", "--output", out];
    assert_eq!(tfic(&args).status.code(), Some(0));
    let first: Vec<Vec<u8>> = ["scan_mi_delta1e-5.csv", "scan_qd_delta1e-5.csv", "scan_summary.json"]
        .iter()
        .map(|f| fs::read(dir.path().join(f)).unwrap())
        .collect();
    assert_eq!(tfic(&args).status.code(), Some(0));
    for (f, bytes) in ["scan_mi_delta1e-5.csv", "scan_qd_delta1e-5.csv", "scan_summary.json"].iter().zip(first) {
        assert_eq!(fs::read(dir.path().join(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["evolve", "-N", "6", "--t-max", "2", "--format", "json", "--output", out]);
    assert_eq!(r.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("evolve_ising-rwa_N6.json")).unwrap()).unwrap();
    assert_eq!(doc["columns"][3], "mi");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 101);
    assert_eq!(doc["config"]["n_sites"][0], 6);
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("n = 8\nt-max = 4.0\ndt = 0.1\noutput = \"{}\"\n", dir.path().display())).unwrap();
    let r = tfic(&["evolve", "--config", cfg.to_str().unwrap(), "--dt", "0.5"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let path = dir.path().join("evolve_ising-rwa_N8.csv");
    assert_eq!(data_lines(&path).len(), 1 + 9);
    assert!(fs::read_to_string(&path).unwrap().contains("\"dt\":0.5"));
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // Config errors.
    assert_eq!(tfic(&["scan", "--n", "1:4", "--output", out]).status.code(), Some(2));
    assert_eq!(tfic(&["scan", "--delta", "-1", "--output", out]).status.code(), Some(2));
    assert_eq!(tfic(&["evolve", "--model", "nope"]).status.code(), Some(2));
    assert_eq!(tfic(&["evolve", "--model", "ising-full", "-N", "20", "--output", out]).status.code(), Some(2));
    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "dt = \"fast\"\n").unwrap();
    let r = tfic(&["scan", "--config", bad_cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 1"));
    // Partial results: the window is too short for the longer chains.
    let r = tfic(&["scan", "--n", "2:40", "--delta", "1e-6", "--t-max", "3", "--output", out]);
    assert_eq!(r.status.code(), Some(4), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("never reached"));
}

#[test]
fn heisenberg_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = tfic(&["heisenberg", "--n", "2:30", "--output", out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let lines = data_lines(&dir.path().join("heisenberg_cfzz_delta1e-4.csv"));
    assert_eq!(lines.len(), 30);
}
