use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eqindex::spectral_models::build_sphere_model;

fn eqindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqindex")).args(args).output().expect("binary runs")
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn sweep_writes_one_row_per_angle() {
    let out = tempfile::tempdir().unwrap();
    let cfg = scenario_dir().join("s2_rotation_sweep.toml");
    let o = eqindex(&["index", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("s2_rotation_sweep.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["label", "parameter", "value_re", "value_im", "error_bound"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let re: f64 = r[2].parse().unwrap();
        let im: f64 = r[3].parse().unwrap();
        let bound: f64 = r[4].parse().unwrap();
        assert!(re.hypot(im) <= 1e-10 + bound);
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("s2_rotation_sweep.json")).unwrap()).unwrap();
    assert_eq!(json["checks"][0]["pass"], true);
    assert_eq!(json["results"].as_array().unwrap().len(), 8);
}

#[test]
fn negative_time_exits_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "kind = \"heat_trace\"\nt = [0.1, -0.5, 1.0]\n[model]\ntype = \"sphere\"\nlmax = 2\n",
    );
    let o = eqindex(&["heat-trace", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t[1]"));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "broken.toml", "kind = \"heat_trace\"\nt = [0.1,, 0.2]\n");
    let o = eqindex(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wrong.toml",
        r#"
kind = "fixed_point_index"
[sweep]
monopole_k = 1
angles = [1.0]
[[checks]]
name = "deliberately-wrong"
expect = 5
"#,
    );
    let o = eqindex(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL deliberately-wrong"));
}

#[test]
fn kind_mismatch_and_missing_model_file() {
    let cfg = scenario_dir().join("torus_jlo.toml");
    assert_eq!(eqindex(&["index", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", "kind = \"heat_trace\"\nt = [1.0]\nmodel_file = \"absent.json\"\n");
    let o = eqindex(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model_file"));
}

#[test]
fn heat_trace_from_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_sphere_model(8, 3, &[("r".into(), 2.0)]).unwrap();
    fs::write(dir.path().join("sphere.json"), model.to_json()).unwrap();
    let cfg = write(
        dir.path(),
        "from_file.toml",
        r#"
kind = "heat_trace"
model_file = "sphere.json"
t = [0.5, 1.0, 2.0]
[[checks]]
name = "index"
label = "id"
expect = 3
"#,
    );
    let o = eqindex(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cms = scenario_dir().join("s2_half_turn_cm.toml");
    let jlo = scenario_dir().join("torus_jlo.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let o = eqindex(&[
            "run",
            "--precision",
            "exact",
            "--threads",
            threads,
            "--config",
            cms.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let o = eqindex(&["jlo-numeric", "--threads", threads, "--config", jlo.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["s2_half_turn_cm.csv", "s2_half_turn_cm.json", "torus_jlo.csv", "torus_jlo.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exact_precision_rejected_for_spectral_runs() {
    let cfg = scenario_dir().join("s2_monopole_heat.toml");
    let dir = tempfile::tempdir().unwrap();
    let o = eqindex(&["run", "--precision", "exact", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_with_filter() {
    let o = eqindex(&["verify", "--filter", "mehler"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS")).collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(out.contains("3/3 criteria passed"));
    assert_eq!(eqindex(&["verify", "--filter", "nothing-matches"]).status.code(), Some(2));
}
