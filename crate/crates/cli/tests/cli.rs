use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gbcurv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("GBCURV_JOBS").output().expect("spawn gbcurv")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn row<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["rows"].as_array().unwrap().iter().find(|r| r["id"] == id).unwrap_or_else(|| panic!("no row {id}"))
}

#[test]
fn sphere_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s4.json", r#"{"manifold":{"model":"sphere","n":4,"radius":1}}"#);
    let out = run(&["invariants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let h4 = r["entries"][0]["gauss_bonnet"][2].as_f64().unwrap();
    assert!((h4 - 6.0).abs() < 1e-12);
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn flat_torus_invariants_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"manifold":{"model":"flat_torus","n":6,"side":1},"points":[[0.1,0.2,0.3,0.4,0.5,0.6]]}"#,
    );
    let r = json(&run(&["invariants", "--config", cfg.to_str().unwrap()]));
    let gb = r["entries"][0]["gauss_bonnet"].as_array().unwrap();
    assert_eq!(gb.len(), 4);
    for h in &gb[1..] {
        assert!(h.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn thin_product_sign_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"manifold":{"model":"product","factors":[{"model":"sphere","n":3,"radius":0.1},{"model":"sphere","n":2,"radius":1}]}}"#,
    );
    let r = json(&run(&["invariants", "--config", cfg.to_str().unwrap()]));
    let s = &r["entries"][0]["signs"];
    assert_eq!(s["sigma2_negative"], true);
    assert_eq!(s["h4_positive"], true);
    assert_eq!(s["ricci_positive"], true);
    assert_eq!(s["einstein_tensor_positive"], true);
}

#[test]
fn explicit_metric_at_centre() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"manifold":{"metric":[["1","0","0"],["0","1","0"],["0","0","1"]],"lo":[0,0,0],"hi":[1,1,1],"periodic":[true,true,true]}}"#,
    );
    let out = run(&["invariants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["entries"][0]["point"], serde_json::json!([0.5, 0.5, 0.5]));
}

#[test]
fn newton_suite_passes() {
    let out = run(&["verify", "--suite", "newton", "--n", "4..6", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["summary"]["fail"], 0);
    assert!(r["summary"]["max_residual"]["newton-formula"].as_f64().unwrap() < 1e-9);
}

#[test]
fn corrupted_star_fails_with_exit_1() {
    let out = run(&["verify", "--suite", "algebra", "--n", "4,5", "--trials", "3", "--debug-corrupt-star"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert!(r["summary"]["fail"].as_u64().unwrap() > 0);
    assert_eq!(row(&r, "star-involution")["status"], "fail");
    assert_eq!(row(&r, "adjointness")["status"], "pass");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = ["a", "b", "c"].iter().map(|s| dir.path().join(format!("{s}.json"))).collect();
    let args = ["verify", "--suite", "curvature-identities", "--n", "4..6", "--trials", "10"];
    for (p, jobs) in paths.iter().zip(["1", "4", "4"]) {
        let mut a = args.to_vec();
        a.extend(["--jobs", jobs, "--out", p.to_str().unwrap()]);
        assert_eq!(run(&a).status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert_eq!(a, std::fs::read(&paths[2]).unwrap());
}

#[test]
fn jobs_from_environment() {
    let args = ["verify", "--suite", "algebra", "--n", "4", "--trials", "4"];
    let a = bin().args(args).env("GBCURV_JOBS", "1").output().unwrap();
    let b = bin().args(args).env("GBCURV_JOBS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_opt_in() {
    let args = ["verify", "--suite", "algebra", "--n", "4", "--trials", "2"];
    let plain = json(&run(&args));
    assert!(plain["summary"].get("wall_time_s").is_none());
    let mut a = args.to_vec();
    a.push("--timing");
    assert!(json(&run(&a))["summary"]["wall_time_s"].as_f64().is_some());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"trials": 3, "sed": 1}"#);
    assert_eq!(run(&["verify", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
    let model = write(dir.path(), "m.json", r#"{"manifold":{"model":"sphere","n":4,"radius":1,"colour":2}}"#);
    assert_eq!(run(&["invariants", "--config", model.to_str().unwrap()]).status.code(), Some(2));
    let wrong = write(dir.path(), "w.json", r#"{"command":"conformal"}"#);
    assert_eq!(run(&["verify", "--config", wrong.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--n", "13"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--fd-order", "3"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["invariants"]).status.code(), Some(2));
    let field = write(dir.path(), "f.json", r#"{"manifold":{"model":"flat_torus","n":4,"side":1},"f":"sin(x7)"}"#);
    assert_eq!(run(&["conformal", "--config", field.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn conformal_n4_rows_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t4.json",
        r#"{"manifold":{"model":"flat_torus","n":4,"side":6.283185307179586},"phi":"0.05*cos(x1 + x2)","samples":4}"#,
    );
    let out = run(&["conformal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(row(&r, "conformal-operator-mean")["status"], "pass");
    assert_eq!(row(&r, "cocycle")["status"], "pass");
    assert!(r["evaluations"].as_array().unwrap().iter().any(|e| e["name"] == "conformal_operator"));
}

#[test]
fn conformal_n5_homothety_and_k_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t5.json",
        r#"{"manifold":{"model":"flat_torus","n":5,"side":6.283185307179586},"v":"1.2 + 0.1*sin(x1)","a":"2","samples":4}"#,
    );
    let out = run(&["conformal", "--config", cfg.to_str().unwrap()]);
    let r = json(&out);
    assert!(row(&r, "k-equation")["residual"].as_f64().unwrap() < 1e-4);
    assert!(row(&r, "bidegree-covariance")["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(row(&r, "ricci-change-total-functional")["status"], "pass");
    // The displayed Ricci-change form does not hold; its row fails and so does the run.
    assert_eq!(row(&r, "ricci-change-as-displayed")["status"], "fail");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_positive_factor_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "neg.json",
        r#"{"manifold":{"model":"flat_torus","n":5,"side":6.283185307179586},"v":"0.1 + sin(x1)"}"#,
    );
    let out = run(&["conformal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("non-positive conformal factor") && err.contains('['), "{err}");
}

#[test]
fn list_identities_covers_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ids.json");
    assert_eq!(run(&["list-identities", "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let r: Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
    let ids = r["identities"].as_array().unwrap();
    assert_eq!(ids.len(), gbcurv::verify::CATALOG.len());
    assert!(ids.iter().all(|i| !i["anchor"].as_str().unwrap().is_empty()));
}
