use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MODEL: &str = r#"{"n":3,"s":1.0,"omega":0.0,"epsilon":[-1.0,0.0,1.0],"signs":[1,-1,1]}"#;
const SOLITON: &str = r#"{"x0":[{"re":0.5,"im":0.0},{"re":0.0,"im":0.5}]}"#;

fn jcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcg"))
        .args(args)
        .env_remove("JCG_LOG")
        .output()
        .unwrap()
}

fn setup() -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let s = dir.path().join("sol.json");
    std::fs::write(&m, MODEL).unwrap();
    std::fs::write(&s, SOLITON).unwrap();
    (dir, m, s)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn re_im(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn bethe_report() {
    let (_d, m, _) = setup();
    let out = jcg(&["bethe", "--config", p(&m)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 4);
    let (sr, si) = roots.iter().map(re_im).fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert!(sr.abs() < 1e-12 && si.abs() < 1e-12);
    assert_eq!(v["williamson"]["mff"], 2);
    assert_eq!(v["pairing"], serde_json::json!([2, 3, 0, 1]));
}

#[test]
fn exit_codes() {
    let (d, m, _) = setup();
    assert_eq!(jcg(&["bethe"]).status.code(), Some(2));
    assert_eq!(jcg(&["bethe", "--config", "/nonexistent/m.json"]).status.code(), Some(1));
    let bad = d.path().join("bad.json");
    std::fs::write(&bad, r#"{"n":1,"s":1,"omega":0,"epsilon":[0],"signs":[1],"extra":1}"#).unwrap();
    assert_eq!(jcg(&["bethe", "--config", p(&bad)]).status.code(), Some(1));
    let neg = d.path().join("neg.json");
    std::fs::write(&neg, r#"{"n":1,"s":-1,"omega":0,"epsilon":[0],"signs":[1]}"#).unwrap();
    assert_eq!(jcg(&["bethe", "--config", p(&neg)]).status.code(), Some(1));
    assert_eq!(jcg(&["invariants", "--config", p(&m), "--focus", "5"]).status.code(), Some(2));

    let st = d.path().join("st.json");
    std::fs::write(&st, r#"{"b":{"re":0.1,"im":0.0},"spins":[[0,0,1],[0,0,-1],[0.6,0,0.8]]}"#).unwrap();
    let tri = d.path().join("tri.json");
    std::fs::write(&tri, r#"[{"re":0,"im":0},{"re":1,"im":-0.5},{"re":0.5,"im":0.5}]"#).unwrap();
    let cycle = format!("B:{}", p(&tri));
    let out = jcg(&["actions", "--config", p(&m), "--state", p(&st), "--cycle", &cycle]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_deterministic_and_atomic() {
    let (d, m, s) = setup();
    let a = d.path().join("a.json");
    let b = d.path().join("b.json");
    for f in [&a, &b] {
        let out = jcg(&["soliton", "--config", p(&m), "--soliton", p(&s), "--times", "0.1,-0.2,0.3,0", "--out", p(f)]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // the reconstructed state feeds back in as a state file
    let out = jcg(&["normal", "--config", p(&m), "--state", p(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["mismatch"].as_f64().unwrap() < 1e-10);

    let zero = d.path().join("zero.json");
    std::fs::write(&zero, r#"{"x0":[{"re":0,"im":0},{"re":0,"im":0.5}]}"#).unwrap();
    let c = d.path().join("c.json");
    let out = jcg(&["soliton", "--config", p(&m), "--soliton", p(&zero), "--times", "0,0,0,0", "--out", p(&c)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!c.exists());
    assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 5);
}

#[test]
fn evolve_csv_conserves_hamiltonians() {
    let (d, m, _) = setup();
    let st = d.path().join("st.json");
    std::fs::write(&st, r#"{"b":{"re":0.3,"im":-0.2},"spins":[[0,0.6,0.8],[1,0,0],[0,0,-1]]}"#).unwrap();
    let out = jcg(&["evolve", "--config", p(&m), "--state", p(&st), "--duration", "2", "--samples", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3 + 9 + 4);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        for k in 12..16 {
            assert!((r[k] - rows[0][k]).abs() < 1e-8);
        }
    }
}

#[test]
fn reproduce_one_spin() {
    let out = jcg(&["reproduce", "one-spin"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("PASS").count(), 4);
    assert!(text.contains("5 log2"));
}

#[test]
fn reproduce_fig3_endpoints() {
    let out = jcg(&["reproduce", "fig3", "--samples", "41"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 41);
    let e1 = (-0.6917755348328486, 0.4780725787924609);
    let d = |x: f64, y: f64, e: (f64, f64)| (x - e.0).hypot(y - e.1);
    let first = &rows[0];
    let last = &rows[40];
    assert!(d(first[1], first[2], e1) < 1e-3);
    assert!(d(first[5], first[6], (e1.0, -e1.1)) < 1e-3);
    assert!(d(last[1], last[2], (e1.0, -e1.1)) < 1e-3);
    assert!(d(last[5], last[6], e1) < 1e-3);
}

#[test]
fn invariants_and_monodromy() {
    let (_d, m, _) = setup();
    let out = jcg(&["invariants", "--config", p(&m)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rho = v["rho"].as_f64().unwrap();
    let gamma = v["gamma"].as_f64().unwrap();
    let out = jcg(&["monodromy", "--config", p(&m), "--samples", "1024"]);
    let w: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((w["value"].as_f64().unwrap() - rho * gamma.sin()).abs() < 1e-6 * rho);
    let out = jcg(&["inout", "--config", p(&m), "--c1", "1e-5+0i"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let (a, b) = re_im(&r["phi0"]);
    let (c, e) = re_im(&r["phi0_predicted"]);
    assert!((a - c).hypot(b - e) < 0.05 * c.hypot(e));
}
