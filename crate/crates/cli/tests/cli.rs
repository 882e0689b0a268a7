use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bubble-lab"));
    c.env_remove("BUBBLE_LAB_THREADS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8_lossy(&o.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "stderr: {s}");
    s.trim_end().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn family_single_member_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["family", "--profile", "ex1", "--c", "0.1", "--s1", "0.3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("family.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s1,H,V,A_lat,u_max,beta_margin");
    assert_eq!(lines.len(), 2);
    let h: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((h - 1.0 / 0.3f64.sin()).abs() < 1e-12);
    let prof = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(prof.starts_with("alpha,s,u,t\n"));
}

#[test]
fn family_rejects_s1_beyond_s0() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["family", "--profile", "ex1", "--s1", "2.0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let line = stderr_line(&o);
    assert!(line.starts_with("error[invalid-input]: "), "{line}");
    assert!(line.contains("s0"));
}

#[test]
fn family_sweep_marks_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["family", "--s1-range", "0.5:1.7:4", "--nodes", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("family.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].contains("NaN"));
    assert!(!rows[0].contains("NaN"));
}

#[test]
fn stability_reports_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["stability", "--profile", "ex1", "--c", "0.1", "--s1", "0.4", "--nodes", "400"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("stability.json"));
    assert_eq!(v["verdict"], "stable");
    for key in ["beta", "ratio", "sectors", "translation_residual"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let s = &v["sectors"][0];
    assert!(s["k"].is_u64() && s["s_parity"].is_string() && s["eigenvalues"].is_array());
}

#[test]
fn stability_alternative_beta_reading() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["stability", "--c", "0.1", "--s1", "0.4", "--nodes", "200", "--beta-reading", "phi-s-at-s1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("stability.json"));
    assert_eq!(v["beta_reading"], "phi_s_at_s1");
    assert!(v["beta"].as_f64().unwrap() > 0.0);
}

#[test]
fn flow_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["flow", "--seed", "11", "--resolution", "32", "--lemma-trials", "10"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let ta = std::fs::read(a.path().join("trajectory.csv")).unwrap();
    let tb = std::fs::read(b.path().join("trajectory.csv")).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(
        std::fs::read(a.path().join("flow.json")).unwrap(),
        std::fs::read(b.path().join("flow.json")).unwrap()
    );
    let v = json(&a.path().join("flow.json"));
    assert_eq!(v["converged"], true);
    assert_eq!(v["positivity_lemma"]["trials"]["violations"], 0);
    let head = String::from_utf8(ta).unwrap();
    assert!(head.starts_with("step,area,volume,tau_inf_over_a\n"));
}

#[test]
fn flow_rejects_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["flow", "--resolution", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    stderr_line(&o);
}

#[test]
fn bounds_writes_check_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bounds", "--s1", "0.5", "--nodes", "400"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(text.starts_with("inequality,applicable,margin,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(text.contains("area-below-vh-plus-base,true,"));
}

#[test]
fn embed_outputs_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["embed", "--c", "0.1", "--samples", "41", "--n-theta", "12"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let obj = std::fs::read_to_string(dir.path().join("y.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 41 * 12);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 40 * 12);

    let o = run(&["embed", "--c", "1", "--interval", "-1.4:1.4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).starts_with("error[invalid-input]:"));
}

#[test]
fn spec_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("run.spec");
    std::fs::write(&spec, "command = family\nprofile = ex2\nc = 0.2\ns1 = 0.3\nnodes = 200\n").unwrap();
    let o = bin()
        .arg("--spec")
        .arg(&spec)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("family.csv")).unwrap();
    let h: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((h - 1.0 / (0.3 - 0.027)).abs() < 1e-12);
}

#[test]
fn bad_input_paths_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["family", "--profile", "nope", "--s1", "0.3"],
        vec!["family", "--c", "-1", "--s1", "0.3"],
        vec!["stability", "--s1", "0.3", "--v", "1"],
        vec!["frobnicate"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr_line(&o).starts_with("error["));
    }
    let o = bin()
        .env("BUBBLE_LAB_THREADS", "zero")
        .args(["family", "--s1", "0.3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sampled_profile_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.csv");
    let mut text = String::from("s,phi\n");
    for i in 0..=300 {
        let s = 3.0 * i as f64 / 300.0;
        text.push_str(&format!("{s},{}\n", s.sin()));
    }
    std::fs::write(&path, text).unwrap();
    let o = run(
        &["family", "--profile", path.to_str().unwrap(), "--c", "0.1", "--s1", "0.3", "--nodes", "200"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("family.csv")).unwrap();
    let h: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((h - 1.0 / 0.3f64.sin()).abs() < 1e-4);
}
