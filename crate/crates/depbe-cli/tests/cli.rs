use std::path::Path;
use std::process::{Command, Output};

fn depbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depbe")).args(args).output().expect("run depbe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bounds_csv_header_and_row_order() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"n":1000000,"d":0,"v":1000,"moments":[{"delta":3,"a":1000000}]}"#);
    let o = depbe(&["bounds", "--profile", &p]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "theorem_id,raw,clamped,branch,valid,notes");
    let ids: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["linfty", "linfty_refined", "delta_ge3", "delta_2_3"]);
    assert!(lines[1].contains("false") && lines[1].contains("missing moment: L"));
    assert!(lines[3].starts_with("delta_ge3,3.3716177614"));
}

#[test]
fn bounds_from_spec_with_baselines_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let o = depbe(&["generate", "--kind", "clique", "--blocks", "1000", "--size", "4", "--out", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = dir.path().join("b.csv");
    let o = depbe(&["bounds", "--spec", spec.to_str().unwrap(), "--all", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    for id in ["linfty", "fmn_corollary30", "rinott", "penrose", "chen_shao", "fmn_thm39", "stein_w1", "classical_be"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{id},"))), "{id} missing");
    }
}

#[test]
fn json_format_for_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"n":100,"d":1,"v":10,"l":1,"moments":[{"delta":3,"a":100}]}"#);
    let o = depbe(&["bounds", "--profile", &p, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bounds"][0]["theorem_id"], "linfty");
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"n\": 10,\n \"d\": ");
    let o = depbe(&["bounds", "--profile", &p]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_and_bad_args_exit_one() {
    assert_eq!(depbe(&["bounds", "--profile", "/nonexistent/p.json"]).status.code(), Some(1));
    assert_eq!(depbe(&["bounds"]).status.code(), Some(1));
    assert_eq!(depbe(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(depbe(&["--help"]).status.code(), Some(0));
}

#[test]
fn cumulant_check_is_reproducible() {
    let a = depbe(&["cumulant-check", "--count", "15", "--seed", "3"]);
    let b = depbe(&["cumulant-check", "--count", "15", "--seed", "3"]);
    let c = depbe(&["cumulant-check", "--count", "15", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().next().unwrap(), "family_id,r,delta,exact_abs_cumulant,bound,ratio,pass");
    assert!(out.lines().nth(1).unwrap().starts_with("random-0000,2,"));
}

#[test]
fn verify_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    depbe(&["generate", "--kind", "clique", "--blocks", "2500", "--out", spec.to_str().unwrap()]);
    let s = spec.to_str().unwrap();
    let run = |threads: &str| depbe(&["verify", "--spec", s, "--theorem", "linfty", "--samples", "20000", "--seed", "9", "--threads", threads]);
    let (a, b) = (run("1"), run("2"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 9);
}

#[test]
fn regimes_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("m.svg");
    let o = depbe(&[
        "regimes", "--delta-min", "3", "--delta-max", "5", "--delta-step", "1", "--alpha-step", "0.05", "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "delta,alpha,jl,cs,p,best");
    // 3 deltas x 3 alphas (0, 0.05, 0.1)
    assert_eq!(lines.len(), 1 + 9);
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn feller_check_rows() {
    let dir = tempfile::tempdir().unwrap();
    let law = write(dir.path(), "law.json", r#"[{"x":-1,"p":0.5},{"x":1,"p":0.5}]"#);
    let o = depbe(&["feller-check", "--law", &law, "--T", "1,5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "T,lhs_exact_dkol,rhs,slack");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0,0.34134474606"));
}

#[test]
fn ustat_with_explicit_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data: String = (0..50).map(|i| format!("{}\n", (i as f64 * 0.37).sin())).collect();
    let d = write(dir.path(), "x.csv", &format!("x\n{data}"));
    let o = depbe(&["ustat", "--kernel", "var", "--data", &d, "--a-delta", "5000", "--var-vn", "4e5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 50);
    assert_eq!(v["graph"]["n_vertices"], 2450.0);
    assert_eq!(v["bound"]["valid"], true);
    assert!(v["estimated"].as_array().unwrap().is_empty());

    // Xi > 1: inconsistent inputs
    let o = depbe(&["ustat", "--kernel", "var", "--data", &d, "--a-delta", "5000", "--var-vn", "4e6"]);
    assert_eq!(o.status.code(), Some(1));
    let o = depbe(&["ustat", "--kernel", "nope", "--data", &d]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn volatility_report() {
    let dir = tempfile::tempdir().unwrap();
    let times: String = (1..=40).map(|i| format!("{}\n", i as f64 * 0.5)).collect();
    let rets: String = (0..40).map(|i| format!("{}\n", ((i * 7 % 11) as f64 - 5.0) * 0.1)).collect();
    let t = write(dir.path(), "t.csv", &times);
    let r = write(dir.path(), "r.csv", &rets);
    let o = depbe(&["volatility", "--times", &t, "--returns", &r, "--delta", "7", "--K", "1.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 40);
    assert_eq!(v["t_n"], 20.0);
    assert_eq!(v["moments_estimated"], true);
    assert_eq!(v["bound"]["theorem_id"], "delta_ge3");

    let o = depbe(&["volatility", "--times", &t, "--returns", &r, "--delta", "4", "--K", "1.2"]);
    assert_eq!(o.status.code(), Some(1));
}
