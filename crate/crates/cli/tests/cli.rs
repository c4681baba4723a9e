use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn codeswitch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codeswitch")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn build(dir: &Path, cfg: &Value) -> Output {
    let c = write_json(dir, "build.json", cfg);
    codeswitch(&["build", "--config", &c, "--out", dir.join("out").to_str().unwrap()])
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn qg_config() -> Value {
    json!({
        "codes": [
            {"name": "toric2", "recipe": {"kind": "toric", "l": 2}},
            {"name": "qg2", "recipe": {"kind": "qg", "base": {"kind": "toric", "l": 2}, "graph": {"kind": "ring", "n": 2}}},
            {"name": "toric3", "recipe": {"kind": "toric", "l": 3}},
            {"name": "qg3", "recipe": {"kind": "qg", "base": {"kind": "toric", "l": 3}, "graph": {"kind": "ring", "n": 3}}}
        ],
        "schedules": [
            {"name": "qg2_to_toric2", "source": "qg2", "target": "toric2"},
            {"name": "qg3_to_toric3", "source": "qg3", "target": "toric3"}
        ]
    })
}

#[test]
fn build_toric_bundle() {
    let dir = TempDir::new().unwrap();
    let o = build(dir.path(), &json!({"codes": [{"name": "toric3", "recipe": {"kind": "toric", "l": 3}}]}));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("toric3: [[18, 2]] d_X=3 d_Z=3"), "{}", stdout(&o));
    let text = fs::read_to_string(dir.path().join("out/toric3.bundle")).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["params"]["n"], 18);
    assert_eq!(header["params"]["k"], 2);
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn rebuild_is_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let mut cfg = qg_config();
    cfg["codes"].as_array_mut().unwrap().push(json!({
        "name": "rand",
        "recipe": {"kind": "hgp2",
            "h1": {"kind": "tanner", "graph": {"kind": "random_regular", "n": 6, "degree": 3, "seed": 7}, "local": {"kind": "repetition"}},
            "h2": {"kind": "random", "n": 5, "k": 2, "seed": 3}},
        "certify_cap": 4096
    }));
    assert_eq!(code(&build(a.path(), &cfg)), 0);
    assert_eq!(code(&build(b.path(), &cfg)), 0);
    let mut names: Vec<_> = fs::read_dir(a.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        let x = fs::read(a.path().join("out").join(&n)).unwrap();
        let y = fs::read(b.path().join("out").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
}

#[test]
fn odd_degree_sum_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"codes": [{"name": "bad", "recipe": {"kind": "hgp2",
        "h1": {"kind": "tanner", "graph": {"kind": "random_regular", "n": 5, "degree": 3, "seed": 1}, "local": {"kind": "repetition"}},
        "h2": {"kind": "ring_code", "l": 3}}}]});
    let o = build(dir.path(), &cfg);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn edge_list_file_graphs() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("ring3.txt"), "3 2\n0 1\n1 2\n0 2\n").unwrap();
    let cfg = json!({"codes": [{"name": "qg", "recipe": {"kind": "qg",
        "base": {"kind": "toric", "l": 2}, "graph": {"kind": "edge_list_file", "path": "ring3.txt"}}}]});
    let o = build(dir.path(), &cfg);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("out/qg.bundle");
    assert_eq!(code(&codeswitch(&["verify", s(&out)])), 0);
}

#[test]
fn verify_fresh_bundles_and_manifest() {
    let dir = TempDir::new().unwrap();
    let o = build(dir.path(), &qg_config());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("qg2_to_toric2: 8 CNOTs"), "{}", stdout(&o));
    let v = codeswitch(&["verify", s(&dir.path().join("out/manifest.json"))]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    let report: Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["items"].as_array().unwrap().len(), 6);
    let b = codeswitch(&["verify", s(&dir.path().join("out/qg3.bundle"))]);
    assert_eq!(code(&b), 0, "{}", stdout(&b));
}

#[test]
fn flipped_bit_is_named() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &json!({"codes": [{"name": "t", "recipe": {"kind": "toric", "l": 3}}]}))), 0);
    let path = dir.path().join("out/t.bundle");
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let at = lines.iter().position(|l| *l == "# H_Z").unwrap() + 2;
    let mut row: Vec<usize> = lines[at].split(' ').map(|x| x.parse().unwrap()).collect();
    let fresh = (0..18).find(|c| !row.contains(c)).unwrap();
    row[0] = fresh;
    row.sort();
    let mut edited: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    edited[at] = row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    fs::write(&path, edited.join("\n") + "\n").unwrap();
    let o = codeswitch(&["verify", s(&path)]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failures = report["items"][0]["failures"].to_string();
    assert!(failures.contains("H_Z differs from the recipe at rows [0]"), "{failures}");
}

#[test]
fn missing_file_exits_two() {
    let o = codeswitch(&["verify", "/nonexistent/x.bundle"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn schedule_file_tamper_detected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let path = dir.path().join("out/qg2_to_toric2.schedule.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(1);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = codeswitch(&["verify", s(&dir.path().join("out/manifest.json"))]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("schedule: differs from the layer embedding"), "{}", stdout(&o));
}

#[test]
fn ccz_support_build_and_verify() {
    let dir = TempDir::new().unwrap();
    let g = json!({"kind": "ring", "n": 2});
    let c = json!({"kind": "path", "delta": 2});
    let cfg = json!({"codes": [], "ccz": [{"name": "ring2", "triple": {"graphs": [g, g, g], "locals": [c, c, c]}}]});
    let o = build(dir.path(), &cfg);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("out/ring2.ccz.csv");
    let v = codeswitch(&["verify", s(&path)]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let bad = codeswitch(&["verify", s(&path)]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("invariance failures"), "{}", stdout(&bad));
}

#[test]
fn confinement_scan_toric() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &json!({"codes": [{"name": "t", "recipe": {"kind": "toric", "l": 3}}]}))), 0);
    let bundle = dir.path().join("out/t.bundle");
    let csv = dir.path().join("conf.csv");
    let o = codeswitch(&["scan", "confinement", "--bundle", s(&bundle), "--t", "2", "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!stderr(&o).contains("warning"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("instance_id,basis,x_weight,syndrome_weight,mode,seed\n"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.iter().all(|r| r.ends_with(",exhaustive,0")));
    assert!(rows.iter().any(|r| r.contains(",X,1,2,")));
    assert!(rows.iter().any(|r| r.contains(",X,2,")));
}

#[test]
fn oversized_scan_is_sampled() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &json!({"codes": [{"name": "t", "recipe": {"kind": "toric", "l": 3}}]}))), 0);
    let bundle = dir.path().join("out/t.bundle");
    let o = codeswitch(&[
        "scan", "confinement", "--bundle", s(&bundle), "--t", "12", "--max-enumeration", "1000",
        "--samples-per-weight", "20", "--seed", "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|r| r.ends_with(",sampled,5")));
}

#[test]
fn soundness_scan_runs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let bundle = dir.path().join("out/qg2.bundle");
    let o = codeswitch(&["scan", "soundness", "--bundle", s(&bundle), "--t", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).lines().count() > 1);
}

#[test]
fn budget_exceeded_has_its_own_exit_code() {
    let o = codeswitch(&[
        "scan", "product-expansion", "--codes", r#"[{"kind":"full","delta":8},{"kind":"full","delta":8}]"#,
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn product_expansion_scan() {
    let o = codeswitch(&[
        "scan", "product-expansion", "--codes", r#"[{"kind":"repetition"},{"kind":"repetition"}]"#, "--delta", "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("delta,dims,weight,min_cost,ratio,mode,seed\n"));
    assert!(stderr(&o).contains("\"rho\""));
}

#[test]
fn unknown_scan_kind_is_usage_error() {
    let o = codeswitch(&["scan", "entropy"]);
    assert_eq!(code(&o), 2);
    let o = codeswitch(&["scan", "confinement", "--t", "2"]);
    assert_eq!(code(&o), 2);
}

fn sim_config(dir: &Path, script: Value, sizes: &[(usize, &str)], noise: Value, trials: u64) -> String {
    let sizes: Vec<Value> = sizes
        .iter()
        .map(|(l, label)| json!({"label": label, "codes": {"Q": format!("out/toric{l}.bundle"), "QG": format!("out/qg{l}.bundle")}}))
        .collect();
    write_json(
        dir,
        "sim.json",
        &json!({"seed": 11, "trials": trials, "noise": noise, "sizes": sizes, "script": script, "budgets": {"mode": "Oracle", "cap": 16384}}),
    )
}

fn memory_script() -> Value {
    json!([
        {"op": "prep_data", "reg": "d", "code": "QG"},
        {"op": "ec", "reg": "d", "rounds": 2},
        {"op": "check", "reg": "d"}
    ])
}

fn switching_script() -> Value {
    json!([
        {"op": "prep_data", "reg": "src", "code": "Q", "logical_x": [0]},
        {"op": "prep_plus3d", "reg": "g", "code": "QG"},
        {"op": "prep_zero2d", "reg": "a1", "code": "Q"},
        {"op": "expand", "src": "src", "dst": "g", "anc": "a1"},
        {"op": "ec", "reg": "g"},
        {"op": "prep_plus2d", "reg": "out", "code": "Q"},
        {"op": "prep_zero2d", "reg": "a2", "code": "Q"},
        {"op": "contract", "src": "g", "dst": "out", "anc": "a2"},
        {"op": "ec", "reg": "out"},
        {"op": "check", "reg": "out"}
    ])
}

#[test]
fn zero_noise_memory_has_no_failures() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let cfg = sim_config(dir.path(), memory_script(), &[(2, "L2")], json!([{"p": 0.0, "q": 0.0}]), 1000);
    let out = dir.path().join("res");
    let o = codeswitch(&["sim", "--config", &cfg, "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "size,p,q,trials,failures,failures_x,failures_z,metacode_failures,rate,wilson_lo,wilson_hi,mean_final_residual"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "1000");
    assert_eq!(row[4], "0");
}

#[test]
fn switching_summary_has_both_curves() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let noise = json!([{"p": 0.002, "q": 0.002}, {"p": 0.01, "q": 0.01}]);
    let cfg = sim_config(dir.path(), switching_script(), &[(2, "L2"), (3, "L3")], noise, 100);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = codeswitch(&["sim", "--config", &cfg, "--out-dir", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    for label in ["L2", "L3"] {
        let curve = summary["curves"][label].as_array().unwrap();
        assert_eq!(curve.len(), 2);
        for pt in curve {
            let (lo, hi, rate) = (pt["wilson_lo"].as_f64().unwrap(), pt["wilson_hi"].as_f64().unwrap(), pt["rate"].as_f64().unwrap());
            assert!(lo <= rate && rate <= hi);
        }
    }
    assert_eq!(code(&codeswitch(&["sim", "--config", &cfg, "--out-dir", s(&b)])), 0);
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn invalid_step_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let script = json!([{"op": "teleport", "reg": "d"}]);
    let cfg = sim_config(dir.path(), script, &[(2, "L2")], json!([{"p": 0.0, "q": 0.0}]), 10);
    let o = codeswitch(&["sim", "--config", &cfg, "--out-dir", s(&dir.path().join("res"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("script step 0"), "{}", stderr(&o));
}

#[test]
fn protocol_error_exits_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&build(dir.path(), &qg_config())), 0);
    let script = json!([{"op": "ec", "reg": "nowhere"}]);
    let cfg = sim_config(dir.path(), script, &[(2, "L2")], json!([{"p": 0.0, "q": 0.0}]), 10);
    let o = codeswitch(&["sim", "--config", &cfg, "--out-dir", s(&dir.path().join("res"))]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}
