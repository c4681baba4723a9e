//! The files under `golden/` must be reproduced byte for byte by the current binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

fn run(args: &[&str]) -> String {
    let o = Command::new(env!("CARGO_BIN_EXE_codeswitch")).args(args).output().expect("binary runs");
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn same(a: &Path, b: &Path) {
    let (x, y) = (fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
    assert!(x == y, "{} differs from {}", a.display(), b.display());
}

#[test]
fn golden_outputs_reproduce() {
    let g = golden();
    let dir = tempfile::TempDir::new().unwrap();
    let out = dir.path();
    let o = |p: &str| out.join(p).to_str().unwrap().to_string();
    run(&["build", "--config", g.join("build.json").to_str().unwrap(), "--out", &o("")]);
    for f in ["toric3.bundle", "toric2.bundle", "qg2.bundle", "qg2_to_toric2.schedule.csv", "ring2.ccz.csv", "manifest.json"] {
        same(&g.join(f), &out.join(f));
    }
    fs::copy(g.join("sim.json"), out.join("sim.json")).unwrap();
    run(&["sim", "--config", &o("sim.json"), "--out-dir", &o("sim")]);
    same(&g.join("sim/results.csv"), &out.join("sim/results.csv"));
    same(&g.join("sim/summary.json"), &out.join("sim/summary.json"));
    run(&["scan", "confinement", "--bundle", &o("toric3.bundle"), "--t", "2", "--out", &o("conf.csv")]);
    same(&g.join("confinement_toric3_t2.csv"), &out.join("conf.csv"));
    let report = run(&["verify", g.join("manifest.json").to_str().unwrap()]);
    let expected = fs::read_to_string(g.join("verify_report.json")).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("\"path\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&report), strip(&expected));
}
