use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_deskalg"));
    c.env_remove("DESKALG_BUDGET");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn out_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("deskalg-cli-{}-{}.json", std::process::id(), tag))
}

fn run(file: &Path, out: &Path, seed: u64, budget: Option<u64>) -> Output {
    let mut c = bin();
    c.arg("run").arg(file).arg("--out").arg(out).arg("--seed").arg(seed.to_string());
    if let Some(b) = budget {
        c.arg("--budget").arg(b.to_string());
    }
    c.output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn group_cohomology_of_z3_has_unit_dimensions() {
    let out = out_path("groupcoh");
    let o = run(&scenario("groupcoh_z3_f3.json"), &out, 1, None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "1");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["dims"], serde_json::json!([1, 1, 1, 1, 1]));
}

#[test]
fn limit_tor_for_one_factor_is_exterior() {
    let out = out_path("limit");
    let o = run(&scenario("limit_tor_s1_d1_p2.json"), &out, 1, None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["limit_ranks"], serde_json::json!([1, 1, 0, 0, 0]));
    assert_eq!(r["result"]["stabilized"], true);
}

#[test]
fn every_scenario_maps_to_its_exit_code() {
    let cases = [
        ("cg.json", 0),
        ("ci_explicit.json", 0),
        ("ci_generated.json", 0),
        ("doldkan.json", 0),
        ("numerology.json", 0),
        ("pairing.json", 0),
        ("patch_s2_d1_p3.json", 0),
        ("selmer.json", 0),
        ("tor_koszul.json", 0),
        ("tor_nonregular.json", 1),
        ("malformed.json", 2),
        ("patch_unstable.json", 4),
    ];
    for (name, code) in cases {
        let out = out_path(&format!("code-{}", name));
        let o = run(&scenario(name), &out, 7, None);
        assert_eq!(o.status.code(), Some(code), "{}: {}", name, String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    for name in ["pairing.json", "ci_generated.json", "patch_s2_d1_p3.json", "doldkan.json"] {
        let (a, b) = (out_path(&format!("det-a-{}", name)), out_path(&format!("det-b-{}", name)));
        assert_eq!(run(&scenario(name), &a, 42, None).status.code(), Some(0));
        assert_eq!(run(&scenario(name), &b, 42, None).status.code(), Some(0));
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{}", name);
    }
}

#[test]
fn tiny_budget_exits_with_budget_code() {
    let out = out_path("budget");
    let o = run(&scenario("groupcoh_z3_f3.json"), &out, 1, Some(10));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn environment_budget_overrides_flag() {
    let out = out_path("env");
    let o = bin()
        .env("DESKALG_BUDGET", "10")
        .args(["run", scenario("groupcoh_z3_f3.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "1", "--budget", "100000000"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_input_and_bad_json_are_input_errors() {
    let out = out_path("missing");
    assert_eq!(run(Path::new("/nonexistent/scenario.json"), &out, 1, None).status.code(), Some(2));
    let bad = out_path("bad-input");
    std::fs::write(&bad, b"{\"schema\": \"2\", \"kind\": \"groupcoh\"}").unwrap();
    assert_eq!(run(&bad, &out, 1, None).status.code(), Some(2));
    std::fs::write(&bad, b"not json").unwrap();
    assert_eq!(run(&bad, &out, 1, None).status.code(), Some(2));
}

#[test]
fn selftest_runs_every_suite() {
    let o = bin().arg("selftest").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for suite in ["finite_local_ring", "chain_complex", "resolutions_tor", "group_cochains", "local_conditions", "dold_kan", "deformation_calculus", "patching", "cli"] {
        assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains(suite)), "{}", suite);
    }
}

#[test]
fn selftest_filter_and_budget() {
    let o = bin().args(["selftest", "--filter", "dold_kan"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
    let o = bin().args(["selftest", "--filter", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["selftest", "--budget", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).lines().all(|l| l.starts_with("SKIPPED")));
}
