use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_varadhan"));
    c.env("VARADHAN_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json_report(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn hexagonal_is_essentially_euclidean() {
    let o = run(&["lattice", "check-ee", "--builtin", "hexagonal"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("EE: true")));
}

#[test]
fn triangular_is_not_essentially_euclidean() {
    let o = run(&["lattice", "check-ee", "--builtin", "triangular"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("EE: false")));
    let r = json_report(&["lattice", "check-ee", "--lattice", "triangular"]);
    assert_eq!(r["result"]["ee"]["essentially_euclidean"], false);
    assert_eq!(r["inputs"]["lattice"], "builtin:triangular");
}

#[test]
fn abelian_cover_of_two_loop_bouquet_has_rank_two() {
    let seed = scratch("bouquet.json");
    std::fs::write(
        &seed,
        r#"{"vertices": 1, "edges": [
            {"id": 0, "origin": 0, "target": 0, "inverse": 1},
            {"id": 1, "origin": 0, "target": 0, "inverse": 0},
            {"id": 2, "origin": 0, "target": 0, "inverse": 3},
            {"id": 3, "origin": 0, "target": 0, "inverse": 2}],
            "strictly_symmetric": true}"#,
    )
    .unwrap();
    let r = json_report(&["lattice", "abelian-cover", seed.to_str().unwrap()]);
    let v: Vec<(String, String)> = r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["name"].as_str().unwrap().into(), v["value"].as_str().unwrap().into()))
        .collect();
    assert!(v.contains(&("rank formula".into(), "2".into())));
    assert!(v.contains(&("rank".into(), "2".into())));
    assert_eq!(r["result"]["rank"], 2);
    assert!(r["inputs"]["seed"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn lattice_build_round_trips_through_file() {
    let out = scratch("hex.json");
    let o = run(&["lattice", "build", "--builtin", "hexagonal", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["lattice", "check-ee", "--lattice", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("EE: true")));
}

#[test]
fn exclusion_analysis() {
    let r = json_report(&["interaction", "analyze", "exclusion"]);
    assert_eq!(r["result"]["c_phi"], 1);
    assert_eq!(r["result"]["simplicity"]["simple"], true);
    assert!(r["result"]["evidence"].as_array().unwrap().iter().all(|e| e["pass"] == true));
    let o = run(&["interaction", "analyze", "--interaction", "exclusion"]);
    assert!(stdout(&o).contains("irreducibility evidence: PASS"));
}

#[test]
fn identity_interaction_fails_evidence() {
    let o = run(&["interaction", "analyze", "identity(2)"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("irreducibility evidence: FAIL"));
}

#[test]
fn malformed_table_exits_two_with_pair_diagnostics() {
    let file = scratch("bad.json");
    std::fs::write(
        &file,
        r#"{"states": ["0", "1"], "base": "0", "phi": [{"in": ["0", "1"], "out": ["1", "1"]}]}"#,
    )
    .unwrap();
    let o = run(&["interaction", "analyze", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("involution: FAIL"));
    assert!(text.lines().any(|l| l.starts_with("violation: φ(0,1) = (1,1)")));

    std::fs::write(&file, "{ not json").unwrap();
    let o = run(&["interaction", "analyze", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decompose_zero_form_gives_zero() {
    let form = scratch("zero-form.json");
    let o = run(&[
        "form", "exact", "--lattice", "euclidean(2)", "--interaction", "exclusion", "--out",
        form.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r = json_report(&[
        "decompose", "--lattice", "euclidean(2)", "--interaction", "exclusion", "--form",
        form.to_str().unwrap(),
    ]);
    assert_eq!(r["result"]["g"]["terms"].as_array().unwrap().len(), 0);
    for z in r["result"]["zetas"].as_array().unwrap() {
        assert_eq!(z["0"], "0");
        assert_eq!(z["1"], "0");
    }
    assert_eq!(r["result"]["certificate"]["max_residual"], "0");
}

#[test]
fn decompose_linear_growth_form_recovers_xi() {
    let form = scratch("a1-form.json");
    let o = run(&[
        "form", "exact", "--lattice", "euclidean(2)", "--interaction", "exclusion", "--zeta", "0,1", "--out",
        form.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = scratch("a1-result.json");
    let r = json_report(&[
        "decompose", "--lattice", "euclidean(2)", "--interaction", "exclusion", "--form",
        form.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    let z = r["result"]["zetas"].as_array().unwrap();
    assert_eq!(z.len(), 2);
    assert_eq!((z[0]["0"].as_str(), z[0]["1"].as_str()), (Some("0"), Some("1")));
    assert_eq!((z[1]["0"].as_str(), z[1]["1"].as_str()), (Some("0"), Some("0")));
    assert_eq!(r["result"]["g"]["terms"].as_array().unwrap().len(), 0);
    let artifact: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(artifact, r["result"]);
}

#[test]
fn small_window_is_inconclusive() {
    let form = scratch("a1-line.json");
    let o = run(&[
        "form", "exact", "--lattice", "euclidean(1)", "--interaction", "exclusion", "--zeta", "0,1", "--out",
        form.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "decompose", "--lattice", "euclidean(1)", "--interaction", "exclusion", "--form",
        form.to_str().unwrap(), "--window", "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_are_byte_stable() {
    let form = scratch("stable-form.json");
    let o = run(&[
        "form", "exact", "--lattice", "hexagonal", "--interaction", "exclusion", "--zeta", "0,2/3", "--zeta",
        "0,-1", "--out", form.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let args = [
        "decompose", "--lattice", "hexagonal", "--interaction", "exclusion", "--form",
        form.to_str().unwrap(), "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = bin().args(args).env("VARADHAN_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn verify_small_passes() {
    let o = run(&["verify", "--suite", "all", "--scale", "small"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(": PASS (")).count(), 10);
    assert!(!text.contains("FAIL"));
}

#[test]
fn unknown_suite_exits_two() {
    let o = run(&["verify", "--suite", "nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
}
