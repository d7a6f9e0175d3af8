use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subcarve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_subcarve"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json_ok(out: &Output) -> Value {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn decompose_m2_tensor_identity() {
    let v = json_ok(&run(&["decompose", &path("m2_tensor_i2.json")]));
    assert_eq!(v["command"], "decompose");
    assert_eq!(v["config"]["seed"], 0);
    let r = &v["result"];
    assert_eq!(r["blocks"], serde_json::json!([[2, 2]]));
    assert_eq!(r["commutant_dim"], 4);
    assert_eq!(r["center_dim"], 1);
    assert_eq!(r["unitary"]["rows"], 4);
    assert!(r["block_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn stdin_matches_file_input() {
    let text = std::fs::read_to_string(data("m2_tensor_i2.json")).unwrap();
    let from_file = run(&["decompose", &path("m2_tensor_i2.json")]);
    let from_stdin = run_stdin(&["decompose"], &text);
    let from_dash = run_stdin(&["decompose", "-"], &text);
    assert_eq!(from_file.stdout, from_stdin.stdout);
    assert_eq!(from_file.stdout, from_dash.stdout);
}

#[test]
fn grouprep_phase_flip() {
    let r = json_ok(&run(&["grouprep", &path("phase_flip_group.json")]))["result"].clone();
    assert_eq!(r["order"], 2);
    assert_eq!(
        r["irreps"],
        serde_json::json!([{"dim": 1, "mult": 1}, {"dim": 1, "mult": 1}])
    );
    let adv = &r["adversarial"];
    assert_eq!(adv["permutation_group_order"], 2);
    assert_eq!(adv["commutant_dim"], 2);
    assert_eq!(adv["permutations_commute"], true);
    let omegas: Vec<f64> = adv["permutations"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| {
            p["omega"]
                .as_array()
                .unwrap()
                .iter()
                .map(|z| z[0].as_f64().unwrap())
        })
        .collect();
    assert!(omegas.iter().any(|&w| (w + 1.0).abs() < 1e-10));
}

#[test]
fn classify_dephasing_monoid() {
    let r = json_ok(&run(&["classify", &path("dephase_monoid.json")]))["result"].clone();
    assert_eq!(r["dephasing_covariant"], true);
    assert_eq!(r["multiphase_covariant"], true);
}

#[test]
fn carve_examples() {
    let cases = [
        ("phase_flip_agent.json", "spectra_unordered"),
        ("m2_tensor_i2_agent.json", "block_states"),
        ("multiphase_agent.json", "diagonal_probabilities"),
    ];
    for (file, tag) in cases {
        let r = json_ok(&run(&["carve", &path(file), "--seed", "3"]))["result"].clone();
        assert_eq!(r["state_space"]["kind"], tag, "{file}");
        for (name, c) in r["checks"].as_object().unwrap() {
            assert_eq!(c["passed"], true, "{file}: {name}");
        }
    }
}

#[test]
fn purify_and_connect() {
    let r = json_ok(&run(&["purify", "--connect", &path("bell_purify.json")]))["result"].clone();
    assert_eq!(r["global_pure"]["rows"], r["dimension"]);
    assert!(r["connection"]["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reports_are_deterministic() {
    let agent = path("m2_tensor_i2_agent.json");
    for args in [
        vec!["carve", "--seed", "9", agent.as_str()],
        vec![
            "verify",
            "--seed",
            "5",
            "--only",
            "purification",
            "--only",
            "phase_flip_golden",
        ],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.status.code(), Some(0));
        assert_eq!(first.stdout, second.stdout);
    }
}

#[test]
fn text_output_is_flat() {
    let out = run(&["decompose", &path("m2_tensor_i2.json"), "--output", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("command"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("result.blocks") && l.ends_with("[[2, 2]]")));
    assert!(text.contains("4x4 matrix"));
}

#[test]
fn validation_errors_exit_2() {
    let malformed = run_stdin(&["decompose"], "{\"dimension\": 2,}");
    assert_eq!(malformed.status.code(), Some(2));
    assert_eq!(error_kind(&malformed), "malformed_input");

    let non_tp = r#"{"dimension": 2, "channels": [{"kind": "kraus", "ops": [
        {"rows": 2, "cols": 2, "data": [[2,0],[0,0],[0,0],[2,0]]}]}]}"#;
    assert_eq!(run_stdin(&["classify"], non_tp).status.code(), Some(2));

    let missing = run(&["decompose", "/nonexistent/input.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let wrong_type = run_stdin(&["grouprep"], r#"{"dimension": "two", "generators": []}"#);
    assert_eq!(wrong_type.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["frobnicate"],
        vec!["verify", "--only", "no_such_check"],
        vec!["verify", "--max-chain", "0"],
        vec!["verify", "--tol=-1"],
        vec!["verify", "--output", "yaml"],
    ] {
        assert_eq!(run(&args).status.code(), Some(64), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
