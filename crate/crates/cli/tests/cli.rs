//! End-to-end CLI behavior: exit codes, error naming, schema stability,
//! pipe-ability of generated sequences.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_shiftlab")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shiftlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn identity_input(dim: usize, n: usize) -> String {
    let row = |i: usize| -> Vec<Vec<f64>> {
        (0..dim).map(|j| vec![if i == j { 1.0 } else { 0.0 }, 0.0]).collect()
    };
    let matrix: Vec<Vec<Vec<f64>>> = (0..dim).map(row).collect();
    let weights: Vec<_> = (0..n).map(|_| matrix.clone()).collect();
    serde_json::to_string(&serde_json::json!({
        "dim": dim,
        "weights": weights,
        "tail": "none"
    }))
    .unwrap()
}

fn scalar_input(alphas: &[f64]) -> String {
    let weights: Vec<_> = alphas.iter().map(|a| vec![vec![vec![*a, 0.0]]]).collect();
    serde_json::to_string(&serde_json::json!({
        "dim": 1,
        "weights": weights,
        "tail": "none"
    }))
    .unwrap()
}

#[test]
fn all_identity_passes_everything_with_exit_zero() {
    let dir = temp_dir("pass");
    let input = dir.join("id.json");
    std::fs::write(&input, identity_input(2, 6)).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap(), "--k", "3", "--quadratic", "--cubic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn failing_quadratic_exits_two_with_witness_in_report() {
    let dir = temp_dir("fail");
    let input = dir.join("pair.json");
    std::fs::write(&input, scalar_input(&[1.0, 2.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
    let report = dir.join("rep.json");
    let out = Command::new(bin())
        .args([
            "classify",
            input.to_str().unwrap(),
            "--quadratic",
            "--report",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let quad = rep["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["class_name"]["class"] == "quadratic")
        .expect("quadratic verdict present");
    assert_eq!(quad["passed"], false);
    assert!(quad["failing_window"].is_u64());
    let point = &quad["report"]["failure_point"];
    assert!(point.is_array(), "parameter point recorded: {point}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn insufficient_truncation_exits_one_with_requirement() {
    let dir = temp_dir("short");
    let input = dir.join("short.json");
    std::fs::write(&input, scalar_input(&[1.0, 2.0])).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap(), "--cubic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("insufficient truncation"), "stderr: {err}");
    assert!(err.contains("need N >= 3"), "stderr: {err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_json_names_the_offending_field() {
    let dir = temp_dir("malformed");
    let input = dir.join("bad.json");
    std::fs::write(&input, r#"{"dim": 1, "weights": [[[ [1.0, "x"] ]]], "tail": "none"}"#).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("weights"), "error should name the field path: {err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn non_positive_definite_weight_names_index_and_eigenvalue() {
    let dir = temp_dir("npd");
    let input = dir.join("npd.json");
    std::fs::write(&input, scalar_input(&[1.0, -2.0, 1.0])).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("A_1"), "stderr: {err}");
    assert!(err.contains("min eigenvalue"), "stderr: {err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_flag_exits_one() {
    let out = Command::new(bin())
        .args(["classify", "missing.json", "--definitely-not-a-flag"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generated_berger_point_mass_is_unweighted_and_classifies_clean() {
    let dir = temp_dir("berger");
    let out = Command::new(bin())
        .args(["generate", "--family", "berger", "--atoms", "1:1", "--n", "6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["dim"], 1);
    for w in json["weights"].as_array().unwrap() {
        assert_eq!(w[0][0][0], 1.0);
    }

    // Pipe back into classify: schema self-consistency.
    let input = dir.join("unweighted.json");
    std::fs::write(&input, serde_json::to_string(&json).unwrap()).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap(), "--k", "2", "--quadratic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn random_profile_equal_pair_is_honored() {
    let out = Command::new(bin())
        .args([
            "generate", "--family", "random", "--dim", "2", "--n", "6", "--seed", "9",
            "--profile", "equal-pair:2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let weights = json["weights"].as_array().unwrap();
    assert_eq!(weights[2], weights[3], "A_2 = A_3 forced exactly");
}

#[test]
fn generate_is_seed_deterministic() {
    let run = || {
        Command::new(bin())
            .args(["generate", "--family", "random", "--dim", "3", "--n", "5", "--seed", "1234"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn report_round_trips_through_its_own_schema() {
    let dir = temp_dir("roundtrip");
    let input = dir.join("w.json");
    std::fs::write(&input, scalar_input(&[1.0, 1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
    let report = dir.join("rep.json");
    let out = Command::new(bin())
        .args([
            "classify",
            input.to_str().unwrap(),
            "--k",
            "2",
            "--quadratic",
            "--cubic",
            "--report",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let text = std::fs::read_to_string(&report).unwrap();
    let v1: serde_json::Value = serde_json::from_str(&text).unwrap();
    let re = serde_json::to_string(&v1).unwrap();
    let v2: serde_json::Value = serde_json::from_str(&re).unwrap();
    assert_eq!(v1, v2, "report must round-trip losslessly");

    // Schema stability: the documented top-level keys are all present.
    for key in [
        "tool_version",
        "input_digest",
        "tolerances",
        "verdicts",
        "flatness",
        "decomposition",
        "search",
        "wall_time_ms",
    ] {
        assert!(v1.get(key).is_some(), "missing report key {key}");
    }
    assert!(v1["input_digest"].as_str().unwrap().starts_with("sha256:"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn decompose_diagonal_example_end_to_end() {
    let dir = temp_dir("decompose");
    let input = dir.join("w.json");
    let make = |a: f64, b: f64| vec![vec![vec![a, 0.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![b, 0.0]]];
    let weights = vec![
        make(0.9, 0.8),
        make(1.0, 1.0),
        make(1.0, 1.5),
        make(1.0, 1.7),
    ];
    std::fs::write(
        &input,
        serde_json::to_string(&serde_json::json!({"dim": 2, "weights": weights, "tail": "none"})).unwrap(),
    )
    .unwrap();
    let report = dir.join("rep.json");
    let out = Command::new(bin())
        .args([
            "decompose",
            input.to_str().unwrap(),
            "--mode",
            "two-hyp",
            "--report",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Flat"), "{stdout}");
    assert!(stdout.contains("StrictlyIncreasing"), "{stdout}");

    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let comps = rep["decomposition"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[0]["label"], "flat");
    // Flat part restricted weights: (0.9, 1, 1, 1).
    let flat0 = comps[0]["weights"]["weights"][0][0][0][0].as_f64().unwrap();
    assert!((flat0 - 0.9).abs() < 1e-10);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn decompose_cubic_cli_three_way() {
    let dir = temp_dir("decompose3");
    let input = dir.join("w.json");
    let diag3 = |a: f64, b: f64, c: f64| {
        vec![
            vec![vec![a, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0], vec![b, 0.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![c, 0.0]],
        ]
    };
    let weights = vec![
        diag3(1.0, 0.9, 0.8),
        diag3(1.0, 1.0, 1.0),
        diag3(1.0, 1.0, 1.5),
        diag3(1.0, 1.0, 1.8),
    ];
    std::fs::write(
        &input,
        serde_json::to_string(&serde_json::json!({"dim": 3, "weights": weights, "tail": "none"})).unwrap(),
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["decompose", input.to_str().unwrap(), "--mode", "cubic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Unweighted"), "{stdout}");
    assert!(stdout.contains("Flat"), "{stdout}");
    assert!(stdout.contains("StrictlyIncreasing"), "{stdout}");
}

#[test]
fn constant_tail_input_classifies_end_to_end() {
    // Eventually-flat shifts are exactly representable with the constant
    // tail: two weights suffice for every criterion, windows capped at N-1.
    let dir = temp_dir("tail");
    let input = dir.join("flat.json");
    let json = serde_json::json!({
        "dim": 1,
        "weights": [ [[[0.7, 0.0]]], [[[1.0, 0.0]]] ],
        "tail": "constant_last"
    });
    std::fs::write(&input, serde_json::to_string(&json).unwrap()).unwrap();
    let out = Command::new(bin())
        .args(["classify", input.to_str().unwrap(), "--k", "2", "--quadratic", "--cubic"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn search_two_hyp_target_emits_cross_scores() {
    let dir = temp_dir("search2");
    let best = dir.join("best.json");
    let out = Command::new(bin())
        .args([
            "search",
            "--target",
            "two-hyp-a0-eq-a1-nonflat",
            "--dim",
            "1",
            "--n",
            "6",
            "--iterations",
            "60",
            "--seed",
            "5",
            "--best",
            best.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("cross-scores"), "{stdout}");

    // The best candidate honors the A_0 = A_1 constraint and re-classifies.
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&best).unwrap()).unwrap();
    assert_eq!(json["weights"][0], json["weights"][1]);
    let out = Command::new(bin())
        .args(["classify", best.to_str().unwrap(), "--k", "2"])
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let _ = std::fs::remove_dir_all(&dir);
}
