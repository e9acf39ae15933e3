//! End-to-end tests of the command-line interface: exit codes, file
//! round-trips, determinism and the trace-convention bridge.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use psdreal::configurations::{gram, hexagon, pentagon};
use psdreal::schema::{FactorizationJson, GramJson, RealizationJson, VectorsJson};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psdreal"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("psdreal-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn demo_pentagon_writes_config_and_gram() {
    let dir = workdir("demo");
    let config_path = dir.join("config.json");
    let output = bin()
        .args(["demo", "pentagon", "--output"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let config: VectorsJson =
        serde_json::from_str(&fs::read_to_string(&config_path).unwrap()).unwrap();
    assert_eq!(config.vectors.len(), 5);
    assert_eq!(config.n, 3);

    let gram_path = dir.join("config.gram.json");
    let gram_json: GramJson =
        serde_json::from_str(&fs::read_to_string(&gram_path).unwrap()).unwrap();
    let g = gram_json.to_gram().unwrap();
    assert_eq!(g.get(0, 2), 0.0, "skip-two entries are exactly zero");
}

#[test]
fn embed_then_verify_pipeline() {
    let dir = workdir("embed");
    let config_path = dir.join("hexagon.json");
    let gram_path = dir.join("hexagon.gram.json");
    let realization_path = dir.join("realization.json");

    let status = bin()
        .args(["demo", "hexagon", "--output"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let output = bin()
        .args(["embed", "--input"])
        .arg(&config_path)
        .arg("--output")
        .arg(&realization_path)
        .arg("--dump-operators")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(dir.join("realization.operators.json").exists());

    let output = bin()
        .args(["verify", "--gram"])
        .arg(&gram_path)
        .arg("--realization")
        .arg(&realization_path)
        .args(["--tol-psd", "1e-9", "--tol-gram", "1e-9"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));
    assert!(stdout(&output).contains("PASS"));
}

#[test]
fn realize_ladder_on_pentagon_exits_two() {
    let dir = workdir("pentagon-ladder");
    let gram_path = dir.join("g.json");
    let out_path = dir.join("realization.json");
    let g = gram(&pentagon());
    fs::write(
        &gram_path,
        serde_json::to_string(&GramJson::from_gram(&g)).unwrap(),
    )
    .unwrap();

    let output = bin()
        .args(["realize", "--gram"])
        .arg(&gram_path)
        .args([
            "--ladder",
            "4",
            "--restarts",
            "5",
            "--max-iters",
            "300",
            "--seed",
            "1",
        ])
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stdout(&output));
    assert!(stdout(&output).contains("no realization found; best residual"));

    let json: RealizationJson =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json.n, 5);
    let report = json.report.expect("search report is attached");
    assert!(!report.converged);
    assert!(!report.ladder.is_empty());

    // The unreachable-target candidate is still a valid diagnostics input.
    let output = bin()
        .args(["diagnose", "pentagon", "--realization"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("max_defect"));
}

#[test]
fn factorize_identity_succeeds_with_trace() {
    let dir = workdir("factorize");
    let gram_path = dir.join("g.json");
    let out_path = dir.join("b.json");
    let trace_path = dir.join("trace.csv");
    let g = GramJson {
        n: 3,
        entries: vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
    };
    fs::write(&gram_path, serde_json::to_string(&g).unwrap()).unwrap();

    let output = bin()
        .args(["factorize", "--gram"])
        .arg(&gram_path)
        .args(["--inner-dim", "3", "--restarts", "10", "--seed", "0"])
        .arg("--output")
        .arg(&out_path)
        .arg("--trace")
        .arg(&trace_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));

    let json: FactorizationJson =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(json.residual < 1e-6);
    assert!(json.to_factorization().is_ok());

    let trace = fs::read_to_string(&trace_path).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("restart,iteration,residual"));
    assert!(lines.next().is_some(), "trace has data rows");
}

#[test]
fn hexagon_factorize_fails_and_diagnoses() {
    let dir = workdir("hexagon-diag");
    let gram_path = dir.join("g.json");
    let out_path = dir.join("b.json");
    let g = gram(&hexagon());
    fs::write(
        &gram_path,
        serde_json::to_string(&GramJson::from_gram(&g)).unwrap(),
    )
    .unwrap();

    let output = bin()
        .args(["factorize", "--gram"])
        .arg(&gram_path)
        .args(["--inner-dim", "6", "--restarts", "20", "--seed", "0"])
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stdout(&output));

    let report_path = dir.join("report.json");
    let output = bin()
        .args(["diagnose", "hexagon", "--factorization"])
        .arg(&out_path)
        .arg("--output")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("worst_link"));
    assert!(report_path.exists());
}

#[test]
fn identical_arguments_produce_identical_bytes() {
    let dir = workdir("determinism");
    let gram_path = dir.join("g.json");
    let g = gram(&hexagon());
    fs::write(
        &gram_path,
        serde_json::to_string(&GramJson::from_gram(&g)).unwrap(),
    )
    .unwrap();

    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_path = dir.join(format!("b{run}.json"));
        let trace_path = dir.join(format!("t{run}.csv"));
        let status = bin()
            .args(["factorize", "--gram"])
            .arg(&gram_path)
            .args(["--inner-dim", "6", "--restarts", "8", "--seed", "42"])
            .arg("--output")
            .arg(&out_path)
            .arg("--trace")
            .arg(&trace_path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(2));
        outputs.push((fs::read(&out_path).unwrap(), fs::read(&trace_path).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "output JSON is byte-identical");
    assert_eq!(outputs[0].1, outputs[1].1, "trace CSV is byte-identical");
}

#[test]
fn raw_trace_convention_round_trips() {
    let dir = workdir("raw-convention");
    let config_path = dir.join("hexagon.json");
    let gram_path = dir.join("hexagon.gram.json");
    let realization_path = dir.join("raw.json");

    bin()
        .args(["demo", "hexagon", "--output"])
        .arg(&config_path)
        .status()
        .unwrap();
    let output = bin()
        .args(["embed", "--input"])
        .arg(&config_path)
        .arg("--output")
        .arg(&realization_path)
        .args(["--trace-convention", "raw"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    // Verifying with the matching convention passes; with the wrong one the
    // Gram is off by the dimension factor and must fail.
    let ok = bin()
        .args(["verify", "--gram"])
        .arg(&gram_path)
        .arg("--realization")
        .arg(&realization_path)
        .args(["--trace-convention", "raw"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let wrong = bin()
        .args(["verify", "--gram"])
        .arg(&gram_path)
        .arg("--realization")
        .arg(&realization_path)
        .output()
        .unwrap();
    assert_eq!(wrong.status.code(), Some(2), "{}", stdout(&wrong));
}

#[test]
fn invalid_input_exits_one_with_field_name() {
    let dir = workdir("errors");
    let gram_path = dir.join("bad.json");
    fs::write(&gram_path, r#"{"n": 2, "entries": [[1.0, 0.0]]}"#).unwrap();
    let out_path = dir.join("out.json");
    let output = bin()
        .args(["factorize", "--gram"])
        .arg(&gram_path)
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("entries"),
        "error names the offending field: {stderr}"
    );

    let missing = bin()
        .args(["verify", "--gram"])
        .arg(dir.join("nope.json"))
        .arg("--realization")
        .arg(dir.join("also-nope.json"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
