use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cover-kcenter");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("COVER_KCENTER_THREADS")
        .output()
        .expect("run cover-kcenter")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/run_report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{e} at {}", e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}\n{doc:#}");
}

fn export(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.csv"));
    let out = run(&[
        "fixtures",
        "export",
        name,
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    path
}

fn error_kind(out: &Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    stderr_json(out)["error"]["kind"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn export_tightness_line_to_stdout() {
    let out = run(&["fixtures", "export", "tightness_line"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), ["0", "1", "2"]);
}

#[test]
fn worked_examples_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let tight = export(dir.path(), "tightness_line");
    let t = tight.to_str().unwrap();

    let ff = stdout_json(&run(&["--input", t, "ff", "--k", "1"]));
    assert_eq!(ff["cost_ff_p_on_p"], 2.0);
    let ff = stdout_json(&run(&["--input", t, "ff", "--k", "3"]));
    assert_eq!(ff["cost_ff_p_on_p"], 0.0);

    let oracle = run(&["--input", t, "oracle", "--k", "1"]);
    assert!(oracle.status.success());
    let doc = stdout_json(&oracle);
    assert_eq!(doc["opt"]["radius"], 1.0);
    assert_eq!(doc["opt"]["centers"], serde_json::json!([1]));
    assert_eq!(doc["cross_check"]["agree"], true);

    let line = export(dir.path(), "decrease_line");
    let cover = stdout_json(&run(&[
        "--input",
        line.to_str().unwrap(),
        "cover",
        "--delta",
        "1",
    ]));
    assert_eq!(cover["cover_indices"], serde_json::json!([0, 1, 3]));

    let additive = export(dir.path(), "fail_additive_2d");
    let pipe = stdout_json(&run(&[
        "--input",
        additive.to_str().unwrap(),
        "pipeline",
        "--delta",
        "1",
        "--k",
        "2",
    ]));
    let want = 13f64.sqrt() / 5f64.sqrt();
    let ratio = pipe["ratio"].as_f64().unwrap();
    assert!((ratio - want).abs() <= 1e-5 * want, "{ratio}");
}

#[test]
fn validation_errors_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let line = export(dir.path(), "decrease_line");
    let l = line.to_str().unwrap();

    assert_eq!(
        error_kind(&run(&["--input", l, "cover", "--delta", "-1"])),
        "invalid_input"
    );
    assert_eq!(
        error_kind(&run(&["--input", l, "cover", "--delta", "0"])),
        "invalid_input"
    );
    assert_eq!(
        error_kind(&run(&["--input", l, "ff", "--k", "0"])),
        "invalid_input"
    );
    assert_eq!(
        error_kind(&run(&["--input", l, "ff", "--k", "5"])),
        "insufficient_points"
    );
    assert_eq!(
        error_kind(&run(&[
            "--input",
            l,
            "pipeline",
            "--delta",
            "100",
            "--k",
            "2",
            "--cover-only"
        ])),
        "insufficient_points"
    );
    assert_eq!(
        error_kind(&run(&[
            "--input",
            l,
            "bench",
            "--delta",
            "1",
            "--k",
            "1",
            "--repetitions",
            "0"
        ])),
        "invalid_input"
    );
    assert_eq!(
        error_kind(&run(&["fixtures", "export", "no_such_fixture"])),
        "not_found"
    );
    assert_eq!(
        error_kind(&run(&["--threads", "0", "fixtures", "list"])),
        "invalid_input"
    );
    assert_eq!(
        error_kind(&run(&["--input", "/nonexistent.csv", "ff", "--k", "1"])),
        "io"
    );
    assert_eq!(error_kind(&run(&["ff", "--k"])), "usage");

    let restrict = dir.path().join("r.txt");
    std::fs::write(&restrict, "0\n4\n").unwrap();
    assert_eq!(
        error_kind(&run(&[
            "--input",
            l,
            "ff",
            "--k",
            "1",
            "--restrict",
            restrict.to_str().unwrap()
        ])),
        "invalid_input"
    );

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,4\nx,5\n").unwrap();
    let out = run(&["--input", bad.to_str().unwrap(), "ff", "--k", "1"]);
    assert_eq!(error_kind(&out), "parse");
    assert!(stderr_json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("line 3"));
}

#[test]
fn oracle_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let rows: String = (0..30).map(|i| format!("{i},{}\n", i * i % 7)).collect();
    std::fs::write(&data, rows).unwrap();
    let out = run(&[
        "--input",
        data.to_str().unwrap(),
        "oracle",
        "--k",
        "10",
        "--cap",
        "1000",
    ]);
    assert_eq!(error_kind(&out), "instance_too_large");
}

#[test]
fn replayed_parameters_reproduce_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mix.csv");
    let d = data.to_str().unwrap();
    assert!(
        run(&["synth", "--n", "3000", "--d", "5", "--m", "6", "--seed", "4", "--output", d])
            .status
            .success()
    );
    let first = stdout_json(&run(&[
        "--input",
        d,
        "--metric",
        "l1",
        "pipeline",
        "--delta",
        "2.5",
        "--k",
        "12",
        "--seed-policy",
        "random:77",
        "--order",
        "shuffle:8",
    ]));
    let p = &first["params"];
    let s = |key: &str| p[key].as_str().unwrap().to_string();
    let (delta, k) = (p["delta"].to_string(), p["k"].to_string());
    let args = [
        "--input",
        &s("input"),
        "--metric",
        &s("metric"),
        "pipeline",
        "--delta",
        &delta,
        "--k",
        &k,
        "--seed-policy",
        &s("seed_policy"),
        "--order",
        &s("order"),
    ];
    let again = stdout_json(&run(&args));
    for key in [
        "centers_p",
        "centers_q",
        "cover_indices",
        "cost_ff_p_on_p",
        "cost_ff_q_on_p",
        "cost_ff_q_on_q",
    ] {
        assert_eq!(first[key], again[key], "{key}");
    }
}

#[test]
fn thread_env_var_is_a_default() {
    let dir = tempfile::tempdir().unwrap();
    let line = export(dir.path(), "decrease_line");
    let out = Command::new(BIN)
        .args(["--input", line.to_str().unwrap(), "ff", "--k", "2"])
        .env("COVER_KCENTER_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["params"]["threads"], 3);
}

#[test]
fn binary_and_csv_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let bin = dir.path().join("m.bin");
    for path in [&csv, &bin] {
        let p = path.to_str().unwrap();
        assert!(run(&[
            "synth", "--n", "500", "--d", "3", "--m", "4", "--seed", "2", "--output", p
        ])
        .status
        .success());
    }
    let a = stdout_json(&run(&["--input", csv.to_str().unwrap(), "ff", "--k", "7"]));
    let b = stdout_json(&run(&["--input", bin.to_str().unwrap(), "ff", "--k", "7"]));
    assert_eq!(a["centers_p"], b["centers_p"]);
    assert_eq!(a["radii"], b["radii"]);
    assert_eq!(b["params"]["format"], "bin");
}

#[test]
fn every_document_matches_the_schema() {
    let v = schema();
    let dir = tempfile::tempdir().unwrap();
    let additive = export(dir.path(), "fail_additive_2d");
    let a = additive.to_str().unwrap();
    let q = dir.path().join("q.txt");
    assert!(run(&[
        "fixtures",
        "export",
        "fail_additive_2d",
        "--output",
        a,
        "--cover-out",
        q.to_str().unwrap()
    ])
    .status
    .success());
    let qs = q.to_str().unwrap();
    let synth = dir.path().join("s.csv");

    let cases: Vec<Vec<&str>> = vec![
        vec!["--input", a, "cover", "--delta", "1"],
        vec!["--input", a, "--standardize", "cover", "--delta", "0.5"],
        vec!["--input", a, "ff", "--k", "2"],
        vec!["--input", a, "ff", "--k", "2", "--restrict", qs],
        vec!["--input", a, "pipeline", "--delta", "1", "--k", "2"],
        vec![
            "--input",
            a,
            "pipeline",
            "--delta",
            "1",
            "--k",
            "2",
            "--cover-only",
        ],
        vec![
            "--input",
            a,
            "oracle",
            "--k",
            "2",
            "--delta",
            "1",
            "--restrict",
            qs,
            "--bounds",
            "gonzalez,subset,lifting,main",
        ],
        vec![
            "--input",
            a,
            "bench",
            "--delta",
            "1",
            "--k",
            "1,2",
            "--repetitions",
            "2",
        ],
        vec!["fixtures", "list"],
        vec!["fixtures", "verify"],
        vec!["fixtures", "export", "tightness_line", "--output", a],
        vec![
            "synth",
            "--n",
            "10",
            "--d",
            "2",
            "--m",
            "2",
            "--output",
            synth.to_str().unwrap(),
        ],
    ];
    for case in &cases {
        let out = run(case);
        assert!(
            out.status.success(),
            "{case:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_valid(&v, &stdout_json(&out));
    }
    let err = run(&["--input", a, "cover", "--delta", "-2"]);
    assert_valid(&v, &stderr_json(&err));
    let usage = run(&["cover"]);
    assert_valid(&v, &stderr_json(&usage));
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = schema();
    let bad = serde_json::json!({ "command": "pipeline", "version": "0", "n_points": 3 });
    assert!(!v.is_valid(&bad));
    let bad_kind = serde_json::json!({ "error": { "kind": "oops", "message": "" } });
    assert!(!v.is_valid(&bad_kind));
}
