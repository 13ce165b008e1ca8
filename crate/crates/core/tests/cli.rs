use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn coos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coos"))
        .args(args)
        .output()
        .expect("run coos")
}

fn ok(args: &[&str]) -> Output {
    let out = coos(args);
    assert!(
        out.status.success(),
        "coos {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn small_sweep(dir: &Path) -> String {
    let config = json!({
        "base": serde_json::to_value(coos_core::sim::CommunityParams::default()).unwrap(),
        "axes": [
            {"param": "solar_capacity_kw", "levels": [0.0, 100.0, 200.0, 300.0]},
            {"param": "hydro_capacity_kw", "levels": [0.0, 50.0, 100.0]},
            {"param": "storage_energy_kwh", "levels": [0.0, 400.0]},
            {"param": "local_ownership_share", "levels": [0.0, 0.5, 1.0]}
        ]
    });
    let path = p(dir, "sweep.json");
    std::fs::write(&path, config.to_string()).unwrap();
    path
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = coos(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(coos(&["simulate", "--bogus-flag"]).status.code(), Some(2));
}

#[test]
fn consensus_without_participants_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let points = p(dir.path(), "points.json");
    std::fs::write(&points, r#"{"participants": {}}"#).unwrap();
    let out = coos(&["consensus", "--points", &points]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
}

#[test]
fn missing_input_file_exits_one() {
    let out = coos(&["normalize", "--input", "/nonexistent/x.jsonl", "--out", "/tmp/never"]);
    assert_eq!(out.status.code(), Some(1));
}

/// Runs the slow-loop pipeline into `dir` and returns the produced files.
fn slow_loop(dir: &Path) -> Vec<String> {
    let config = small_sweep(dir);
    let scenarios = p(dir, "scenarios.jsonl");
    ok(&["simulate", "--config", &config, "--out", &scenarios]);
    let responses = p(dir, "responses.jsonl");
    for (pid, w) in [("1", "0.8,0.1,0.1"), ("2", "0.75,0.15,0.1"), ("3", "0.7,0.2,0.1"), ("4", "0.1,0.1,0.8"), ("5", "0.15,0.1,0.75")] {
        ok(&["ask", "--scenarios", &scenarios, "--participant", pid, "--out", &responses, "--simulate", w, "--seed", "3"]);
    }
    let points = p(dir, "points.json");
    ok(&["estimate", "--scenarios", &scenarios, "--responses", &responses, "--out", &points]);
    let groups = p(dir, "groups.json");
    ok(&["intent", "--points", &points, "--out", &groups]);
    let geometry = p(dir, "consensus.json");
    let board = p(dir, "consensus.svg");
    ok(&["consensus", "--points", &points, "--out", &geometry, "--svg", &board, "--constraint", "A:min:0.2"]);
    let choice = p(dir, "choice.json");
    ok(&["choose", "--groups", &groups, "--scenarios", &scenarios, "--dims-respected", "2", "--out", &choice]);
    let cloud = p(dir, "cloud.svg");
    ok(&["export-ternary", "--scenarios", &scenarios, "--out", &cloud]);
    let exported = p(dir, "exported.svg");
    ok(&["export-ternary", "--geometry", &geometry, "--out", &exported]);
    vec![scenarios, responses, points, groups, geometry, board, choice, cloud, exported]
}

#[test]
fn slow_loop_pipeline_is_byte_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = slow_loop(d1.path());
    let f2 = slow_loop(d2.path());
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{a} differs");
    }

    let scenarios = std::fs::read_to_string(&f1[0]).unwrap();
    assert_eq!(scenarios.lines().count(), 1 + 72);
    let groups: Value = serde_json::from_str(&std::fs::read_to_string(&f1[3]).unwrap()).unwrap();
    assert_eq!(groups.as_array().unwrap().len(), 2);
    let consensus: Value = serde_json::from_str(&std::fs::read_to_string(&f1[4]).unwrap()).unwrap();
    assert_eq!(consensus["geometry"]["applied_constraints"].as_array().unwrap().len(), 1);
    let svg = std::fs::read_to_string(&f1[5]).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("reference"));
    assert_eq!(std::fs::read(&f1[5]).unwrap(), std::fs::read(&f1[8]).unwrap());
    let choice: Value = serde_json::from_str(&std::fs::read_to_string(&f1[6]).unwrap()).unwrap();
    assert_eq!(choice["dimension_ratio_used"], 1.5);
}

#[test]
fn ask_resumes_an_existing_log() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep(dir.path());
    let scenarios = p(dir.path(), "scenarios.jsonl");
    ok(&["simulate", "--config", &config, "--out", &scenarios]);
    let log = p(dir.path(), "log.jsonl");
    ok(&["ask", "--scenarios", &scenarios, "--participant", "9", "--out", &log, "--simulate", "0.2,0.6,0.2", "--max-questions", "3"]);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1 + 3);
    ok(&["ask", "--scenarios", &scenarios, "--participant", "9", "--out", &log, "--simulate", "0.2,0.6,0.2", "--max-questions", "5"]);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1 + 5);
}

#[test]
fn interactive_ask_reads_answers_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep(dir.path());
    let scenarios = p(dir.path(), "scenarios.jsonl");
    ok(&["simulate", "--config", &config, "--out", &scenarios]);
    let log = p(dir.path(), "log.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_coos"))
        .args(["ask", "--scenarios", &scenarios, "--participant", "1", "--out", &log])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a\nx\nb\nq\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("please type a or b"));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1 + 2);
}

fn fast_loop(dir: &Path) -> Vec<String> {
    let corpus = p(dir, "corpus.jsonl");
    let generator = p(dir, "generator.json");
    ok(&["kenn-synth", "--n", "80", "--seed", "5", "--out", &corpus, "--generator-out", &generator]);
    let model = p(dir, "model.json");
    let report = p(dir, "report.json");
    ok(&["kenn-train", "--corpus", &corpus, "--out", &model, "--report", &report, "--iterations", "200", "--seed", "2"]);
    let predictions = p(dir, "predictions.json");
    ok(&["kenn-predict", "--model", &model, "--corpus", &corpus, "--out", &predictions]);
    let interventions = p(dir, "interventions.json");
    std::fs::write(&interventions, r#"{"trust": 1.5, "communication": 1.0, "monetary_incentive": -1.0}"#).unwrap();
    let ranking = p(dir, "ranking.json");
    let out = ok(&["kenn-interventions", "--model", &model, "--corpus", &corpus, "--interventions", &interventions, "--out", &ranking]);
    let table = p(dir, "ranking.txt");
    std::fs::write(&table, &out.stdout).unwrap();
    vec![corpus, generator, model, report, predictions, ranking, table]
}

#[test]
fn fast_loop_pipeline_is_byte_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = fast_loop(d1.path());
    let f2 = fast_loop(d2.path());
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{a} differs");
    }
    let preds: Value = serde_json::from_str(&std::fs::read_to_string(&f1[4]).unwrap()).unwrap();
    assert_eq!(preds.as_array().unwrap().len(), 80);
    assert_eq!(preds[0]["scores"]["names"].as_array().unwrap().len(), 6);
    let table = std::fs::read_to_string(&f1[6]).unwrap();
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn non_actionable_intervention_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let files = fast_loop(dir.path());
    let iv = p(dir.path(), "bad.json");
    std::fs::write(&iv, r#"{"gender": 1.0}"#).unwrap();
    let out = coos(&["kenn-interventions", "--model", &files[2], "--corpus", &files[0], "--interventions", &iv]);
    assert_eq!(out.status.code(), Some(1));
}
