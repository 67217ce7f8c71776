use std::path::Path;
use std::process::{Command, Output};

use otut_core::desk::{generate, DeskConfig};
use otut_core::SubtitlePair;
use serde_json::Value;

fn otut(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otut"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// A clean desk corpus, its lexicon and a small config in `dir`.
fn workspace(dir: &Path, pairs: usize) {
    let corpus = generate(&DeskConfig {
        pairs,
        seed: 21,
        ..DeskConfig::default()
    });
    std::fs::write(dir.join("corpus.jsonl"), corpus.to_jsonl()).unwrap();
    std::fs::write(dir.join("lexicon.tsv"), corpus.lexicon.to_tsv()).unwrap();
    std::fs::write(
        dir.join("c.toml"),
        "[encoder]\nlexicon = \"lexicon.tsv\"\n[synthesis]\nnum_samples = 100\n\
         [head]\narch = \"cnn\"\nhidden_dim = 8\ncnn_channels = 8\n[train]\nmax_epochs = 3\n",
    )
    .unwrap();
}

#[test]
fn filter_logs_short_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d, 7);
    let mut text = std::fs::read_to_string(d.join("corpus.jsonl")).unwrap();
    for (i, src) in ["Go now.", "Yes.", "No, sir."].iter().enumerate() {
        let p = SubtitlePair::new(format!("short-{i}"), *src, "Va maintenant, vite.", "fr");
        text.push_str(&serde_json::to_string(&p).unwrap());
        text.push('\n');
    }
    std::fs::write(d.join("ten.jsonl"), text).unwrap();
    ok(&otut(d, &["--config", "c.toml", "filter", "--input", "ten.jsonl", "--out", "f"]));
    assert_eq!(lines(&d.join("f/accepted.jsonl")).len(), 7);
    let rejected = lines(&d.join("f/rejected.jsonl"));
    assert_eq!(rejected.len(), 3);
    assert!(rejected.iter().all(|r| r["reason"] == "source_length"));
    let m = read_json(&d.join("f/manifest.json"));
    assert_eq!(m["tool_version"], otut_core::TOOL_VERSION);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn filter_empty_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.jsonl"), "").unwrap();
    ok(&otut(d, &["filter", "--input", "empty.jsonl", "--out", "f"]));
    assert_eq!(std::fs::read_to_string(d.join("f/accepted.jsonl")).unwrap(), "");

    let out = otut(d, &["filter", "--input", "missing.jsonl", "--out", "g"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("g").exists(), "no partial output");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = otut(d, &["train", "--arch", "transformer"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("weighted_gru, gru_cnn, cnn, hybrid"), "{err}");
    std::fs::write(d.join("bad.toml"), "[train]\nlearning_rate = -1.0\n").unwrap();
    assert_eq!(otut(d, &["--config", "bad.toml", "collate", "--annotations", "a", "--out", "o"]).status.code(), Some(2));
    assert_eq!(otut(d, &["flag"]).status.code(), Some(2));
}

#[test]
fn synthesize_reports_achievable_size() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d, 60);
    let out = otut(d, &["--config", "c.toml", "synthesize", "--input", "corpus.jsonl", "--out", "s", "--num-samples", "500"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("requested 500") && err.contains("at most 60"), "{err}");
}

#[test]
fn train_evaluate_flag_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d, 200);
    let cfg = ["--config", "c.toml"];
    let run = |rest: &[&str]| otut(d, &[&cfg[..], rest].concat());
    ok(&run(&["synthesize", "--input", "corpus.jsonl", "--out", "data"]));
    assert_eq!(read_json(&d.join("data/manifest.json"))["details"]["targets"]["ne"], 40);

    ok(&run(&["train", "--dataset", "data", "--arch", "gru_cnn", "--out", "model"]));
    let m = read_json(&d.join("model/manifest.json"));
    assert_eq!(m["details"]["arch"], "gru_cnn");
    let hist = read_json(&d.join("model/history.json"));
    let best: Vec<f64> = hist["epochs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["best_validation_loss"].as_f64().unwrap())
        .collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]), "{best:?}");

    // Labels from annotations: only unanimous pairs are scored.
    let corpus: Vec<Value> = lines(&d.join("corpus.jsonl"));
    let mut csv = String::from("pair_id,annotator_id,mark\n");
    for (i, p) in corpus.iter().take(30).enumerate() {
        let id = p["id"].as_str().unwrap();
        let marks = if i % 10 == 9 { ["NE", "OT", "NE"] } else { ["NE", "NE", "NE"] };
        for (a, m) in marks.iter().enumerate() {
            csv.push_str(&format!("{id},a{a},{m}\n"));
        }
    }
    std::fs::write(d.join("ann.csv"), csv).unwrap();
    ok(&run(&[
        "evaluate", "--checkpoint", "model", "--input", "corpus.jsonl", "--annotations", "ann.csv", "--out", "r",
    ]));
    let report = read_json(&d.join("r/report.json"));
    assert_eq!(report["pooled"]["ne"], 27);
    assert_eq!(report["pooled"]["error_recall"], Value::Null);
    let table = std::fs::read_to_string(d.join("r/report.txt")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("all") && l.ends_with("n/a")), "{table}");

    // A long pair fails alone; the rest are scored.
    let mut input = std::fs::read_to_string(d.join("corpus.jsonl")).unwrap();
    let long = SubtitlePair::new("long", "word ".repeat(700).trim_end(), "mot mot mot mot mot.", "fr");
    input.push_str(&serde_json::to_string(&long).unwrap());
    input.push('\n');
    std::fs::write(d.join("in.jsonl"), input).unwrap();
    ok(&run(&["flag", "--checkpoint", "model/checkpoint.json", "--input", "in.jsonl", "--out", "v"]));
    let verdicts = lines(&d.join("v/predictions.jsonl"));
    assert_eq!(verdicts.len(), 201);
    let last = verdicts.last().unwrap();
    assert_eq!(last["id"], "long");
    assert!(last["error"].as_str().unwrap().contains("capacity"));
    for v in &verdicts[..200] {
        let probs: Vec<f64> = v["probs"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    // Same checkpoint against a different encoder is refused.
    std::fs::write(d.join("other.toml"), "[encoder]\nseed = 99\n").unwrap();
    let out = otut(d, &["--config", "other.toml", "flag", "--checkpoint", "model", "--input", "in.jsonl", "--out", "w"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fingerprint"));
}

#[test]
fn collate_writes_labels_and_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("a.csv"),
        "pair_id,annotator_id,mark\np1,x,UT\np1,y,UT\np1,z,UT\np2,x,NE\np2,y,OT\np2,z,NE\np3,x,NE\n",
    )
    .unwrap();
    ok(&otut(d, &["collate", "--annotations", "a.csv", "--out", "c"]));
    assert_eq!(lines(&d.join("c/collated.jsonl")), vec![serde_json::json!({"id": "p1", "label": "UT"})]);
    let reasons: Vec<String> = lines(&d.join("c/excluded.jsonl"))
        .iter()
        .map(|v| v["reason"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(reasons, ["disagreement", "incomplete"]);
}
