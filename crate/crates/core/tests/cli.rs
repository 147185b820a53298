use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic")
}

fn finbps(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finbps"))
        .arg("--workspace")
        .arg(ws)
        .arg("--config")
        .arg(data().join("config.json"))
        .args(args)
        .env("RUST_LOG", "off")
        .env_remove("FINBPS_QG_URL")
        .env_remove("FINBPS_EMBED_URL")
        .env_remove("FINBPS_GENERATE_URL")
        .output()
        .expect("binary runs")
}

fn run_all(ws: &Path) -> Output {
    let t = data().join("transcripts");
    let s = data().join("summaries");
    finbps(ws, &["run", "--transcripts", t.to_str().unwrap(), "--summaries", s.to_str().unwrap()])
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("error line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn run_writes_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_all(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let outcomes: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(outcomes.as_array().unwrap().len(), 7);
    for stage in ["ingest", "qgen", "topics", "extract", "route", "generate", "eval"] {
        assert!(dir.path().join(stage).join("manifest.json").is_file(), "{stage}");
    }
    assert!(dir.path().join("config.json").is_file());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval/metrics.json")).unwrap()).unwrap();
    for key in ["rouge1", "rouge2", "rougeL"] {
        for part in ["precision", "recall", "f1"] {
            let v = metrics[key][part].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v), "{key}.{part} = {v}");
        }
    }
    let np = metrics["num_prec"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&np));
}

#[test]
fn topics_without_bank_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = finbps(dir.path(), &["topics"]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["error"], "MissingArtifact");
    assert_eq!(err["stage"], "topics");
    assert!(!dir.path().join("topics").exists());
}

#[test]
fn eval_reports_misaligned_ids() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_all(dir.path()).status.success());
    let preds = dir.path().join("preds.json");
    std::fs::write(&preds, r#"{"nosuchdoc": ["eps $1.00"]}"#).unwrap();
    let out = finbps(dir.path(), &["eval", "--predictions", preds.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["error"], "AlignmentError");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("nosuchdoc"), "{msg}");
    assert!(msg.contains("borealis"), "{msg}");
}

#[test]
fn eval_accepts_predictions_override() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_all(dir.path()).status.success());
    let refs: std::collections::BTreeMap<String, Vec<String>> = ["borealis", "delta"]
        .iter()
        .map(|id| {
            let text = std::fs::read_to_string(data().join("summaries").join(format!("{id}.txt"))).unwrap();
            (id.to_string(), text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect())
        })
        .collect();
    let preds = dir.path().join("preds.json");
    std::fs::write(&preds, serde_json::to_string(&refs).unwrap()).unwrap();
    let out = finbps(dir.path(), &["eval", "--predictions", preds.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["rouge1"]["f1"].as_f64(), Some(1.0));
    assert_eq!(metrics["rougeL"]["f1"].as_f64(), Some(1.0));
}

#[test]
fn invalid_flag_value_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = finbps(dir.path(), &["qgen", "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "ConfigInvalid");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_all(a.path()).status.success());
    assert!(run_all(b.path()).status.success());
    for stage in ["ingest", "qgen", "topics", "extract", "route", "generate", "eval"] {
        let mut files: Vec<_> = std::fs::read_dir(a.path().join(stage))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        files.sort();
        for f in files {
            let x = std::fs::read(a.path().join(stage).join(&f)).unwrap();
            let y = std::fs::read(b.path().join(stage).join(&f)).unwrap();
            assert!(x == y, "{stage}/{} differs", f.to_string_lossy());
        }
    }
}
