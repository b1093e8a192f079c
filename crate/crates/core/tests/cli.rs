use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wakeplan"));
    c.env_remove("WAKEPLAN_SEED");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json_file(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn plan_on_the_demo_field_matches_the_golden_cost() {
    let golden = json_file(data("demo16_golden.json"));
    let tmp = tempfile::tempdir().unwrap();
    for variant in ["wake_informed", "current_informed"] {
        let out = tmp.path().join(variant);
        run(bin().args(["plan", "--heuristic", "admissible_min", "--start", "15,15,9", "--goal", "7,7,6", "--variant", variant]).arg("--field").arg(data("demo16.wpf")).arg("--out").arg(&out));
        let path = json_file(out.join("path.json"));
        let g = path["result"]["g_total"].as_f64().unwrap();
        let want = golden["g_total"][variant].as_f64().unwrap();
        assert!((g - want).abs() <= 1e-9 * want, "{variant}: {g} vs {want}");
        let manifest = json_file(out.join("manifest.json"));
        assert_eq!(manifest["command"], "plan");
        assert!(manifest["outputs"].as_array().unwrap().iter().any(|f| f == "path.json"));
    }
}

#[test]
fn corpus_of_a_two_by_two_by_two_grid_has_eight_paths_per_variant() {
    let tmp = tempfile::tempdir().unwrap();
    run(bin().args(["corpus", "--grid-n", "16", "--extent", "30", "--speeds", "0.5,2", "--angles", "0,30", "--starts", "2", "--heuristic", "admissible_min"]).arg("--out").arg(tmp.path()));
    let m = json_file(tmp.path().join("corpus").join("manifest.json"));
    let counts = m["counts"].as_array().unwrap();
    assert_eq!(counts.len(), 2);
    for c in counts {
        assert_eq!(c["paths"].as_u64().unwrap() + c["failures"].as_u64().unwrap(), 8);
    }
}

#[test]
fn overfit_smoke_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    run(bin().args(["corpus", "--grid-n", "16", "--extent", "30", "--speeds", "0.5,1.5,3,4.5", "--angles", "0,30", "--starts", "4", "--variant", "wake_informed", "--heuristic", "admissible_min"]).arg("--out").arg(&corpus));
    let out = tmp.path().join("t");
    run(bin().args(["train", "--overfit-smoke"]).arg("--corpus").arg(corpus.join("corpus")).arg("--out").arg(&out));
    let m = json_file(out.join("manifest.json"));
    assert!(m["summary"]["train_loss"].as_f64().unwrap() < 1e-3);
    assert_eq!(m["summary"]["samples"], 32);
}

#[test]
fn usage_errors_exit_2_and_failures_exit_1_with_json() {
    let bad = bin().args(["plan", "--no-such-flag"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let tmp = tempfile::tempdir().unwrap();
    let occupied = bin().args(["plan", "--start", "15,15,9", "--goal", "7,7,7"]).arg("--field").arg(data("demo16.wpf")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(occupied.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&occupied.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "occupied");

    let missing = bin().args(["--config", "/definitely/not/here.toml", "field"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn config_dump_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let cfg = tmp.path().join("run.toml");
    let args = ["plan", "--grid-n", "16", "--extent", "30", "--speed", "2.2", "--angle", "20", "--heuristic", "admissible_min", "--no-timing"];
    let dump = run(bin().args(args).arg("--out").arg(&a).arg("--dump-config").env("WAKEPLAN_SEED", "5"));
    std::fs::write(&cfg, &dump.stdout).unwrap();
    run(bin().args(args).arg("--out").arg(&a).env("WAKEPLAN_SEED", "5"));
    let first = std::fs::read(a.join("path.json")).unwrap();
    let b = tmp.path().join("b");
    run(bin().arg("--config").arg(&cfg).arg("plan").arg("--out").arg(&b));
    assert_eq!(std::fs::read(b.join("path.json")).unwrap(), first);
    let text = String::from_utf8(dump.stdout).unwrap();
    assert!(text.contains("seed = 5"));
}

#[test]
fn seed_flag_beats_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(bin().args(["field", "--grid-n", "16", "--extent", "30", "--seed", "3", "--dump-config"]).env("WAKEPLAN_SEED", "8"));
    assert!(String::from_utf8(out.stdout).unwrap().contains("seed = 3"));
    run(bin().args(["field", "--grid-n", "16", "--extent", "30", "--speed", "1.5", "--angle", "15"]).arg("--out").arg(tmp.path()).env("WAKEPLAN_SEED", "3"));
    let generated = std::fs::read(tmp.path().join("field.wpf")).unwrap();
    assert_eq!(generated, std::fs::read(data("demo16.wpf")).unwrap());
}

#[test]
fn train_infer_and_bench_run_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("c");
    run(bin().args(["corpus", "--grid-n", "16", "--extent", "30", "--speeds", "0.3,1.2,2.3,4.4", "--angles", "0,30", "--starts", "5", "--heuristic", "admissible_min"]).arg("--out").arg(&c));
    let mut models = Vec::new();
    for v in ["wake_informed", "current_informed"] {
        let t = tmp.path().join(v);
        run(bin().args(["train", "--variant", v, "--epochs", "30", "--lr", "1e-3", "--batch-size", "8", "--patience", "0"]).arg("--corpus").arg(c.join("corpus")).arg("--out").arg(&t));
        let report = json_file(t.join("report.json"));
        assert_eq!(report["train_loss"].as_array().unwrap().len(), 30);
        models.push(t);
    }
    let i = tmp.path().join("i");
    run(bin().args(["infer", "--grid-n", "16", "--extent", "30", "--start", "30,20,18", "--speed", "1.2", "--snap"]).arg("--model").arg(models[0].join("model")).arg("--out").arg(&i));
    let pred = json_file(i.join("prediction.json"));
    assert!(!pred["prediction"]["waypoints"].as_array().unwrap().is_empty());

    let b = tmp.path().join("b");
    let mut cmd = bin();
    cmd.arg("bench").arg("--corpus").arg(c.join("corpus")).arg("--split").arg(models[0].join("split.json")).arg("--out").arg(&b);
    for m in &models {
        cmd.arg("--model").arg(m.join("model"));
    }
    run(&mut cmd);
    let tables = std::fs::read_to_string(b.join("tables.md")).unwrap();
    for label in ["C.I._A*", "C.I._NN", "W.I._A*", "W.I._NN"] {
        assert!(tables.contains(label));
    }
    assert!(b.join("distribution_wi_nn.csv").exists());
}
