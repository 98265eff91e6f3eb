use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use quantbound_cli::sweep::{FISHER_COLUMNS, RESULT_COLUMNS};

const GOLDEN_HEADER: &str = "n,k,d,p,B,scale,family,quantizer,estimator,loss,T2_LOW,T2_HIGH,T3_LOW,T3_HIGH,COR2,\
COR2_condition,T4_LOW,T4_HIGH,COR3_LOW,COR3_HIGH,max_bound,risk_mean,risk_std_error,trials,argmax_theta,\
dominance_margin,dominated,wall_clock_ms,I0,notes";

const GLM: &str = r#"
[model]
family = "gaussian"
scale = 1.0
[space]
dim = 1
half_width = 1.0
[quantizer]
kind = "sign"
[loss]
kinds = ["lp"]
orders = [2.0]
[sweep]
n = [1000, 10, 100]
k = [1]
[simulation]
trials = 200
master_seed = 5
"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn quantbound(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_quantbound"))
        .args(args)
        .env_remove(quantbound_cli::JOBS_ENV)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run_with(sub: &str, text: &str, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let mut args = vec![sub, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    quantbound(&args)
}

fn records(csv_text: &str) -> Vec<HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

#[test]
fn header_matches_golden_list() {
    assert_eq!(RESULT_COLUMNS.join(","), GOLDEN_HEADER);
    let run = run_with("bound", GLM, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout.lines().next().unwrap(), GOLDEN_HEADER);
    let fisher = run_with("fisher", GLM, &[]);
    assert_eq!(fisher.stdout.lines().next().unwrap(), FISHER_COLUMNS.join(","));
}

#[test]
fn glm_bound_column_and_rate() {
    let run = run_with("bound", GLM, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = records(&run.stdout);
    let ns: Vec<f64> = rows.iter().map(|r| num(r, "n")).collect();
    assert_eq!(ns, [10.0, 100.0, 1000.0], "rows are sorted by n");
    let cor2: Vec<f64> = rows.iter().map(|r| num(r, "COR2")).collect();
    for (v, want) in cor2.iter().zip([0.1, 0.01, 0.001]) {
        assert!((v - want).abs() <= 1e-12 * want, "{v} vs {want}");
    }
    assert_eq!(rows[0]["COR2_condition"], "true");
    let slope = (cor2[2].ln() - cor2[0].ln()) / (1000f64.ln() - 10f64.ln());
    assert!((slope + 1.0).abs() < 1e-6, "{slope}");
}

#[test]
fn orlicz_bound_below_three_halves_is_a_row_note() {
    let text = GLM
        .replace("orders = [2.0]", "orders = [1.4, 2.0]")
        .replace("kinds = [\"lp\"]", "kinds = [\"lp\", \"wasserstein\"]");
    let run = run_with("bound", &text, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = records(&run.stdout);
    assert_eq!(rows.len(), 12);
    let low_lp = rows.iter().find(|r| r["p"] == "1.4" && r["loss"] == "LP").unwrap();
    assert!(low_lp["T3_LOW"].is_empty());
    assert!(low_lp["notes"].contains("T3") && low_lp["notes"].contains("3/2"), "{}", low_lp["notes"]);
    // the raised-cosine prior has infinite information of order p <= 3/2
    assert!(low_lp["T2_LOW"].is_empty() && low_lp["notes"].contains("T2"));
    assert!(low_lp["max_bound"].is_empty());
    let high = rows.iter().find(|r| r["p"] == "2.0" && r["loss"] == "LP").unwrap();
    assert!(!high["T3_HIGH"].is_empty() && high["notes"].is_empty());
}

#[test]
fn default_config_row_dominates() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml")).unwrap();
    let run = run_with("simulate", &text, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = records(&run.stdout);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r["dominated"], "true");
        assert!(num(r, "dominance_margin") > 0.0);
        assert_eq!(num(r, "trials"), 10_000.0);
    }
    let lp = &rows[0];
    assert!((num(lp, "COR2") - 0.01).abs() < 1e-15);
    assert!(num(lp, "risk_mean") > 0.0157 - 0.003);
}

#[test]
fn dominance_failure_exits_with_two() {
    // A single boundary point, where clipping halves the risk, loses to a
    // bound on the worst case over the cube.
    let text = GLM
        .replace("n = [1000, 10, 100]", "n = [1000]")
        .replace("master_seed = 5", "master_seed = 5\ntheta_grid = [[1.0]]")
        .replace("trials = 200", "trials = 2000");
    let run = run_with("simulate", &text, &[]);
    assert_eq!(run.code, 2, "{}", run.stderr);
    let rows = records(&run.stdout);
    assert_eq!(rows[0]["dominated"], "false");
    assert!(run.stderr.contains("dominance"));
}

#[test]
fn configuration_errors_exit_with_three() {
    let bad = run_with("simulate", &GLM.replace("trials = 200", "trials = 0"), &[]);
    assert_eq!(bad.code, 3);
    assert!(bad.stdout.is_empty());
    assert!(bad.stderr.contains("trials"));
    assert_eq!(quantbound(&["bound", "--config", "/nonexistent/config.toml"]).code, 3);
    assert_eq!(run_with("bound", &GLM.replace("[model]", "[modle]"), &[]).code, 3);
    assert_eq!(quantbound(&["nonsense"]).code, 3);
    assert_eq!(run_with("bound", GLM, &["--jobs", "0"]).code, 3);
}

#[test]
fn records_format_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GLM);
    let out = dir.path().join("rows.jsonl");
    let run = quantbound(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "records",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    let keys: Vec<&str> = lines[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = RESULT_COLUMNS.to_vec();
    let mut got = keys.clone();
    want.sort_unstable();
    got.sort_unstable();
    assert_eq!(got, want);
    assert!(lines[0]["risk_mean"].is_null());
    assert_eq!(lines[0]["COR2"], 0.1);
}

#[test]
fn seed_flag_overrides_config_and_output_is_reproducible() {
    let text = GLM
        .replace("n = [1000, 10, 100]", "n = [50]")
        .replace("master_seed = 5", "master_seed = 5\ntheta_grid = [[0.0], [0.4]]");
    let a = run_with("simulate", &text, &[]);
    let b = run_with("simulate", &text, &["--jobs", "2"]);
    let c = run_with("simulate", &text, &["--seed", "6"]);
    let d = run_with("simulate", &text.replace("master_seed = 5", "master_seed = 6"), &[]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn fisher_table_examples() {
    let text = GLM.replace("dim = 1", "dim = 2").replace("half_width = 1.0", "half_width = 1.5");
    let run = run_with("fisher", &text, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = records(&run.stdout);
    let raw: Vec<_> = rows.iter().filter(|r| r["source"] == "RAW_X").collect();
    assert_eq!(raw.len(), 81);
    for r in &raw {
        assert!((num(r, "value") - 2.0).abs() < 1e-10);
        let msgs = rows.iter().filter(|m| m["source"] == "MESSAGE" && m["theta"] == r["theta"]);
        for m in msgs {
            assert!(num(m, "value") <= num(r, "value"));
        }
    }
    let prior = rows.iter().find(|r| r["source"] == "PRIOR").unwrap();
    let want = 2.0 * PI * PI / 2.25;
    assert!((num(prior, "value") - want).abs() < 1e-8 * want);
    let orlicz = rows.iter().find(|r| r["source"] == "ORLICZ").unwrap();
    assert!((num(orlicz, "value") - (8.0f64 / 3.0).sqrt()).abs() < 1e-6);
}
