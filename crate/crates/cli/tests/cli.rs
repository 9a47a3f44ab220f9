use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "dim": 1,
  "grid": { "origin": [-2], "h": 0.0625, "extents": [64] },
  "probes": { "centers": [[0]], "r_min": 0.25, "r_max": 0.5, "count": 2 },
  "quadrature": { "t_max": 16, "nodes_per_decade": 4, "m": 8 },
  "corpus": ["indicator:0:0.5", "trig:3"],
  "seed": 4,
  "refine": false
}"#;

fn isqlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isqlab")).current_dir(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn repo_config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&isqlab(dir.path(), &["--help"])), 0);
    assert_eq!(code(&isqlab(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&isqlab(dir.path(), &["young"])), 1);
    write_config(dir.path(), "c.json", SMALL);
    assert_eq!(code(&isqlab(dir.path(), &["--config", "c.json", "verify", "thm99"])), 1);
    write_config(dir.path(), "bad.json", &SMALL.replace("\"seed\": 4", "\"seed\": 4, \"colour\": 1"));
    let out = isqlab(dir.path(), &["--config", "bad.json", "verify", "lemma33"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let gauss = SMALL.replace("\"trig:3\"", "\"gauss:1\"");
    write_config(dir.path(), "gauss.json", &gauss);
    assert_eq!(code(&isqlab(dir.path(), &["--config", "gauss.json", "verify", "lemma33"])), 1);
}

#[test]
fn verify_writes_a_report_with_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", SMALL);
    let out = isqlab(dir.path(), &["--config", "c.json", "--out", "r", "verify", "lemma33"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("r/lemma33.csv")).unwrap();
    assert!(report.starts_with("# isqlab report: lemma33\n# status: pass\n"));
    for line in SMALL.lines() {
        assert!(report.contains(&format!("#   {line}\n")), "{line}");
    }
}

#[test]
fn negative_control_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = isqlab(dir.path(), &["--config", &repo_config("thm44_negative.json"), "--out", "r", "verify", "thm44"]);
    assert_eq!(code(&out), 3);
    let report = fs::read_to_string(dir.path().join("r/thm44.csv")).unwrap();
    assert!(report.contains("# status: hypothesis_unmet"));
}

#[test]
fn unstable_constant_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = r#"{
      "dim": 2,
      "grid": { "origin": [-1, -1], "h": 0.125, "extents": [16, 16] },
      "probes": { "centers": [[0, 0]], "r_min": 0.25, "r_max": 0.5, "count": 2 },
      "quadrature": { "t_max": 16, "nodes_per_decade": 4, "m": 24 },
      "corpus": ["indicator:0:0:0.5"],
      "truncation_check": false
    }"#;
    write_config(dir.path(), "c.json", coarse);
    let out = isqlab(dir.path(), &["--config", "c.json", "--out", "r", "verify", "lemma33"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

fn numbers_from_csv(text: &str) -> Vec<f64> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .flat_map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .filter_map(|c| c.parse::<f64>().ok())
        .collect()
}

fn numbers_from_json(v: &serde_json::Value, out: &mut Vec<f64>) {
    match v {
        serde_json::Value::Number(n) => out.push(n.as_f64().unwrap()),
        serde_json::Value::Array(a) => a.iter().for_each(|x| numbers_from_json(x, out)),
        serde_json::Value::String(s) => {
            if let Ok(x) = s.parse::<f64>() {
                out.push(x);
            }
        }
        _ => {}
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", SMALL);
    for format in ["csv", "json"] {
        let out =
            isqlab(dir.path(), &["--config", "c.json", "--out", "r", "--format", format, "verify", "g_comparability"]);
        assert_eq!(code(&out), 0);
    }
    let csv = fs::read_to_string(dir.path().join("r/g_comparability.csv")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/g_comparability.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 4);
    let mut from_json = Vec::new();
    for c in json["checks"].as_array().unwrap() {
        for key in ["value", "refined", "delta"] {
            numbers_from_json(&c[key], &mut from_json);
        }
    }
    for t in json["tables"].as_array().unwrap() {
        numbers_from_json(&t["rows"], &mut from_json);
    }
    let from_csv = numbers_from_csv(&csv);
    assert!(!from_csv.is_empty());
    assert_eq!(from_csv.len(), from_json.len());
    for (a, b) in from_csv.iter().zip(&from_json) {
        assert!(a == b || (a.is_nan() && b.is_nan()), "{a} vs {b}");
    }
}

#[test]
fn seed_override_and_workers_keep_reports_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "c.json", SMALL);
    let run = |out: &str, workers: &str, seed: &str| {
        let o = isqlab(
            dir.path(),
            &["--config", "c.json", "--out", out, "--workers", workers, "--seed", seed, "verify", "lemma33"],
        );
        assert_eq!(code(&o), 0);
        fs::read(dir.path().join(out).join("lemma33.csv")).unwrap()
    };
    let a = run("a", "1", "11");
    let b = run("b", "3", "11");
    assert_eq!(a, b);
    assert!(String::from_utf8_lossy(&a).contains("# override: seed = 11"));
    assert_ne!(a, run("c", "1", "12"));
}

#[test]
fn module_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file) in [("young", "young.json"), ("zygmund", "zygmund.json"), ("hardy", "hardy.json")] {
        let out = isqlab(dir.path(), &["--config", &repo_config(file), "--out", "r", cmd]);
        assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("r/{cmd}.csv")).exists());
    }
    write_config(
        dir.path(),
        "c.json",
        &SMALL.replace("\"seed\": 4", "\"seed\": 4, \"symbol\": \"log\", \"lambda\": 6"),
    );
    for cmd in ["norm", "sqfn"] {
        let out = isqlab(dir.path(), &["--config", "c.json", "--out", "r", cmd]);
        assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
