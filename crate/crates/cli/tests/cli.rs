use std::process::{Command, Output};

use qseries::json::series_from_json;
use qseries::rings::{WLaurent, WRational};
use qseries::TruncatedSeries;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qseries")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn expand_eta_text_layout() {
    let o = run(&["expand", "--fn", "eta", "--order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "q^(1/24) * (1 - q - q^2) + O(q^(73/24))\n");
}

#[test]
fn expand_absolute_order() {
    let o = run(&["expand", "--fn", "eta", "--order", "2+1/24", "--absolute"]);
    assert_eq!(stdout(&o), "q^(1/24) * (1 - q) + O(q^(49/24))\n");
}

#[test]
fn expand_cubic_theta_json_round_trips() {
    let o = run(&["expand", "--fn", "b3", "--k", "1", "--order", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "qseries.series/1");
    let s: TruncatedSeries<WLaurent> = series_from_json(&v).unwrap();
    // b_{3,1} starts 3 w q^{1/3}
    let (e, c) = s.leading().unwrap();
    assert_eq!(e.to_string(), "1/3");
    assert_eq!(c.terms().len(), 3);
}

#[test]
fn expand_user_spec_file() {
    // sum_k w^k q^{k^2/2 + k/2} / (1 - w q^k), a rank one Appell sum
    let spec = r#"{
        "version": 1,
        "gram": [["1"]], "lin_q": ["1/2"], "const_q": "0",
        "lin_w": ["1"], "const_w": "0",
        "denoms": [{"m": ["1"], "w_pow": "1", "q_off": "0"}]
    }"#;
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("mysum.json");
    std::fs::write(&path, spec).unwrap();
    let o = run(&["expand", "--spec", path.to_str().unwrap(), "--order", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s: TruncatedSeries<WRational> = series_from_json(&v).unwrap();
    assert!(!s.is_zero());
    let text = run(&["expand", "--spec", path.to_str().unwrap(), "--order", "2"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("O(q^2)"));
}

#[test]
fn expand_usage_errors() {
    assert_eq!(run(&["expand", "--fn", "eta", "--order", "x/y"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "--fn", "eta", "--order", "1/7"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "--fn", "zeta", "--order", "1"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "--spec", "/nonexistent.json", "--order", "1"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "--order", "1", "--bogus"]).status.code(), Some(2));
}

#[test]
fn verify_single_identity_cites_location() {
    let o = run(&["verify", "--identity", "thm2", "--order", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("PASS"), "{out}");
    assert!(out.contains("Theorem 1.2"), "{out}");
}

#[test]
fn verify_unknown_identity_lists_catalogue() {
    let o = run(&["verify", "--identity", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("nonsense"));
    assert!(err.contains("thm1") && err.contains("theta-sum-product"), "{err}");
}

#[test]
fn verify_failure_exits_one_with_exact_coefficient() {
    let o = run(&["verify", "--identity", "thm1-sign-mutant", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["status"], "fail");
    assert!(r["coefficient"].is_string());
    assert!(r.get("wall_ms").is_none());
}

#[test]
fn verify_all_is_deterministic_across_worker_counts() {
    let a = run(&["verify", "--all", "--order", "6", "--jobs", "1", "--format", "json"]);
    let b = run(&["verify", "--all", "--order", "6", "--jobs", "4", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["passed"], v["total"]);
    let names: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(&names[..3], ["thm1", "thm2", "thm3"]);
}

#[test]
fn residue_table_at_documented_point() {
    let o = run(&["residue", "--identity", "thm1", "--table", "--tau", "0.0,1.5", "--prec", "256"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains("expected")).count(), 8, "{out}");
    assert!(out.lines().any(|l| l.starts_with("(0, 0)") && l.contains("removable: yes")));
}

#[test]
fn residue_point_reports_removable() {
    let o = Command::new(env!("CARGO_BIN_EXE_qseries"))
        .args(["residue", "--point", "0,0"])
        .env("QSERIES_PREC", "160")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("removable"), "{out}");
    assert!(out.contains("prec = 160"), "{out}");
}

#[test]
fn residue_rejects_bad_tau() {
    assert_eq!(run(&["residue", "--table", "--tau", "1.0"]).status.code(), Some(2));
    assert_eq!(run(&["residue", "--table", "--tau", "0.1,-1"]).status.code(), Some(2));
    assert_eq!(run(&["residue", "--table", "--point", "0,0"]).status.code(), Some(2));
    assert_eq!(run(&["residue"]).status.code(), Some(2));
}

#[test]
fn eval_both_sides() {
    let o = run(&["eval", "--identity", "thm1-normalized", "--z", "0.137,0.061", "--tau", "0.1,0.48", "--prec", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("agree") && out.contains('±'), "{out}");
    let fam = run(&["eval", "--identity", "decompose", "--z", "0.1,0.1"]);
    assert_eq!(fam.status.code(), Some(1));
}

#[test]
fn list_json() {
    let o = run(&["list", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert!(arr.iter().any(|e| e["name"] == "thm3" && e["location"] == "Theorem 1.3"));
}

#[test]
fn help_documents_defaults() {
    let o = run(&["residue", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("QSERIES_PREC") && out.contains("256") && out.contains(SAMPLE));
}

const SAMPLE: &str = "0.1,0.48";
