//! End-to-end tests driving the `ccp` binary.

use std::io::Write;
use std::process::{Command, Output};

fn ccp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccp"))
        .args(args)
        .output()
        .expect("spawn ccp")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn write_temp_json(content: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new()
        .suffix(".json")
        .tempfile()
        .expect("temp file");
    file.write_all(content.as_bytes()).expect("write temp");
    file
}

#[test]
fn pdf_table_csv_matches_the_exact_values() {
    let out = ccp(&[
        "pdf",
        "--uniform",
        "3",
        "--c",
        "3",
        "--kmax",
        "6",
        "--backend",
        "exact",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,pdf");
    assert_eq!(lines.len(), 8); // header + k = 0..=6
    assert_eq!(lines[4], "3,0.22222222222222222"); // pdf(3) = 2/9
    assert_eq!(lines[1], "0,0");
    // LF endings, no CR
    assert!(!text.contains('\r'));
}

#[test]
fn pdf_json_carries_exact_fraction_and_matching_decimal() {
    let out = ccp(&[
        "pdf",
        "--uniform",
        "3",
        "--c",
        "3",
        "--kmax",
        "6",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["command"], "pdf");
    assert_eq!(parsed["backend"], "exact");
    assert_eq!(parsed["rows"][3]["pdf"]["exact"], "2/9");
    // identical numeric text in CSV and JSON
    let json_text = stdout(&out);
    assert!(json_text.contains("0.22222222222222222"));
}

#[test]
fn popularity_file_with_rational_strings() {
    let file = write_temp_json(r#"{"probabilities": ["1/10", "2/10", "3/10", "4/10"]}"#);
    let out = ccp(&[
        "ccdf",
        "--popularity",
        file.path().to_str().unwrap(),
        "--c",
        "2",
        "--k",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["rows"][0]["ccdf"]["exact"], "3/10");
}

#[test]
fn popularity_file_with_uniform_entry() {
    let file = write_temp_json(r#"{"uniform": 4}"#);
    let out = ccp(&[
        "expectation",
        "--popularity",
        file.path().to_str().unwrap(),
        "--c",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // 4 * (1 + 1/2 + 1/3 + 1/4) = 25/3
    assert_eq!(parsed["rows"][0]["expectation"]["exact"], "25/3");
}

#[test]
fn unnormalized_popularity_fails_with_code_and_exit_1() {
    let file = write_temp_json(r#"{"probabilities": [0.5, 0.6]}"#);
    let out = ccp(&[
        "pdf",
        "--popularity",
        file.path().to_str().unwrap(),
        "--c",
        "2",
        "--k",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).is_empty());
    let err: serde_json::Value =
        serde_json::from_str(stderr(&out).lines().next().unwrap()).unwrap();
    assert_eq!(err["error"]["code"], "NotNormalized");
}

#[test]
fn renormalize_rescales_the_same_file() {
    let file = write_temp_json(r#"{"probabilities": [0.5, 0.6]}"#);
    let out = ccp(&[
        "expectation",
        "--popularity",
        file.path().to_str().unwrap(),
        "--renormalize",
        "--c",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // weights 5/11 and 6/11: E[T_2] = 1/(1-5/11) + 1/(1-6/11) - 1 = 91/30
    assert_eq!(parsed["rows"][0]["expectation"]["exact"], "91/30");
}

#[test]
fn uniform_too_small_is_a_validation_error() {
    let out = ccp(&["pdf", "--uniform", "1", "--c", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least 2"));
}

#[test]
fn missing_source_is_a_usage_error_with_exit_1() {
    let out = ccp(&["pdf", "--c", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_small_grid_passes_with_exit_0() {
    let out = ccp(&[
        "verify", "--n-max", "4", "--trials", "3", "--seed", "7", "--format", "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert_eq!(row["status"], "ok", "suite {} failed", row["suite"]);
        assert_eq!(row["failures"], 0);
    }
    assert!(parsed.get("failures").is_none());
}

#[test]
fn verify_is_deterministic_for_a_fixed_seed() {
    let args = ["verify", "--n-max", "4", "--trials", "2", "--seed", "11"];
    let first = ccp(&args);
    let second = ccp(&args);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn alpha_table_reports_provenance_and_weights() {
    let out = ccp(&[
        "alpha",
        "--uniform",
        "4",
        "--exponent",
        "3",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["provenance"], "uniform");
    assert_eq!(parsed["rows"][1]["alpha"]["exact"], "11/16");
    assert_eq!(parsed["rows"][2]["alpha"]["exact"], "1/1");
}

#[test]
fn eta_row_and_single_coefficient() {
    let out = ccp(&[
        "eta",
        "--uniform",
        "5",
        "--exponent",
        "2",
        "--j",
        "4",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1,-8.0000000000000000"));
    assert!(text.contains("2,3.0000000000000000"));
    let single = ccp(&[
        "eta",
        "--uniform",
        "5",
        "--exponent",
        "2",
        "--j",
        "4",
        "--u",
        "2",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&single)).unwrap();
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 1);
    assert_eq!(parsed["rows"][0]["eta"]["exact"], "3/1");
}

#[test]
fn powersum_reports_the_chosen_method() {
    let fast = ccp(&[
        "powersum",
        "--uniform",
        "5",
        "--j",
        "4",
        "--exponent",
        "2",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&fast)).unwrap();
    assert_eq!(parsed["rows"][0]["method"], "fast");
    assert_eq!(parsed["rows"][0]["value"]["exact"], "16/5");
    let brute = ccp(&[
        "powersum",
        "--uniform",
        "5",
        "--j",
        "2",
        "--exponent",
        "3",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&brute)).unwrap();
    assert_eq!(parsed["rows"][0]["method"], "bruteforce");
}

#[test]
fn compare_marks_infeasible_brute_force_and_reports_the_ratio() {
    let out = ccp(&[
        "compare",
        "--uniform",
        "20",
        "--j",
        "10",
        "--k",
        "2",
        "--guard",
        "1000",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    let metric = |name: &str| {
        rows.iter()
            .find(|r| r["metric"] == name)
            .unwrap_or_else(|| panic!("metric {name} missing"))["value"]
            .clone()
    };
    assert_eq!(metric("brute_status"), "infeasible, ratio only");
    assert_eq!(metric("brute_subsets").as_u64(), Some(184756));
    assert_eq!(metric("fast_subsets").as_u64(), Some(210));
    assert!(rows.iter().all(|r| r["metric"] != "brute_value"));
    // C(20,10) / (C(20,1) + C(20,2)) = 184756/210 = 92378/105
    assert_eq!(metric("subset_ratio")["exact"], "92378/105");
}

#[test]
fn compare_runs_both_paths_when_feasible() {
    let out = ccp(&[
        "compare",
        "--uniform",
        "12",
        "--j",
        "8",
        "--k",
        "3",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    let metric = |name: &str| {
        rows.iter()
            .find(|r| r["metric"] == name)
            .unwrap_or_else(|| panic!("metric {name} missing"))["value"]
            .clone()
    };
    assert_eq!(metric("brute_status"), "ok");
    assert_eq!(metric("brute_value")["exact"], "440/3");
    assert_eq!(metric("fast_value")["exact"], "440/3");
    assert_eq!(metric("relative_difference").as_f64(), Some(0.0));
}

#[test]
fn simulate_is_deterministic_and_reports_reproducibility_metadata() {
    let args = [
        "simulate",
        "--uniform",
        "3",
        "--c",
        "3",
        "--samples",
        "5000",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let first = ccp(&args);
    let second = ccp(&args);
    assert!(first.status.success());
    assert_eq!(stdout(&first), stdout(&second));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(parsed["generator"], "chacha20");
    assert_eq!(parsed["seed"], 42);
    assert_eq!(parsed["samples"], 5000);
    assert_eq!(parsed["truncated"], 0);
    // no mass below the collection size
    assert!(parsed["rows"][0]["k"].as_u64().unwrap() >= 3);
}

#[test]
fn float_cancellation_warning_lands_on_stderr() {
    let out = ccp(&[
        "ccdf",
        "--uniform",
        "60",
        "--c",
        "55",
        "--k",
        "30",
        "--backend",
        "float",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("cancellation condition estimate"));
    // the mild instance stays quiet
    let quiet = ccp(&[
        "ccdf",
        "--uniform",
        "40",
        "--c",
        "35",
        "--k",
        "30",
        "--backend",
        "float",
        "--format",
        "csv",
    ]);
    assert!(quiet.status.success());
    assert!(!stderr(&quiet).contains("cancellation"));
}

#[test]
fn float_backend_parses_decimals_and_ratios() {
    let file = write_temp_json(r#"{"probabilities": [0.1, "2/10", 0.3, 0.4]}"#);
    let out = ccp(&[
        "pdf",
        "--popularity",
        file.path().to_str().unwrap(),
        "--c",
        "2",
        "--k",
        "2",
        "--backend",
        "float",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.7).abs() < 1e-12);
}

#[test]
fn csv_and_json_agree_on_the_same_run() {
    let csv = ccp(&[
        "cdf",
        "--uniform",
        "4",
        "--c",
        "2",
        "--kmax",
        "5",
        "--format",
        "csv",
    ]);
    let json = ccp(&[
        "cdf",
        "--uniform",
        "4",
        "--c",
        "2",
        "--kmax",
        "5",
        "--format",
        "json",
    ]);
    let csv_text = stdout(&csv);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    for (i, line) in csv_text.lines().skip(1).enumerate() {
        let decimal = line.split(',').nth(1).unwrap();
        let row = &parsed["rows"][i];
        assert_eq!(row["k"].as_u64(), Some(i as u64));
        // identical numeric text between the two formats
        assert!(
            stdout(&json).contains(decimal),
            "decimal {decimal} missing from JSON output"
        );
        // and the exact fraction evaluates to the same value
        let exact = row["cdf"]["exact"].as_str().unwrap();
        let (num, den) = exact.split_once('/').unwrap();
        let approx = num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap();
        assert!((approx - decimal.parse::<f64>().unwrap()).abs() < 1e-12);
    }
}
