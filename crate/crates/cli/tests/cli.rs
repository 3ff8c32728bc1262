use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

fn pelve(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pelve"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn temp_csv(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pelve-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path)
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    path
}

fn last_field(line: &str, index: usize) -> String {
    line.split(',').nth(index).unwrap().to_string()
}

#[test]
fn analytic_uniform_gives_three() {
    let (code, out, _) = pelve(&[
        "analytic",
        "--dist",
        "uniform:0,1",
        "--order",
        "2",
        "--epsilon",
        "0.05",
    ]);
    assert_eq!(code, 0);
    let row = out.lines().last().unwrap();
    assert!(row.starts_with("pelve,2,0.05,"));
    assert_eq!(last_field(row, 3), "3");
}

#[test]
fn analytic_exponential_above_threshold_is_inf() {
    let (code, out, _) = pelve(&["analytic", "--dist", "exp:1", "--order", "2", "--epsilon", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(last_field(out.lines().last().unwrap(), 3), "inf");
}

#[test]
fn analytic_numeric_fallback_and_closed_only() {
    let args = [
        "analytic",
        "--dist",
        "normal:0,1",
        "--order",
        "2",
        "--epsilon",
        "0.05",
    ];
    let (code, out, _) = pelve(&args);
    assert_eq!(code, 0);
    let row = out.lines().last().unwrap();
    assert_eq!(last_field(row, 4), "numeric");
    let c: f64 = last_field(row, 3).parse().unwrap();
    assert!((c - 4.04082).abs() < 1e-4);
    let (code, _, err) = pelve(&[&args[..], &["--closed-only"]].concat());
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}

#[test]
fn exit_codes() {
    assert_eq!(pelve(&[]).0, 1);
    assert_eq!(pelve(&["--help"]).0, 0);
    assert_eq!(
        pelve(&[
            "analytic",
            "--dist",
            "uniform:1,0",
            "--order",
            "2",
            "--epsilon",
            "0.1"
        ])
        .0,
        1
    );
    assert_eq!(
        pelve(&["analytic", "--dist", "exp:1", "--order", "0", "--epsilon", "0.1"]).0,
        1
    );
    assert_eq!(
        pelve(&["analytic", "--dist", "exp:1", "--order", "2", "--epsilon", "1"]).0,
        1
    );
    assert_eq!(
        pelve(&[
            "--format",
            "xml",
            "analytic",
            "--dist",
            "exp:1",
            "--order",
            "2",
            "--epsilon",
            "0.1"
        ])
        .0,
        1
    );
    assert_eq!(
        pelve(&[
            "--reltol",
            "1",
            "analytic",
            "--dist",
            "exp:1",
            "--order",
            "2",
            "--epsilon",
            "0.1"
        ])
        .0,
        1
    );
    assert_eq!(
        pelve(&["rolling", "--input", "/no/such/file.csv", "--kind", "prices"]).0,
        2
    );
    let bad = temp_csv("unsorted.csv", "date,return\n2020-01-02,0.1\n2020-01-01,0.2\n");
    let (code, _, err) = pelve(&[
        "empirical",
        "--input",
        bad.to_str().unwrap(),
        "--kind",
        "returns",
        "--order",
        "2",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1);
    let short = temp_csv("short.csv", "date,return\n2020-01-01,0.1\n2020-01-02,0.2\n");
    assert_eq!(
        pelve(&["rolling", "--input", short.to_str().unwrap(), "--kind", "returns"]).0,
        2
    );
}

#[test]
fn rolling_constant_prices() {
    let path = temp_csv(
        "flat.csv",
        "date,price\n2020-01-01,10\n2020-01-02,10\n2020-01-03,10\n",
    );
    let (code, out, _) = pelve(&[
        "rolling",
        "--input",
        path.to_str().unwrap(),
        "--kind",
        "prices",
        "--window",
        "2",
        "--orders",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "date,order,pelve,small_sample\n2020-01-03,2,1,true\n");
}

fn skewed_returns() -> String {
    let mut s = String::from("date,return\n");
    let start = chrono::NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    for i in 0..300u64 {
        let r = if i % 30 == 0 {
            -0.25
        } else {
            0.002 * (i % 5) as f64
        };
        s.push_str(&format!("{},{r}\n", start + chrono::Days::new(i)));
    }
    s
}

#[test]
fn rolling_row_count_and_json_match_csv() {
    let path = temp_csv("skewed.csv", &skewed_returns());
    let base = [
        "rolling",
        "--input",
        path.to_str().unwrap(),
        "--kind",
        "returns",
        "--window",
        "120",
        "--orders",
        "1,2,3",
    ];
    let (code, csv_out, _) = pelve(&base);
    assert_eq!(code, 0);
    let rows: Vec<&str> = csv_out.lines().skip(1).collect();
    assert_eq!(rows.len(), (300 - 120 + 1) * 3);
    let (code, json_out, _) = pelve(&[&["--format", "json"], &base[..]].concat());
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&json_out).unwrap();
    let objs = json.as_array().unwrap();
    assert_eq!(objs.len(), rows.len());
    for (line, obj) in rows.iter().zip(objs) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(obj["date"], fields[0]);
        if fields[2] == "inf" {
            assert!(obj["pelve"].is_null());
            assert_eq!(obj["pelve_infinite"], true);
        } else {
            assert_eq!(obj["pelve"].as_f64().unwrap(), fields[2].parse::<f64>().unwrap());
        }
    }
}

#[test]
fn negate_changes_skewed_empirical_pelve() {
    let path = temp_csv("skewed2.csv", &skewed_returns());
    let args = [
        "empirical",
        "--input",
        path.to_str().unwrap(),
        "--kind",
        "returns",
        "--order",
        "2",
        "--epsilon",
        "0.05",
    ];
    let (_, raw, _) = pelve(&args);
    let (_, neg, _) = pelve(&[&args[..], &["--negate"]].concat());
    let pick = |s: &str| last_field(s.lines().nth(1).unwrap(), 5);
    assert_ne!(pick(&raw), pick(&neg));
}

#[test]
fn simulate_outputs_summary_and_histogram() {
    let (code, out, _) = pelve(&[
        "--format",
        "json",
        "simulate",
        "--dist",
        "uniform:0,1",
        "--order",
        "2",
        "--epsilon",
        "0.05",
        "--replicates",
        "20",
        "--length",
        "2000",
        "--seed",
        "9",
        "--bins",
        "5",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"][0]["finite"], 20);
    let counts: u64 = v["histogram"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .sum();
    assert_eq!(counts, 20);
    assert!((v["summary"][0]["mean"].as_f64().unwrap() - 3.0).abs() < 0.2);
}
