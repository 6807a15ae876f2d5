use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outsideview"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn atrain_args(out: &str, format: &str) -> Vec<String> {
    [
        "diligence",
        "--forecast",
        &fixture("atrain_forecast.json"),
        "--records",
        &fixture("rail62.csv"),
        "--rampup",
        &fixture("rampup11.csv"),
        "--exclude-outliers",
        "auto",
        "--risk-register",
        &fixture("atrain_risks.json"),
        "--comments",
        &fixture("atrain_comments.txt"),
        "--claims-contradicted",
        "--format",
        format,
        "--out",
        out,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_owned(dir: &Path, args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(dir, &refs)
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "ingest",
            "--records",
            &fixture("rail61.csv"),
            "--rampup",
            &fixture("rampup11.csv"),
            "--out",
            "b.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("61 records, 54 ramp-up rows (11 projects)"));
    let bundle: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(bundle["records"].as_array().unwrap().len(), 61);
    assert_eq!(bundle["rampups"].as_array().unwrap().len(), 54);
}

#[test]
fn ingest_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        "project_id,category,forecast_first_year,actual_first_year\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["ingest", "--records", empty.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no records"));

    let dup = dir.path().join("dup.csv");
    fs::write(
        &dup,
        "project_id,category,forecast_first_year,actual_first_year\nP7,rail,1,1\nP7,rail,2,1\n",
    )
    .unwrap();
    let o = run(dir.path(), &["ingest", "--records", dup.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("P7"));

    let o = run(dir.path(), &["ingest", "--records", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "benchmark",
            "--records",
            &fixture("rail62.csv"),
            "--exclude-outliers",
            "auto",
            "--out",
            "s.json",
        ],
    );
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.contains("mean      0.59"), "{table}");
    assert!(table.contains("sd        0.33"));
    assert!(table.contains("quartiles 0.35 / 0.51 / 0.78"));
    let s: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(s["n"], 61);
    assert_eq!(s["quantiles"]["0.50"], 0.51);

    let o = run(
        dir.path(),
        &[
            "benchmark",
            "--records",
            &fixture("rail61.csv"),
            "--filter",
            "funding=private",
        ],
    );
    assert!(o.status.success());
    let s: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s["n"], 5);
    assert_eq!(format!("{:.2}", s["mean"].as_f64().unwrap()), "0.30");

    let o = run(
        dir.path(),
        &[
            "benchmark",
            "--records",
            &fixture("rail61.csv"),
            "--filter",
            "category=no-such",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    let o = run(
        dir.path(),
        &[
            "benchmark",
            "--records",
            &fixture("rail61.csv"),
            "--filter",
            "funding=public",
            "--filter",
            "funding=private",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    let o = run(
        dir.path(),
        &[
            "benchmark",
            "--records",
            &fixture("rail61.csv"),
            "--filter",
            "colour=red",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quantile_reads_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "quantile",
            "--summary",
            &fixture("atrain_benchmark.json"),
            "--p",
            "0.05,0.5",
            "--shortfall",
            "0.15",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "p\taccuracy\n5%\t0.15\n50%\t0.51\ns\tprobability\n15%\t80%\n"
    );
    let o = run(
        dir.path(),
        &[
            "quantile",
            "--summary",
            &fixture("atrain_benchmark.json"),
            "--p",
            "0.01",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn atrain_markdown_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_owned(dir.path(), &atrain_args("report.md", "md"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).lines().last(),
        Some("VERDICT: OVERESTIMATE_HIGHLY_LIKELY")
    );
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    for n in 1..=8 {
        assert!(md.contains(&format!("\n## {n}. ")), "section {n} missing");
    }
    assert!(md.contains("| Expected outcome | 0.59 | 8.3 |"));
    assert!(md.contains("| 90% interval | 0.15-1.10 | 2.1-15.5 |"));
    assert!(md.contains("| 80% interval | 0.23-1.01 | 3.2-14.2 |"));
    assert!(md.contains("| 50% interval | 0.35-0.78 | 4.9-11.0 |"));
    let csv = fs::read_to_string(dir.path().join("outcome_table.csv")).unwrap();
    assert!(csv.starts_with("level,acc_lo,acc_hi,val_lo,val_hi\n0.5,0.35,0.78,"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn markdown_matches_json_display() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_owned(dir.path(), &atrain_args("r.json", "json"))
        .status
        .success());
    assert!(run_owned(dir.path(), &atrain_args("r.md", "md"))
        .status
        .success());
    let j: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let md = fs::read_to_string(dir.path().join("r.md")).unwrap();
    let v = &j["step3_variance"]["display"];
    let row = format!(
        "| Standard deviation | {} | {} |",
        v["claimed_sd"].as_str().unwrap(),
        v["benchmark_sd"].as_str().unwrap()
    );
    assert!(md.contains(&row), "{row}");
    assert!(md.contains(&format!(
        "Risk ratio (benchmark / forecast): {}.",
        v["risk_ratio"].as_str().unwrap()
    )));
    let out = &j["step6_outcome"];
    assert!(md.contains(&format!(
        "| Expected outcome | {} | {} |",
        out["display"]["expected_accuracy"].as_str().unwrap(),
        out["display"]["expected_value"].as_str().unwrap()
    )));
    for row in out["rows"].as_array().unwrap() {
        let d = &row["display"];
        let line = format!(
            "| {} interval | {} | {} |",
            d["level"].as_str().unwrap(),
            d["accuracy"].as_str().unwrap(),
            d["value"].as_str().unwrap()
        );
        assert!(md.contains(&line), "{line}");
    }
    let r = &j["step3_rampup"]["display"];
    assert!(md.contains(&format!("ratio {} (", r["rise_ratio"].as_str().unwrap())));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for fmt in ["json", "md"] {
        let oa = run_owned(a.path(), &atrain_args("r.out", fmt));
        let ob = run_owned(b.path(), &atrain_args("r.out", fmt));
        assert_eq!(oa.stdout, ob.stdout);
        assert_eq!(
            fs::read(a.path().join("r.out")).unwrap(),
            fs::read(b.path().join("r.out")).unwrap()
        );
        assert_eq!(
            fs::read(a.path().join("outcome_table.csv")).unwrap(),
            fs::read(b.path().join("outcome_table.csv")).unwrap()
        );
    }
}

#[test]
fn summary_only_mode_degrades() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "diligence",
            "--forecast",
            &fixture("atrain_forecast.json"),
            "--summary",
            &fixture("atrain_benchmark.json"),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let (json, verdict) = text.rsplit_once("VERDICT: ").unwrap();
    let j: Value = serde_json::from_str(json).unwrap();
    assert_eq!(j["step2_benchmark"]["distribution"]["source"], "summary");
    assert_eq!(
        j["step2_benchmark"]["bootstrap"]["status"],
        "not_assessable"
    );
    assert_eq!(j["step3_variance"]["status"], "assessed");
    assert!((j["step3_variance"]["risk_ratio"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    assert_eq!(j["step3_rampup"]["status"], "not_assessed");
    assert!(!verdict.trim().is_empty());
    assert!(dir.path().join("outcome_table.csv").exists());
}

#[test]
fn missing_rampup_and_forecaster_degrade() {
    let dir = tempfile::tempdir().unwrap();
    let mut fc: Value =
        serde_json::from_str(&fs::read_to_string(fixture("atrain_forecast.json")).unwrap())
            .unwrap();
    let obj = fc.as_object_mut().unwrap();
    obj.remove("rampup_pct_of_forecast");
    obj.remove("forecaster_id");
    fs::write(dir.path().join("fc.json"), fc.to_string()).unwrap();
    let o = run(
        dir.path(),
        &[
            "diligence",
            "--forecast",
            "fc.json",
            "--records",
            &fixture("rail62.csv"),
            "--exclude-outliers",
            "auto",
            "--out",
            "r.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let j: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(j["step3_rampup"]["status"], "not_assessed");
    assert_eq!(j["step4_track_record"]["status"], "not_assessed");
    assert_eq!(j["step6_outcome"]["status"], "assessed");
    let flags = j["step8_conclusion"]["flags"].as_array().unwrap();
    assert_eq!(flags.len(), 7);
    assert_eq!(flags[2]["assessed"], false);
    assert_eq!(flags[3]["assessed"], false);
    assert!(stdout(&o).starts_with("VERDICT: "));
}

#[test]
fn no_benchmark_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["diligence", "--forecast", &fixture("atrain_forecast.json")],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_forecast_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("fc.json"),
        r#"{"name":"x","first_year_forecast":-1,"downside":{"claimed_sd":0.1}}"#,
    )
    .unwrap();
    let o = run(
        dir.path(),
        &[
            "diligence",
            "--forecast",
            "fc.json",
            "--summary",
            &fixture("atrain_benchmark.json"),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        dir.path(),
        &[
            "diligence",
            "--forecast",
            "fc.json",
            "--summary",
            &fixture("atrain_benchmark.json"),
            "--levels",
            "1.5",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}
