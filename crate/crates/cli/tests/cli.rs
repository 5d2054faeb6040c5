//! End-to-end runs of the compiled binary: exit codes, report shapes,
//! dataset round trips, and configuration precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seo_rankminer_core::model::load_dataset_csv;
use seo_rankminer_testserver::{Route, ServerConfig, TestServer};

const BIN: &str = env!("CARGO_BIN_EXE_seo-rankminer");
const DATASET: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/replay75.csv");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(output),
        stderr(output)
    );
}

/// Probe-friendly fetch settings: no pacing delay between requests.
fn write_quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, "[fetch]\nper_host_delay_ms = 0\n").expect("config written");
    path
}

const AUDIT_PAGE: &str = r#"<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<meta name="description" content="Local test page">
<title>Audit target</title>
<link rel="stylesheet" href="/site.css">
</head>
<body>
<h1>Audit</h1>
<img src="/logo.png" alt="logo">
<p><a href="/good">Good</a> <a href="/missing">Missing</a></p>
</body>
</html>
"#;

/// One fine declaration, one unknown property, one missing colon.
const AUDIT_CSS: &str = "body { color: #123; colr: red; oops }";

fn audit_server() -> TestServer {
    let config = ServerConfig::new()
        .route("/", Route::page(AUDIT_PAGE))
        .route("/site.css", Route::text(AUDIT_CSS).content_type("text/css"))
        .route("/good", Route::text("ok"))
        .route("/robots.txt", Route::text("User-agent: *\nAllow: /\n"))
        .route("/sitemap.xml", Route::text("<urlset/>").content_type("application/xml"));
    TestServer::http(config).expect("server starts")
}

fn write_fixture(dir: &Path) -> PathBuf {
    let path = dir.join("ranks.json");
    std::fs::write(
        &path,
        r#"{"127.0.0.1": {
            "page_rank": 7, "domain_authority": 81, "page_authority": 58,
            "alexa_rank": 912, "trust_flow": 44, "backlinks": 52341,
            "indexed_pages": 19000, "referring_domains": 812, "referring_ips": 633
        }}"#,
    )
    .expect("fixture written");
    path
}

#[test]
fn audit_reports_every_metric_slot() {
    let server = audit_server();
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_quick_config(dir.path());
    let fixture = write_fixture(dir.path());

    let url = server.url("/");
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--no-timestamp",
        "audit",
        &url,
        "--fixtures",
        fixture.to_str().unwrap(),
    ]);
    assert_code(&output, 0);

    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).expect("JSON report");
    assert_eq!(report["url"], serde_json::json!(url));
    assert_eq!(report["fetched_at"], serde_json::Value::Null);

    let metrics = report["metrics"].as_object().expect("metrics object");
    assert_eq!(metrics.len(), 38, "one slot per metric");

    let expected_size = (AUDIT_PAGE.len() as f64 / 1024.0 * 10.0).round() / 10.0;
    let expect = [
        ("h1_count", 1.0),
        ("img_without_alt", 0.0),
        ("iframe_count", 0.0),
        ("embed_object_count", 0.0),
        ("title_chars", 12.0),
        ("meta_description_chars", 15.0),
        ("doctype", 1.0),
        ("encoding_declared", 1.0),
        ("language_english", 1.0),
        ("responsive", 1.0),
        ("social_media", 0.0),
        ("total_links", 2.0),
        ("internal_links", 2.0),
        ("external_links", 0.0),
        ("broken_links", 1.0),
        ("html_errors", 0.0),
        ("html_warnings", 0.0),
        ("css_errors", 1.0),
        ("css_warnings", 1.0),
        ("page_size_kb", expected_size),
        ("request_count", 3.0),
        ("gzip", 0.0),
        ("security", 0.0),
        ("robots_txt", 1.0),
        ("sitemap", 1.0),
        ("page_404", 1.0),
        ("page_rank", 7.0),
        ("domain_authority", 81.0),
        ("alexa_rank", 912.0),
    ];
    for (name, want) in expect {
        assert_eq!(metrics[name], serde_json::json!(want), "metric {name}");
    }
    assert!(metrics["load_time_ms"].is_number(), "load time recorded");
    assert_eq!(metrics["performance"], serde_json::Value::Null);

    let provenance = report["provenance"].as_object().expect("provenance object");
    assert_eq!(provenance.len(), 38);
    assert_eq!(provenance["h1_count"], serde_json::json!("measured"));
    assert_eq!(provenance["page_rank"], serde_json::json!("provider"));
    assert_eq!(provenance["performance"], serde_json::json!("missing"));
}

#[test]
fn audit_stamps_reports_and_writes_files() {
    let server = audit_server();
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_quick_config(dir.path());
    let out = dir.path().join("report.json");

    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "audit",
        &server.url("/"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_code(&output, 0);
    assert_eq!(stdout(&output), "", "file output leaves stdout empty");

    let text = std::fs::read_to_string(&out).expect("report file");
    assert!(text.ends_with("}\n"), "file report ends with a newline");
    let report: serde_json::Value = serde_json::from_str(&text).expect("JSON report");
    let stamp = report["fetched_at"].as_str().expect("timestamp present");
    assert!(stamp.ends_with('Z') && stamp.contains('T'), "RFC 3339 stamp: {stamp}");
}

#[test]
fn audit_rejects_bad_urls() {
    for bad in ["notaurl", "ftp://host/file", "http//missing.example"] {
        let output = run(&["audit", bad]);
        assert_code(&output, 2);
        assert!(
            stderr(&output).contains("not an absolute http(s) url"),
            "stderr for `{bad}`: {}",
            stderr(&output)
        );
    }
}

#[test]
fn audit_reports_unreachable_sites() {
    // Port 1 on loopback refuses connections immediately.
    let output = run(&["audit", "http://127.0.0.1:1/"]);
    assert_code(&output, 1);
    assert!(stderr(&output).starts_with("error: "), "stderr: {}", stderr(&output));
}

#[test]
fn collect_assembles_rows_in_file_order() {
    let server = audit_server();
    let dir = tempfile::tempdir().expect("tempdir");
    let config = write_quick_config(dir.path());
    let fixture = write_fixture(dir.path());
    let sites = dir.path().join("sites.txt");
    let csv = dir.path().join("dataset.csv");
    // One live site, one comment, one dead host: the dead row must be
    // present with every metric missing, and order must follow the file.
    std::fs::write(
        &sites,
        format!("127.0.0.1:{},3\n# offline mirror\n127.0.0.2:1,17\n", server.addr().port()),
    )
    .expect("sites written");

    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "collect",
        "--sites",
        sites.to_str().unwrap(),
        "--fixtures",
        fixture.to_str().unwrap(),
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_code(&output, 0);
    assert!(
        stdout(&output).contains("wrote 2 sites to"),
        "stdout: {}",
        stdout(&output)
    );
    assert!(
        stderr(&output).contains("127.0.0.2: unreachable"),
        "stderr: {}",
        stderr(&output)
    );

    let bytes = std::fs::read(&csv).expect("dataset file");
    let dataset = load_dataset_csv(&bytes).expect("dataset loads");
    assert_eq!(dataset.records.len(), 2);

    let live = &dataset.records[0];
    assert_eq!(live.domain, "127.0.0.1");
    assert_eq!(live.webometric_rank, 3);
    assert_eq!(live.values[&"h1_count".parse().unwrap()], 1.0);
    assert_eq!(live.values[&"page_rank".parse().unwrap()], 7.0);

    let dead = &dataset.records[1];
    assert_eq!(dead.domain, "127.0.0.2");
    assert_eq!(dead.webometric_rank, 17);
    assert!(dead.values.is_empty(), "dead site has only missing cells");
}

#[test]
fn collect_rejects_duplicate_domains_without_fetching() {
    let server = audit_server();
    let dir = tempfile::tempdir().expect("tempdir");
    let sites = dir.path().join("sites.txt");
    let port = server.addr().port();
    std::fs::write(&sites, format!("127.0.0.1:{port},1\nhttp://127.0.0.1:{port}/,2\n"))
        .expect("sites written");

    let output = run(&[
        "collect",
        "--sites",
        sites.to_str().unwrap(),
        "-o",
        dir.path().join("out.csv").to_str().unwrap(),
    ]);
    assert_code(&output, 1);
    assert!(
        stderr(&output).contains("duplicate domains in sites file: 127.0.0.1"),
        "stderr: {}",
        stderr(&output)
    );
    assert!(server.requests().is_empty(), "no request goes out before validation");
}

#[test]
fn collect_validates_the_sites_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("out.csv");
    let cases: [(&str, i32, &str); 4] = [
        ("no-comma-here\n", 2, "sites line 1"),
        ("a.example,first\n", 2, "bad rank"),
        ("a.example,1\nb.example,x2\n", 2, "sites line 2"),
        ("# only comments\n\n", 1, "no sites"),
    ];
    for (content, code, needle) in cases {
        let sites = dir.path().join("sites.txt");
        std::fs::write(&sites, content).expect("sites written");
        let output = run(&["collect", "--sites", sites.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert_code(&output, code);
        assert!(
            stderr(&output).contains(needle),
            "`{content}` stderr: {}",
            stderr(&output)
        );
    }

    let missing = run(&["collect", "--sites", "/nonexistent/sites.txt", "-o", out.to_str().unwrap()]);
    assert_code(&missing, 2);
}

#[test]
fn impact_renders_table_and_csv() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = dir.path().join("impact.csv");
    let output = run(&["impact", DATASET, "--no-timestamp", "--csv", csv.to_str().unwrap()]);
    assert_code(&output, 0);

    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "| # | metric | transform | impact |");
    assert_eq!(lines[1], "|---|---|---|---|");
    assert_eq!(lines[2], "| 1 | indexed_pages | none | 0.662 |");
    assert_eq!(lines[3], "| 2 | alexa_rank | log10 | 0.576 |");
    assert!(text.contains("| - | security | - | excluded: boolean metric |"), "{text}");
    assert_eq!(lines.len(), 2 + 38, "header, separator, one row per metric");

    let table = std::fs::read_to_string(&csv).expect("impact CSV");
    assert!(table.starts_with("metric,log_applied,shift,impact,note\n"), "{table}");
    assert!(table.contains("\nindexed_pages,false,0,0.66"), "{table}");
    assert_eq!(table.lines().count(), 1 + 38);
}

#[test]
fn impact_stamps_output_unless_disabled() {
    let stamped = run(&["impact", DATASET]);
    assert_code(&stamped, 0);
    let text = stdout(&stamped);
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default();
    assert!(first.starts_with("generated: 20"), "first line: {first}");
    assert!(first.ends_with('Z'), "first line: {first}");
    assert_eq!(lines.next(), Some(""));
    assert_eq!(lines.next(), Some("| # | metric | transform | impact |"));
}

#[test]
fn impact_scatter_prints_points_or_fails_cleanly() {
    let points = run(&["impact", DATASET, "--scatter", "backlinks"]);
    assert_code(&points, 0);
    let text = stdout(&points);
    assert!(text.starts_with("transformed_value,rank\n"), "{text}");
    assert_eq!(text.lines().count(), 1 + 75, "one point per site");

    // Boolean metrics never score, so there is nothing to plot.
    let excluded = run(&["impact", DATASET, "--scatter", "gzip"]);
    assert_code(&excluded, 1);

    let unknown = run(&["impact", DATASET, "--scatter", "nonsense"]);
    assert_code(&unknown, 2);
    assert!(stderr(&unknown).contains("unknown metric"), "{}", stderr(&unknown));
}

#[test]
fn mine_renders_both_rule_tables() {
    let output = run(&["mine", DATASET, "--no-timestamp"]);
    assert_code(&output, 0);
    let text = stdout(&output);
    assert!(
        text.starts_with("sites: 75  features: 14  bins: 5  min support: 5%  min confidence: 60%\n"),
        "{text}"
    );
    assert!(text.contains("## Top 30 rules by confidence"), "{text}");
    assert!(text.contains("## Top 30 rules by support"), "{text}");
    assert!(
        text.contains("| 1 | 5.25 <= page_rank < 7 => webometric_rank <= 4511 | 100.00 | 13.33 | 10/10 |"),
        "{text}"
    );
}

#[test]
fn mine_with_unattainable_thresholds_prints_a_notice() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = dir.path().join("rules.csv");
    let output = run(&[
        "mine",
        DATASET,
        "--no-timestamp",
        "--min-support",
        "100",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_code(&output, 0);
    assert!(
        stdout(&output).contains("No rules meet the thresholds (support >= 100%, confidence >= 60%)."),
        "{}",
        stdout(&output)
    );
    let table = std::fs::read_to_string(&csv).expect("rule CSV");
    assert_eq!(
        table,
        "antecedent,consequent,confidence_pct,support_pct,match_count,antecedent_count,n\n"
    );
}

#[test]
fn mine_validates_its_flags() {
    let bins = run(&["mine", DATASET, "--bins", "1"]);
    assert_code(&bins, 2);
    assert!(stderr(&bins).contains("--bins"), "{}", stderr(&bins));
}

#[test]
fn dataset_problems_map_to_exit_codes() {
    let dir = tempfile::tempdir().expect("tempdir");

    let missing = run(&["impact", "/nonexistent/data.csv"]);
    assert_code(&missing, 2);
    assert!(stderr(&missing).contains("cannot read"), "{}", stderr(&missing));

    let bad_header = dir.path().join("bad.csv");
    std::fs::write(&bad_header, "foo,bar\n1,2\n").expect("csv written");
    let malformed = run(&["impact", bad_header.to_str().unwrap()]);
    assert_code(&malformed, 1);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "domain,webometric_rank\n").expect("csv written");
    let no_rows = run(&["mine", empty.to_str().unwrap()]);
    assert_code(&no_rows, 1);
    assert!(stderr(&no_rows).contains("empty"), "{}", stderr(&no_rows));

    let dupes = dir.path().join("dupes.csv");
    std::fs::write(&dupes, "domain,webometric_rank\nx.example,1\nx.example,2\n")
        .expect("csv written");
    let invalid = run(&["impact", dupes.to_str().unwrap()]);
    assert_code(&invalid, 1);
    assert!(stderr(&invalid).contains("x.example"), "{}", stderr(&invalid));
    assert!(stderr(&invalid).contains("duplicate domain"), "{}", stderr(&invalid));
}

#[test]
fn config_file_and_flags_compose() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[analysis]\nmin_support_pct = 12.0\ntop_n = 5\n")
        .expect("config written");

    // File values apply.
    let from_file = run(&["--config", config.to_str().unwrap(), "mine", DATASET, "--no-timestamp"]);
    assert_code(&from_file, 0);
    assert!(stdout(&from_file).contains("min support: 12%"), "{}", stdout(&from_file));
    assert!(stdout(&from_file).contains("## Top 5 rules by confidence"), "{}", stdout(&from_file));

    // Flags beat the file.
    let flag_wins = run(&[
        "--config",
        config.to_str().unwrap(),
        "mine",
        DATASET,
        "--no-timestamp",
        "--min-support",
        "10",
    ]);
    assert_code(&flag_wins, 0);
    assert!(stdout(&flag_wins).contains("min support: 10%"), "{}", stdout(&flag_wins));

    // The environment variable names the same file when no flag does.
    let from_env = Command::new(BIN)
        .env("SEO_RANKMINER_CONFIG", &config)
        .args(["mine", DATASET, "--no-timestamp"])
        .output()
        .expect("binary runs");
    assert_code(&from_env, 0);
    assert!(stdout(&from_env).contains("min support: 12%"), "{}", stdout(&from_env));

    // Broken or missing config files are usage errors.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[fetch]\nnot_a_key = 1\n").expect("config written");
    let rejected = run(&["--config", bad.to_str().unwrap(), "mine", DATASET]);
    assert_code(&rejected, 2);
    assert!(stderr(&rejected).contains("bad config"), "{}", stderr(&rejected));

    let unreadable = run(&["--config", "/nonexistent/run.toml", "mine", DATASET]);
    assert_code(&unreadable, 2);
    assert!(stderr(&unreadable).contains("cannot read config"), "{}", stderr(&unreadable));
}
