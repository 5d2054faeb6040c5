//! seo-rankminer: audit pages, collect ranked datasets, score metric
//! impact, and mine rank association rules.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use seo_rankminer_cli::config::RunConfig;
use seo_rankminer_cli::site::audit_site;
use seo_rankminer_core::miner::{
    derive_rules, discretize, mine_frequent, render_rule, rules_to_csv, scheme_for,
    select_features, top_rules, BinningScheme, RankKey, Rule,
};
use seo_rankminer_core::model::{
    builtin_registry, load_dataset_csv, save_dataset_csv, validate_dataset, Dataset, MetricId,
    SiteRecord,
};
use seo_rankminer_core::providers::{collect, AuditReport, CompositeProvider, FixtureProvider};
use seo_rankminer_core::stats::{impact_table, scatter_export};
use seo_rankminer_net::Fetcher;
use url::Url;

#[derive(Parser)]
#[command(
    name = "seo-rankminer",
    version,
    about = "Extracts SEO metrics for ranked sites and mines the dataset for rank rules"
)]
struct Cli {
    /// Config file (TOML). Falls back to $SEO_RANKMINER_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Omit timestamps so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit one page and print its full metric report as JSON.
    Audit {
        /// Absolute http(s) URL of the page.
        url: String,
        /// Provider fixture JSON files, first match wins.
        #[arg(long = "fixtures", value_name = "JSON")]
        fixtures: Vec<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Audit every site in a "domain,rank" list into a dataset CSV.
    Collect {
        /// File of "domain,rank" lines; # starts a comment.
        #[arg(long, value_name = "FILE")]
        sites: PathBuf,
        /// Provider fixture JSON files, first match wins.
        #[arg(long = "fixtures", value_name = "JSON")]
        fixtures: Vec<PathBuf>,
        /// Dataset CSV to write.
        #[arg(short, long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Rank metrics by how strongly they track the site rank.
    Impact {
        /// Dataset CSV produced by collect.
        dataset: PathBuf,
        /// Print transformed (value, rank) points for one metric
        /// instead of the table.
        #[arg(long, value_name = "METRIC")]
        scatter: Option<String>,
        /// Also write the table as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Mine association rules between binned metrics and rank.
    Mine {
        /// Dataset CSV produced by collect.
        dataset: PathBuf,
        /// Equal-width bins per metric.
        #[arg(long)]
        bins: Option<usize>,
        /// Minimum support percentage.
        #[arg(long, value_name = "PCT")]
        min_support: Option<f64>,
        /// Minimum confidence percentage.
        #[arg(long, value_name = "PCT")]
        min_confidence: Option<f64>,
        /// Rows per ranking table.
        #[arg(long)]
        top: Option<usize>,
        /// How many top-impact metrics to mine over.
        #[arg(long)]
        features: Option<usize>,
        /// Write the complete rule set as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

/// Exit code 2 is for bad invocations and unreadable inputs/outputs,
/// exit code 1 for data that loaded but failed its checks or the
/// network refusing to cooperate.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) => e,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

fn main() -> ExitCode {
    // Rust masks SIGPIPE, turning `mine ... | head` into a print panic.
    // Restore the default so a closed pipe ends the process quietly.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = RunConfig::load(cli.config.as_deref()).map_err(usage)?;
    let timestamp = if cli.no_timestamp {
        None
    } else {
        Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
    };
    match cli.command {
        Command::Audit { url, fixtures, out } => {
            cmd_audit(&url, &fixtures, out.as_deref(), &config, timestamp)
        }
        Command::Collect { sites, fixtures, out } => {
            cmd_collect(&sites, &fixtures, &out, &config)
        }
        Command::Impact { dataset, scatter, csv } => {
            cmd_impact(&dataset, scatter.as_deref(), csv.as_deref(), &config, timestamp)
        }
        Command::Mine {
            dataset,
            bins,
            min_support,
            min_confidence,
            top,
            features,
            csv,
        } => {
            let mut analysis = config.analysis.clone();
            if let Some(v) = bins {
                analysis.bins = v;
            }
            if let Some(v) = min_support {
                analysis.min_support_pct = v;
            }
            if let Some(v) = min_confidence {
                analysis.min_confidence_pct = v;
            }
            if let Some(v) = top {
                analysis.top_n = v;
            }
            if let Some(v) = features {
                analysis.feature_count = v;
            }
            cmd_mine(&dataset, &analysis, csv.as_deref(), timestamp)
        }
    }
}

fn parse_page_url(raw: &str) -> Result<Url, Failure> {
    Url::parse(raw)
        .ok()
        .filter(|u| matches!(u.scheme(), "http" | "https"))
        .ok_or_else(|| usage(anyhow!("not an absolute http(s) url: `{raw}`")))
}

/// Fixtures named on the command line shadow the configured ones.
fn load_providers(
    cli_fixtures: &[PathBuf],
    config: &RunConfig,
) -> Result<CompositeProvider, Failure> {
    let mut providers: Vec<Box<dyn seo_rankminer_core::providers::Provider>> = Vec::new();
    for path in cli_fixtures.iter().chain(&config.providers.fixtures) {
        let fixture = FixtureProvider::from_file(path).map_err(usage)?;
        providers.push(Box::new(fixture));
    }
    Ok(CompositeProvider::new(providers))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| usage(anyhow!("cannot write {}: {e}", path.display())))
}

fn cmd_audit(
    url: &str,
    fixtures: &[PathBuf],
    out: Option<&Path>,
    config: &RunConfig,
    timestamp: Option<String>,
) -> Result<(), Failure> {
    let page = parse_page_url(url)?;
    let fetcher = Fetcher::new(config.fetch.to_policy()).map_err(usage)?;
    let provider = load_providers(fixtures, config)?;
    let registry = builtin_registry();

    let audit = audit_site(
        &fetcher,
        &page,
        &config.audit.social_domains,
        config.audit.stylesheet_cap,
    )
    .map_err(data)?;
    for (metric, reason) in &audit.probe_failures {
        eprintln!("warning: {metric} probe failed: {reason}");
    }

    let domain = page.host_str().unwrap_or_default().to_ascii_lowercase();
    let record = collect(&domain, &provider, &registry, &audit.measured).map_err(data)?;
    let report = AuditReport::new(url, timestamp, &record).to_json();
    match out {
        Some(path) => write_file(path, format!("{report}\n").as_bytes())?,
        None => println!("{report}"),
    }
    Ok(())
}

struct SiteEntry {
    domain: String,
    rank: u32,
    url: Url,
}

/// Parse "domain,rank" lines. A domain may also be a full http(s) URL;
/// bare domains are probed over plain http.
fn parse_sites(text: &str) -> Result<Vec<SiteEntry>, Failure> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let Some((site, rank)) = line.split_once(',') else {
            return Err(usage(anyhow!("sites line {lineno}: expected `domain,rank`")));
        };
        let rank: u32 = rank
            .trim()
            .parse()
            .map_err(|_| usage(anyhow!("sites line {lineno}: bad rank `{}`", rank.trim())))?;
        let site = site.trim();
        let url = if site.contains("://") {
            parse_page_url(site)
                .map_err(|_| usage(anyhow!("sites line {lineno}: bad url `{site}`")))?
        } else {
            Url::parse(&format!("http://{site}/"))
                .map_err(|_| usage(anyhow!("sites line {lineno}: bad domain `{site}`")))?
        };
        let domain = url
            .host_str()
            .ok_or_else(|| usage(anyhow!("sites line {lineno}: no host in `{site}`")))?
            .to_ascii_lowercase();
        entries.push(SiteEntry { domain, rank, url });
    }
    Ok(entries)
}

fn cmd_collect(
    sites: &Path,
    fixtures: &[PathBuf],
    out: &Path,
    config: &RunConfig,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(sites)
        .map_err(|e| usage(anyhow!("cannot read {}: {e}", sites.display())))?;
    let entries = parse_sites(&text)?;
    if entries.is_empty() {
        return Err(data(anyhow!("sites file lists no sites")));
    }

    let mut seen = BTreeSet::new();
    let duplicates: Vec<&str> = entries
        .iter()
        .filter(|e| !seen.insert(e.domain.clone()))
        .map(|e| e.domain.as_str())
        .collect();
    if !duplicates.is_empty() {
        return Err(data(anyhow!(
            "duplicate domains in sites file: {}",
            duplicates.join(", ")
        )));
    }

    let provider = load_providers(fixtures, config)?;
    let fetcher = Fetcher::new(config.fetch.to_policy()).map_err(usage)?;
    let registry = builtin_registry();

    // Sites are audited concurrently but assembled in file order.
    let mut slots: Vec<Option<SiteRecord>> = Vec::new();
    slots.resize_with(entries.len(), || None);
    let results = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let workers = config.fetch.max_concurrent.max(1).min(entries.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= entries.len() {
                    break;
                }
                let entry = &entries[i];
                let measured = match audit_site(
                    &fetcher,
                    &entry.url,
                    &config.audit.social_domains,
                    config.audit.stylesheet_cap,
                ) {
                    Ok(audit) => {
                        for (metric, reason) in &audit.probe_failures {
                            eprintln!("warning: {}: {metric} probe failed: {reason}", entry.domain);
                        }
                        audit.measured
                    }
                    Err(e) => {
                        eprintln!("warning: {}: unreachable, metrics recorded as missing: {e}", entry.domain);
                        Default::default()
                    }
                };
                let mut record = SiteRecord::new(entry.domain.clone(), entry.rank);
                match collect(&entry.domain, &provider, &registry, &measured) {
                    Ok(collected) => record.values = collected.values,
                    Err(e) => eprintln!("warning: {}: provider lookup failed: {e}", entry.domain),
                }
                results.lock().expect("collect results poisoned")[i] = Some(record);
            });
        }
    });

    let records: Vec<SiteRecord> = results
        .into_inner()
        .expect("collect results poisoned")
        .into_iter()
        .map(|slot| slot.expect("every site slot fills"))
        .collect();
    let dataset = Dataset::new(records);
    write_file(out, &save_dataset_csv(&dataset))?;
    println!("wrote {} sites to {}", dataset.records.len(), out.display());
    Ok(())
}

fn load_and_validate(path: &Path) -> Result<Dataset, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| usage(anyhow!("cannot read {}: {e}", path.display())))?;
    let dataset = load_dataset_csv(&bytes)
        .map_err(|e| data(anyhow!("{}: {e}", path.display())))?;
    let violations = validate_dataset(&dataset);
    if !violations.is_empty() {
        let mut message = format!("{} validation failure(s):", violations.len());
        for violation in &violations {
            message.push_str("\n  ");
            message.push_str(&violation.to_string());
        }
        return Err(data(anyhow!(message)));
    }
    if dataset.records.is_empty() {
        return Err(data(anyhow!("{}: dataset is empty", path.display())));
    }
    Ok(dataset)
}

fn print_stamp(timestamp: &Option<String>) {
    if let Some(stamp) = timestamp {
        println!("generated: {stamp}");
        println!();
    }
}

fn cmd_impact(
    dataset_path: &Path,
    scatter: Option<&str>,
    csv_out: Option<&Path>,
    config: &RunConfig,
    timestamp: Option<String>,
) -> Result<(), Failure> {
    let dataset = load_and_validate(dataset_path)?;
    let opts = config.analysis.to_stats_options();

    if let Some(name) = scatter {
        let metric: MetricId = name
            .parse()
            .map_err(|_| usage(anyhow!("unknown metric `{name}`")))?;
        let points = scatter_export(&dataset, metric, &opts).map_err(data)?;
        print!("{points}");
        return Ok(());
    }

    let table = impact_table(&dataset, &opts);
    print_stamp(&timestamp);
    print!("{}", table.to_markdown());
    if let Some(path) = csv_out {
        write_file(path, table.to_csv().as_bytes())?;
    }
    Ok(())
}

fn rule_table(title: &str, rules: &[Rule], scheme: &BinningScheme) -> String {
    let mut out = format!("## {title}\n\n");
    out.push_str("| # | rule | confidence % | support % | matches |\n");
    out.push_str("|---|---|---|---|---|\n");
    for (place, rule) in rules.iter().enumerate() {
        out.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {}/{} |\n",
            place + 1,
            render_rule(rule, scheme),
            rule.confidence_pct(),
            rule.support_pct(),
            rule.match_count,
            rule.antecedent_count,
        ));
    }
    out
}

fn cmd_mine(
    dataset_path: &Path,
    analysis: &seo_rankminer_cli::config::AnalysisSection,
    csv_out: Option<&Path>,
    timestamp: Option<String>,
) -> Result<(), Failure> {
    let dataset = load_and_validate(dataset_path)?;
    if dataset.records.len() < 3 {
        return Err(data(anyhow!(
            "mining needs at least 3 records, dataset has {}",
            dataset.records.len()
        )));
    }
    if analysis.bins < 2 {
        return Err(usage(anyhow!("--bins must be at least 2")));
    }
    if analysis.max_antecedent < 1 {
        return Err(usage(anyhow!("max_antecedent must be at least 1")));
    }

    let opts = analysis.to_stats_options();
    let selected = select_features(&dataset, analysis.feature_count, &opts);
    print_stamp(&timestamp);
    println!(
        "sites: {}  features: {}  bins: {}  min support: {}%  min confidence: {}%",
        dataset.records.len(),
        selected.len(),
        analysis.bins,
        analysis.min_support_pct,
        analysis.min_confidence_pct
    );
    println!();
    if selected.is_empty() {
        println!("No mineable metrics: nothing scored as rank-related on this dataset.");
        if let Some(path) = csv_out {
            write_file(path, rules_to_csv(&[], &BinningScheme::default()).as_bytes())?;
        }
        return Ok(());
    }

    let scheme = scheme_for(&dataset, &selected, analysis.bins).map_err(data)?;
    let table = discretize(&dataset, &selected, &scheme).map_err(data)?;
    let itemsets = mine_frequent(&table, analysis.min_support_pct, analysis.max_antecedent + 1);
    let rules = derive_rules(&itemsets, dataset.records.len(), analysis.min_confidence_pct);

    if rules.is_empty() {
        println!(
            "No rules meet the thresholds (support >= {}%, confidence >= {}%).",
            analysis.min_support_pct, analysis.min_confidence_pct
        );
    } else {
        let by_confidence = top_rules(&rules, RankKey::Confidence, analysis.top_n);
        let by_support = top_rules(&rules, RankKey::Support, analysis.top_n);
        print!(
            "{}",
            rule_table(
                &format!("Top {} rules by confidence", by_confidence.len()),
                &by_confidence,
                &scheme
            )
        );
        println!();
        print!(
            "{}",
            rule_table(
                &format!("Top {} rules by support", by_support.len()),
                &by_support,
                &scheme
            )
        );
    }
    if let Some(path) = csv_out {
        write_file(path, rules_to_csv(&rules, &scheme).as_bytes())?;
    }
    Ok(())
}
