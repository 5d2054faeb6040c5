//! Run configuration: defaults, TOML file, environment lookup.
//!
//! Precedence is flags over file over defaults; the file is named by
//! `--config` or the `SEO_RANKMINER_CONFIG` environment variable. The
//! whole structure serializes back to TOML without loss so a run can be
//! pinned by committing one file.

use std::path::{Path, PathBuf};

use seo_rankminer_core::audit::DEFAULT_SOCIAL_DOMAINS;
use seo_rankminer_core::stats::StatsOptions;
use seo_rankminer_net::FetchPolicy;
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV_VAR: &str = "SEO_RANKMINER_CONFIG";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fetch: FetchSection,
    pub analysis: AnalysisSection,
    pub audit: AuditSection,
    pub providers: ProvidersSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FetchSection {
    pub timeout_ms: u64,
    pub max_redirects: u32,
    pub max_body_kb: u64,
    pub user_agent: String,
    pub max_concurrent: usize,
    pub per_host_delay_ms: u64,
    pub broken_link_sample: usize,
    pub honor_robots: bool,
    pub accept_invalid_certs: bool,
}

impl Default for FetchSection {
    fn default() -> Self {
        let p = FetchPolicy::default();
        FetchSection {
            timeout_ms: p.timeout_ms,
            max_redirects: p.max_redirects,
            max_body_kb: p.max_body_kb,
            user_agent: p.user_agent,
            max_concurrent: p.max_concurrent,
            per_host_delay_ms: p.per_host_delay_ms,
            broken_link_sample: p.broken_link_sample,
            honor_robots: p.honor_robots,
            accept_invalid_certs: p.accept_invalid_certs,
        }
    }
}

impl FetchSection {
    pub fn to_policy(&self) -> FetchPolicy {
        FetchPolicy {
            timeout_ms: self.timeout_ms,
            max_redirects: self.max_redirects,
            max_body_kb: self.max_body_kb,
            user_agent: self.user_agent.clone(),
            max_concurrent: self.max_concurrent,
            per_host_delay_ms: self.per_host_delay_ms,
            broken_link_sample: self.broken_link_sample,
            honor_robots: self.honor_robots,
            accept_invalid_certs: self.accept_invalid_certs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub skewness_threshold: f64,
    pub kurtosis_threshold: f64,
    pub zero_shift: f64,
    /// How many top-impact metrics feed the miner, before binary-valued
    /// ones are dropped.
    pub feature_count: usize,
    pub bins: usize,
    pub min_support_pct: f64,
    pub min_confidence_pct: f64,
    pub top_n: usize,
    pub max_antecedent: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let s = StatsOptions::default();
        AnalysisSection {
            skewness_threshold: s.skewness_threshold,
            kurtosis_threshold: s.kurtosis_threshold,
            zero_shift: s.zero_shift,
            feature_count: 14,
            bins: 5,
            min_support_pct: 5.0,
            min_confidence_pct: 60.0,
            top_n: 30,
            max_antecedent: 4,
        }
    }
}

impl AnalysisSection {
    pub fn to_stats_options(&self) -> StatsOptions {
        StatsOptions {
            skewness_threshold: self.skewness_threshold,
            kurtosis_threshold: self.kurtosis_threshold,
            zero_shift: self.zero_shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    pub social_domains: Vec<String>,
    /// At most this many external stylesheets are fetched per page for
    /// style linting.
    pub stylesheet_cap: usize,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            social_domains: DEFAULT_SOCIAL_DOMAINS
                .iter()
                .map(|d| d.to_string())
                .collect(),
            stylesheet_cap: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersSection {
    pub fixtures: Vec<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("bad config {path}: {message}")]
    Invalid { path: String, message: String },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Resolve and load the effective config: the explicit path when
    /// given, else the `SEO_RANKMINER_CONFIG` file, else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Unreadable {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        RunConfig::from_toml(&text).map_err(|e| ConfigError::Invalid {
            path: shown,
            message: e.to_string(),
        })
    }
}
