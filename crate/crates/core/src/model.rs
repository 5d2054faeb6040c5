//! Metric identifiers, the metric registry, site records and the dataset
//! CSV format.
//!
//! The dataset is a plain sites x metrics table: one row per site with a
//! mandatory rank column and one column per metric, where an empty cell
//! means "not collected". Everything downstream (screening, scoring,
//! mining) works off this table, so the format is deliberately strict:
//! unknown columns are rejected instead of ignored and a round trip
//! through [`save_dataset_csv`]/[`load_dataset_csv`] is lossless.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the 38 metrics the pipeline tracks per site.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MetricId {
    AlexaRank,
    Backlinks,
    TotalLinks,
    InternalLinks,
    ExternalLinks,
    BrokenLinks,
    TrustFlow,
    RequestCount,
    LoadTimeMs,
    H1Count,
    ImgWithoutAlt,
    IframeCount,
    EmbedObjectCount,
    HtmlErrors,
    HtmlWarnings,
    CssErrors,
    CssWarnings,
    TitleChars,
    MetaDescriptionChars,
    PageSizeKb,
    EncodingDeclared,
    RobotsTxt,
    Sitemap,
    Responsive,
    SocialMedia,
    IndexedPages,
    LanguageEnglish,
    Doctype,
    Page404,
    Gzip,
    ReferringDomains,
    ReferringIps,
    Security,
    Performance,
    Accessibility,
    PageRank,
    DomainAuthority,
    PageAuthority,
}

impl MetricId {
    /// Every metric, in canonical (CSV column) order.
    pub const ALL: [MetricId; 38] = [
        MetricId::AlexaRank,
        MetricId::Backlinks,
        MetricId::TotalLinks,
        MetricId::InternalLinks,
        MetricId::ExternalLinks,
        MetricId::BrokenLinks,
        MetricId::TrustFlow,
        MetricId::RequestCount,
        MetricId::LoadTimeMs,
        MetricId::H1Count,
        MetricId::ImgWithoutAlt,
        MetricId::IframeCount,
        MetricId::EmbedObjectCount,
        MetricId::HtmlErrors,
        MetricId::HtmlWarnings,
        MetricId::CssErrors,
        MetricId::CssWarnings,
        MetricId::TitleChars,
        MetricId::MetaDescriptionChars,
        MetricId::PageSizeKb,
        MetricId::EncodingDeclared,
        MetricId::RobotsTxt,
        MetricId::Sitemap,
        MetricId::Responsive,
        MetricId::SocialMedia,
        MetricId::IndexedPages,
        MetricId::LanguageEnglish,
        MetricId::Doctype,
        MetricId::Page404,
        MetricId::Gzip,
        MetricId::ReferringDomains,
        MetricId::ReferringIps,
        MetricId::Security,
        MetricId::Performance,
        MetricId::Accessibility,
        MetricId::PageRank,
        MetricId::DomainAuthority,
        MetricId::PageAuthority,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::AlexaRank => "alexa_rank",
            MetricId::Backlinks => "backlinks",
            MetricId::TotalLinks => "total_links",
            MetricId::InternalLinks => "internal_links",
            MetricId::ExternalLinks => "external_links",
            MetricId::BrokenLinks => "broken_links",
            MetricId::TrustFlow => "trust_flow",
            MetricId::RequestCount => "request_count",
            MetricId::LoadTimeMs => "load_time_ms",
            MetricId::H1Count => "h1_count",
            MetricId::ImgWithoutAlt => "img_without_alt",
            MetricId::IframeCount => "iframe_count",
            MetricId::EmbedObjectCount => "embed_object_count",
            MetricId::HtmlErrors => "html_errors",
            MetricId::HtmlWarnings => "html_warnings",
            MetricId::CssErrors => "css_errors",
            MetricId::CssWarnings => "css_warnings",
            MetricId::TitleChars => "title_chars",
            MetricId::MetaDescriptionChars => "meta_description_chars",
            MetricId::PageSizeKb => "page_size_kb",
            MetricId::EncodingDeclared => "encoding_declared",
            MetricId::RobotsTxt => "robots_txt",
            MetricId::Sitemap => "sitemap",
            MetricId::Responsive => "responsive",
            MetricId::SocialMedia => "social_media",
            MetricId::IndexedPages => "indexed_pages",
            MetricId::LanguageEnglish => "language_english",
            MetricId::Doctype => "doctype",
            MetricId::Page404 => "page_404",
            MetricId::Gzip => "gzip",
            MetricId::ReferringDomains => "referring_domains",
            MetricId::ReferringIps => "referring_ips",
            MetricId::Security => "security",
            MetricId::Performance => "performance",
            MetricId::Accessibility => "accessibility",
            MetricId::PageRank => "page_rank",
            MetricId::DomainAuthority => "domain_authority",
            MetricId::PageAuthority => "page_authority",
        }
    }

    /// Position in [`MetricId::ALL`]; doubles as the registry index.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown metric identifier '{0}'")]
pub struct UnknownMetric(pub String);

impl FromStr for MetricId {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMetric(s.to_owned()))
    }
}

impl Serialize for MetricId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for MetricId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = MetricId;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a metric identifier")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<MetricId, E> {
                v.parse().map_err(|e: UnknownMetric| E::custom(e))
            }
        }
        deserializer.deserialize_str(V)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Numeric,
    /// Stored as 0.0/1.0 in records; always excluded from scoring.
    Boolean,
}

/// Where a metric's value comes from during an audit.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSource {
    /// Measured from HTTP responses and probe requests.
    Fetch,
    /// Extracted from the parsed home page markup.
    OnPage,
    /// Supplied by a third-party metric provider.
    Provider,
}

/// Unit/range family, used for validation.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScale {
    Count,
    Milliseconds,
    Kilobytes,
    /// 1 = best; larger is worse.
    RankPosition,
    Score0To100,
    Score0To10,
    Flag,
}

/// Whether the screening step may try a base-10 log on this metric.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformPolicy {
    NeverLog,
    LogCandidate,
}

#[derive(Clone, Debug)]
pub struct MetricDescriptor {
    pub id: MetricId,
    pub kind: MetricKind,
    pub source: MetricSource,
    pub scale: MetricScale,
    pub transform: TransformPolicy,
}

/// Fixed catalogue of the 38 metric descriptors.
pub struct MetricRegistry {
    descriptors: Vec<MetricDescriptor>,
}

impl MetricRegistry {
    pub fn descriptor(&self, id: MetricId) -> &MetricDescriptor {
        &self.descriptors[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MetricDescriptor> {
        self.descriptors.iter()
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// The built-in registry. Booleans never get log-transformed; numeric
/// metrics are log candidates except the four 0-100 scores
/// (`performance`, `accessibility`, `domain_authority`, `page_authority`)
/// that stay on their native scale.
pub fn builtin_registry() -> &'static MetricRegistry {
    static REGISTRY: OnceLock<MetricRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        use MetricKind::{Boolean, Numeric};
        use MetricScale::*;
        use MetricSource::{Fetch, OnPage, Provider};
        use TransformPolicy::{LogCandidate, NeverLog};

        let spec: [(MetricId, MetricKind, MetricSource, MetricScale, TransformPolicy); 38] = [
            (MetricId::AlexaRank, Numeric, Provider, RankPosition, LogCandidate),
            (MetricId::Backlinks, Numeric, Provider, Count, LogCandidate),
            (MetricId::TotalLinks, Numeric, OnPage, Count, LogCandidate),
            (MetricId::InternalLinks, Numeric, OnPage, Count, LogCandidate),
            (MetricId::ExternalLinks, Numeric, OnPage, Count, LogCandidate),
            (MetricId::BrokenLinks, Numeric, Fetch, Count, LogCandidate),
            (MetricId::TrustFlow, Numeric, Provider, Score0To100, LogCandidate),
            (MetricId::RequestCount, Numeric, Fetch, Count, LogCandidate),
            (MetricId::LoadTimeMs, Numeric, Fetch, Milliseconds, LogCandidate),
            (MetricId::H1Count, Numeric, OnPage, Count, LogCandidate),
            (MetricId::ImgWithoutAlt, Numeric, OnPage, Count, LogCandidate),
            (MetricId::IframeCount, Numeric, OnPage, Count, LogCandidate),
            (MetricId::EmbedObjectCount, Numeric, OnPage, Count, LogCandidate),
            (MetricId::HtmlErrors, Numeric, OnPage, Count, LogCandidate),
            (MetricId::HtmlWarnings, Numeric, OnPage, Count, LogCandidate),
            (MetricId::CssErrors, Numeric, OnPage, Count, LogCandidate),
            (MetricId::CssWarnings, Numeric, OnPage, Count, LogCandidate),
            (MetricId::TitleChars, Numeric, OnPage, Count, LogCandidate),
            (MetricId::MetaDescriptionChars, Numeric, OnPage, Count, LogCandidate),
            (MetricId::PageSizeKb, Numeric, Fetch, Kilobytes, LogCandidate),
            (MetricId::EncodingDeclared, Boolean, OnPage, Flag, NeverLog),
            (MetricId::RobotsTxt, Boolean, Fetch, Flag, NeverLog),
            (MetricId::Sitemap, Boolean, Fetch, Flag, NeverLog),
            (MetricId::Responsive, Boolean, OnPage, Flag, NeverLog),
            (MetricId::SocialMedia, Numeric, OnPage, Count, LogCandidate),
            (MetricId::IndexedPages, Numeric, Provider, Count, LogCandidate),
            (MetricId::LanguageEnglish, Boolean, OnPage, Flag, NeverLog),
            (MetricId::Doctype, Boolean, OnPage, Flag, NeverLog),
            (MetricId::Page404, Boolean, Fetch, Flag, NeverLog),
            (MetricId::Gzip, Boolean, Fetch, Flag, NeverLog),
            (MetricId::ReferringDomains, Numeric, Provider, Count, LogCandidate),
            (MetricId::ReferringIps, Numeric, Provider, Count, LogCandidate),
            (MetricId::Security, Boolean, Fetch, Flag, NeverLog),
            (MetricId::Performance, Numeric, Provider, Score0To100, NeverLog),
            (MetricId::Accessibility, Numeric, Provider, Score0To100, NeverLog),
            (MetricId::PageRank, Numeric, Provider, Score0To10, LogCandidate),
            (MetricId::DomainAuthority, Numeric, Provider, Score0To100, NeverLog),
            (MetricId::PageAuthority, Numeric, Provider, Score0To100, NeverLog),
        ];

        let descriptors: Vec<MetricDescriptor> = spec
            .into_iter()
            .map(|(id, kind, source, scale, transform)| MetricDescriptor {
                id,
                kind,
                source,
                scale,
                transform,
            })
            .collect();
        // Registry lookups index by discriminant, so order must match ALL.
        for (i, d) in descriptors.iter().enumerate() {
            assert_eq!(d.id.index(), i);
        }
        MetricRegistry { descriptors }
    })
}

/// One site: domain, its Webometrics-style rank and whatever metric
/// values were collected for it. A metric absent from `values` is
/// missing, not zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub domain: String,
    pub webometric_rank: u32,
    pub values: BTreeMap<MetricId, f64>,
}

impl SiteRecord {
    pub fn new(domain: impl Into<String>, webometric_rank: u32) -> Self {
        SiteRecord {
            domain: domain.into(),
            webometric_rank,
            values: BTreeMap::new(),
        }
    }

    pub fn value(&self, id: MetricId) -> Option<f64> {
        self.values.get(&id).copied()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<SiteRecord>,
}

impl Dataset {
    pub fn new(records: Vec<SiteRecord>) -> Self {
        Dataset { records }
    }

    /// Per-record values of one metric, missing slots preserved.
    pub fn metric_values(&self, id: MetricId) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.value(id)).collect()
    }

    pub fn ranks(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.webometric_rank as f64).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    DuplicateDomain,
    RankOutOfRange,
    NonFiniteValue,
    NegativeValue,
    NonBooleanFlag,
}

/// One semantic problem found by [`validate_dataset`].
#[derive(Clone, Debug)]
pub struct Violation {
    pub domain: String,
    pub metric: Option<MetricId>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.metric {
            Some(m) => write!(f, "{}: {}: {}", self.domain, m, self.message),
            None => write!(f, "{}: {}", self.domain, self.message),
        }
    }
}

/// Checks dataset semantics: unique domains (case-insensitive), ranks
/// >= 1, finite values, non-negative counts/sizes/positions and 0/1
/// flags. Returns every violation rather than stopping at the first.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Violation> {
    let registry = builtin_registry();
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();

    for record in &dataset.records {
        let lower = record.domain.to_ascii_lowercase();
        if !seen.insert(lower) {
            violations.push(Violation {
                domain: record.domain.clone(),
                metric: None,
                kind: ViolationKind::DuplicateDomain,
                message: "duplicate domain".into(),
            });
        }
        if record.webometric_rank < 1 {
            violations.push(Violation {
                domain: record.domain.clone(),
                metric: None,
                kind: ViolationKind::RankOutOfRange,
                message: format!("webometric_rank must be >= 1, got {}", record.webometric_rank),
            });
        }
        for (&id, &value) in &record.values {
            let descriptor = registry.descriptor(id);
            if !value.is_finite() {
                violations.push(Violation {
                    domain: record.domain.clone(),
                    metric: Some(id),
                    kind: ViolationKind::NonFiniteValue,
                    message: format!("value {value} is not finite"),
                });
                continue;
            }
            match descriptor.kind {
                MetricKind::Boolean => {
                    if value != 0.0 && value != 1.0 {
                        violations.push(Violation {
                            domain: record.domain.clone(),
                            metric: Some(id),
                            kind: ViolationKind::NonBooleanFlag,
                            message: format!("flag must be 0 or 1, got {value}"),
                        });
                    }
                }
                MetricKind::Numeric => {
                    let non_negative = matches!(
                        descriptor.scale,
                        MetricScale::Count
                            | MetricScale::Milliseconds
                            | MetricScale::Kilobytes
                            | MetricScale::RankPosition
                    );
                    if non_negative && value < 0.0 {
                        violations.push(Violation {
                            domain: record.domain.clone(),
                            metric: Some(id),
                            kind: ViolationKind::NegativeValue,
                            message: format!("value must be >= 0, got {value}"),
                        });
                    }
                }
            }
        }
    }
    violations
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing header row")]
    MissingHeader,
    #[error("header must start with 'domain,webometric_rank', got '{0}'")]
    BadHeader(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("duplicate column '{0}'")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} fields, got {got}")]
    FieldCount { row: usize, expected: usize, got: usize },
    #[error("row {row}, column 'webometric_rank': invalid rank '{value}'")]
    BadRank { row: usize, value: String },
    #[error("row {row}, column '{column}': invalid number '{value}'")]
    BadNumber { row: usize, column: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Serializes a dataset with the fixed header
/// `domain,webometric_rank,<all 38 metric ids>`. Missing values become
/// empty cells; floats use the shortest representation that round-trips.
pub fn save_dataset_csv(dataset: &Dataset) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["domain".to_string(), "webometric_rank".to_string()];
    header.extend(MetricId::ALL.iter().map(|m| m.as_str().to_string()));
    writer.write_record(&header).expect("write to Vec cannot fail");

    for record in &dataset.records {
        let mut row = vec![record.domain.clone(), record.webometric_rank.to_string()];
        for id in MetricId::ALL {
            row.push(match record.value(id) {
                Some(v) => format_value(v),
                None => String::new(),
            });
        }
        writer.write_record(&row).expect("write to Vec cannot fail");
    }
    writer.into_inner().expect("flush to Vec cannot fail")
}

/// Shortest decimal form that parses back to the same f64.
fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Parses a dataset CSV. The metric columns may be any subset of the 38
/// known identifiers in any order; anything else is an error, as is a
/// repeated column or a cell that is neither empty nor a finite number.
pub fn load_dataset_csv(bytes: &[u8]) -> Result<Dataset, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);

    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(CsvError::MissingHeader);
    }
    if header.len() < 2 || &header[0] != "domain" || &header[1] != "webometric_rank" {
        let lead: Vec<&str> = header.iter().take(2).collect();
        return Err(CsvError::BadHeader(lead.join(",")));
    }

    let mut columns = Vec::with_capacity(header.len() - 2);
    let mut seen = BTreeSet::new();
    for name in header.iter().skip(2) {
        let id: MetricId = name
            .parse()
            .map_err(|_| CsvError::UnknownColumn(name.to_owned()))?;
        if !seen.insert(id) {
            return Err(CsvError::DuplicateColumn(name.to_owned()));
        }
        columns.push(id);
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        // Rows are 1-based and the header is row 1.
        let row_no = i + 2;
        if row.len() != columns.len() + 2 {
            return Err(CsvError::FieldCount {
                row: row_no,
                expected: columns.len() + 2,
                got: row.len(),
            });
        }
        let rank: u32 = row[1].trim().parse().map_err(|_| CsvError::BadRank {
            row: row_no,
            value: row[1].to_owned(),
        })?;
        let mut record = SiteRecord::new(row[0].to_owned(), rank);
        for (j, &id) in columns.iter().enumerate() {
            let cell = row[j + 2].trim();
            if cell.is_empty() {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| CsvError::BadNumber {
                row: row_no,
                column: id.as_str().to_owned(),
                value: cell.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(CsvError::BadNumber {
                    row: row_no,
                    column: id.as_str().to_owned(),
                    value: cell.to_owned(),
                });
            }
            record.values.insert(id, value);
        }
        records.push(record);
    }
    Ok(Dataset::new(records))
}
