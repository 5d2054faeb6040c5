//! Pluggable sources for off-page metrics (authority scores, backlink
//! counts, index sizes) that cannot be measured from the page itself.
//!
//! The bundled implementation is an offline JSON fixture so whole runs
//! are reproducible; live services plug in behind the same [`Provider`]
//! trait. Values are range-checked when a fixture loads, never at query
//! time, and a provider answer never overwrites a measured value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{MetricId, MetricRegistry, MetricScale, MetricSource};

#[derive(Debug, Error)]
pub enum ProviderError {
    /// The metric is measured locally, not served by providers.
    #[error("metric `{metric}` is not provider sourced")]
    NotProviderSourced { metric: MetricId },
    /// A fixture file failed to load or failed validation.
    #[error("fixture `{path}`: {message}")]
    BadFixture { path: String, message: String },
    /// A live backend failed in a way that is not "no data".
    #[error("provider `{name}` failed for `{domain}`: {message}")]
    Backend {
        name: String,
        domain: String,
        message: String,
    },
}

/// One answer from a provider. `value: None` means the provider has no
/// data for this domain/metric, which is different from an error.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderResponse {
    pub metric: MetricId,
    pub value: Option<f64>,
    pub source_name: String,
    /// When the value was fetched. `None` for offline fixtures, whose
    /// answers are independent of time.
    pub retrieved_at: Option<String>,
}

/// A source of off-page metric values.
///
/// Implementations must be safe to call from several threads at once
/// and must return `value: None` rather than inventing numbers.
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;

    /// Look up one metric for one domain. The metric must be
    /// provider-sourced per the registry.
    fn get(&self, domain: &str, metric: MetricId) -> Result<ProviderResponse, ProviderError>;
}

fn ensure_provider_sourced(metric: MetricId) -> Result<(), ProviderError> {
    let descriptor = crate::model::builtin_registry().descriptor(metric);
    if descriptor.source != MetricSource::Provider {
        return Err(ProviderError::NotProviderSourced { metric });
    }
    Ok(())
}

/// Range check for a stored value against the metric's scale.
fn scale_violation(scale: MetricScale, value: f64) -> Option<String> {
    if !value.is_finite() {
        return Some("value is not finite".to_string());
    }
    match scale {
        MetricScale::Count | MetricScale::Milliseconds | MetricScale::Kilobytes => {
            (value < 0.0).then(|| format!("{value} is negative"))
        }
        MetricScale::RankPosition => (value < 1.0).then(|| format!("rank {value} is below 1")),
        MetricScale::Score0To100 => {
            (!(0.0..=100.0).contains(&value)).then(|| format!("{value} outside 0..=100"))
        }
        MetricScale::Score0To10 => {
            (!(0.0..=10.0).contains(&value)).then(|| format!("{value} outside 0..=10"))
        }
        MetricScale::Flag => {
            (value != 0.0 && value != 1.0).then(|| format!("flag value {value} is not 0 or 1"))
        }
    }
}

/// Offline provider backed by a JSON file mapping lowercase domains to
/// `{metric_id: value}` objects.
///
/// Identical file plus identical query always yields the identical
/// response. Entries are validated on load; lookups never fail, they
/// just come back empty.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    name: String,
    data: BTreeMap<String, BTreeMap<MetricId, f64>>,
}

impl FixtureProvider {
    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ProviderError::BadFixture {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        Self::from_json(&shown, &text)
    }

    /// Parse fixture JSON. `name` labels responses and error messages.
    pub fn from_json(name: &str, json: &str) -> Result<Self, ProviderError> {
        let bad = |message: String| ProviderError::BadFixture {
            path: name.to_string(),
            message,
        };
        let raw: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
        let registry = crate::model::builtin_registry();
        let mut data = BTreeMap::new();
        for (domain, metrics) in raw {
            let key = domain.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(bad("empty domain key".to_string()));
            }
            let mut values = BTreeMap::new();
            for (metric_name, value) in metrics {
                let metric: MetricId = metric_name
                    .parse()
                    .map_err(|_| bad(format!("`{key}`: unknown metric `{metric_name}`")))?;
                let scale = registry.descriptor(metric).scale;
                if let Some(why) = scale_violation(scale, value) {
                    return Err(bad(format!("`{key}`.`{metric_name}`: {why}")));
                }
                values.insert(metric, value);
            }
            data.insert(key, values);
        }
        Ok(FixtureProvider {
            name: name.to_string(),
            data,
        })
    }

    pub fn domains(&self) -> impl Iterator<Item = &str> {
        self.data.keys().map(String::as_str)
    }
}

impl Provider for FixtureProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn get(&self, domain: &str, metric: MetricId) -> Result<ProviderResponse, ProviderError> {
        ensure_provider_sourced(metric)?;
        let key = domain.trim().to_ascii_lowercase();
        let value = self
            .data
            .get(&key)
            .and_then(|metrics| metrics.get(&metric))
            .copied();
        Ok(ProviderResponse {
            metric,
            value,
            source_name: self.name.clone(),
            retrieved_at: None,
        })
    }
}

/// Chains providers, returning the first answer that carries a value.
/// Hard errors stop the chain; plain "no data" moves to the next.
pub struct CompositeProvider {
    providers: Vec<Box<dyn Provider>>,
}

impl CompositeProvider {
    pub fn new(providers: Vec<Box<dyn Provider>>) -> Self {
        CompositeProvider { providers }
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }
}

impl Provider for CompositeProvider {
    fn name(&self) -> &str {
        "composite"
    }

    fn get(&self, domain: &str, metric: MetricId) -> Result<ProviderResponse, ProviderError> {
        ensure_provider_sourced(metric)?;
        for provider in &self.providers {
            let response = provider.get(domain, metric)?;
            if response.value.is_some() {
                return Ok(response);
            }
        }
        Ok(ProviderResponse {
            metric,
            value: None,
            source_name: self.name().to_string(),
            retrieved_at: None,
        })
    }
}

/// Result-count lookup for a search query, used for index-size metrics.
pub trait SearchClient: Send + Sync {
    fn name(&self) -> &str;

    /// Reported hit count for a query, or `None` when the backend has
    /// no answer. Transport failures must surface as errors, never 0.
    fn result_count(&self, query: &str) -> Result<Option<f64>, ProviderError>;
}

/// Offline search client mapping exact queries to counts.
#[derive(Debug, Clone)]
pub struct FixtureSearchClient {
    name: String,
    counts: BTreeMap<String, f64>,
}

impl FixtureSearchClient {
    pub fn new(name: &str, counts: BTreeMap<String, f64>) -> Self {
        FixtureSearchClient {
            name: name.to_string(),
            counts,
        }
    }
}

impl SearchClient for FixtureSearchClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn result_count(&self, query: &str) -> Result<Option<f64>, ProviderError> {
        Ok(self.counts.get(query).copied())
    }
}

/// How many of a site's pages a search engine has indexed, via the
/// `site:` operator.
pub fn indexed_pages_query(
    domain: &str,
    client: &dyn SearchClient,
) -> Result<Option<f64>, ProviderError> {
    let query = format!("site:{}", domain.trim().to_ascii_lowercase());
    client.result_count(&query)
}

/// Adapter serving the indexed-pages slot from a [`SearchClient`] so it
/// can sit in a provider chain.
pub struct SearchIndexProvider<C: SearchClient> {
    client: C,
}

impl<C: SearchClient> SearchIndexProvider<C> {
    pub fn new(client: C) -> Self {
        SearchIndexProvider { client }
    }
}

impl<C: SearchClient> Provider for SearchIndexProvider<C> {
    fn name(&self) -> &str {
        self.client.name()
    }

    fn get(&self, domain: &str, metric: MetricId) -> Result<ProviderResponse, ProviderError> {
        ensure_provider_sourced(metric)?;
        let value = if metric == MetricId::IndexedPages {
            indexed_pages_query(domain, &self.client)?
        } else {
            None
        };
        Ok(ProviderResponse {
            metric,
            value,
            source_name: self.client.name().to_string(),
            retrieved_at: None,
        })
    }
}

/// Where a recorded value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Measured,
    Provider,
    Missing,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Measured => "measured",
            Provenance::Provider => "provider",
            Provenance::Missing => "missing",
        };
        f.write_str(s)
    }
}

/// All metric slots for one domain, each value tagged with its origin.
#[derive(Debug, Clone)]
pub struct CollectedRecord {
    pub domain: String,
    pub values: BTreeMap<MetricId, f64>,
    pub provenance: BTreeMap<MetricId, Provenance>,
}

/// Merge measured metrics with provider lookups. Every metric slot in
/// the registry ends up either valued or explicitly missing; a measured
/// value always beats whatever a provider would say.
pub fn collect(
    domain: &str,
    provider: &dyn Provider,
    registry: &MetricRegistry,
    measured: &BTreeMap<MetricId, f64>,
) -> Result<CollectedRecord, ProviderError> {
    let mut values = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for descriptor in registry.iter() {
        let metric = descriptor.id;
        if let Some(&v) = measured.get(&metric) {
            values.insert(metric, v);
            provenance.insert(metric, Provenance::Measured);
            continue;
        }
        if descriptor.source == MetricSource::Provider {
            let response = provider.get(domain, metric)?;
            if let Some(v) = response.value {
                values.insert(metric, v);
                provenance.insert(metric, Provenance::Provider);
                continue;
            }
        }
        provenance.insert(metric, Provenance::Missing);
    }
    Ok(CollectedRecord {
        domain: domain.trim().to_ascii_lowercase(),
        values,
        provenance,
    })
}

/// Serializes metric slots in registry order with `null` for gaps.
struct MetricSlots<'a>(&'a BTreeMap<MetricId, f64>);

impl Serialize for MetricSlots<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(MetricId::ALL.len()))?;
        for id in MetricId::ALL {
            map.serialize_entry(id.as_str(), &self.0.get(&id).copied())?;
        }
        map.end()
    }
}

struct ProvenanceSlots<'a>(&'a BTreeMap<MetricId, Provenance>);

impl Serialize for ProvenanceSlots<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(MetricId::ALL.len()))?;
        for id in MetricId::ALL {
            let p = self.0.get(&id).copied().unwrap_or(Provenance::Missing);
            map.serialize_entry(id.as_str(), &p)?;
        }
        map.end()
    }
}

/// Per-URL extraction result, one JSON document per audited page.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub url: String,
    /// RFC 3339 stamp, or `None` when timestamps are suppressed for
    /// byte-reproducible output.
    pub fetched_at: Option<String>,
    pub values: BTreeMap<MetricId, f64>,
    pub provenance: BTreeMap<MetricId, Provenance>,
}

impl AuditReport {
    pub fn new(url: &str, fetched_at: Option<String>, record: &CollectedRecord) -> Self {
        AuditReport {
            url: url.to_string(),
            fetched_at,
            values: record.values.clone(),
            provenance: record.provenance.clone(),
        }
    }

    /// Pretty JSON with all 38 metric keys in canonical order.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Shape<'a> {
            url: &'a str,
            fetched_at: &'a Option<String>,
            metrics: MetricSlots<'a>,
            provenance: ProvenanceSlots<'a>,
        }
        let shape = Shape {
            url: &self.url,
            fetched_at: &self.fetched_at,
            metrics: MetricSlots(&self.values),
            provenance: ProvenanceSlots(&self.provenance),
        };
        serde_json::to_string_pretty(&shape).expect("report serialization cannot fail")
    }
}
