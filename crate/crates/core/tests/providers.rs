//! Offline provider behavior: fixture loading and validation, chaining,
//! the search-count adapter, measured/provider merging, and report JSON.

use std::collections::BTreeMap;

use seo_rankminer_core::model::{builtin_registry, MetricId, MetricSource};
use seo_rankminer_core::providers::{
    collect, indexed_pages_query, AuditReport, CompositeProvider, FixtureProvider,
    FixtureSearchClient, Provenance, Provider, ProviderError, ProviderResponse,
    SearchIndexProvider,
};

const FIXTURE: &str = r#"{
    "  Uni.Example ": { "trust_flow": 71.0, "page_rank": 8.5 },
    "other.example": { "backlinks": 12000.0, "h1_count": 3.0 }
}"#;

#[test]
fn fixture_provider_serves_loaded_values() {
    let provider = FixtureProvider::from_json("tier1", FIXTURE).unwrap();
    assert_eq!(provider.name(), "tier1");
    // Domain keys are normalized on load and on lookup.
    assert_eq!(
        provider.domains().collect::<Vec<_>>(),
        vec!["other.example", "uni.example"]
    );

    let got = provider.get("UNI.EXAMPLE", MetricId::TrustFlow).unwrap();
    assert_eq!(
        got,
        ProviderResponse {
            metric: MetricId::TrustFlow,
            value: Some(71.0),
            source_name: "tier1".to_string(),
            retrieved_at: None,
        }
    );

    // An unknown domain is "no data", never an error.
    let gap = provider.get("mystery.example", MetricId::TrustFlow).unwrap();
    assert_eq!(gap.value, None);
    // So is a known domain without the metric.
    let gap = provider.get("other.example", MetricId::TrustFlow).unwrap();
    assert_eq!(gap.value, None);

    // Locally measured metrics must never be asked of a provider, even
    // when the fixture happens to hold a (validated) value for one.
    let err = provider.get("other.example", MetricId::H1Count).unwrap_err();
    assert!(matches!(
        err,
        ProviderError::NotProviderSourced { metric: MetricId::H1Count }
    ));
}

#[test]
fn fixture_validation_happens_at_load() {
    let cases = [
        (r#"{"x.example": {"page_speed": 1.0}}"#, "unknown metric"),
        (r#"{"x.example": {"page_rank": 14.0}}"#, "outside 0..=10"),
        (r#"{"x.example": {"alexa_rank": 0.0}}"#, "below 1"),
        (r#"{"x.example": {"trust_flow": -2.0}}"#, "outside 0..=100"),
        (r#"{"x.example": {"gzip": 0.5}}"#, "not 0 or 1"),
        (r#"{"x.example": {"backlinks": -1.0}}"#, "negative"),
        (r#"{"   ": {"trust_flow": 3.0}}"#, "empty domain"),
        (r#"not json"#, "expected"),
    ];
    for (json, needle) in cases {
        let err = FixtureProvider::from_json("f", json).unwrap_err();
        let ProviderError::BadFixture { path, message } = &err else {
            panic!("expected BadFixture, got {err:?}");
        };
        assert_eq!(path, "f");
        assert!(
            message.contains(needle),
            "`{message}` should mention `{needle}`"
        );
    }
}

struct Failing;

impl Provider for Failing {
    fn name(&self) -> &str {
        "failing"
    }

    fn get(&self, domain: &str, metric: MetricId) -> Result<ProviderResponse, ProviderError> {
        let _ = metric;
        Err(ProviderError::Backend {
            name: "failing".to_string(),
            domain: domain.to_string(),
            message: "boom".to_string(),
        })
    }
}

#[test]
fn composite_takes_first_value_and_propagates_errors() {
    let first = FixtureProvider::from_json(
        "first",
        r#"{"uni.example": {"backlinks": 100.0}}"#,
    )
    .unwrap();
    let second = FixtureProvider::from_json(
        "second",
        r#"{"uni.example": {"backlinks": 999.0, "referring_domains": 55.0}}"#,
    )
    .unwrap();
    let chain = CompositeProvider::new(vec![Box::new(first), Box::new(second)]);

    let got = chain.get("uni.example", MetricId::Backlinks).unwrap();
    assert_eq!(got.value, Some(100.0));
    assert_eq!(got.source_name, "first");

    let got = chain.get("uni.example", MetricId::ReferringDomains).unwrap();
    assert_eq!(got.value, Some(55.0));
    assert_eq!(got.source_name, "second");

    let got = chain.get("uni.example", MetricId::ReferringIps).unwrap();
    assert_eq!(got.value, None);
    assert_eq!(got.source_name, "composite");

    let empty = CompositeProvider::new(Vec::new());
    assert!(empty.is_empty());
    assert_eq!(empty.get("uni.example", MetricId::Backlinks).unwrap().value, None);

    // A hard failure anywhere in the chain surfaces instead of being
    // papered over by later providers.
    let fragile = CompositeProvider::new(vec![
        Box::new(Failing),
        Box::new(FixtureProvider::from_json("x", r#"{"uni.example": {"backlinks": 1.0}}"#).unwrap()),
    ]);
    assert!(matches!(
        fragile.get("uni.example", MetricId::Backlinks),
        Err(ProviderError::Backend { .. })
    ));
}

#[test]
fn search_client_adapter_serves_indexed_pages_only() {
    let counts = BTreeMap::from([("site:uni.example".to_string(), 125_000.0)]);
    let client = FixtureSearchClient::new("searchfix", counts);

    // The query normalizes the domain before hitting the client.
    assert_eq!(
        indexed_pages_query("  UNI.Example ", &client).unwrap(),
        Some(125_000.0)
    );
    assert_eq!(indexed_pages_query("unknown.example", &client).unwrap(), None);

    let provider = SearchIndexProvider::new(client);
    let got = provider.get("uni.example", MetricId::IndexedPages).unwrap();
    assert_eq!(got.value, Some(125_000.0));
    assert_eq!(got.source_name, "searchfix");
    // Other provider-sourced metrics are simply not its business.
    assert_eq!(provider.get("uni.example", MetricId::Backlinks).unwrap().value, None);
    assert!(provider.get("uni.example", MetricId::H1Count).is_err());
}

fn all_measured() -> BTreeMap<MetricId, f64> {
    builtin_registry()
        .iter()
        .filter(|d| d.source != MetricSource::Provider)
        .map(|d| (d.id, 1.0))
        .collect()
}

#[test]
fn collect_fills_every_slot_with_a_tag() {
    let empty = FixtureProvider::from_json("empty", "{}").unwrap();
    let registry = builtin_registry();
    let measured = all_measured();

    let record = collect("  WWW.Uni.Example ", &empty, registry, &measured).unwrap();
    assert_eq!(record.domain, "www.uni.example");
    assert_eq!(record.provenance.len(), 38, "every slot tagged");
    assert_eq!(record.values.len(), 27, "all measured slots valued");
    let missing = record
        .provenance
        .values()
        .filter(|&&p| p == Provenance::Missing)
        .count();
    assert_eq!(missing, 11, "provider slots without data stay missing");

    // Now a provider knows trust_flow: one slot moves missing->provider.
    let one = FixtureProvider::from_json(
        "one",
        r#"{"www.uni.example": {"trust_flow": 71.0}}"#,
    )
    .unwrap();
    let record = collect("www.uni.example", &one, registry, &measured).unwrap();
    assert_eq!(record.values.len(), 28);
    assert_eq!(record.values[&MetricId::TrustFlow], 71.0);
    assert_eq!(record.provenance[&MetricId::TrustFlow], Provenance::Provider);

    // A measured value always wins over a provider answer.
    let mut measured_tf = measured.clone();
    measured_tf.insert(MetricId::TrustFlow, 50.0);
    let record = collect("www.uni.example", &one, registry, &measured_tf).unwrap();
    assert_eq!(record.values[&MetricId::TrustFlow], 50.0);
    assert_eq!(record.provenance[&MetricId::TrustFlow], Provenance::Measured);
}

#[test]
fn audit_report_json_is_canonical_and_complete() {
    let provider = FixtureProvider::from_json(
        "p",
        r#"{"uni.example": {"page_rank": 6.0}}"#,
    )
    .unwrap();
    let registry = builtin_registry();
    let measured = BTreeMap::from([(MetricId::H1Count, 2.0)]);
    let record = collect("uni.example", &provider, registry, &measured).unwrap();

    let report = AuditReport::new("https://uni.example/", None, &record);
    let json = report.to_json();
    // Stable output: same inputs, same bytes.
    assert_eq!(json, AuditReport::new("https://uni.example/", None, &record).to_json());

    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["url"], "https://uni.example/");
    assert!(parsed["fetched_at"].is_null());
    let metrics = parsed["metrics"].as_object().unwrap();
    assert_eq!(metrics.len(), 38, "every slot present");
    assert_eq!(metrics["h1_count"], 2.0);
    assert_eq!(metrics["page_rank"], 6.0);
    assert!(metrics["backlinks"].is_null(), "gaps serialize as null");
    let provenance = parsed["provenance"].as_object().unwrap();
    assert_eq!(provenance.len(), 38);
    assert_eq!(provenance["h1_count"], "measured");
    assert_eq!(provenance["page_rank"], "provider");
    assert_eq!(provenance["backlinks"], "missing");

    // Keys are emitted in registry order, not alphabetically.
    let order: Vec<usize> = MetricId::ALL
        .iter()
        .map(|m| json.find(&format!("\"{}\"", m.as_str())).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "metric key order");

    let stamped = AuditReport::new("https://uni.example/", Some("2026-01-01T00:00:00Z".into()), &record);
    let parsed: serde_json::Value = serde_json::from_str(&stamped.to_json()).unwrap();
    assert_eq!(parsed["fetched_at"], "2026-01-01T00:00:00Z");
}
