//! Metric catalogue invariants, CSV round-trips, and dataset validation.

use proptest::prelude::*;
use seo_rankminer_core::model::{
    builtin_registry, load_dataset_csv, save_dataset_csv, validate_dataset, CsvError, Dataset,
    MetricId, MetricKind, MetricScale, MetricSource, SiteRecord, TransformPolicy, ViolationKind,
};

#[test]
fn registry_covers_every_metric_once() {
    let registry = builtin_registry();
    assert_eq!(registry.len(), 38);
    assert_eq!(MetricId::ALL.len(), 38);
    for (i, &id) in MetricId::ALL.iter().enumerate() {
        assert_eq!(id.index(), i);
        assert_eq!(registry.descriptor(id).id, id);
    }
}

#[test]
fn registry_composition() {
    let registry = builtin_registry();
    let booleans: Vec<MetricId> = registry
        .iter()
        .filter(|d| d.kind == MetricKind::Boolean)
        .map(|d| d.id)
        .collect();
    assert_eq!(
        booleans,
        vec![
            MetricId::EncodingDeclared,
            MetricId::RobotsTxt,
            MetricId::Sitemap,
            MetricId::Responsive,
            MetricId::LanguageEnglish,
            MetricId::Doctype,
            MetricId::Page404,
            MetricId::Gzip,
            MetricId::Security,
        ]
    );
    // Flags are never log candidates and always on the 0/1 scale.
    for &id in &booleans {
        let d = registry.descriptor(id);
        assert_eq!(d.scale, MetricScale::Flag);
        assert_eq!(d.transform, TransformPolicy::NeverLog);
    }

    let provider = registry
        .iter()
        .filter(|d| d.source == MetricSource::Provider)
        .count();
    assert_eq!(provider, 11);
    assert_eq!(registry.len() - provider, 27);

    // The only numeric metrics pinned to their native scale are the
    // bounded scores; everything else numeric may be log-transformed.
    let never_log_numeric: Vec<MetricId> = registry
        .iter()
        .filter(|d| d.kind == MetricKind::Numeric && d.transform == TransformPolicy::NeverLog)
        .map(|d| d.id)
        .collect();
    assert_eq!(
        never_log_numeric,
        vec![
            MetricId::Performance,
            MetricId::Accessibility,
            MetricId::DomainAuthority,
            MetricId::PageAuthority,
        ]
    );
}

#[test]
fn metric_names_round_trip() {
    let mut seen = std::collections::BTreeSet::new();
    for id in MetricId::ALL {
        let name = id.as_str();
        assert!(seen.insert(name), "duplicate metric name {name}");
        assert_eq!(name.parse::<MetricId>().unwrap(), id);
        assert_eq!(id.to_string(), name);
        // snake_case identifiers only.
        assert!(name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'));
    }
    assert!("page_speed".parse::<MetricId>().is_err());
    assert!("".parse::<MetricId>().is_err());
    assert!("PageRank".parse::<MetricId>().is_err());
}

fn sample_dataset() -> Dataset {
    let mut a = SiteRecord::new("alpha.example.edu", 3);
    a.values.insert(MetricId::Backlinks, 1024.0);
    a.values.insert(MetricId::PageRank, 7.25);
    a.values.insert(MetricId::Gzip, 1.0);
    let mut b = SiteRecord::new("beta.example.edu", 17000);
    b.values.insert(MetricId::Backlinks, 3.0);
    // PageRank deliberately missing for b.
    b.values.insert(MetricId::Gzip, 0.0);
    Dataset::new(vec![a, b])
}

#[test]
fn csv_round_trip_preserves_values_and_gaps() {
    let dataset = sample_dataset();
    let bytes = save_dataset_csv(&dataset);
    let text = String::from_utf8(bytes.clone()).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("domain,webometric_rank,"));
    let mut expected = vec!["domain".to_string(), "webometric_rank".to_string()];
    expected.extend(MetricId::ALL.iter().map(|m| m.to_string()));
    assert_eq!(header, expected.join(","));

    let loaded = load_dataset_csv(&bytes).unwrap();
    assert_eq!(loaded, dataset);
    assert_eq!(loaded.records[1].value(MetricId::PageRank), None);
}

#[test]
fn csv_accepts_subset_and_reordered_columns() {
    let input = "domain,webometric_rank,page_rank,backlinks\nx.edu,5,3.5,\ny.edu,9,,77\n";
    let loaded = load_dataset_csv(input.as_bytes()).unwrap();
    assert_eq!(loaded.records.len(), 2);
    assert_eq!(loaded.records[0].value(MetricId::PageRank), Some(3.5));
    assert_eq!(loaded.records[0].value(MetricId::Backlinks), None);
    assert_eq!(loaded.records[1].value(MetricId::PageRank), None);
    assert_eq!(loaded.records[1].value(MetricId::Backlinks), Some(77.0));
}

#[test]
fn csv_rejects_malformed_input() {
    let err = load_dataset_csv(b"").unwrap_err();
    assert!(matches!(err, CsvError::MissingHeader), "{err:?}");

    let err = load_dataset_csv(b"site,rank\nx,1\n").unwrap_err();
    assert!(matches!(err, CsvError::BadHeader(h) if h == "site,rank"));

    let err = load_dataset_csv(b"domain,webometric_rank,page_speed\nx,1,2\n").unwrap_err();
    assert!(matches!(err, CsvError::UnknownColumn(c) if c == "page_speed"));

    let err =
        load_dataset_csv(b"domain,webometric_rank,page_rank,page_rank\nx,1,2,2\n").unwrap_err();
    assert!(matches!(err, CsvError::DuplicateColumn(c) if c == "page_rank"));

    let err = load_dataset_csv(b"domain,webometric_rank,page_rank\nx,1\n").unwrap_err();
    assert!(matches!(err, CsvError::FieldCount { row: 2, expected: 3, got: 2 }));

    let err = load_dataset_csv(b"domain,webometric_rank,page_rank\nx,first,2\n").unwrap_err();
    assert!(matches!(err, CsvError::BadRank { row: 2, value } if value == "first"));

    let err = load_dataset_csv(b"domain,webometric_rank,page_rank\nx,1,fast\n").unwrap_err();
    assert!(
        matches!(err, CsvError::BadNumber { row: 2, ref column, ref value }
            if column == "page_rank" && value == "fast"),
    );

    // Parseable but non-finite numbers are rejected too.
    let err = load_dataset_csv(b"domain,webometric_rank,page_rank\nx,1,NaN\n").unwrap_err();
    assert!(matches!(err, CsvError::BadNumber { .. }));
    let err = load_dataset_csv(b"domain,webometric_rank,page_rank\nx,1,inf\n").unwrap_err();
    assert!(matches!(err, CsvError::BadNumber { .. }));
}

#[test]
fn csv_quotes_awkward_domains() {
    let mut record = SiteRecord::new("weird,\"name\".example", 1);
    record.values.insert(MetricId::H1Count, 2.0);
    let dataset = Dataset::new(vec![record]);
    let loaded = load_dataset_csv(&save_dataset_csv(&dataset)).unwrap();
    assert_eq!(loaded, dataset);
}

#[test]
fn empty_dataset_round_trips() {
    let bytes = save_dataset_csv(&Dataset::default());
    let loaded = load_dataset_csv(&bytes).unwrap();
    assert!(loaded.records.is_empty());
}

#[test]
fn validation_flags_semantic_problems() {
    let mut a = SiteRecord::new("One.Example.EDU", 4);
    a.values.insert(MetricId::Backlinks, -5.0);
    a.values.insert(MetricId::Gzip, 2.0);
    let mut b = SiteRecord::new("one.example.edu", 0);
    b.values.insert(MetricId::LoadTimeMs, f64::NAN);
    let mut c = SiteRecord::new("three.example.edu", 9);
    c.values.insert(MetricId::PageRank, 5.0);

    let violations = validate_dataset(&Dataset::new(vec![a, b, c]));
    let kinds: Vec<ViolationKind> = violations.iter().map(|v| v.kind).collect();
    assert_eq!(
        kinds,
        vec![
            ViolationKind::NegativeValue,
            ViolationKind::NonBooleanFlag,
            ViolationKind::DuplicateDomain,
            ViolationKind::RankOutOfRange,
            ViolationKind::NonFiniteValue,
        ]
    );
    // Domain comparison ignores case.
    assert_eq!(violations[2].domain, "one.example.edu");
}

#[test]
fn validation_passes_clean_data() {
    assert!(validate_dataset(&sample_dataset()).is_empty());
}

fn record_strategy() -> impl Strategy<Value = SiteRecord> {
    (
        "[a-z][a-z0-9.-]{0,18}",
        1u32..1_000_000,
        proptest::collection::btree_map(
            (0usize..MetricId::ALL.len()).prop_map(|i| MetricId::ALL[i]),
            prop_oneof![
                -1.0e9..1.0e9f64,
                (0u32..2u32).prop_map(f64::from),
                Just(0.0),
            ],
            0..MetricId::ALL.len(),
        ),
    )
        .prop_map(|(domain, rank, values)| {
            let mut record = SiteRecord::new(domain, rank);
            record.values = values;
            record
        })
}

proptest! {
    #[test]
    fn csv_round_trip_is_lossless(records in proptest::collection::vec(record_strategy(), 0..12)) {
        let dataset = Dataset::new(records);
        let bytes = save_dataset_csv(&dataset);
        let loaded = load_dataset_csv(&bytes).unwrap();
        prop_assert_eq!(loaded, dataset);
    }
}
