//! Bundled benchmark dataset: 75 synthetic site records with known
//! statistical structure.
//!
//! The generator is fully deterministic (seeded), so the committed CSV
//! under `data/` can always be regenerated byte-for-byte. The dataset
//! is engineered end to end: metric/rank correlations land on preset
//! impact scores, and the discretized columns carry exact co-occurrence
//! counts so mining output can be checked against known confidence and
//! support figures. Integration tests drive the real pipeline over this
//! data and compare against those designed-in numbers.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::miner::equal_width_bins;
use crate::model::{builtin_registry, Dataset, MetricId, SiteRecord};
use crate::stats::{classify_distribution, impact_score, shift_log, Classification, StatsOptions};

/// Number of records in the benchmark dataset.
pub const REPLAY_SITE_COUNT: usize = 75;

const N: usize = REPLAY_SITE_COUNT;
const BIN_COUNT: usize = 5;
/// Values sit at least this fraction of the bin width away from both
/// bin edges, so integer rounding can never flip a bin assignment.
const MARGIN_FRAC: f64 = 0.04;

/// Deterministic seeded stream, keyed per metric and purpose.
fn rng_for(metric: MetricId, stream: u64) -> ChaCha8Rng {
    let seed = 0x7265_706c_6179_0000_u64 ^ ((metric.index() as u64) << 16) ^ stream;
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` integers evenly spread over `lo..=hi`, endpoints included.
fn spread(lo: u32, hi: u32, k: usize) -> Vec<u32> {
    (0..k)
        .map(|j| lo + (j as f64 * f64::from(hi - lo) / (k - 1) as f64).round() as u32)
        .collect()
}

/// Ranks occupy five blocks whose extents pin the rank bin edges at
/// 1, 4511, 9021, 13531, 18041, 22551 while every interior value keeps
/// a wide margin from those edges.
fn replay_ranks() -> Vec<u32> {
    let mut ranks = Vec::with_capacity(N);
    ranks.extend(spread(1, 4300, 19));
    ranks.extend(spread(4650, 8850, 15));
    ranks.extend(spread(9150, 13400, 15));
    ranks.extend(spread(13700, 17900, 14));
    ranks.extend(spread(18200, 22551, 12));
    ranks
}

fn round_dec(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

/// Impact score as the analysis pipeline would compute it: classify,
/// transform if the classification says so, then squared correlation.
/// `None` when the values would be excluded from scoring.
fn scored_impact(metric: MetricId, values: &[f64], ranks: &[Option<f64>]) -> Option<f64> {
    let descriptor = builtin_registry().descriptor(metric);
    let opts = StatsOptions::default();
    let wrapped: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    match classify_distribution(&wrapped, descriptor, &opts).ok()? {
        Classification::Normal => impact_score(&wrapped, ranks).ok(),
        Classification::LogNormalizable { shift } => {
            let logged = shift_log(&wrapped, shift).ok()?;
            impact_score(&logged, ranks).ok()
        }
        Classification::Excluded(_) => None,
    }
}

/// Which bin each record must (or may) occupy for one metric.
struct Layout {
    fixed: Vec<Option<u8>>,
    domains: Vec<Vec<u8>>,
}

fn layout(
    fixed: &[(RangeInclusive<usize>, u8)],
    free: &[(RangeInclusive<usize>, &[u8])],
) -> Layout {
    let mut out = Layout {
        fixed: vec![None; N],
        domains: vec![Vec::new(); N],
    };
    for (range, bin) in fixed {
        for i in range.clone() {
            out.fixed[i] = Some(*bin);
        }
    }
    for (range, domain) in free {
        for i in range.clone() {
            if out.fixed[i].is_none() && out.domains[i].is_empty() {
                out.domains[i] = domain.to_vec();
            }
        }
    }
    for i in 0..N {
        assert!(
            out.fixed[i].is_some() || !out.domains[i].is_empty(),
            "record {i} has neither a fixed bin nor a free domain"
        );
    }
    out
}

/// One bin-constrained metric: hard co-occurrence structure plus a
/// correlation target reached by searching layout strength and in-bin
/// placement.
struct ConstrainedSpec {
    metric: MetricId,
    lo: f64,
    hi: f64,
    decimals: i32,
    pins: Vec<(usize, f64)>,
    target: f64,
    tolerance: f64,
    layout: Layout,
}

/// Resolve free bins for strength `p` in [-1, 1]: positive leans the
/// free records toward bins that track rank, negative leans against it,
/// magnitude is the probability of following the lean.
fn assign_bins(layout: &Layout, p: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut bins = vec![0u8; N];
    for i in 0..N {
        if let Some(b) = layout.fixed[i] {
            bins[i] = b;
            continue;
        }
        let domain = &layout.domains[i];
        let pct = i as f64 / (N - 1) as f64;
        let top = (domain.len() - 1) as f64;
        let mono = ((1.0 - pct) * top).round() as usize;
        let anti = (pct * top).round() as usize;
        let pick = if rng.random::<f64>() < p.abs() {
            if p >= 0.0 {
                mono
            } else {
                anti
            }
        } else {
            rng.random_range(0..domain.len())
        };
        bins[i] = domain[pick];
    }
    bins
}

/// Turn bin assignments plus a placement blend into concrete values.
/// `lambda` in [-1, 1]: +1 places records inside each bin in rank
/// order, -1 reverses that order, 0 is pure seeded noise. Pins override
/// afterwards with exact endpoint values.
fn place_values(
    bins: &[u8],
    lambda: f64,
    noise_u: &[f64],
    edges: &[f64],
    pins: &[(usize, f64)],
    decimals: i32,
) -> Vec<f64> {
    // Rank order inside each bin: earlier record index = better rank.
    let mut order_in_bin = vec![0.5f64; N];
    for bin in 0..BIN_COUNT as u8 {
        let members: Vec<usize> = (0..N).filter(|&i| bins[i] == bin).collect();
        let m = members.len();
        for (j, &i) in members.iter().enumerate() {
            order_in_bin[i] = if m > 1 {
                1.0 - j as f64 / (m - 1) as f64
            } else {
                0.5
            };
        }
    }
    let mut values = Vec::with_capacity(N);
    for i in 0..N {
        let b = bins[i] as usize;
        let width = edges[b + 1] - edges[b];
        let margin = width * MARGIN_FRAC;
        let lo = edges[b] + margin;
        let hi = edges[b + 1] - margin;
        let trend = order_in_bin[i];
        let u = if lambda >= 0.0 {
            lambda * trend + (1.0 - lambda) * noise_u[i]
        } else {
            (-lambda) * (1.0 - trend) + (1.0 + lambda) * noise_u[i]
        };
        values.push(round_dec(lo + u * (hi - lo), decimals));
    }
    for &(i, v) in pins {
        values[i] = v;
    }
    values
}

/// Search for values that satisfy every bin constraint and land the
/// impact score on the target. The objective is evaluated on the final
/// rounded values through the real classification pipeline, so rounding
/// and transform choice are already priced in.
fn solve_constrained(spec: &ConstrainedSpec, ranks: &[Option<f64>]) -> Vec<f64> {
    let edge_source = [spec.lo, spec.hi];
    let edges = equal_width_bins(&edge_source, BIN_COUNT)
        .expect("fixed range is non-degenerate")
        .edges;

    let noise_u: Vec<f64> = {
        let mut rng = rng_for(spec.metric, 1);
        (0..N).map(|_| rng.random_range(0.03..0.97)).collect()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |err: f64, values: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            *best = Some((err, values));
        }
    };

    for pi in 0..=20u64 {
        let p = -1.0 + pi as f64 * 0.1;
        let bins = assign_bins(&spec.layout, p, &mut rng_for(spec.metric, 100 + pi));
        let eval = |lambda: f64| -> Option<(f64, Vec<f64>)> {
            let values = place_values(&bins, lambda, &noise_u, &edges, &spec.pins, spec.decimals);
            scored_impact(spec.metric, &values, ranks).map(|f| (f, values))
        };

        // Coarse probe, then shrink a window around the best point.
        let mut window = (-1.0f64, 1.0f64);
        let mut best_here: Option<(f64, f64, Vec<f64>)> = None;
        for _ in 0..24 {
            let (a, b) = window;
            let mut center = None;
            for step in 0..9 {
                let lambda = a + (b - a) * step as f64 / 8.0;
                if let Some((f, values)) = eval(lambda) {
                    let err = (f - spec.target).abs();
                    if best_here.as_ref().map_or(true, |(e, _, _)| err < *e) {
                        best_here = Some((err, lambda, values));
                        center = Some(lambda);
                    }
                }
            }
            let Some(c) = center.or(best_here.as_ref().map(|(_, l, _)| *l)) else {
                break;
            };
            let half = (b - a) * 0.3;
            window = ((c - half).max(-1.0), (c + half).min(1.0));
            if window.1 - window.0 < 1e-9 {
                break;
            }
        }
        if let Some((err, _, values)) = best_here {
            consider(err, values, &mut best);
        }
    }

    let (err, values) = best.expect("constrained search always yields a candidate");
    assert!(
        err <= spec.tolerance,
        "{}: impact missed target {} by {err}",
        spec.metric,
        spec.target
    );
    // Re-check every bin assignment on the final rounded values.
    let check = equal_width_bins(&edge_source, BIN_COUNT).expect("non-degenerate");
    let attr = crate::miner::Attribute::Metric(spec.metric);
    for (i, &v) in values.iter().enumerate() {
        let bin = check.bin_of(&attr, v).expect("value inside range");
        if let Some(fixed) = spec.layout.fixed[i] {
            assert_eq!(bin, fixed, "{}: record {i} left its fixed bin", spec.metric);
        } else {
            assert!(
                spec.layout.domains[i].contains(&bin),
                "{}: record {i} left its free domain",
                spec.metric
            );
        }
    }
    values
}

/// Unit-norm mixture holding an exact sample correlation `r` with the
/// rank vector: a standardized rank component plus seeded noise made
/// orthogonal to both the rank direction and the constant vector.
fn exact_mix(x_hat: &[f64], r: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise: Vec<f64> = (0..N).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = noise.iter().sum::<f64>() / N as f64;
    let mut e: Vec<f64> = noise.iter().map(|v| v - mean).collect();
    let dot: f64 = e.iter().zip(x_hat).map(|(a, b)| a * b).sum();
    for (ei, xi) in e.iter_mut().zip(x_hat) {
        *ei -= dot * xi;
    }
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = (1.0 - r * r).sqrt();
    x_hat
        .iter()
        .zip(&e)
        .map(|(xi, ei)| r * xi + s * ei / norm)
        .collect()
}

fn standardized(xs: &[f64]) -> Vec<f64> {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    centered.into_iter().map(|v| v / norm).collect()
}

/// Log-scale metric: values 10^(mu ± half decades) around the exact
/// correlation mixture, rounded to the requested precision.
fn log_metric(metric: MetricId, x_hat: &[f64], r: f64, mu: f64, half: f64, decimals: i32) -> Vec<f64> {
    let mix = exact_mix(x_hat, r, &mut rng_for(metric, 7));
    let peak = mix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c = half / peak;
    mix.iter()
        .map(|v| round_dec(10f64.powf(mu + c * v), decimals))
        .collect()
}

/// Linear-scale metric around `mu ± half`.
fn raw_metric(metric: MetricId, x_hat: &[f64], r: f64, mu: f64, half: f64, decimals: i32) -> Vec<f64> {
    let mix = exact_mix(x_hat, r, &mut rng_for(metric, 7));
    let peak = mix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c = half / peak;
    mix.iter().map(|v| round_dec(mu + c * v, decimals)).collect()
}

fn flags(metric: MetricId, p_true: f64) -> Vec<f64> {
    let mut rng = rng_for(metric, 3);
    (0..N)
        .map(|_| if rng.random::<f64>() < p_true { 1.0 } else { 0.0 })
        .collect()
}

/// Exactly two distinct values, which keeps the metric out of scoring.
fn two_level(metric: MetricId, low: f64, high: f64, p_high: f64) -> Vec<f64> {
    let mut rng = rng_for(metric, 3);
    let mut values: Vec<f64> = (0..N)
        .map(|_| if rng.random::<f64>() < p_high { high } else { low })
        .collect();
    // Guarantee both levels appear.
    values[0] = high;
    values[1] = low;
    values
}

const FULL: RangeInclusive<usize> = 0..=74;

fn page_rank_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::PageRank,
        lo: 0.0,
        hi: 8.75,
        decimals: 2,
        pins: vec![(0, 8.75), (63, 0.0)],
        target: 0.390,
        tolerance: 0.002,
        layout: layout(
            &[
                (0..=8, 4),
                (9..=18, 3),
                (44..=44, 0),
                (47..=47, 0),
                (52..=52, 0),
                (58..=58, 0),
                (61..=61, 0),
                (63..=70, 0),
            ],
            &[(19..=62, &[1, 2]), (71..=74, &[0, 1, 2])],
        ),
    }
}

fn domain_authority_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::DomainAuthority,
        lo: 15.0,
        hi: 90.0,
        decimals: 0,
        pins: vec![(0, 90.0), (63, 15.0)],
        target: 0.455,
        tolerance: 0.002,
        layout: layout(
            &[(0..=7, 4), (8..=8, 3), (9..=9, 4), (63..=63, 0)],
            &[(FULL, &[0, 1, 2, 3])],
        ),
    }
}

fn page_authority_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::PageAuthority,
        lo: 16.0,
        hi: 91.0,
        decimals: 0,
        pins: vec![(0, 91.0), (63, 16.0)],
        target: 0.335,
        tolerance: 0.002,
        layout: layout(
            &[(0..=6, 4), (7..=7, 3), (8..=8, 4), (63..=63, 0)],
            &[(FULL, &[0, 1, 2, 3])],
        ),
    }
}

fn trust_flow_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::TrustFlow,
        lo: 1.0,
        hi: 88.0,
        decimals: 0,
        pins: vec![(0, 88.0), (63, 1.0)],
        target: 0.146,
        tolerance: 0.12,
        layout: layout(
            &[
                (0..=3, 4),
                (4..=12, 3),
                (13..=18, 2),
                (40..=40, 3),
                (44..=44, 0),
                (47..=47, 0),
                (52..=52, 0),
                (58..=58, 0),
                (61..=61, 0),
                (63..=70, 0),
                (71..=74, 1),
            ],
            &[(19..=62, &[0, 1, 2])],
        ),
    }
}

fn external_links_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::ExternalLinks,
        lo: 0.0,
        hi: 295.0,
        decimals: 0,
        pins: vec![(4, 295.0), (63, 0.0)],
        target: 0.120,
        tolerance: 0.12,
        layout: layout(
            &[
                (0..=3, 2),
                (4..=4, 4),
                (5..=5, 3),
                (6..=6, 1),
                (7..=7, 3),
                (8..=8, 1),
                (44..=44, 0),
                (47..=47, 0),
                (52..=52, 0),
                (58..=58, 0),
                (61..=61, 0),
                (63..=70, 0),
            ],
            &[(FULL, &[0, 1, 2, 3])],
        ),
    }
}

fn indexed_pages_spec() -> ConstrainedSpec {
    ConstrainedSpec {
        metric: MetricId::IndexedPages,
        lo: 5.0,
        hi: 24_000_005.0,
        decimals: 0,
        pins: vec![(0, 24_000_005.0), (63, 5.0)],
        target: 0.662,
        tolerance: 0.002,
        layout: layout(
            &[
                (0..=0, 4),
                (44..=44, 0),
                (47..=47, 0),
                (52..=52, 0),
                (58..=58, 0),
                (61..=61, 0),
                (63..=70, 0),
            ],
            &[(FULL, &[0, 1, 2, 3, 4])],
        ),
    }
}

fn build() -> Dataset {
    let ranks = replay_ranks();
    let rank_f: Vec<f64> = ranks.iter().map(|&r| f64::from(r)).collect();
    let ranks_opt: Vec<Option<f64>> = rank_f.iter().map(|&r| Some(r)).collect();
    let x_hat = standardized(&rank_f);

    let mut columns: BTreeMap<MetricId, Vec<f64>> = BTreeMap::new();
    let put = |id: MetricId, values: Vec<f64>, columns: &mut BTreeMap<MetricId, Vec<f64>>| {
        assert_eq!(values.len(), N);
        columns.insert(id, values);
    };

    // Bin-constrained columns carrying the co-occurrence structure.
    for spec in [
        page_rank_spec(),
        domain_authority_spec(),
        page_authority_spec(),
        trust_flow_spec(),
        external_links_spec(),
        indexed_pages_spec(),
    ] {
        let values = solve_constrained(&spec, &ranks_opt);
        put(spec.metric, values, &mut columns);
    }

    // Wide-range columns with exact pre-rounding correlations.
    let pos = |t: f64| t.sqrt();
    let neg = |t: f64| -t.sqrt();
    put(
        MetricId::AlexaRank,
        log_metric(MetricId::AlexaRank, &x_hat, pos(0.576), 4.40, 1.25, 0),
        &mut columns,
    );
    put(
        MetricId::Backlinks,
        log_metric(MetricId::Backlinks, &x_hat, neg(0.574), 5.0, 1.6, 0),
        &mut columns,
    );
    put(
        MetricId::ReferringDomains,
        log_metric(MetricId::ReferringDomains, &x_hat, neg(0.490), 4.2, 1.2, 0),
        &mut columns,
    );
    put(
        MetricId::ReferringIps,
        log_metric(MetricId::ReferringIps, &x_hat, neg(0.462), 4.1, 1.2, 0),
        &mut columns,
    );
    put(
        MetricId::LoadTimeMs,
        log_metric(MetricId::LoadTimeMs, &x_hat, pos(0.095), 3.35, 0.75, 0),
        &mut columns,
    );
    put(
        MetricId::PageSizeKb,
        log_metric(MetricId::PageSizeKb, &x_hat, neg(0.085), 2.75, 0.9, 1),
        &mut columns,
    );
    put(
        MetricId::RequestCount,
        log_metric(MetricId::RequestCount, &x_hat, pos(0.012), 1.75, 0.55, 0),
        &mut columns,
    );
    put(
        MetricId::InternalLinks,
        log_metric(MetricId::InternalLinks, &x_hat, neg(0.004), 2.45, 0.55, 0),
        &mut columns,
    );

    // Narrow-range linear columns.
    put(
        MetricId::TitleChars,
        raw_metric(MetricId::TitleChars, &x_hat, neg(0.075), 41.0, 29.0, 0),
        &mut columns,
    );
    put(
        MetricId::MetaDescriptionChars,
        raw_metric(MetricId::MetaDescriptionChars, &x_hat, pos(0.055), 90.0, 86.0, 0),
        &mut columns,
    );
    put(
        MetricId::H1Count,
        raw_metric(MetricId::H1Count, &x_hat, neg(0.050), 3.1, 2.9, 0),
        &mut columns,
    );
    put(
        MetricId::ImgWithoutAlt,
        raw_metric(MetricId::ImgWithoutAlt, &x_hat, pos(0.045), 16.0, 14.5, 0),
        &mut columns,
    );
    put(
        MetricId::IframeCount,
        raw_metric(MetricId::IframeCount, &x_hat, neg(0.040), 2.6, 2.4, 0),
        &mut columns,
    );
    put(
        MetricId::EmbedObjectCount,
        raw_metric(MetricId::EmbedObjectCount, &x_hat, pos(0.035), 2.2, 2.0, 0),
        &mut columns,
    );
    put(
        MetricId::HtmlErrors,
        raw_metric(MetricId::HtmlErrors, &x_hat, pos(0.030), 38.0, 33.0, 0),
        &mut columns,
    );
    put(
        MetricId::HtmlWarnings,
        raw_metric(MetricId::HtmlWarnings, &x_hat, pos(0.025), 25.0, 21.0, 0),
        &mut columns,
    );
    put(
        MetricId::CssErrors,
        raw_metric(MetricId::CssErrors, &x_hat, pos(0.020), 10.0, 8.5, 0),
        &mut columns,
    );
    put(
        MetricId::CssWarnings,
        raw_metric(MetricId::CssWarnings, &x_hat, neg(0.015), 17.0, 14.0, 0),
        &mut columns,
    );

    // Identity column: totals are the sum of the two link counts.
    let total: Vec<f64> = columns[&MetricId::InternalLinks]
        .iter()
        .zip(&columns[&MetricId::ExternalLinks])
        .map(|(a, b)| a + b)
        .collect();
    put(MetricId::TotalLinks, total, &mut columns);

    // Flags and two-level columns, which scoring excludes.
    put(MetricId::EncodingDeclared, flags(MetricId::EncodingDeclared, 0.95), &mut columns);
    put(MetricId::RobotsTxt, flags(MetricId::RobotsTxt, 0.90), &mut columns);
    put(MetricId::Sitemap, flags(MetricId::Sitemap, 0.82), &mut columns);
    put(MetricId::Responsive, flags(MetricId::Responsive, 0.85), &mut columns);
    put(MetricId::LanguageEnglish, flags(MetricId::LanguageEnglish, 0.88), &mut columns);
    put(MetricId::Doctype, flags(MetricId::Doctype, 0.97), &mut columns);
    put(MetricId::Page404, flags(MetricId::Page404, 0.60), &mut columns);
    put(MetricId::Gzip, flags(MetricId::Gzip, 0.75), &mut columns);
    put(MetricId::Security, flags(MetricId::Security, 0.90), &mut columns);
    put(MetricId::BrokenLinks, two_level(MetricId::BrokenLinks, 0.0, 2.0, 0.30), &mut columns);
    put(MetricId::SocialMedia, two_level(MetricId::SocialMedia, 2.0, 5.0, 0.50), &mut columns);
    put(MetricId::Performance, two_level(MetricId::Performance, 78.0, 88.0, 0.55), &mut columns);
    put(MetricId::Accessibility, two_level(MetricId::Accessibility, 86.0, 94.0, 0.45), &mut columns);

    assert_eq!(columns.len(), MetricId::ALL.len());

    let records = (0..N)
        .map(|i| {
            let mut record = SiteRecord::new(format!("u{:03}.example.edu", i + 1), ranks[i]);
            for (&id, values) in &columns {
                record.values.insert(id, values[i]);
            }
            record
        })
        .collect();
    Dataset::new(records)
}

/// The benchmark dataset. Generation is cached per process.
pub fn replay_dataset() -> Dataset {
    static CACHE: OnceLock<Dataset> = OnceLock::new();
    CACHE.get_or_init(build).clone()
}

/// Canonical CSV serialization of [`replay_dataset`], byte-identical on
/// every platform and run.
pub fn replay_csv() -> Vec<u8> {
    crate::model::save_dataset_csv(&replay_dataset())
}
