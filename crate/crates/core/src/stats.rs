//! Distribution screening and impact scoring.
//!
//! Each numeric metric is screened on sample skewness and excess
//! kurtosis. A metric that looks roughly normal is scored as-is; a
//! log-candidate metric that only looks normal after `log10(v + shift)`
//! is scored on the transformed values; everything else (flags,
//! degenerate columns, stubbornly abnormal shapes) is excluded.
//!
//! The impact score of a metric is the squared Pearson correlation
//! between its (possibly transformed) values and the raw rank column:
//! the share of rank variance a straight line through the metric
//! explains. Missing values are dropped pairwise before scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{builtin_registry, Dataset, MetricDescriptor, MetricId, MetricKind, TransformPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} present values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("log10 undefined: minimum value {min} plus shift {shift} is not positive")]
    LogDomain { min: f64, shift: f64 },
    #[error("impact undefined: {side} has zero variance")]
    ZeroVariance { side: &'static str },
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("metric {0} is excluded from scoring: {1}")]
    ExcludedMetric(MetricId, String),
}

/// Screening thresholds and the shift used when a log candidate
/// contains zeros. Defaults: |skewness| <= 1, |excess kurtosis| <= 2,
/// shift 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsOptions {
    pub skewness_threshold: f64,
    pub kurtosis_threshold: f64,
    /// Added inside the log when any value is zero; without zeros the
    /// log is taken on the raw values.
    pub zero_shift: f64,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            skewness_threshold: 1.0,
            kurtosis_threshold: 2.0,
            zero_shift: 1.0,
        }
    }
}

/// Outcome of screening one metric's distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// Roughly normal on the raw scale; scored untransformed.
    Normal,
    /// Normal only after `log10(v + shift)`; scored on the log scale.
    LogNormalizable { shift: f64 },
    Excluded(ExclusionReason),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExclusionReason {
    BooleanMetric,
    /// Two or fewer distinct observed values carry no usable shape.
    TooFewDistinct { distinct: usize },
    /// Failed the normality screen raw and (when allowed) after log.
    NotNormalizable,
}

impl std::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExclusionReason::BooleanMetric => write!(f, "boolean metric"),
            ExclusionReason::TooFewDistinct { distinct } => {
                write!(f, "only {distinct} distinct value(s)")
            }
            ExclusionReason::NotNormalizable => write!(f, "abnormal raw and after log"),
        }
    }
}

/// `log10(v + shift)` element-wise, missing values passed through.
/// Fails if any present value would leave the log's domain.
pub fn shift_log(values: &[Option<f64>], shift: f64) -> Result<Vec<Option<f64>>, StatsError> {
    if let Some(min) = present(values).fold(None::<f64>, |acc, v| Some(acc.map_or(v, |m| m.min(v)))) {
        if min + shift <= 0.0 {
            return Err(StatsError::LogDomain { min, shift });
        }
    }
    Ok(values
        .iter()
        .map(|v| v.map(|v| (v + shift).log10()))
        .collect())
}

fn present<'a>(values: &'a [Option<f64>]) -> impl Iterator<Item = f64> + 'a {
    values.iter().filter_map(|v| *v)
}

/// Central moments m2..m4 about the mean, population form.
fn central_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

/// g1 = m3 / m2^(3/2). Requires 3 values and nonzero variance.
pub fn sample_skewness(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.len() < 3 {
        return Err(StatsError::TooFewValues { needed: 3, got: xs.len() });
    }
    let (_, m2, m3, _) = central_moments(xs);
    if m2 == 0.0 {
        return Err(StatsError::ZeroVariance { side: "series" });
    }
    Ok(m3 / m2.powf(1.5))
}

/// g2 = m4 / m2^2 - 3. Requires 3 values and nonzero variance.
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.len() < 3 {
        return Err(StatsError::TooFewValues { needed: 3, got: xs.len() });
    }
    let (_, m2, _, m4) = central_moments(xs);
    if m2 == 0.0 {
        return Err(StatsError::ZeroVariance { side: "series" });
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

fn passes_screen(xs: &[f64], opts: &StatsOptions) -> Result<bool, StatsError> {
    let skew = sample_skewness(xs)?;
    let kurt = excess_kurtosis(xs)?;
    Ok(skew.abs() <= opts.skewness_threshold && kurt.abs() <= opts.kurtosis_threshold)
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// Screens one metric's observed values. Boolean metrics and columns
/// with <= 2 distinct values are excluded outright; otherwise the raw
/// shape is screened first and, for log candidates, the shifted log is
/// given a second chance (shift = `zero_shift` when zeros are present,
/// else 0).
pub fn classify_distribution(
    values: &[Option<f64>],
    descriptor: &MetricDescriptor,
    opts: &StatsOptions,
) -> Result<Classification, StatsError> {
    let xs: Vec<f64> = present(values).collect();
    if xs.len() < 3 {
        return Err(StatsError::TooFewValues { needed: 3, got: xs.len() });
    }
    if descriptor.kind == MetricKind::Boolean {
        return Ok(Classification::Excluded(ExclusionReason::BooleanMetric));
    }
    let distinct = distinct_count(&xs);
    if distinct <= 2 {
        return Ok(Classification::Excluded(ExclusionReason::TooFewDistinct { distinct }));
    }
    if passes_screen(&xs, opts)? {
        return Ok(Classification::Normal);
    }
    if descriptor.transform == TransformPolicy::LogCandidate {
        let shift = if xs.iter().any(|&v| v == 0.0) { opts.zero_shift } else { 0.0 };
        let logged = shift_log(values, shift)?;
        let lxs: Vec<f64> = present(&logged).collect();
        if passes_screen(&lxs, opts)? {
            return Ok(Classification::LogNormalizable { shift });
        }
    }
    Ok(Classification::Excluded(ExclusionReason::NotNormalizable))
}

/// Squared Pearson correlation between two series after pairwise
/// deletion of missing entries. 1.0 means the metric explains the rank
/// ordering exactly along a straight line; 0.0 means no linear relation.
pub fn impact_score(values: &[Option<f64>], ranks: &[Option<f64>]) -> Result<f64, StatsError> {
    if values.len() != ranks.len() {
        return Err(StatsError::LengthMismatch { left: values.len(), right: ranks.len() });
    }
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(ranks)
        .filter_map(|(v, r)| Some(((*v)?, (*r)?)))
        .collect();
    if pairs.len() < 3 {
        return Err(StatsError::TooFewValues { needed: 3, got: pairs.len() });
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance { side: "metric" });
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance { side: "rank" });
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r * r)
}

/// One row of the impact table: either a scored metric or an excluded
/// one with the reason it was left out.
#[derive(Clone, Debug)]
pub struct ImpactRow {
    pub metric: MetricId,
    pub log_applied: bool,
    /// Shift used inside the log; 0 when no log was applied.
    pub shift: f64,
    pub impact: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ImpactTable {
    /// Scored rows sorted by impact descending, then the excluded rows
    /// in registry order.
    pub rows: Vec<ImpactRow>,
}

impl ImpactTable {
    pub fn scored(&self) -> impl Iterator<Item = &ImpactRow> {
        self.rows.iter().filter(|r| r.impact.is_some())
    }

    pub fn excluded(&self) -> impl Iterator<Item = &ImpactRow> {
        self.rows.iter().filter(|r| r.impact.is_none())
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| # | metric | transform | impact |\n|---|---|---|---|\n");
        let mut place = 0usize;
        for row in &self.rows {
            match row.impact {
                Some(score) => {
                    place += 1;
                    let transform = if row.log_applied {
                        if row.shift != 0.0 {
                            format!("log10(v + {})", fmt_f64(row.shift))
                        } else {
                            "log10".to_string()
                        }
                    } else {
                        "none".to_string()
                    };
                    out.push_str(&format!(
                        "| {place} | {} | {transform} | {:.3} |\n",
                        row.metric, score
                    ));
                }
                None => {
                    out.push_str(&format!(
                        "| - | {} | - | excluded: {} |\n",
                        row.metric,
                        row.note.as_deref().unwrap_or("")
                    ));
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,log_applied,shift,impact,note\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.metric,
                row.log_applied,
                fmt_f64(row.shift),
                row.impact.map(fmt_f64).unwrap_or_default(),
                row.note.as_deref().unwrap_or_default()
            ));
        }
        out
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Classifies and scores every metric against the rank column.
/// Per-metric failures (too few values, zero variance) turn into
/// excluded rows instead of failing the whole table.
pub fn impact_table(dataset: &Dataset, opts: &StatsOptions) -> ImpactTable {
    let registry = builtin_registry();
    let ranks: Vec<Option<f64>> = dataset.ranks().into_iter().map(Some).collect();

    let score_one = |descriptor: &MetricDescriptor| -> ImpactRow {
        let id = descriptor.id;
        let values = dataset.metric_values(id);
        let excluded = |note: String| ImpactRow {
            metric: id,
            log_applied: false,
            shift: 0.0,
            impact: None,
            note: Some(note),
        };
        let classification = match classify_distribution(&values, descriptor, opts) {
            Ok(c) => c,
            Err(e) => return excluded(e.to_string()),
        };
        let (transformed, log_applied, shift) = match classification {
            Classification::Excluded(reason) => return excluded(reason.to_string()),
            Classification::Normal => (values, false, 0.0),
            Classification::LogNormalizable { shift } => {
                match shift_log(&values, shift) {
                    Ok(t) => (t, true, shift),
                    Err(e) => return excluded(e.to_string()),
                }
            }
        };
        match impact_score(&transformed, &ranks) {
            Ok(score) => ImpactRow {
                metric: id,
                log_applied,
                shift,
                impact: Some(score),
                note: None,
            },
            Err(e) => excluded(e.to_string()),
        }
    };

    let mut rows = map_descriptors(registry.iter().collect::<Vec<_>>(), score_one);

    rows.sort_by(|a, b| match (a.impact, b.impact) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.metric.index().cmp(&b.metric.index())),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.metric.index().cmp(&b.metric.index()),
    });
    ImpactTable { rows }
}

#[cfg(feature = "parallel")]
fn map_descriptors<F>(descriptors: Vec<&MetricDescriptor>, f: F) -> Vec<ImpactRow>
where
    F: Fn(&MetricDescriptor) -> ImpactRow + Sync,
{
    use rayon::prelude::*;
    descriptors.par_iter().map(|d| f(d)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_descriptors<F>(descriptors: Vec<&MetricDescriptor>, f: F) -> Vec<ImpactRow>
where
    F: Fn(&MetricDescriptor) -> ImpactRow + Sync,
{
    descriptors.iter().map(|d| f(d)).collect()
}

/// CSV of the exact `transformed_value,rank` point pairs the impact
/// score of `metric` was computed from (pairwise-complete, record
/// order). Errors if the metric is excluded from scoring.
pub fn scatter_export(
    dataset: &Dataset,
    metric: MetricId,
    opts: &StatsOptions,
) -> Result<String, StatsError> {
    let registry = builtin_registry();
    let descriptor = registry.descriptor(metric);
    let values = dataset.metric_values(metric);
    let classification = classify_distribution(&values, descriptor, opts)?;
    let transformed = match classification {
        Classification::Excluded(reason) => {
            return Err(StatsError::ExcludedMetric(metric, reason.to_string()))
        }
        Classification::Normal => values,
        Classification::LogNormalizable { shift } => shift_log(&values, shift)?,
    };
    let mut out = String::from("transformed_value,rank\n");
    for (value, record) in transformed.iter().zip(&dataset.records) {
        if let Some(v) = value {
            out.push_str(&format!("{},{}\n", fmt_f64(*v), record.webometric_rank));
        }
    }
    Ok(out)
}
