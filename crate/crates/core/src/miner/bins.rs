//! Equal-width binning and dataset discretization.

use std::collections::BTreeMap;

use super::{Attribute, Item, MinerError, TransactionTable};
use crate::model::{Dataset, MetricId};

/// Bin boundaries for one attribute: `edges[0]` = observed minimum,
/// `edges[k]` = observed maximum. Bin `i` covers `[edges[i],
/// edges[i+1])`; the last bin is closed on the right so the maximum
/// belongs to it.
#[derive(Clone, Debug, PartialEq)]
pub struct BinEdges {
    pub edges: Vec<f64>,
}

impl BinEdges {
    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bin index for `value`, or an out-of-range error. Values equal to
    /// an interior edge fall in the higher bin.
    pub fn bin_of(&self, attr: &Attribute, value: f64) -> Result<u8, MinerError> {
        let min = self.edges[0];
        let max = *self.edges.last().unwrap();
        if !(min..=max).contains(&value) {
            return Err(MinerError::OutOfRange {
                attr: attr.name().to_string(),
                value,
                min,
                max,
            });
        }
        let k = self.bin_count();
        let mut bin = k - 1;
        for i in 0..k {
            if value < self.edges[i + 1] {
                bin = i;
                break;
            }
        }
        Ok(bin as u8)
    }
}

/// Splits the observed range of `values` into `k` equal-width bins:
/// `edges[i] = min + i * (max - min) / k`, with the first and last edge
/// pinned to the exact observed minimum and maximum.
pub fn equal_width_bins(values: &[f64], k: usize) -> Result<BinEdges, MinerError> {
    if k < 2 {
        return Err(MinerError::TooFewBins(k));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if values.len() < 2 || !(min < max) {
        let distinct = if values.is_empty() { 0 } else { 1 };
        return Err(MinerError::DegenerateBins {
            attr: String::new(),
            distinct: if values.len() < 2 { values.len() } else { distinct },
        });
    }
    let width = max - min;
    let mut edges = Vec::with_capacity(k + 1);
    edges.push(min);
    for i in 1..k {
        edges.push(min + width * i as f64 / k as f64);
    }
    edges.push(max);
    Ok(BinEdges { edges })
}

/// Per-attribute bin edges covering the metrics to mine plus the rank
/// column.
#[derive(Clone, Debug, Default)]
pub struct BinningScheme {
    pub bins: BTreeMap<Attribute, BinEdges>,
}

impl BinningScheme {
    pub fn edges(&self, attr: Attribute) -> Option<&BinEdges> {
        self.bins.get(&attr)
    }
}

/// Builds the equal-width scheme for `metrics` plus the rank column from
/// the values observed in `dataset`. A metric with fewer than two
/// distinct present values cannot be binned and fails the whole scheme.
pub fn scheme_for(dataset: &Dataset, metrics: &[MetricId], k: usize) -> Result<BinningScheme, MinerError> {
    if metrics.is_empty() {
        return Err(MinerError::NoMetrics);
    }
    let mut bins = BTreeMap::new();
    for &metric in metrics {
        let attr = Attribute::Metric(metric);
        let values: Vec<f64> = dataset.metric_values(metric).into_iter().flatten().collect();
        let edges = equal_width_bins(&values, k).map_err(|e| named(e, &attr))?;
        bins.insert(attr, edges);
    }
    let ranks = dataset.ranks();
    let edges = equal_width_bins(&ranks, k).map_err(|e| named(e, &Attribute::Rank))?;
    bins.insert(Attribute::Rank, edges);
    Ok(BinningScheme { bins })
}

fn named(e: MinerError, attr: &Attribute) -> MinerError {
    match e {
        MinerError::DegenerateBins { distinct, .. } => MinerError::DegenerateBins {
            attr: attr.name().to_string(),
            distinct,
        },
        other => other,
    }
}

/// Turns each record into a sorted transaction: one item per present
/// metric value plus the rank item. Missing metric values simply leave
/// no item; values outside a scheme's range are an error.
pub fn discretize(
    dataset: &Dataset,
    metrics: &[MetricId],
    scheme: &BinningScheme,
) -> Result<TransactionTable, MinerError> {
    let rank_edges = scheme
        .edges(Attribute::Rank)
        .ok_or_else(|| MinerError::MissingEdges(Attribute::Rank.name().to_string()))?;
    let mut metric_edges = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        let attr = Attribute::Metric(metric);
        let edges = scheme
            .edges(attr)
            .ok_or_else(|| MinerError::MissingEdges(attr.name().to_string()))?;
        metric_edges.push((attr, edges));
    }

    let mut transactions = Vec::with_capacity(dataset.records.len());
    for record in &dataset.records {
        let mut items = Vec::with_capacity(metrics.len() + 1);
        for (attr, edges) in &metric_edges {
            let Attribute::Metric(metric) = attr else { unreachable!() };
            if let Some(value) = record.value(*metric) {
                items.push(Item {
                    attr: *attr,
                    bin: edges.bin_of(attr, value)?,
                });
            }
        }
        items.push(Item {
            attr: Attribute::Rank,
            bin: rank_edges.bin_of(&Attribute::Rank, record.webometric_rank as f64)?,
        });
        items.sort();
        transactions.push(items);
    }
    Ok(TransactionTable::new(transactions))
}
