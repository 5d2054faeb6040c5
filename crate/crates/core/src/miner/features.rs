//! Feature selection ahead of mining.

use crate::model::{Dataset, MetricId};
use crate::stats::{impact_table, StatsOptions};

/// The strongest metrics to mine on: ranks the scorable metrics by
/// impact descending, keeps the top `k` (or all of them when fewer
/// scored), then drops any whose observed values are plain 0/1 flags in
/// this dataset, since a two-level metric adds nothing beyond its rank
/// split.
pub fn select_features(dataset: &Dataset, k: usize, opts: &StatsOptions) -> Vec<MetricId> {
    let table = impact_table(dataset, opts);
    let ranked: Vec<MetricId> = table.scored().map(|row| row.metric).take(k).collect();
    drop_binary_metrics(dataset, &ranked)
}

/// Filters out metrics whose present values in `dataset` are all 0 or 1.
/// Metrics with no present values are kept untouched.
pub fn drop_binary_metrics(dataset: &Dataset, metrics: &[MetricId]) -> Vec<MetricId> {
    metrics
        .iter()
        .copied()
        .filter(|&metric| {
            let mut any = false;
            let binary = dataset
                .metric_values(metric)
                .into_iter()
                .flatten()
                .all(|v| {
                    any = true;
                    v == 0.0 || v == 1.0
                });
            !(any && binary)
        })
        .collect()
}
