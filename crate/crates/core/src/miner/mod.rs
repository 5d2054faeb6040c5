//! Association-rule mining over discretized metrics.
//!
//! Records become transactions: one item per present metric (the item is
//! the metric plus the equal-width bin its value falls in) and one item
//! for the rank bin. Apriori finds every frequent itemset, and rules are
//! read off the itemsets that contain the rank item: antecedent = the
//! metric items, consequent = the rank bin. Counts are exact, never
//! estimated, so confidence and support percentages can be traced back
//! to integer record counts (and, inversely, published percentages can
//! be traced back to counts with [`reconstruct_counts`]).

mod apriori;
mod bins;
mod features;
mod reconstruct;
mod rules;

pub use apriori::{mine_frequent, mine_frequent_sequential, Itemset, TransactionTable};
pub use bins::{discretize, equal_width_bins, scheme_for, BinEdges, BinningScheme};
pub use features::{drop_binary_metrics, select_features};
pub use reconstruct::reconstruct_counts;
pub use rules::{
    derive_rules, render_condition, render_rule, rules_to_csv, rules_to_markdown, top_rules,
    RankKey, Rule,
};

use std::fmt;

use thiserror::Error;

use crate::model::MetricId;

/// A column that can appear in a transaction: one of the metrics, or the
/// rank column itself. Rank orders last so consequents sort after
/// antecedent items.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Attribute {
    Metric(MetricId),
    Rank,
}

impl Attribute {
    pub fn name(&self) -> &'static str {
        match self {
            Attribute::Metric(m) => m.as_str(),
            Attribute::Rank => "webometric_rank",
        }
    }

    fn order(&self) -> usize {
        match self {
            Attribute::Metric(m) => m.index(),
            Attribute::Rank => usize::MAX,
        }
    }
}

impl Ord for Attribute {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order().cmp(&other.order())
    }
}

impl PartialOrd for Attribute {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One (attribute, bin) pair. Items order by attribute, then bin, which
/// fixes the canonical order of itemsets and rule output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Item {
    pub attr: Attribute,
    pub bin: u8,
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.attr, self.bin)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinerError {
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("{attr}: need at least 2 distinct values to bin, got {distinct}")]
    DegenerateBins { attr: String, distinct: usize },
    #[error("{attr}: value {value} is outside the binning range [{min}, {max}]")]
    OutOfRange { attr: String, value: f64, min: f64, max: f64 },
    #[error("binning scheme has no edges for {0}")]
    MissingEdges(String),
    #[error("no metrics to mine")]
    NoMetrics,
    #[error("maximum itemset size must be at least 2, got {0}")]
    BadMaxLen(usize),
}
