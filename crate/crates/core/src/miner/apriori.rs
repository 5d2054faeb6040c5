//! Level-wise Apriori frequent-itemset mining with exact counts.

use std::collections::{BTreeMap, BTreeSet};

use super::Item;

/// Discretized records. Each transaction is sorted and holds at most one
/// item per attribute.
#[derive(Clone, Debug, Default)]
pub struct TransactionTable {
    pub transactions: Vec<Vec<Item>>,
}

impl TransactionTable {
    pub fn new(transactions: Vec<Vec<Item>>) -> Self {
        TransactionTable { transactions }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }
}

/// A frequent itemset with its exact transaction count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Itemset {
    /// Sorted by attribute, then bin.
    pub items: Vec<Item>,
    pub count: u32,
}

impl Itemset {
    pub fn support_pct(&self, n: usize) -> f64 {
        100.0 * self.count as f64 / n as f64
    }
}

/// `needle` as a subset of the sorted transaction `haystack`.
fn contains_sorted(haystack: &[Item], needle: &[Item]) -> bool {
    let mut it = haystack.iter();
    'outer: for want in needle {
        for have in it.by_ref() {
            if have == want {
                continue 'outer;
            }
            if have > want {
                return false;
            }
        }
        return false;
    }
    true
}

fn count_one(transactions: &[Vec<Item>], candidate: &[Item]) -> u32 {
    transactions
        .iter()
        .filter(|t| contains_sorted(t, candidate))
        .count() as u32
}

#[cfg(feature = "parallel")]
fn count_candidates(transactions: &[Vec<Item>], candidates: &[Vec<Item>]) -> Vec<u32> {
    use rayon::prelude::*;
    candidates
        .par_iter()
        .map(|c| count_one(transactions, c))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn count_candidates(transactions: &[Vec<Item>], candidates: &[Vec<Item>]) -> Vec<u32> {
    candidates.iter().map(|c| count_one(transactions, c)).collect()
}

fn count_candidates_sequential(transactions: &[Vec<Item>], candidates: &[Vec<Item>]) -> Vec<u32> {
    candidates.iter().map(|c| count_one(transactions, c)).collect()
}

/// support(count) >= min_support_pct, evaluated on exact percentages.
fn frequent(count: u32, n: usize, min_support_pct: f64) -> bool {
    100.0 * count as f64 >= min_support_pct * n as f64
}

/// Candidates of size k+1 from the frequent sets of size k: join pairs
/// sharing the first k-1 items (skipping pairs that would put two bins
/// of the same attribute in one set), then prune candidates with an
/// infrequent k-subset.
fn next_candidates(level: &[Itemset]) -> Vec<Vec<Item>> {
    let frequent_keys: BTreeSet<&[Item]> = level.iter().map(|s| s.items.as_slice()).collect();
    let mut candidates = Vec::new();
    for (i, a) in level.iter().enumerate() {
        for b in &level[i + 1..] {
            let k = a.items.len();
            if a.items[..k - 1] != b.items[..k - 1] {
                // Levels are sorted, so once prefixes diverge no later
                // set shares this one's prefix.
                break;
            }
            let last_a = a.items[k - 1];
            let last_b = b.items[k - 1];
            if last_a.attr == last_b.attr {
                continue;
            }
            let mut candidate = a.items.clone();
            candidate.push(last_b);
            // Join keeps order because last_b > last_a in sorted levels.
            let mut holdout = Vec::with_capacity(k);
            let pruned = (0..candidate.len() - 2).any(|skip| {
                holdout.clear();
                holdout.extend(candidate.iter().enumerate().filter_map(|(j, item)| {
                    (j != skip).then_some(*item)
                }));
                !frequent_keys.contains(holdout.as_slice())
            });
            if !pruned {
                candidates.push(candidate);
            }
        }
    }
    candidates
}

fn mine_with(
    table: &TransactionTable,
    min_support_pct: f64,
    max_len: usize,
    counter: fn(&[Vec<Item>], &[Vec<Item>]) -> Vec<u32>,
) -> Vec<Itemset> {
    let n = table.len();
    if n == 0 || max_len == 0 {
        return Vec::new();
    }

    // Level 1 from a single pass.
    let mut singles: BTreeMap<Item, u32> = BTreeMap::new();
    for transaction in &table.transactions {
        for &item in transaction {
            *singles.entry(item).or_insert(0) += 1;
        }
    }
    let mut level: Vec<Itemset> = singles
        .into_iter()
        .filter(|&(_, count)| frequent(count, n, min_support_pct))
        .map(|(item, count)| Itemset { items: vec![item], count })
        .collect();

    let mut all = Vec::new();
    while !level.is_empty() {
        all.extend(level.iter().cloned());
        if level[0].items.len() >= max_len {
            break;
        }
        let candidates = next_candidates(&level);
        if candidates.is_empty() {
            break;
        }
        let counts = counter(&table.transactions, &candidates);
        level = candidates
            .into_iter()
            .zip(counts)
            .filter(|&(_, count)| frequent(count, n, min_support_pct))
            .map(|(items, count)| Itemset { items, count })
            .collect();
    }
    all.sort_by(|a, b| a.items.cmp(&b.items));
    all
}

/// All itemsets of up to `max_len` items whose support is at least
/// `min_support_pct` percent of the transactions, with exact counts,
/// sorted lexicographically by item. Support counting fans out through
/// rayon when the `parallel` feature is enabled.
pub fn mine_frequent(table: &TransactionTable, min_support_pct: f64, max_len: usize) -> Vec<Itemset> {
    mine_with(table, min_support_pct, max_len, count_candidates)
}

/// Single-threaded reference path of [`mine_frequent`]. Same results;
/// used as the fallback when the `parallel` feature is off and as the
/// baseline in the benchmark suite.
pub fn mine_frequent_sequential(
    table: &TransactionTable,
    min_support_pct: f64,
    max_len: usize,
) -> Vec<Itemset> {
    mine_with(table, min_support_pct, max_len, count_candidates_sequential)
}
