//! Rules out of frequent itemsets, ranking, and report rendering.

use std::collections::HashMap;

use super::{Attribute, BinningScheme, Item, Itemset};

/// An association rule `antecedent => consequent` where the consequent
/// is always a rank bin. Counts are exact: `match_count` transactions
/// contain antecedent and consequent, `antecedent_count` contain the
/// antecedent, out of `n` transactions total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: Vec<Item>,
    pub consequent: Item,
    pub match_count: u32,
    pub antecedent_count: u32,
    pub n: u32,
}

impl Rule {
    /// Share of antecedent transactions that also hit the rank bin.
    pub fn confidence_pct(&self) -> f64 {
        100.0 * self.match_count as f64 / self.antecedent_count as f64
    }

    /// Share of all transactions matching the whole rule.
    pub fn support_pct(&self) -> f64 {
        100.0 * self.match_count as f64 / self.n as f64
    }
}

/// Reads rules off the frequent itemsets: every itemset holding the
/// rank item plus at least one metric item yields one candidate rule,
/// kept when its confidence reaches `min_confidence_pct`. Antecedent
/// counts come from the corresponding rank-free itemset, which Apriori's
/// downward closure guarantees is present.
pub fn derive_rules(itemsets: &[Itemset], n: usize, min_confidence_pct: f64) -> Vec<Rule> {
    let counts: HashMap<&[Item], u32> = itemsets
        .iter()
        .map(|s| (s.items.as_slice(), s.count))
        .collect();

    let mut rules = Vec::new();
    for itemset in itemsets {
        if itemset.items.len() < 2 {
            continue;
        }
        let Some(rank_pos) = itemset.items.iter().position(|i| i.attr == Attribute::Rank) else {
            continue;
        };
        // Rank sorts last, but don't rely on it.
        let consequent = itemset.items[rank_pos];
        let antecedent: Vec<Item> = itemset
            .items
            .iter()
            .copied()
            .filter(|i| i.attr != Attribute::Rank)
            .collect();
        let Some(&antecedent_count) = counts.get(antecedent.as_slice()) else {
            // Unreachable for well-formed miner output.
            continue;
        };
        let rule = Rule {
            antecedent,
            consequent,
            match_count: itemset.count,
            antecedent_count,
            n: n as u32,
        };
        if 100.0 * rule.match_count as f64 >= min_confidence_pct * rule.antecedent_count as f64 {
            rules.push(rule);
        }
    }
    rules.sort_by(|a, b| {
        a.antecedent
            .cmp(&b.antecedent)
            .then(a.consequent.cmp(&b.consequent))
    });
    rules
}

/// Which percentage a rule list is ranked by.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RankKey {
    Confidence,
    Support,
}

/// The `n` best rules by the chosen key, descending. Ties break on the
/// other key (descending), then shorter antecedents first, then
/// lexicographic item order, so equal inputs always produce the same
/// list.
pub fn top_rules(rules: &[Rule], key: RankKey, n: usize) -> Vec<Rule> {
    let mut sorted = rules.to_vec();
    sorted.sort_by(|a, b| {
        let (ka, kb, oa, ob) = match key {
            RankKey::Confidence => {
                (a.confidence_pct(), b.confidence_pct(), a.support_pct(), b.support_pct())
            }
            RankKey::Support => {
                (a.support_pct(), b.support_pct(), a.confidence_pct(), b.confidence_pct())
            }
        };
        kb.total_cmp(&ka)
            .then(ob.total_cmp(&oa))
            .then(a.antecedent.len().cmp(&b.antecedent.len()))
            .then(a.antecedent.cmp(&b.antecedent))
            .then(a.consequent.cmp(&b.consequent))
    });
    sorted.truncate(n);
    sorted
}

/// Renders one item as the condition its bin stands for: the first bin
/// prints as `attr <= upper`, the last as `attr > lower`, interior bins
/// as `lower <= attr < upper`.
pub fn render_condition(item: &Item, scheme: &BinningScheme) -> String {
    let Some(edges) = scheme.edges(item.attr) else {
        return format!("{}", item);
    };
    let k = edges.bin_count();
    let bin = item.bin as usize;
    let name = item.attr.name();
    if bin == 0 {
        format!("{name} <= {}", fmt_edge(edges.edges[1]))
    } else if bin == k - 1 {
        format!("{name} > {}", fmt_edge(edges.edges[k - 1]))
    } else {
        format!(
            "{} <= {name} < {}",
            fmt_edge(edges.edges[bin]),
            fmt_edge(edges.edges[bin + 1])
        )
    }
}

fn fmt_edge(v: f64) -> String {
    format!("{v}")
}

/// `cond AND cond ... => rank cond`.
pub fn render_rule(rule: &Rule, scheme: &BinningScheme) -> String {
    let antecedent = rule
        .antecedent
        .iter()
        .map(|i| render_condition(i, scheme))
        .collect::<Vec<_>>()
        .join(" AND ");
    format!("{antecedent} => {}", render_condition(&rule.consequent, scheme))
}

/// CSV with one row per rule:
/// `antecedent,consequent,confidence_pct,support_pct,match_count,antecedent_count,n`.
/// Percentages carry two decimals. Contains nothing run-dependent, so
/// identical inputs serialize byte-identically.
pub fn rules_to_csv(rules: &[Rule], scheme: &BinningScheme) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "antecedent",
            "consequent",
            "confidence_pct",
            "support_pct",
            "match_count",
            "antecedent_count",
            "n",
        ])
        .expect("write to Vec cannot fail");
    for rule in rules {
        let antecedent = rule
            .antecedent
            .iter()
            .map(|i| render_condition(i, scheme))
            .collect::<Vec<_>>()
            .join(" AND ");
        writer
            .write_record([
                antecedent,
                render_condition(&rule.consequent, scheme),
                format!("{:.2}", rule.confidence_pct()),
                format!("{:.2}", rule.support_pct()),
                rule.match_count.to_string(),
                rule.antecedent_count.to_string(),
                rule.n.to_string(),
            ])
            .expect("write to Vec cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("flush to Vec cannot fail"))
        .expect("csv output is utf-8")
}

/// Markdown table of the given rules.
pub fn rules_to_markdown(rules: &[Rule], scheme: &BinningScheme) -> String {
    let mut out = String::from(
        "| # | rule | confidence % | support % | matches | antecedent n |\n|---|---|---|---|---|---|\n",
    );
    for (i, rule) in rules.iter().enumerate() {
        out.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {} | {} |\n",
            i + 1,
            render_rule(rule, scheme),
            rule.confidence_pct(),
            rule.support_pct(),
            rule.match_count,
            rule.antecedent_count,
        ));
    }
    out
}
