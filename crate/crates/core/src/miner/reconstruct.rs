//! Recovering integer counts from published confidence/support
//! percentages.

/// Finds the `(match_count, antecedent_count)` pair behind a rule that
/// was published only as rounded percentages over `n` records.
///
/// Searches every `1 <= m <= a <= n` and keeps the pair whose exact
/// percentages `100*m/a` (confidence) and `100*m/n` (support) are both
/// within 0.01 of the published ones, minimizing the larger of the two
/// deviations. Returns `None` when no pair fits; ties keep the smallest
/// `a`, then `m`.
pub fn reconstruct_counts(confidence_pct: f64, support_pct: f64, n: u32) -> Option<(u32, u32)> {
    const TOLERANCE: f64 = 0.01;
    let mut best: Option<(f64, u32, u32)> = None;
    for a in 1..=n {
        for m in 1..=a {
            let confidence = 100.0 * m as f64 / a as f64;
            let support = 100.0 * m as f64 / n as f64;
            let err = (confidence - confidence_pct)
                .abs()
                .max((support - support_pct).abs());
            if err <= TOLERANCE && best.map_or(true, |(e, _, _)| err < e) {
                best = Some((err, m, a));
            }
        }
    }
    best.map(|(_, m, a)| (m, a))
}
