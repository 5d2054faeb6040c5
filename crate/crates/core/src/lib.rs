//! Core library of `seo-rankminer`: everything that does not touch the
//! network lives here.
//!
//! The pipeline this crate implements:
//!
//! 1. [`model`] defines the 38 site metrics, the dataset shape
//!    (sites x metrics with a Webometrics-style rank column) and its CSV
//!    serialization.
//! 2. [`audit`] parses HTML tolerantly and extracts the on-page metrics
//!    plus markup/CSS lint counts.
//! 3. [`providers`] merges measured values with third-party metric
//!    sources (fixture-file backed by default) into one record per site.
//! 4. [`stats`] screens each metric's distribution, applies a base-10
//!    log where that makes a metric usable, and scores every metric by
//!    how much of the rank variance it explains (squared Pearson
//!    correlation against the rank column).
//! 5. [`miner`] selects the strongest metrics, discretizes them into
//!    equal-width bins and runs Apriori association-rule mining with the
//!    rank bin as the fixed consequent.
//!
//! [`replay`] builds the bundled 75-site synthetic dataset that the test
//! suite and the README examples run the full pipeline against.
//!
//! With the default `parallel` feature the support-counting inner loop of
//! the miner and the per-metric scoring loop fan out through rayon; the
//! sequential fallback is always compiled and used when the feature is
//! disabled.

pub mod audit;
pub mod miner;
pub mod model;
pub mod providers;
pub mod replay;
pub mod stats;
