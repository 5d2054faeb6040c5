//! Support library for the `seo-rankminer` binary: run configuration
//! and the per-site measurement pipeline.

pub mod config;
pub mod site;
