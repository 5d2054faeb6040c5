//! Home-page auditing: tolerant HTML parsing, on-page metric
//! extraction, and markup/stylesheet linting.
//!
//! The parser never fails: broken markup degrades into a best-effort
//! tree plus tag-balance counts that the lint rules pick up. All
//! extraction semantics live here so the same byte stream always yields
//! the same numbers, whatever server it came from.

mod css;
mod html;
mod lint;
mod onpage;

pub use css::{lint_css, CssLint};
pub use html::{parse_html, Document, ElementRef, TagBalance};
pub use lint::{lint_markup, LintItem, LintReport, Severity, LINT_RULES_VERSION};
pub use onpage::{
    extract_links, extract_onpage, extract_stylesheets, extract_subresources, OnPageMetrics,
    DEFAULT_SOCIAL_DOMAINS,
};
