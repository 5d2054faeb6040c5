//! One-site measurement shared by the audit and collect commands.
//!
//! A site audit fetches the home page, measures everything the markup
//! and transfer expose, then runs the network probes. Probe failures
//! leave their metric slots empty instead of sinking the whole site;
//! only an unreachable home page is a hard failure.

use std::collections::BTreeMap;

use seo_rankminer_core::audit::{
    extract_links, extract_onpage, extract_stylesheets, extract_subresources, lint_css,
    lint_markup, parse_html,
};
use seo_rankminer_core::model::MetricId;
use seo_rankminer_net::{fetch_metrics, FetchError, Fetcher};
use url::Url;

#[derive(Debug, Clone)]
pub struct SiteAudit {
    pub final_url: String,
    pub measured: BTreeMap<MetricId, f64>,
    /// Probes that failed, with the reason; their slots stay missing.
    pub probe_failures: Vec<(MetricId, String)>,
}

fn flag(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Measure every natively observable metric for one page.
pub fn audit_site(
    fetcher: &Fetcher,
    url: &Url,
    social_domains: &[String],
    stylesheet_cap: usize,
) -> Result<SiteAudit, FetchError> {
    let home = fetcher.fetch_page(url.as_str())?;
    let page_url = Url::parse(&home.final_url).unwrap_or_else(|_| url.clone());

    let doc = parse_html(&home.body_text());
    let onpage = extract_onpage(&doc, &page_url, social_domains);
    let links = extract_links(&doc, &page_url);
    let subresources = extract_subresources(&doc, &page_url);
    let markup = lint_markup(&doc);

    let mut css_errors = 0u32;
    let mut css_warnings = 0u32;
    for element in doc.elements().filter(|e| e.name() == "style") {
        let lint = lint_css(&element.text());
        css_errors += lint.errors;
        css_warnings += lint.warnings;
    }
    for sheet in extract_stylesheets(&doc, &page_url).iter().take(stylesheet_cap) {
        let Ok(response) = fetcher.fetch_page(sheet.as_str()) else {
            continue;
        };
        if response.status == 200 {
            let lint = lint_css(&response.body_text());
            css_errors += lint.errors;
            css_warnings += lint.warnings;
        }
    }

    let mut measured = onpage.to_metric_values();
    measured.extend(fetch_metrics(&home, &subresources).to_metric_values());
    measured.insert(MetricId::HtmlErrors, f64::from(markup.errors));
    measured.insert(MetricId::HtmlWarnings, f64::from(markup.warnings));
    measured.insert(MetricId::CssErrors, f64::from(css_errors));
    measured.insert(MetricId::CssWarnings, f64::from(css_warnings));

    let mut probe_failures = Vec::new();
    let origin = page_url.join("/").unwrap_or_else(|_| page_url.clone());
    match fetcher.check_robots(origin.as_str()) {
        Ok(present) => {
            measured.insert(MetricId::RobotsTxt, flag(present));
        }
        Err(e) => probe_failures.push((MetricId::RobotsTxt, e.to_string())),
    }
    match fetcher.check_sitemap(origin.as_str()) {
        Ok(present) => {
            measured.insert(MetricId::Sitemap, flag(present));
        }
        Err(e) => probe_failures.push((MetricId::Sitemap, e.to_string())),
    }
    match fetcher.check_custom_404(origin.as_str()) {
        Ok(proper) => {
            measured.insert(MetricId::Page404, flag(proper));
        }
        Err(e) => probe_failures.push((MetricId::Page404, e.to_string())),
    }
    let probe = fetcher.probe_broken_links(&links);
    measured.insert(MetricId::BrokenLinks, probe.broken as f64);

    Ok(SiteAudit {
        final_url: home.final_url,
        measured,
        probe_failures,
    })
}
