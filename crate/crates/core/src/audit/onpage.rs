//! On-page metric extraction from a parsed document.
//!
//! Everything here is a pure function of the document plus the page
//! URL; no network access. Link counting resolves every anchor against
//! the effective base URL and splits internal from external by host.

use std::collections::BTreeMap;

use url::Url;

use crate::model::MetricId;

use super::html::Document;

/// Hosts treated as social platforms when counting profile links.
pub const DEFAULT_SOCIAL_DOMAINS: [&str; 6] = [
    "facebook.com",
    "twitter.com",
    "x.com",
    "instagram.com",
    "linkedin.com",
    "youtube.com",
];

/// Metrics measurable from markup alone.
#[derive(Debug, Clone, PartialEq)]
pub struct OnPageMetrics {
    pub h1_count: u32,
    pub img_without_alt: u32,
    pub iframe_count: u32,
    pub embed_object_count: u32,
    pub title_chars: u32,
    pub meta_description_chars: u32,
    pub doctype: bool,
    pub encoding_declared: bool,
    pub language_english: bool,
    pub responsive: bool,
    pub social_media: u32,
    pub total_links: u32,
    pub internal_links: u32,
    pub external_links: u32,
}

impl OnPageMetrics {
    /// Flatten into dataset cells. Booleans become 0/1.
    pub fn to_metric_values(&self) -> BTreeMap<MetricId, f64> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        BTreeMap::from([
            (MetricId::H1Count, f64::from(self.h1_count)),
            (MetricId::ImgWithoutAlt, f64::from(self.img_without_alt)),
            (MetricId::IframeCount, f64::from(self.iframe_count)),
            (
                MetricId::EmbedObjectCount,
                f64::from(self.embed_object_count),
            ),
            (MetricId::TitleChars, f64::from(self.title_chars)),
            (
                MetricId::MetaDescriptionChars,
                f64::from(self.meta_description_chars),
            ),
            (MetricId::Doctype, flag(self.doctype)),
            (MetricId::EncodingDeclared, flag(self.encoding_declared)),
            (MetricId::LanguageEnglish, flag(self.language_english)),
            (MetricId::Responsive, flag(self.responsive)),
            (MetricId::SocialMedia, f64::from(self.social_media)),
            (MetricId::TotalLinks, f64::from(self.total_links)),
            (MetricId::InternalLinks, f64::from(self.internal_links)),
            (MetricId::ExternalLinks, f64::from(self.external_links)),
        ])
    }
}

/// Effective base for resolving relative references: the `<base href>`
/// if present and itself resolvable, else the page URL.
fn effective_base(doc: &Document, page_url: &Url) -> Url {
    doc.base_href()
        .and_then(|href| page_url.join(href).ok())
        .filter(|u| matches!(u.scheme(), "http" | "https"))
        .unwrap_or_else(|| page_url.clone())
}

/// Resolve one href/src to a countable http(s) URL. Fragments, empty
/// strings and non-web schemes (javascript:, mailto:, tel:, data:)
/// yield nothing.
fn resolve_ref(raw: &str, base: &Url) -> Option<Url> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return None;
    }
    let url = base.join(trimmed).ok()?;
    match url.scheme() {
        "http" | "https" => Some(url),
        _ => None,
    }
}

/// Lowercased host with a single leading `www.` removed.
fn normalized_host(url: &Url) -> Option<String> {
    let host = url.host_str()?.to_ascii_lowercase();
    Some(
        host.strip_prefix("www.")
            .map(str::to_string)
            .unwrap_or(host),
    )
}

fn same_site(target: &str, page: &str) -> bool {
    target == page || target.ends_with(&format!(".{page}"))
}

fn host_matches_domain(host: &str, domain: &str) -> bool {
    let d = domain.to_ascii_lowercase();
    host == d || host.ends_with(&format!(".{d}"))
}

/// Anchor targets in document order, duplicates preserved.
pub fn extract_links(doc: &Document, page_url: &Url) -> Vec<Url> {
    let base = effective_base(doc, page_url);
    doc.elements()
        .filter(|e| e.name() == "a")
        .filter_map(|e| e.attr("href"))
        .filter_map(|href| resolve_ref(href, &base))
        .collect()
}

/// Linked stylesheet URLs in document order, duplicates preserved.
pub fn extract_stylesheets(doc: &Document, page_url: &Url) -> Vec<Url> {
    let base = effective_base(doc, page_url);
    doc.elements()
        .filter(|e| e.name() == "link")
        .filter(|e| {
            e.attr("rel")
                .unwrap_or("")
                .split_ascii_whitespace()
                .any(|r| r.eq_ignore_ascii_case("stylesheet"))
        })
        .filter_map(|e| e.attr("href"))
        .filter_map(|href| resolve_ref(href, &base))
        .collect()
}

/// Embedded resources a browser would request while rendering:
/// image/script/iframe sources and linked stylesheets, in document
/// order, duplicates preserved.
pub fn extract_subresources(doc: &Document, page_url: &Url) -> Vec<Url> {
    let base = effective_base(doc, page_url);
    let mut out = Vec::new();
    for e in doc.elements() {
        let raw = match e.name() {
            "img" | "script" | "iframe" => e.attr("src"),
            "link" => {
                let rel = e.attr("rel").unwrap_or("");
                if rel
                    .split_ascii_whitespace()
                    .any(|r| r.eq_ignore_ascii_case("stylesheet"))
                {
                    e.attr("href")
                } else {
                    None
                }
            }
            _ => None,
        };
        if let Some(raw) = raw {
            if let Some(url) = resolve_ref(raw, &base) {
                out.push(url);
            }
        }
    }
    out
}

/// Measure every on-page metric in one pass over the document.
pub fn extract_onpage(doc: &Document, page_url: &Url, social_domains: &[String]) -> OnPageMetrics {
    let mut h1_count = 0u32;
    let mut img_without_alt = 0u32;
    let mut iframe_count = 0u32;
    let mut embed_object_count = 0u32;
    let mut title_chars = None;
    let mut meta_description_chars = None;
    let mut language_english = false;
    let mut responsive = false;
    let mut saw_html = false;

    for e in doc.elements() {
        match e.name() {
            "h1" => h1_count += 1,
            "img" => {
                // alt="" is a deliberate decorative marker, so only a
                // fully absent attribute counts against the page.
                if !e.has_attr("alt") {
                    img_without_alt += 1;
                }
            }
            "iframe" => iframe_count += 1,
            "embed" | "object" => embed_object_count += 1,
            "title" => {
                if title_chars.is_none() {
                    title_chars = Some(e.text().trim().chars().count() as u32);
                }
            }
            "meta" => {
                let name = e.attr("name").unwrap_or("");
                if name.eq_ignore_ascii_case("description") && meta_description_chars.is_none() {
                    let content = e.attr("content").unwrap_or("");
                    meta_description_chars = Some(content.trim().chars().count() as u32);
                }
                if name.eq_ignore_ascii_case("viewport") {
                    responsive = true;
                }
            }
            "html" => {
                if !saw_html {
                    saw_html = true;
                    if let Some(lang) = e.attr("lang") {
                        language_english = lang.trim().to_ascii_lowercase().starts_with("en");
                    }
                }
            }
            _ => {}
        }
    }

    let links = extract_links(doc, page_url);
    let page_host = normalized_host(page_url).unwrap_or_default();
    let mut internal = 0u32;
    let mut external = 0u32;
    let mut social = 0u32;
    for link in &links {
        let host = normalized_host(link).unwrap_or_default();
        if same_site(&host, &page_host) {
            internal += 1;
        } else {
            external += 1;
        }
        if social_domains.iter().any(|d| host_matches_domain(&host, d)) {
            social += 1;
        }
    }

    OnPageMetrics {
        h1_count,
        img_without_alt,
        iframe_count,
        embed_object_count,
        title_chars: title_chars.unwrap_or(0),
        meta_description_chars: meta_description_chars.unwrap_or(0),
        doctype: doc.doctype().is_some(),
        encoding_declared: doc.declared_encoding().is_some(),
        language_english,
        responsive,
        social_media: social,
        total_links: links.len() as u32,
        internal_links: internal,
        external_links: external,
    }
}
