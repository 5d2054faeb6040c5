//! Markup lint rules.
//!
//! Versioned so downstream data stays comparable: counts produced by
//! the same rules version are comparable across runs. Errors are
//! structural defects (unclosed or misnested tags, duplicate ids,
//! unknown elements); warnings are quality issues (images without alt,
//! undeclared document language, deprecated presentational tags).

use std::collections::BTreeMap;

use super::html::Document;

/// Bump when a rule is added, removed, or changes what it counts.
pub const LINT_RULES_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One finding. Aggregate rules may cover several occurrences with a
/// single item; the report counters stay per-occurrence.
#[derive(Debug, Clone)]
pub struct LintItem {
    pub rule: &'static str,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LintReport {
    pub errors: u32,
    pub warnings: u32,
    pub items: Vec<LintItem>,
}

impl LintReport {
    fn error(&mut self, rule: &'static str, count: u32, message: String) {
        if count == 0 {
            return;
        }
        self.errors += count;
        self.items.push(LintItem {
            rule,
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, rule: &'static str, count: u32, message: String) {
        if count == 0 {
            return;
        }
        self.warnings += count;
        self.items.push(LintItem {
            rule,
            severity: Severity::Warning,
            message,
        });
    }
}

/// Apply every rule to a parsed document.
pub fn lint_markup(doc: &Document) -> LintReport {
    let mut report = LintReport::default();

    let balance = doc.tag_balance();
    report.error(
        "unclosed-tag",
        balance.unclosed,
        format!("{} element(s) still open at end of input", balance.unclosed),
    );
    report.error(
        "misnested-tag",
        balance.misnested,
        format!(
            "{} end tag(s) closed nothing or forced other tags shut",
            balance.misnested
        ),
    );

    let mut id_counts: BTreeMap<&str, u32> = BTreeMap::new();
    for e in doc.elements() {
        if let Some(id) = e.attr("id") {
            let id = id.trim();
            if !id.is_empty() {
                *id_counts.entry(id).or_insert(0) += 1;
            }
        }
    }
    for (id, count) in id_counts {
        if count > 1 {
            report.error(
                "duplicate-id",
                count - 1,
                format!("id `{id}` used {count} times"),
            );
        }
    }

    let mut unknown: BTreeMap<&str, u32> = BTreeMap::new();
    let mut deprecated: BTreeMap<&str, u32> = BTreeMap::new();
    let mut img_missing_alt = 0u32;
    for e in doc.elements() {
        let name = e.name();
        if DEPRECATED_ELEMENTS.contains(&name) {
            *deprecated.entry(name).or_insert(0) += 1;
        } else if !KNOWN_ELEMENTS.contains(&name) && !name.contains('-') {
            // Hyphenated names are custom elements, which are valid.
            *unknown.entry(name).or_insert(0) += 1;
        }
        if name == "img" && !e.has_attr("alt") {
            img_missing_alt += 1;
        }
    }
    for (name, count) in unknown {
        report.error(
            "unknown-element",
            count,
            format!("unknown element `<{name}>` ({count} occurrence(s))"),
        );
    }

    report.warning(
        "img-missing-alt",
        img_missing_alt,
        format!("{img_missing_alt} image(s) without alt attribute"),
    );

    let lang_declared = doc
        .first("html")
        .and_then(|html| html.attr("lang"))
        .map(|l| !l.trim().is_empty())
        .unwrap_or(false);
    if !lang_declared {
        report.warning(
            "document-language",
            1,
            "document language not declared on <html>".to_string(),
        );
    }

    for (name, count) in deprecated {
        report.warning(
            "deprecated-element",
            count,
            format!("deprecated element `<{name}>` ({count} occurrence(s))"),
        );
    }

    report
}

/// Presentational elements dropped from the living standard.
const DEPRECATED_ELEMENTS: &[&str] = &[
    "acronym", "applet", "basefont", "big", "blink", "center", "dir", "font", "frame", "frameset",
    "isindex", "marquee", "noframes", "spacer", "strike", "tt",
];

/// Element names that parse without complaint, lowercase. Covers the
/// living standard plus common embedded SVG/MathML names.
const KNOWN_ELEMENTS: &[&str] = &[
    "#document",
    "a",
    "abbr",
    "address",
    "area",
    "article",
    "aside",
    "audio",
    "b",
    "base",
    "bdi",
    "bdo",
    "blockquote",
    "body",
    "br",
    "button",
    "canvas",
    "caption",
    "circle",
    "cite",
    "clippath",
    "code",
    "col",
    "colgroup",
    "data",
    "datalist",
    "dd",
    "defs",
    "del",
    "details",
    "dfn",
    "dialog",
    "div",
    "dl",
    "dt",
    "ellipse",
    "em",
    "embed",
    "fieldset",
    "figcaption",
    "figure",
    "filter",
    "footer",
    "foreignobject",
    "form",
    "g",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "head",
    "header",
    "hgroup",
    "hr",
    "html",
    "i",
    "iframe",
    "image",
    "img",
    "input",
    "ins",
    "kbd",
    "label",
    "legend",
    "li",
    "line",
    "lineargradient",
    "link",
    "main",
    "map",
    "mark",
    "marker",
    "mask",
    "math",
    "menu",
    "meta",
    "meter",
    "nav",
    "noscript",
    "object",
    "ol",
    "optgroup",
    "option",
    "output",
    "p",
    "param",
    "path",
    "pattern",
    "picture",
    "polygon",
    "polyline",
    "pre",
    "progress",
    "q",
    "radialgradient",
    "rect",
    "rp",
    "rt",
    "ruby",
    "s",
    "samp",
    "script",
    "search",
    "section",
    "select",
    "slot",
    "small",
    "source",
    "span",
    "stop",
    "strong",
    "style",
    "sub",
    "summary",
    "sup",
    "svg",
    "symbol",
    "table",
    "tbody",
    "td",
    "template",
    "text",
    "textarea",
    "textpath",
    "tfoot",
    "th",
    "thead",
    "time",
    "title",
    "tr",
    "track",
    "tspan",
    "u",
    "ul",
    "use",
    "var",
    "video",
    "wbr",
];
