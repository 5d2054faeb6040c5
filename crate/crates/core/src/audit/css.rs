//! Tolerant stylesheet scanner.
//!
//! The goal is a stable error/warning count, not a faithful CSS object
//! model. Declarations that cannot be read as `property: value` are
//! errors; syntactically fine declarations naming a property outside
//! the known list are warnings. Vendor prefixes (leading `-`) and
//! custom properties (`--x`) are exempt from the name check. Grouping
//! at-rules (`@media`, `@supports`, ...) recurse; unbalanced braces at
//! end of input count one error.

/// Result of scanning one stylesheet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CssLint {
    pub errors: u32,
    pub warnings: u32,
    /// Human-readable notes, one per finding, in source order.
    pub items: Vec<String>,
}

impl CssLint {
    fn error(&mut self, message: String) {
        self.errors += 1;
        self.items.push(format!("error: {message}"));
    }

    fn warning(&mut self, message: String) {
        self.warnings += 1;
        self.items.push(format!("warning: {message}"));
    }
}

/// At-rules whose block is another rule list.
const GROUPING_AT_RULES: [&str; 7] = [
    "@media",
    "@supports",
    "@layer",
    "@container",
    "@scope",
    "@document",
    "@keyframes",
];

/// At-rules whose block is a declaration list.
const DECLARATION_AT_RULES: [&str; 4] = ["@font-face", "@page", "@property", "@counter-style"];

/// Scan a stylesheet and count findings.
pub fn lint_css(text: &str) -> CssLint {
    let mut lint = CssLint::default();
    let stripped = strip_comments(text);
    scan_rule_list(&stripped, &mut lint);
    lint
}

fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let close = text[i + 2..].find("*/").map(|p| i + 2 + p + 2);
            out.push(' ');
            i = close.unwrap_or(bytes.len());
        } else {
            let len = super::html::utf8_len(bytes[i]);
            out.push_str(&text[i..i + len]);
            i += len;
        }
    }
    out
}

/// Walk top-level constructs: at-statements, qualified rules, blocks.
fn scan_rule_list(text: &str, lint: &mut CssLint) {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut prelude_start = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => i = skip_string(text, i),
            b';' => {
                // Statement at-rule like @import or @charset; anything
                // else ending in ';' at rule level is stray but harmless.
                prelude_start = i + 1;
                i += 1;
            }
            b'{' => {
                let prelude = text[prelude_start..i].trim().to_string();
                match find_block_end(text, i) {
                    Some(end) => {
                        let body = &text[i + 1..end];
                        scan_block(&prelude, body, lint);
                        i = end + 1;
                        prelude_start = i;
                    }
                    None => {
                        lint.error("unbalanced braces at end of stylesheet".to_string());
                        return;
                    }
                }
            }
            b'}' => {
                // Stray close brace at rule level.
                lint.error("unexpected '}'".to_string());
                i += 1;
                prelude_start = i;
            }
            _ => i += 1,
        }
    }
}

fn scan_block(prelude: &str, body: &str, lint: &mut CssLint) {
    let lower = prelude.to_ascii_lowercase();
    if lower.starts_with('@') {
        if GROUPING_AT_RULES.iter().any(|a| lower.starts_with(a)) {
            scan_rule_list(body, lint);
            return;
        }
        if DECLARATION_AT_RULES.iter().any(|a| lower.starts_with(a)) {
            scan_declarations(body, lint);
            return;
        }
        // Unknown at-rule: skip the block without judging its content.
        return;
    }
    scan_declarations(body, lint);
}

/// `i` points at `{`; return index of its matching `}`.
fn find_block_end(text: &str, i: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut j = i;
    while j < bytes.len() {
        match bytes[j] {
            b'"' | b'\'' => {
                j = skip_string(text, j);
                continue;
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
        j += 1;
    }
    None
}

/// `i` points at a quote; return index just past the closing quote.
fn skip_string(text: &str, i: usize) -> usize {
    let bytes = text.as_bytes();
    let quote = bytes[i];
    let mut j = i + 1;
    while j < bytes.len() {
        match bytes[j] {
            b'\\' => j += 2,
            b if b == quote => return j + 1,
            _ => j += 1,
        }
    }
    j
}

fn scan_declarations(body: &str, lint: &mut CssLint) {
    for piece in split_declarations(body) {
        let decl = piece.trim();
        if decl.is_empty() {
            continue;
        }
        if decl.contains('{') {
            // Nested rule syntax; out of scope for this rule set, and
            // not a declaration, so it is neither error nor warning.
            continue;
        }
        let Some(colon) = find_top_level_colon(decl) else {
            lint.error(format!("declaration missing ':' in `{}`", clip(decl)));
            continue;
        };
        let prop = decl[..colon].trim();
        let value = decl[colon + 1..].trim();
        if prop.is_empty() || !is_ident(prop) {
            lint.error(format!("unparseable property name in `{}`", clip(decl)));
            continue;
        }
        if value.is_empty() {
            lint.error(format!("empty value for `{prop}`"));
            continue;
        }
        let lower = prop.to_ascii_lowercase();
        if lower.starts_with("--") || lower.starts_with('-') {
            continue;
        }
        if !KNOWN_CSS_PROPERTIES.contains(&lower.as_str()) {
            lint.warning(format!("unknown property `{lower}`"));
        }
    }
}

/// Split on `;` outside strings, parentheses and braces. Parentheses
/// matter because url(data:...;base64,...) embeds semicolons.
fn split_declarations(body: &str) -> Vec<&str> {
    let bytes = body.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut paren = 0usize;
    let mut brace = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => {
                i = skip_string(body, i);
                continue;
            }
            b'(' => paren += 1,
            b')' => paren = paren.saturating_sub(1),
            b'{' => brace += 1,
            b'}' => brace = brace.saturating_sub(1),
            b';' if paren == 0 && brace == 0 => {
                out.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(&body[start..]);
    out
}

fn find_top_level_colon(decl: &str) -> Option<usize> {
    let bytes = decl.as_bytes();
    let mut paren = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => {
                i = skip_string(decl, i);
                continue;
            }
            b'(' => paren += 1,
            b')' => paren = paren.saturating_sub(1),
            b':' if paren == 0 => return Some(i),
            _ => {}
        }
        i += 1;
    }
    None
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '-' || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn clip(s: &str) -> String {
    if s.chars().count() > 60 {
        let cut: String = s.chars().take(57).collect();
        format!("{cut}...")
    } else {
        s.to_string()
    }
}

/// Property names accepted without warning, lowercase.
pub(crate) const KNOWN_CSS_PROPERTIES: &[&str] = &[
    "accent-color",
    "align-content",
    "align-items",
    "align-self",
    "all",
    "animation",
    "animation-delay",
    "animation-direction",
    "animation-duration",
    "animation-fill-mode",
    "animation-iteration-count",
    "animation-name",
    "animation-play-state",
    "animation-timing-function",
    "appearance",
    "aspect-ratio",
    "backdrop-filter",
    "backface-visibility",
    "background",
    "background-attachment",
    "background-blend-mode",
    "background-clip",
    "background-color",
    "background-image",
    "background-origin",
    "background-position",
    "background-repeat",
    "background-size",
    "border",
    "border-bottom",
    "border-bottom-color",
    "border-bottom-left-radius",
    "border-bottom-right-radius",
    "border-bottom-style",
    "border-bottom-width",
    "border-collapse",
    "border-color",
    "border-image",
    "border-left",
    "border-left-color",
    "border-left-style",
    "border-left-width",
    "border-radius",
    "border-right",
    "border-right-color",
    "border-right-style",
    "border-right-width",
    "border-spacing",
    "border-style",
    "border-top",
    "border-top-color",
    "border-top-left-radius",
    "border-top-right-radius",
    "border-top-style",
    "border-top-width",
    "border-width",
    "bottom",
    "box-shadow",
    "box-sizing",
    "break-after",
    "break-before",
    "break-inside",
    "caption-side",
    "caret-color",
    "clear",
    "clip",
    "clip-path",
    "color",
    "color-scheme",
    "column-count",
    "column-fill",
    "column-gap",
    "column-rule",
    "column-rule-color",
    "column-rule-style",
    "column-rule-width",
    "column-span",
    "column-width",
    "columns",
    "contain",
    "content",
    "counter-increment",
    "counter-reset",
    "cursor",
    "direction",
    "display",
    "empty-cells",
    "filter",
    "flex",
    "flex-basis",
    "flex-direction",
    "flex-flow",
    "flex-grow",
    "flex-shrink",
    "flex-wrap",
    "float",
    "font",
    "font-display",
    "font-family",
    "font-feature-settings",
    "font-kerning",
    "font-size",
    "font-size-adjust",
    "font-stretch",
    "font-style",
    "font-variant",
    "font-variant-caps",
    "font-variant-ligatures",
    "font-variant-numeric",
    "font-weight",
    "gap",
    "grid",
    "grid-area",
    "grid-auto-columns",
    "grid-auto-flow",
    "grid-auto-rows",
    "grid-column",
    "grid-column-end",
    "grid-column-gap",
    "grid-column-start",
    "grid-gap",
    "grid-row",
    "grid-row-end",
    "grid-row-gap",
    "grid-row-start",
    "grid-template",
    "grid-template-areas",
    "grid-template-columns",
    "grid-template-rows",
    "height",
    "hyphens",
    "inset",
    "isolation",
    "justify-content",
    "justify-items",
    "justify-self",
    "left",
    "letter-spacing",
    "line-break",
    "line-height",
    "list-style",
    "list-style-image",
    "list-style-position",
    "list-style-type",
    "margin",
    "margin-bottom",
    "margin-left",
    "margin-right",
    "margin-top",
    "mask",
    "mask-image",
    "max-height",
    "max-width",
    "min-height",
    "min-width",
    "mix-blend-mode",
    "object-fit",
    "object-position",
    "opacity",
    "order",
    "orphans",
    "outline",
    "outline-color",
    "outline-offset",
    "outline-style",
    "outline-width",
    "overflow",
    "overflow-anchor",
    "overflow-wrap",
    "overflow-x",
    "overflow-y",
    "padding",
    "padding-bottom",
    "padding-left",
    "padding-right",
    "padding-top",
    "page-break-after",
    "page-break-before",
    "page-break-inside",
    "perspective",
    "perspective-origin",
    "place-content",
    "place-items",
    "place-self",
    "pointer-events",
    "position",
    "quotes",
    "resize",
    "right",
    "rotate",
    "row-gap",
    "scale",
    "scroll-behavior",
    "scroll-margin",
    "scroll-padding",
    "scroll-snap-align",
    "scroll-snap-type",
    "src",
    "tab-size",
    "table-layout",
    "text-align",
    "text-align-last",
    "text-decoration",
    "text-decoration-color",
    "text-decoration-line",
    "text-decoration-skip-ink",
    "text-decoration-style",
    "text-decoration-thickness",
    "text-indent",
    "text-justify",
    "text-orientation",
    "text-overflow",
    "text-rendering",
    "text-shadow",
    "text-transform",
    "text-underline-offset",
    "text-wrap",
    "top",
    "touch-action",
    "transform",
    "transform-origin",
    "transform-style",
    "transition",
    "transition-delay",
    "transition-duration",
    "transition-property",
    "transition-timing-function",
    "translate",
    "unicode-bidi",
    "user-select",
    "vertical-align",
    "visibility",
    "white-space",
    "widows",
    "width",
    "will-change",
    "word-break",
    "word-spacing",
    "word-wrap",
    "writing-mode",
    "z-index",
    "zoom",
];
