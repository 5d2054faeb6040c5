//! Tolerant HTML tokenizer and tree builder.
//!
//! Real-world home pages are full of unclosed tags, stray end tags and
//! vendor soup, so the parser accepts anything and records what it had
//! to repair instead of erroring. The tree is a flat arena addressed by
//! index; traversal is document order.

/// Elements that never take content and are not pushed on the open stack.
const VOID_ELEMENTS: [&str; 14] = [
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

/// Elements whose content is raw text up to the matching end tag.
const RAWTEXT_ELEMENTS: [&str; 2] = ["script", "style"];

/// Like rawtext, but entity references still decode.
const RCDATA_ELEMENTS: [&str; 2] = ["title", "textarea"];

fn is_void(name: &str) -> bool {
    VOID_ELEMENTS.contains(&name)
}

/// Counts of repairs the tree builder performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagBalance {
    /// Elements still open when input ended.
    pub unclosed: u32,
    /// End tags that closed nothing, or forced other tags shut.
    pub misnested: u32,
}

#[derive(Debug)]
enum NodeData {
    Element {
        name: String,
        attrs: Vec<(String, String)>,
    },
    Text(String),
}

#[derive(Debug)]
struct Node {
    data: NodeData,
    children: Vec<usize>,
}

/// Parsed page. Owns the node arena plus the handful of document-level
/// facts every caller wants (doctype, declared encoding, base href).
#[derive(Debug)]
pub struct Document {
    nodes: Vec<Node>,
    doctype: Option<String>,
    declared_encoding: Option<String>,
    base_href: Option<String>,
    balance: TagBalance,
}

/// Borrowed view of one element in a [`Document`].
#[derive(Clone, Copy)]
pub struct ElementRef<'a> {
    doc: &'a Document,
    index: usize,
}

impl Document {
    /// Doctype declaration content, if any (`html` for `<!DOCTYPE html>`).
    pub fn doctype(&self) -> Option<&str> {
        self.doctype.as_deref()
    }

    /// Character set named by `<meta charset>` or an http-equiv
    /// content-type meta, lowercased.
    pub fn declared_encoding(&self) -> Option<&str> {
        self.declared_encoding.as_deref()
    }

    /// `href` of the first `<base>` element.
    pub fn base_href(&self) -> Option<&str> {
        self.base_href.as_deref()
    }

    /// Repair counters from tree construction.
    pub fn tag_balance(&self) -> TagBalance {
        self.balance
    }

    /// All elements in document order.
    pub fn elements(&self) -> impl Iterator<Item = ElementRef<'_>> {
        // Depth-first walk over the arena; children were appended in
        // source order so pushing them reversed keeps document order.
        let mut stack: Vec<usize> = self.nodes[0].children.iter().rev().copied().collect();
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            if matches!(self.nodes[i].data, NodeData::Element { .. }) {
                out.push(ElementRef { doc: self, index: i });
            }
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out.into_iter()
    }

    /// First element with the given (lowercase) name.
    pub fn first(&self, name: &str) -> Option<ElementRef<'_>> {
        self.elements().find(|e| e.name() == name)
    }

    fn text_of(&self, index: usize, out: &mut String) {
        match &self.nodes[index].data {
            NodeData::Text(t) => out.push_str(t),
            NodeData::Element { .. } => {
                for &c in &self.nodes[index].children {
                    self.text_of(c, out);
                }
            }
        }
    }
}

impl<'a> ElementRef<'a> {
    /// Lowercased tag name.
    pub fn name(&self) -> &'a str {
        match &self.doc.nodes[self.index].data {
            NodeData::Element { name, .. } => name,
            NodeData::Text(_) => unreachable!("element ref points at text"),
        }
    }

    /// All attributes in source order, names lowercased.
    pub fn attrs(&self) -> &'a [(String, String)] {
        match &self.doc.nodes[self.index].data {
            NodeData::Element { attrs, .. } => attrs,
            NodeData::Text(_) => unreachable!("element ref points at text"),
        }
    }

    /// Value of the first attribute with this (lowercase) name.
    pub fn attr(&self, name: &str) -> Option<&'a str> {
        self.attrs()
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    /// Whether the attribute is present at all, even with empty value.
    pub fn has_attr(&self, name: &str) -> bool {
        self.attrs().iter().any(|(n, _)| n == name)
    }

    /// Concatenated descendant text.
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.doc.text_of(self.index, &mut out);
        out
    }
}

#[derive(Debug)]
enum Token {
    Doctype(String),
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
    Text(String),
}

struct Tokenizer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(input: &'a str) -> Self {
        Tokenizer {
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn starts_with_ci(&self, prefix: &str) -> bool {
        let end = self.pos + prefix.len();
        end <= self.bytes.len() && self.bytes[self.pos..end].eq_ignore_ascii_case(prefix.as_bytes())
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        // Slicing is safe: all scan boundaries sit on ASCII bytes.
        std::str::from_utf8(&self.bytes[from..to]).unwrap_or("")
    }

    /// Advance past one full UTF-8 character.
    fn bump_char(&mut self) {
        self.pos += 1;
        while self.pos < self.bytes.len() && (self.bytes[self.pos] & 0b1100_0000) == 0b1000_0000 {
            self.pos += 1;
        }
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(0), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn read_name(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(0), Some(b) if b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b':')
        {
            self.pos += 1;
        }
        self.slice(start, self.pos).to_ascii_lowercase()
    }

    fn next_token(&mut self) -> Option<Token> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        if self.peek(0) == Some(b'<') {
            match self.peek(1) {
                Some(b'!') => Some(self.markup_declaration()),
                Some(b'/') => self.end_tag(),
                Some(b'?') => {
                    // Processing instruction, skipped like a bogus comment.
                    self.skip_until_gt();
                    self.next_token()
                }
                Some(b) if b.is_ascii_alphabetic() => Some(self.start_tag()),
                _ => {
                    // Lone '<' is literal text.
                    let start = self.pos;
                    self.pos += 1;
                    self.text_run(start)
                }
            }
        } else {
            let start = self.pos;
            self.text_run(start)
        }
    }

    fn text_run(&mut self, start: usize) -> Option<Token> {
        while self.pos < self.bytes.len() {
            if self.peek(0) == Some(b'<') {
                match self.peek(1) {
                    Some(b'!') | Some(b'/') | Some(b'?') => break,
                    Some(b) if b.is_ascii_alphabetic() => break,
                    _ => self.pos += 1,
                }
            } else {
                self.pos += 1;
            }
        }
        let raw = self.slice(start, self.pos);
        if raw.is_empty() {
            self.next_token()
        } else {
            Some(Token::Text(decode_entities(raw)))
        }
    }

    fn skip_until_gt(&mut self) {
        while let Some(b) = self.peek(0) {
            self.pos += 1;
            if b == b'>' {
                break;
            }
        }
    }

    fn markup_declaration(&mut self) -> Token {
        if self.starts_with_ci("<!--") {
            self.pos += 4;
            let start = self.pos;
            let mut end = self.bytes.len();
            let mut i = self.pos;
            while i + 3 <= self.bytes.len() {
                if &self.bytes[i..i + 3] == b"-->" {
                    end = i;
                    break;
                }
                i += 1;
            }
            self.pos = if end == self.bytes.len() {
                self.bytes.len()
            } else {
                end + 3
            };
            let _ = start; // comments carry no signal for auditing
            Token::Text(String::new())
        } else if self.starts_with_ci("<!doctype") {
            self.pos += "<!doctype".len();
            let start = self.pos;
            while let Some(b) = self.peek(0) {
                if b == b'>' {
                    break;
                }
                self.pos += 1;
            }
            let content = self.slice(start, self.pos).trim().to_string();
            if self.peek(0) == Some(b'>') {
                self.pos += 1;
            }
            Token::Doctype(content)
        } else {
            // Bogus declaration such as <![CDATA[ in HTML context.
            self.skip_until_gt();
            Token::Text(String::new())
        }
    }

    fn end_tag(&mut self) -> Option<Token> {
        self.pos += 2;
        let name = self.read_name();
        self.skip_until_gt_lenient();
        if name.is_empty() {
            self.next_token()
        } else {
            Some(Token::End { name })
        }
    }

    /// Consume through `>`, tolerating EOF.
    fn skip_until_gt_lenient(&mut self) {
        while let Some(b) = self.peek(0) {
            self.pos += 1;
            if b == b'>' {
                return;
            }
        }
    }

    fn start_tag(&mut self) -> Token {
        self.pos += 1;
        let name = self.read_name();
        let mut attrs = Vec::new();
        let mut self_closing = false;
        loop {
            self.skip_whitespace();
            match self.peek(0) {
                None => break,
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(b'/') => {
                    if self.peek(1) == Some(b'>') {
                        self.pos += 2;
                        self_closing = true;
                        break;
                    }
                    self.pos += 1;
                }
                Some(_) => {
                    let attr_name = self.read_attr_name();
                    if attr_name.is_empty() {
                        // Unparseable byte; drop it and keep going.
                        self.bump_char();
                        continue;
                    }
                    self.skip_whitespace();
                    let value = if self.peek(0) == Some(b'=') {
                        self.pos += 1;
                        self.skip_whitespace();
                        self.read_attr_value()
                    } else {
                        String::new()
                    };
                    attrs.push((attr_name, value));
                }
            }
        }
        Token::Start {
            name,
            attrs,
            self_closing,
        }
    }

    fn read_attr_name(&mut self) -> String {
        let start = self.pos;
        while let Some(b) = self.peek(0) {
            if b.is_ascii_whitespace() || b == b'=' || b == b'>' || b == b'/' {
                break;
            }
            self.pos += 1;
        }
        self.slice(start, self.pos).to_ascii_lowercase()
    }

    fn read_attr_value(&mut self) -> String {
        match self.peek(0) {
            Some(q @ (b'"' | b'\'')) => {
                self.pos += 1;
                let start = self.pos;
                while let Some(b) = self.peek(0) {
                    if b == q {
                        break;
                    }
                    self.pos += 1;
                }
                let raw = self.slice(start, self.pos);
                if self.peek(0).is_some() {
                    self.pos += 1;
                }
                decode_entities(raw)
            }
            _ => {
                let start = self.pos;
                while let Some(b) = self.peek(0) {
                    if b.is_ascii_whitespace() || b == b'>' {
                        break;
                    }
                    self.pos += 1;
                }
                decode_entities(self.slice(start, self.pos))
            }
        }
    }

    /// Raw content of a rawtext/rcdata element up to its end tag.
    /// Returns the content and whether the end tag was found.
    fn rawtext_until_close(&mut self, name: &str) -> (&'a str, bool) {
        let start = self.pos;
        let needle = format!("</{name}");
        let nb = needle.as_bytes();
        let mut i = self.pos;
        while i + nb.len() <= self.bytes.len() {
            if self.bytes[i..i + nb.len()].eq_ignore_ascii_case(nb) {
                let after = self.bytes.get(i + nb.len()).copied();
                // Require a tag-ending byte so "</scripty" stays content.
                if matches!(after, None | Some(b'>') | Some(b'/') | Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r'))
                {
                    let content = self.slice(start, i);
                    self.pos = i;
                    return (content, true);
                }
            }
            i += 1;
        }
        let content = self.slice(start, self.bytes.len());
        self.pos = self.bytes.len();
        (content, false)
    }
}

/// Decode named and numeric character references, leaving bare `&` alone.
pub(crate) fn decode_entities(raw: &str) -> String {
    if !raw.contains('&') {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'&' {
            if let Some(semi) = raw[i + 1..].find(';').map(|p| i + 1 + p) {
                // Entities are short; anything long is literal text.
                if semi - i <= 32 {
                    if let Some(decoded) = decode_entity(&raw[i + 1..semi]) {
                        out.push_str(&decoded);
                        i = semi + 1;
                        continue;
                    }
                }
            }
        }
        let ch_len = utf8_len(bytes[i]);
        out.push_str(&raw[i..i + ch_len]);
        i += ch_len;
    }
    out
}

pub(crate) fn utf8_len(first: u8) -> usize {
    match first {
        b if b < 0x80 => 1,
        b if b >= 0xF0 => 4,
        b if b >= 0xE0 => 3,
        _ => 2,
    }
}

fn decode_entity(body: &str) -> Option<String> {
    if let Some(num) = body.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix(['x', 'X']) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        return char::from_u32(code).map(|c| c.to_string());
    }
    let ch = match body {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '\u{a9}',
        "reg" => '\u{ae}',
        "trade" => '\u{2122}',
        "hellip" => '\u{2026}',
        "mdash" => '\u{2014}',
        "ndash" => '\u{2013}',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201c}',
        "rdquo" => '\u{201d}',
        "laquo" => '\u{ab}',
        "raquo" => '\u{bb}',
        "middot" => '\u{b7}',
        "bull" => '\u{2022}',
        "sect" => '\u{a7}',
        "para" => '\u{b6}',
        "deg" => '\u{b0}',
        "plusmn" => '\u{b1}',
        "times" => '\u{d7}',
        "divide" => '\u{f7}',
        "euro" => '\u{20ac}',
        "pound" => '\u{a3}',
        "yen" => '\u{a5}',
        "cent" => '\u{a2}',
        "szlig" => '\u{df}',
        "agrave" => '\u{e0}',
        "aacute" => '\u{e1}',
        "eacute" => '\u{e9}',
        "egrave" => '\u{e8}',
        "iacute" => '\u{ed}',
        "oacute" => '\u{f3}',
        "uacute" => '\u{fa}',
        "ntilde" => '\u{f1}',
        "uuml" => '\u{fc}',
        "ouml" => '\u{f6}',
        "auml" => '\u{e4}',
        _ => return None,
    };
    Some(ch.to_string())
}

/// Parse a page into a [`Document`]. Never fails; repairs are counted
/// in the document's tag balance.
pub fn parse_html(input: &str) -> Document {
    let mut tokenizer = Tokenizer::new(input);
    let mut nodes = vec![Node {
        data: NodeData::Element {
            name: "#document".to_string(),
            attrs: Vec::new(),
        },
        children: Vec::new(),
    }];
    let mut stack: Vec<usize> = vec![0];
    let mut balance = TagBalance::default();
    let mut doctype = None;

    while let Some(token) = tokenizer.next_token() {
        match token {
            Token::Doctype(d) => {
                if doctype.is_none() {
                    doctype = Some(d);
                }
            }
            Token::Text(t) => {
                if !t.is_empty() {
                    let parent = *stack.last().expect("stack never empties");
                    let idx = nodes.len();
                    nodes.push(Node {
                        data: NodeData::Text(t),
                        children: Vec::new(),
                    });
                    nodes[parent].children.push(idx);
                }
            }
            Token::Start {
                name,
                attrs,
                self_closing,
            } => {
                let parent = *stack.last().expect("stack never empties");
                let idx = nodes.len();
                let rawtext = RAWTEXT_ELEMENTS.contains(&name.as_str());
                let rcdata = RCDATA_ELEMENTS.contains(&name.as_str());
                nodes.push(Node {
                    data: NodeData::Element {
                        name: name.clone(),
                        attrs,
                    },
                    children: Vec::new(),
                });
                nodes[parent].children.push(idx);
                if self_closing || is_void(name.as_str()) {
                    continue;
                }
                if rawtext || rcdata {
                    // Content runs to the matching end tag; nothing
                    // inside is markup.
                    let (content, closed) = tokenizer.rawtext_until_close(&name);
                    let text = if rcdata {
                        decode_entities(content)
                    } else {
                        content.to_string()
                    };
                    if !text.is_empty() {
                        let t = nodes.len();
                        nodes.push(Node {
                            data: NodeData::Text(text),
                            children: Vec::new(),
                        });
                        nodes[idx].children.push(t);
                    }
                    if closed {
                        tokenizer.pos += 2 + name.len();
                        tokenizer.skip_until_gt_lenient();
                    } else {
                        balance.unclosed += 1;
                    }
                    continue;
                }
                stack.push(idx);
            }
            Token::End { name } => {
                let matched = stack
                    .iter()
                    .skip(1)
                    .rposition(|&i| match &nodes[i].data {
                        NodeData::Element { name: n, .. } => *n == name,
                        NodeData::Text(_) => false,
                    })
                    .map(|p| p + 1);
                match matched {
                    Some(abs) => {
                        // Anything above the match is force-closed.
                        let forced = stack.len() - 1 - abs;
                        balance.misnested += forced as u32;
                        stack.truncate(abs);
                    }
                    None => {
                        balance.misnested += 1;
                    }
                }
            }
        }
    }
    balance.unclosed += (stack.len() - 1) as u32;

    let mut doc = Document {
        nodes,
        doctype,
        declared_encoding: None,
        base_href: None,
        balance,
    };
    doc.declared_encoding = find_declared_encoding(&doc);
    let base = doc
        .elements()
        .find(|e| e.name() == "base" && e.attr("href").is_some())
        .and_then(|e| e.attr("href"))
        .map(|h| h.trim().to_string());
    doc.base_href = base;
    doc
}

fn find_declared_encoding(doc: &Document) -> Option<String> {
    for meta in doc.elements().filter(|e| e.name() == "meta") {
        if let Some(charset) = meta.attr("charset") {
            let c = charset.trim();
            if !c.is_empty() {
                return Some(c.to_ascii_lowercase());
            }
        }
        let http_equiv = meta.attr("http-equiv").unwrap_or("");
        if http_equiv.eq_ignore_ascii_case("content-type") {
            if let Some(content) = meta.attr("content") {
                let lower = content.to_ascii_lowercase();
                if let Some(pos) = lower.find("charset=") {
                    let rest = &lower[pos + "charset=".len()..];
                    let value: String = rest
                        .trim_start_matches(['"', '\'', ' '])
                        .chars()
                        .take_while(|c| !matches!(c, ';' | '"' | '\'' | ' '))
                        .collect();
                    if !value.is_empty() {
                        return Some(value);
                    }
                }
            }
        }
    }
    None
}
