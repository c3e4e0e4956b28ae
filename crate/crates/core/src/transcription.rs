//! DST, the textual transcription of the glyph stream.
//!
//! A line is a sequence of whitespace-separated tokens: a key name, `o`,
//! `o>`, `<o`, `a`, a ligature `BASE~OVER`, a gap `/`, or an unread glyph
//! group `{LETTERS}`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::symbol_table::{KeyId, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Linkage {
    Unlinked,
    LinkedToPrevious,
    LinkedToNext,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Token {
    Symbol(KeyId),
    RuleO(Linkage),
    RuleA,
    Ligature { base: KeyId, overlay: KeyId },
    Gap,
    /// Glyphs read by letters where no key is known.
    Unread(String),
}

impl Token {
    pub fn render(&self, table: &SymbolTable) -> String {
        match self {
            Token::Symbol(id) => table.name_of(*id).to_string(),
            Token::RuleO(Linkage::Unlinked) => "o".into(),
            Token::RuleO(Linkage::LinkedToNext) => "o>".into(),
            Token::RuleO(Linkage::LinkedToPrevious) => "<o".into(),
            Token::RuleA => "a".into(),
            Token::Ligature { base, overlay } => {
                format!("{}~{}", table.name_of(*base), table.name_of(*overlay))
            }
            Token::Gap => "/".into(),
            Token::Unread(s) => format!("{{{s}}}"),
        }
    }

    pub fn is_gap(&self) -> bool {
        matches!(self, Token::Gap)
    }

    pub fn is_rule_o(&self) -> bool {
        matches!(self, Token::RuleO(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenLine {
    pub tokens: Vec<Token>,
    pub source_tag: String,
}

impl TokenLine {
    pub fn new(tokens: Vec<Token>, source_tag: impl Into<String>) -> Self {
        TokenLine {
            tokens,
            source_tag: source_tag.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseReason {
    #[error("empty line")]
    Empty,
    #[error("unknown symbol name {0:?}")]
    UnknownName(String),
    #[error("rule symbol {0:?} must be written as `o` or `a`")]
    RuleSymbolName(String),
    #[error("malformed ligature {0:?}")]
    MalformedLigature(String),
    #[error("ligatures join exactly two symbols: {0:?}")]
    NestedLigature(String),
    #[error("ligature overlays a symbol on itself: {0:?}")]
    SelfLigature(String),
    #[error("malformed unread group {0:?}")]
    MalformedUnread(String),
    #[error("linked rule symbol has nothing to link to")]
    DanglingLink,
    #[error("two gaps in a row")]
    AdjacentGaps,
    #[error("gap at line edge")]
    EdgeGap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: ParseReason,
}

fn err(offset: usize, reason: ParseReason) -> ParseError {
    ParseError { offset, reason }
}

fn symbol_id(name: &str, offset: usize, table: &SymbolTable) -> Result<KeyId, ParseError> {
    match table.by_name(name) {
        Some(k) if k.is_rule_symbol => Err(err(offset, ParseReason::RuleSymbolName(name.into()))),
        Some(k) => Ok(k.id),
        None => Err(err(offset, ParseReason::UnknownName(name.into()))),
    }
}

fn parse_token(word: &str, offset: usize, table: &SymbolTable) -> Result<Token, ParseError> {
    Ok(match word {
        "/" => Token::Gap,
        "o" => Token::RuleO(Linkage::Unlinked),
        "o>" => Token::RuleO(Linkage::LinkedToNext),
        "<o" => Token::RuleO(Linkage::LinkedToPrevious),
        "a" => Token::RuleA,
        w if w.starts_with('{') => {
            let inner = w
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_uppercase()))
                .ok_or_else(|| err(offset, ParseReason::MalformedUnread(w.into())))?;
            Token::Unread(inner.to_string())
        }
        w if w.contains('~') => {
            let parts: Vec<&str> = w.split('~').collect();
            if parts.iter().any(|p| p.is_empty()) {
                return Err(err(offset, ParseReason::MalformedLigature(w.into())));
            }
            if parts.len() > 2 {
                return Err(err(offset, ParseReason::NestedLigature(w.into())));
            }
            let base = symbol_id(parts[0], offset, table)?;
            let overlay = symbol_id(parts[1], offset + parts[0].len() + 1, table)?;
            if base == overlay {
                return Err(err(offset, ParseReason::SelfLigature(w.into())));
            }
            Token::Ligature { base, overlay }
        }
        w => Token::Symbol(symbol_id(w, offset, table)?),
    })
}

/// Parses one DST line. Tokens may be separated by any run of ASCII
/// whitespace; `serialize` writes the canonical single-space form.
pub fn parse_line(text: &str, tag: &str, table: &SymbolTable) -> Result<TokenLine, ParseError> {
    let mut tokens = Vec::new();
    let mut offsets = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        tokens.push(parse_token(&text[start..i], start, table)?);
        offsets.push(start);
    }
    if tokens.is_empty() {
        return Err(err(0, ParseReason::Empty));
    }
    let last = tokens.len() - 1;
    for (k, t) in tokens.iter().enumerate() {
        let at = offsets[k];
        match t {
            Token::Gap if k == 0 || k == last => return Err(err(at, ParseReason::EdgeGap)),
            Token::Gap if tokens[k + 1].is_gap() => {
                return Err(err(offsets[k + 1], ParseReason::AdjacentGaps))
            }
            Token::RuleO(Linkage::LinkedToNext) if k == last || tokens[k + 1].is_gap() => {
                return Err(err(at, ParseReason::DanglingLink))
            }
            Token::RuleO(Linkage::LinkedToPrevious) if k == 0 || tokens[k - 1].is_gap() => {
                return Err(err(at, ParseReason::DanglingLink))
            }
            _ => {}
        }
    }
    Ok(TokenLine::new(tokens, tag))
}

pub fn serialize(line: &TokenLine, table: &SymbolTable) -> String {
    line.tokens
        .iter()
        .map(|t| t.render(table))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Document {
    pub lines: Vec<TokenLine>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("record {record}: {source}")]
    Parse { record: usize, source: ParseError },
    #[error("record {record}: missing `tag:` prefix")]
    MissingTag { record: usize },
    #[error("record {record}: duplicate tag {tag:?}")]
    DuplicateTag { record: usize, tag: String },
}

/// Parses a `.dst` stream: `tag: tokens` records, `#` comments, and
/// `#! key: value` metadata lines. Records are numbered by source line.
pub fn parse_document(text: &str, table: &SymbolTable) -> Result<Document, DocumentError> {
    let mut doc = Document::default();
    for (n, raw) in text.lines().enumerate() {
        let record = n + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix("#!") {
            if let Some((k, v)) = meta.split_once(':') {
                doc.metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (tag, body) = line
            .split_once(':')
            .ok_or(DocumentError::MissingTag { record })?;
        let tag = tag.trim();
        if tag.is_empty() {
            return Err(DocumentError::MissingTag { record });
        }
        if doc.lines.iter().any(|l| l.source_tag == tag) {
            return Err(DocumentError::DuplicateTag {
                record,
                tag: tag.to_string(),
            });
        }
        let body_start = raw.len() - raw.trim_start().len() + tag.len() + 1;
        let parsed = parse_line(body, tag, table).map_err(|mut e| {
            e.offset += body_start;
            DocumentError::Parse { record, source: e }
        })?;
        doc.lines.push(parsed);
    }
    Ok(doc)
}

pub fn serialize_document(doc: &Document, table: &SymbolTable) -> String {
    let mut out = String::new();
    for (k, v) in &doc.metadata {
        out.push_str(&format!("#! {k}: {v}\n"));
    }
    for l in &doc.lines {
        out.push_str(&format!("{}: {}\n", l.source_tag, serialize(l, table)));
    }
    out
}
