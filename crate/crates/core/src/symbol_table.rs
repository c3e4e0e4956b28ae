//! Key table, lexicon and context-dependent spelling selection.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::merge::merge_boundaries;

pub type KeyId = u8;

/// Key id of the rule symbol `o`.
pub const RULE_O: KeyId = 3;
/// Key id of the rule symbol `a`.
pub const RULE_A: KeyId = 11;
/// Key id of AT, which carries the terminal plural/comma marks.
pub const KEY_AT: KeyId = 2;
pub const MAX_KEY_ID: KeyId = 55;

const SHIPPED_KEYS: &str = include_str!("../data/keys.txt");
const SHIPPED_LEXICON: &str = include_str!("../data/lexicon.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PositionContext {
    Any,
    LineInitial,
    LineFinal,
    WordFinal,
    BetweenRuleA,
    AfterRuleO,
    BeforeRuleO,
    AfterRuleA,
    Isolated,
}

impl PositionContext {
    pub const ALL: [PositionContext; 9] = [
        PositionContext::Any,
        PositionContext::LineInitial,
        PositionContext::LineFinal,
        PositionContext::WordFinal,
        PositionContext::BetweenRuleA,
        PositionContext::AfterRuleO,
        PositionContext::BeforeRuleO,
        PositionContext::AfterRuleA,
        PositionContext::Isolated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PositionContext::Any => "Any",
            PositionContext::LineInitial => "LineInitial",
            PositionContext::LineFinal => "LineFinal",
            PositionContext::WordFinal => "WordFinal",
            PositionContext::BetweenRuleA => "BetweenRuleA",
            PositionContext::AfterRuleO => "AfterRuleO",
            PositionContext::BeforeRuleO => "BeforeRuleO",
            PositionContext::AfterRuleA => "AfterRuleA",
            PositionContext::Isolated => "Isolated",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for PositionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PositionContext {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        PositionContext::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or(())
    }
}

/// The set of contexts that hold at one token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Position(u16);

impl Position {
    pub fn new() -> Self {
        Position(0)
    }

    /// A position where only `ctx` holds. LineFinal implies WordFinal.
    pub fn single(ctx: PositionContext) -> Self {
        let mut p = Position::new();
        p.insert(ctx);
        if ctx == PositionContext::LineFinal {
            p.insert(PositionContext::WordFinal);
        }
        p
    }

    pub fn insert(&mut self, ctx: PositionContext) {
        self.0 |= ctx.bit();
    }

    pub fn has(&self, ctx: PositionContext) -> bool {
        ctx == PositionContext::Any || self.0 & ctx.bit() != 0
    }

    pub fn admits(&self, spelling_ctx: PositionContext) -> bool {
        self.has(spelling_ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Spelling {
    pub text: String,
    pub context: PositionContext,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolKey {
    pub id: KeyId,
    pub name: String,
    pub spellings: Vec<Spelling>,
    pub is_rule_symbol: bool,
    pub anchor: String,
}

impl SymbolKey {
    /// The rank-1 spelling with context Any.
    pub fn primary(&self) -> &str {
        self.spellings
            .iter()
            .find(|s| s.rank == 1 && s.context == PositionContext::Any)
            .or_else(|| self.spellings.iter().min_by_key(|s| s.rank))
            .map(|s| s.text.as_str())
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LexiconEntry {
    pub word: String,
    pub composition: Option<Vec<KeyId>>,
    pub gloss: String,
    pub anchor: String,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("unknown key id {0}")]
    UnknownKey(u32),
    #[error("unknown key name {0:?}")]
    UnknownName(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DuplicateId(KeyId),
    DuplicateName(String),
    IdOutOfRange(KeyId),
    NoSpellings(KeyId),
    MissingPrimary(KeyId),
    BadSpelling { id: KeyId, text: String },
    RuleSymbolCount(usize),
    MisplacedRuleFlag(KeyId),
    BetweenRuleAMisuse(KeyId),
    EmptyWord,
    DuplicateWord(String),
    UnknownCompositionKey { word: String, id: KeyId },
    CompositionMismatch { word: String, merged: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate key id {id}"),
            Violation::DuplicateName(n) => write!(f, "duplicate key name {n}"),
            Violation::IdOutOfRange(id) => write!(f, "key id {id} outside 1..={MAX_KEY_ID}"),
            Violation::NoSpellings(id) => write!(f, "key {id} has no spellings"),
            Violation::MissingPrimary(id) => {
                write!(f, "key {id} has no rank-1 spelling with context Any")
            }
            Violation::BadSpelling { id, text } => write!(f, "key {id}: bad spelling {text:?}"),
            Violation::RuleSymbolCount(n) => write!(f, "{n} rule symbols, expected 2"),
            Violation::MisplacedRuleFlag(id) => write!(f, "key {id} has a wrong rule flag"),
            Violation::BetweenRuleAMisuse(id) => {
                write!(f, "key {id} uses BetweenRuleA, reserved for ALL")
            }
            Violation::EmptyWord => write!(f, "lexicon entry with empty word"),
            Violation::DuplicateWord(w) => write!(f, "duplicate lexicon word {w}"),
            Violation::UnknownCompositionKey { word, id } => {
                write!(f, "{word}: composition names unknown key {id}")
            }
            Violation::CompositionMismatch { word, merged } => {
                write!(f, "{word}: composition merges to {merged}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    keys: Vec<SymbolKey>,
    by_id: HashMap<KeyId, usize>,
    by_name: HashMap<String, usize>,
}

impl SymbolTable {
    /// Builds a table without validating it; the first occurrence of a
    /// duplicated id or name wins for lookups.
    pub fn from_keys(keys: Vec<SymbolKey>) -> Self {
        let mut by_id = HashMap::new();
        let mut by_name = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            by_id.entry(k.id).or_insert(i);
            by_name.entry(k.name.clone()).or_insert(i);
        }
        SymbolTable {
            keys,
            by_id,
            by_name,
        }
    }

    pub fn shipped() -> Self {
        SymbolTable::parse(SHIPPED_KEYS).expect("shipped key table parses")
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut keys = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            keys.push(parse_key_record(line).map_err(|reason| TableError::Format {
                line: line_no,
                reason,
            })?);
        }
        Ok(SymbolTable::from_keys(keys))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for k in &self.keys {
            let spellings: Vec<String> = k
                .spellings
                .iter()
                .map(|s| format!("{}@{}@{}", s.text, s.context, s.rank))
                .collect();
            out.push_str(&format!(
                "{}|{}|{}|{}|{}\n",
                k.id,
                k.name,
                spellings.join(";"),
                if k.is_rule_symbol { "rule" } else { "" },
                k.anchor
            ));
        }
        out
    }

    pub fn keys(&self) -> &[SymbolKey] {
        &self.keys
    }

    pub fn keys_mut(&mut self) -> &mut Vec<SymbolKey> {
        &mut self.keys
    }

    pub fn lookup(&self, id: KeyId) -> Result<&SymbolKey, TableError> {
        self.by_id
            .get(&id)
            .map(|&i| &self.keys[i])
            .ok_or(TableError::UnknownKey(id as u32))
    }

    pub fn by_name(&self, name: &str) -> Option<&SymbolKey> {
        self.by_name.get(name).map(|&i| &self.keys[i])
    }

    pub fn name_of(&self, id: KeyId) -> &str {
        self.lookup(id).map(|k| k.name.as_str()).unwrap_or("?")
    }

    pub fn primary(&self, id: KeyId) -> Result<&str, TableError> {
        self.lookup(id).map(|k| k.primary())
    }

    pub fn spellings_for(
        &self,
        id: KeyId,
        ctx: PositionContext,
    ) -> Result<Vec<Spelling>, TableError> {
        self.spellings_at(id, Position::single(ctx))
    }

    /// Spellings admitted at `pos`, best first. Context-specific spellings
    /// precede Any spellings of the same rank; repeated texts keep their
    /// best entry only.
    pub fn spellings_at(&self, id: KeyId, pos: Position) -> Result<Vec<Spelling>, TableError> {
        let key = self.lookup(id)?;
        let mut admitted: Vec<(usize, &Spelling)> = key
            .spellings
            .iter()
            .enumerate()
            .filter(|(_, s)| pos.admits(s.context))
            .collect();
        admitted.sort_by_key(|(i, s)| (s.rank, s.context == PositionContext::Any, *i));
        let mut seen = HashSet::new();
        Ok(admitted
            .into_iter()
            .filter(|(_, s)| seen.insert(s.text.clone()))
            .map(|(_, s)| s.clone())
            .collect())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut ids = HashSet::new();
        let mut names = HashSet::new();
        for k in &self.keys {
            if !ids.insert(k.id) {
                violations.push(Violation::DuplicateId(k.id));
            }
            if !names.insert(k.name.clone()) {
                violations.push(Violation::DuplicateName(k.name.clone()));
            }
            if k.id == 0 || k.id > MAX_KEY_ID {
                violations.push(Violation::IdOutOfRange(k.id));
            }
            if k.spellings.is_empty() {
                violations.push(Violation::NoSpellings(k.id));
                continue;
            }
            let primaries = k
                .spellings
                .iter()
                .filter(|s| s.rank == 1 && s.context == PositionContext::Any)
                .count();
            if primaries != 1 {
                violations.push(Violation::MissingPrimary(k.id));
            }
            for s in &k.spellings {
                if !valid_spelling(&s.text) {
                    violations.push(Violation::BadSpelling {
                        id: k.id,
                        text: s.text.clone(),
                    });
                }
                if s.context == PositionContext::BetweenRuleA && k.name != "ALL" {
                    violations.push(Violation::BetweenRuleAMisuse(k.id));
                }
            }
            let should_be_rule = k.id == RULE_O || k.id == RULE_A;
            if k.is_rule_symbol != should_be_rule {
                violations.push(Violation::MisplacedRuleFlag(k.id));
            }
        }
        let rules = self.keys.iter().filter(|k| k.is_rule_symbol).count();
        if rules != 2 {
            violations.push(Violation::RuleSymbolCount(rules));
        }
        ValidationReport { violations }
    }
}

fn valid_spelling(text: &str) -> bool {
    text == "40" || (!text.is_empty() && text.bytes().all(|b| b.is_ascii_uppercase()))
}

fn parse_key_record(line: &str) -> Result<SymbolKey, String> {
    let fields: Vec<&str> = line.split('|').collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let id: KeyId = fields[0]
        .parse()
        .map_err(|_| format!("bad key id {:?}", fields[0]))?;
    let name = fields[1].to_string();
    if name.is_empty() {
        return Err("empty key name".into());
    }
    let mut spellings = Vec::new();
    if !fields[2].is_empty() {
        for item in fields[2].split(';') {
            let parts: Vec<&str> = item.split('@').collect();
            if parts.len() != 3 {
                return Err(format!("bad spelling {item:?}"));
            }
            let context = parts[1]
                .parse()
                .map_err(|_| format!("unknown context {:?}", parts[1]))?;
            let rank = parts[2]
                .parse()
                .map_err(|_| format!("bad rank {:?}", parts[2]))?;
            spellings.push(Spelling {
                text: parts[0].to_string(),
                context,
                rank,
            });
        }
    }
    let is_rule_symbol = match fields[3] {
        "rule" => true,
        "" => false,
        other => return Err(format!("bad rule flag {other:?}")),
    };
    Ok(SymbolKey {
        id,
        name,
        spellings,
        is_rule_symbol,
        anchor: fields[4].to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    by_word: HashMap<String, usize>,
    max_len: usize,
}

impl Lexicon {
    pub fn from_entries(entries: Vec<LexiconEntry>) -> Self {
        let mut by_word = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_word.entry(e.word.clone()).or_insert(i);
        }
        let max_len = entries.iter().map(|e| e.word.len()).max().unwrap_or(0);
        Lexicon {
            entries,
            by_word,
            max_len,
        }
    }

    pub fn shipped() -> Self {
        Lexicon::parse(SHIPPED_LEXICON).expect("shipped lexicon parses")
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('|').collect();
            let err = |reason: String| TableError::Format { line: n + 1, reason };
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let composition = if fields[1].is_empty() {
                None
            } else {
                let ids: Result<Vec<KeyId>, _> =
                    fields[1].split(',').map(|s| s.parse::<KeyId>()).collect();
                Some(ids.map_err(|_| err(format!("bad composition {:?}", fields[1])))?)
            };
            entries.push(LexiconEntry {
                word: fields[0].to_string(),
                composition,
                gloss: fields[2].to_string(),
                anchor: fields[3].to_string(),
            });
        }
        Ok(Lexicon::from_entries(entries))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let comp = e
                .composition
                .as_ref()
                .map(|c| {
                    c.iter()
                        .map(|id| id.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .unwrap_or_default();
            out.push_str(&format!("{}|{}|{}|{}\n", e.word, comp, e.gloss, e.anchor));
        }
        out
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn lookup(&self, word: &str) -> Option<&LexiconEntry> {
        self.by_word.get(word).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.by_word.contains_key(word)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Stem of a plural form: a composed word ending in the AT key whose
    /// remainder is itself a lexicon word.
    pub fn plural_stem(&self, word: &str) -> Option<&LexiconEntry> {
        let entry = self.lookup(word)?;
        let comp = entry.composition.as_ref()?;
        if comp.len() < 2 || *comp.last()? != KEY_AT {
            return None;
        }
        self.lookup(word.strip_suffix("AT")?)
    }

    pub fn validate(&self, table: &SymbolTable) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.word.is_empty() {
                violations.push(Violation::EmptyWord);
                continue;
            }
            if !seen.insert(e.word.clone()) {
                violations.push(Violation::DuplicateWord(e.word.clone()));
            }
            if let Some(comp) = &e.composition {
                match compose_primary(table, comp) {
                    Ok(merged) if merged == e.word => {}
                    Ok(merged) => violations.push(Violation::CompositionMismatch {
                        word: e.word.clone(),
                        merged,
                    }),
                    Err(TableError::UnknownKey(id)) => {
                        violations.push(Violation::UnknownCompositionKey {
                            word: e.word.clone(),
                            id: id as KeyId,
                        })
                    }
                    Err(_) => {}
                }
            }
        }
        ValidationReport { violations }
    }
}

/// Merges the rank-1 spellings of `ids` under the boundary rule.
pub fn compose_primary(table: &SymbolTable, ids: &[KeyId]) -> Result<String, TableError> {
    let parts: Result<Vec<&str>, _> = ids.iter().map(|&id| table.primary(id)).collect();
    Ok(merge_boundaries(&parts?))
}

/// Key table plus lexicon; everything the decoder needs.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub table: SymbolTable,
    pub lexicon: Lexicon,
}

impl Codebook {
    pub fn new(table: SymbolTable, lexicon: Lexicon) -> Self {
        Codebook { table, lexicon }
    }

    pub fn shipped() -> Self {
        Codebook::new(SymbolTable::shipped(), Lexicon::shipped())
    }

    pub fn lookup(&self, id: KeyId) -> Result<&SymbolKey, TableError> {
        self.table.lookup(id)
    }

    pub fn spellings_for(
        &self,
        id: KeyId,
        ctx: PositionContext,
    ) -> Result<Vec<Spelling>, TableError> {
        self.table.spellings_for(id, ctx)
    }

    pub fn lexicon_lookup(&self, word: &str) -> Option<&LexiconEntry> {
        self.lexicon.lookup(word)
    }

    pub fn validate_table(&self) -> ValidationReport {
        let mut report = self.table.validate();
        report
            .violations
            .extend(self.lexicon.validate(&self.table).violations);
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(v: &[Spelling]) -> Vec<&str> {
        v.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn lookup_pla() {
        let t = SymbolTable::shipped();
        let k = t.lookup(6).unwrap();
        assert_eq!(k.name, "PLA");
        assert_eq!(texts(&k.spellings), ["PLA", "BLA", "P", "B"]);
    }

    #[test]
    fn lookup_tre_and_unknown() {
        let t = SymbolTable::shipped();
        assert_eq!(t.lookup(17).unwrap().name, "TRE");
        assert_eq!(t.lookup(99), Err(TableError::UnknownKey(99)));
        assert_eq!(t.lookup(0), Err(TableError::UnknownKey(0)));
    }

    #[test]
    fn at_line_final_reads_a_first() {
        let t = SymbolTable::shipped();
        let s = t.spellings_for(2, PositionContext::LineFinal).unwrap();
        assert_eq!(texts(&s)[..2], ["A", "AT"]);
        let s = t.spellings_for(2, PositionContext::Any).unwrap();
        assert_eq!(texts(&s), ["AT", "A"]);
    }

    #[test]
    fn and_after_o_reads_end() {
        let t = SymbolTable::shipped();
        let s = t.spellings_for(7, PositionContext::AfterRuleO).unwrap();
        assert_eq!(s[0].text, "END");
        let s = t.spellings_for(7, PositionContext::WordFinal).unwrap();
        assert!(texts(&s).contains(&"END"));
    }

    #[test]
    fn single_spelling_key() {
        let t = SymbolTable::shipped();
        assert_eq!(texts(&t.spellings_for(1, PositionContext::Any).unwrap()), ["ORT"]);
    }

    #[test]
    fn all_between_a_prefers_li() {
        let t = SymbolTable::shipped();
        let s = t.spellings_for(5, PositionContext::BetweenRuleA).unwrap();
        assert_eq!(s[0].text, "LI");
        assert_eq!(s[1].text, "ALL");
    }

    #[test]
    fn lexicon_lookups() {
        let l = Lexicon::shipped();
        let e = l.lookup("PLANT").unwrap();
        assert_eq!(e.composition, Some(vec![6, 10]));
        assert_eq!(e.gloss, "plant");
        assert_eq!(l.lookup("TREBONE").unwrap().composition, Some(vec![17, 34]));
        assert!(l.lookup("XYZZY").is_none());
    }

    #[test]
    fn shipped_tables_validate() {
        let cb = Codebook::shipped();
        let report = cb.validate_table();
        assert!(report.is_empty(), "{:?}", report);
        assert_eq!(cb.table.keys().len(), 55);
    }

    #[test]
    fn duplicate_id_reported_once() {
        let mut keys = SymbolTable::shipped().keys().to_vec();
        let mut dup = keys[5].clone();
        dup.name = "PLAX".into();
        keys.push(dup);
        let report = SymbolTable::from_keys(keys).validate();
        assert_eq!(report.violations, vec![Violation::DuplicateId(6)]);
    }

    #[test]
    fn plat_composition_consistent() {
        let t = SymbolTable::shipped();
        assert_eq!(compose_primary(&t, &[6, 2]).unwrap(), "PLAT");
    }

    #[test]
    fn bad_composition_reported() {
        let t = SymbolTable::shipped();
        let lex = Lexicon::parse("PLOT|6,2|plate|Fig 61\n").unwrap();
        assert_eq!(
            lex.validate(&t).violations,
            vec![Violation::CompositionMismatch {
                word: "PLOT".into(),
                merged: "PLAT".into()
            }]
        );
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let keys = include_str!("../data/keys.txt");
        assert_eq!(SymbolTable::parse(keys).unwrap().serialize(), keys);
        let lex = include_str!("../data/lexicon.txt");
        assert_eq!(Lexicon::parse(lex).unwrap().serialize(), lex);
    }

    #[test]
    fn format_errors_carry_line() {
        let err = SymbolTable::parse("1|ORT|ORT@Any@1||Fig 22\n2|AT|AT@Nowhere@1||x\n").unwrap_err();
        assert!(matches!(err, TableError::Format { line: 2, .. }));
    }

    #[test]
    fn plural_stem_only_for_composed_at_words() {
        let l = Lexicon::shipped();
        assert_eq!(l.plural_stem("RETORTAT").unwrap().word, "RETORT");
        assert!(l.plural_stem("TREAT").is_none());
        assert!(l.plural_stem("PLAT").is_none());
    }
}
