//! The fixture corpus of worked decipherments, and symbol statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::decoder::{decode_line, enumerate_readings, normalize, segment, DecodeOptions};
use crate::sidecodes::{order_masked_letters, roman_date_candidates, PlacedLetter};
use crate::symbol_table::{Codebook, KeyId, SymbolTable};
use crate::transcription::{parse_line, Document, Token, TokenLine};

const SHIPPED: &str = include_str!("../data/fixtures.txt");

/// Readings a decode fixture may search.
pub const FIXTURE_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixtureKind {
    /// Expected reading within the top readings.
    Decode,
    /// Expected reading at rank 1.
    DecodeTop1,
    /// Membership only; the reading itself is uncertain.
    DecodeSoft,
    /// Expected words of the dictionary segmentation of a surface.
    Segment,
    /// `CH,x,y` placements separated by `;`.
    MaskedLetters,
    RomanDate,
}

impl FixtureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::Decode => "decode",
            FixtureKind::DecodeTop1 => "decode-top1",
            FixtureKind::DecodeSoft => "decode-soft",
            FixtureKind::Segment => "segment",
            FixtureKind::MaskedLetters => "masked",
            FixtureKind::RomanDate => "romandate",
        }
    }

    pub fn is_decode(self) -> bool {
        matches!(
            self,
            FixtureKind::Decode | FixtureKind::DecodeTop1 | FixtureKind::DecodeSoft
        )
    }
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "decode" => FixtureKind::Decode,
            "decode-top1" => FixtureKind::DecodeTop1,
            "decode-soft" => FixtureKind::DecodeSoft,
            "segment" => FixtureKind::Segment,
            "masked" => FixtureKind::MaskedLetters,
            "romandate" => FixtureKind::RomanDate,
            _ => return Err(s.to_string()),
        })
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fixture {
    pub id: String,
    pub kind: FixtureKind,
    pub input: String,
    /// One or more expected strings separated by `;`. Every one must hold.
    pub expected: String,
    pub anchor: String,
}

impl Fixture {
    pub fn expectations(&self) -> Vec<&str> {
        self.expected.split(';').map(str::trim).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 5 fields separated by '|'")]
    FieldCount { line: usize },
    #[error("line {line}: unknown fixture kind {kind:?}")]
    Kind { line: usize, kind: String },
    #[error("line {line}: field {field} is empty")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: duplicate fixture id {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusLine {
    Comment(String),
    Blank,
    Fixture(Fixture),
}

/// A fixture file, comments included so it serializes back unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub lines: Vec<CorpusLine>,
}

impl Corpus {
    pub fn shipped() -> Self {
        Corpus::parse(SHIPPED).expect("shipped fixtures parse")
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut lines = Vec::new();
        let mut ids = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            if raw.trim().is_empty() {
                lines.push(CorpusLine::Blank);
                continue;
            }
            if raw.starts_with('#') {
                lines.push(CorpusLine::Comment(raw.to_string()));
                continue;
            }
            let f: Vec<&str> = raw.split('|').collect();
            let [id, kind, input, expected, anchor] = f.as_slice() else {
                return Err(CorpusError::FieldCount { line });
            };
            for (field, v) in [("id", id), ("input", input), ("expected", expected), ("anchor", anchor)] {
                if v.trim().is_empty() {
                    return Err(CorpusError::EmptyField { line, field });
                }
            }
            let kind = kind.parse().map_err(|kind| CorpusError::Kind { line, kind })?;
            if !ids.insert(id.to_string()) {
                return Err(CorpusError::DuplicateId {
                    line,
                    id: id.to_string(),
                });
            }
            lines.push(CorpusLine::Fixture(Fixture {
                id: id.to_string(),
                kind,
                input: input.to_string(),
                expected: expected.to_string(),
                anchor: anchor.to_string(),
            }));
        }
        Ok(Corpus { lines })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            match l {
                CorpusLine::Comment(c) => out.push_str(c),
                CorpusLine::Blank => {}
                CorpusLine::Fixture(f) => out.push_str(&format!(
                    "{}|{}|{}|{}|{}",
                    f.id, f.kind, f.input, f.expected, f.anchor
                )),
            }
            out.push('\n');
        }
        out
    }

    pub fn fixtures(&self) -> impl Iterator<Item = &Fixture> {
        self.lines.iter().filter_map(|l| match l {
            CorpusLine::Fixture(f) => Some(f),
            _ => None,
        })
    }

    /// The decode inputs as a document, one line per fixture.
    pub fn document(&self, table: &SymbolTable) -> Document {
        let lines = self
            .fixtures()
            .filter(|f| f.kind.is_decode())
            .filter_map(|f| parse_line(&f.input, &f.id, table).ok())
            .collect();
        Document {
            lines,
            metadata: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureResult {
    pub id: String,
    pub kind: FixtureKind,
    pub passed: bool,
    /// 1-based rank of each expectation, for decode fixtures.
    pub ranks: Vec<Option<usize>>,
    /// What the fixture produced at the top.
    pub got: String,
    /// Word diff of expected against `got` on failure.
    pub diff: Option<String>,
}

/// Word-level diff: `-word` only in `expected`, `+word` only in `got`.
pub fn word_diff(expected: &str, got: &str) -> String {
    let a: Vec<&str> = expected.split_whitespace().collect();
    let b: Vec<&str> = got.split_whitespace().collect();
    let mut lcs = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        if i < a.len() && j < b.len() && a[i] == b[j] {
            out.push(a[i].to_string());
            i += 1;
            j += 1;
        } else if j < b.len() && (i == a.len() || lcs[i][j + 1] >= lcs[i + 1][j]) {
            out.push(format!("+{}", b[j]));
            j += 1;
        } else {
            out.push(format!("-{}", a[i]));
            i += 1;
        }
    }
    out.join(" ")
}

fn result(f: &Fixture, passed: bool, ranks: Vec<Option<usize>>, got: String) -> FixtureResult {
    let diff = (!passed).then(|| {
        f.expectations()
            .iter()
            .map(|e| word_diff(&normalize(e), &got))
            .collect::<Vec<_>>()
            .join(" ; ")
    });
    FixtureResult {
        id: f.id.clone(),
        kind: f.kind,
        passed,
        ranks,
        got,
        diff,
    }
}

pub fn run_fixture(f: &Fixture, cb: &Codebook) -> FixtureResult {
    match f.kind {
        FixtureKind::Decode | FixtureKind::DecodeTop1 | FixtureKind::DecodeSoft => {
            let line = match parse_line(&f.input, &f.id, &cb.table) {
                Ok(l) => l,
                Err(e) => return result(f, false, vec![], format!("parse error: {e}")),
            };
            let lattice = decode_line(&line, DecodeOptions::default(), cb);
            let readings: Vec<String> = enumerate_readings(&lattice, FIXTURE_DEPTH, cb)
                .iter()
                .map(|r| r.normalized())
                .collect();
            let ranks: Vec<Option<usize>> = f
                .expectations()
                .iter()
                .map(|e| {
                    let e = normalize(e);
                    readings.iter().position(|r| *r == e).map(|p| p + 1)
                })
                .collect();
            let passed = if f.kind == FixtureKind::DecodeTop1 {
                ranks.iter().all(|r| *r == Some(1))
            } else {
                ranks.iter().all(Option::is_some)
            };
            let got = readings.first().cloned().unwrap_or_default();
            result(f, passed, ranks, got)
        }
        FixtureKind::Segment => {
            let got = segment(&normalize(&f.input), &cb.lexicon).words().join(" ");
            let passed = f.expectations().iter().all(|e| normalize(e) == normalize(&got));
            result(f, passed, vec![], got)
        }
        FixtureKind::MaskedLetters => {
            let letters: Result<Vec<PlacedLetter>, _> =
                f.input.split(';').map(|s| s.trim().parse::<PlacedLetter>()).collect();
            let got = match letters {
                Ok(l) => order_masked_letters(&l),
                Err(e) => format!("bad placement {e:?}"),
            };
            let passed = f.expectations().iter().all(|e| *e == got);
            result(f, passed, vec![], got)
        }
        FixtureKind::RomanDate => {
            let got = match roman_date_candidates(&f.input) {
                Ok(c) => c
                    .iter()
                    .map(|c| format!("{} {}", c.value, c.interpretation))
                    .collect::<Vec<_>>()
                    .join(";"),
                Err(e) => e.to_string(),
            };
            let passed = f.expected == got;
            result(f, passed, vec![], got)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub results: Vec<FixtureResult>,
    pub passed: usize,
    pub total: usize,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

/// Runs the fixtures whose id contains `filter`, sorted by id.
pub fn run_all<'a, I>(fixtures: I, filter: Option<&str>, cb: &Codebook) -> Summary
where
    I: IntoIterator<Item = &'a Fixture>,
{
    let mut results: Vec<FixtureResult> = fixtures
        .into_iter()
        .filter(|f| filter.is_none_or(|p| f.id.contains(p)))
        .map(|f| run_fixture(f, cb))
        .collect();
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = results.iter().filter(|r| r.passed).count();
    Summary {
        total: results.len(),
        passed,
        results,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub frequencies: BTreeMap<KeyId, usize>,
    pub symbol_tokens: usize,
    /// Sum of rank-1 spelling lengths over all symbol tokens.
    pub letters: usize,
    /// Lines by number of symbol tokens.
    pub line_lengths: BTreeMap<usize, usize>,
}

impl StatsReport {
    pub fn mean_letters_per_symbol(&self) -> Option<f64> {
        (self.symbol_tokens > 0).then(|| self.letters as f64 / self.symbol_tokens as f64)
    }
}

pub fn token_stats(doc: &Document, table: &SymbolTable) -> StatsReport {
    let mut r = StatsReport::default();
    for line in &doc.lines {
        let n = line_stats(line, table, &mut r);
        *r.line_lengths.entry(n).or_default() += 1;
    }
    r
}

fn line_stats(line: &TokenLine, table: &SymbolTable, r: &mut StatsReport) -> usize {
    let mut n = 0;
    for t in &line.tokens {
        if let Token::Symbol(id) = t {
            n += 1;
            *r.frequencies.entry(*id).or_default() += 1;
            r.letters += table.primary(*id).map_or(0, str::len);
        }
    }
    r.symbol_tokens += n;
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcription::parse_document;

    #[test]
    fn shipped_round_trips() {
        let c = Corpus::shipped();
        assert_eq!(c.serialize(), SHIPPED);
        assert!(c.fixtures().count() >= 20);
    }

    #[test]
    fn bad_records() {
        assert_eq!(Corpus::parse("a|decode|x|y"), Err(CorpusError::FieldCount { line: 1 }));
        assert!(matches!(
            Corpus::parse("a|guess|x|y|z"),
            Err(CorpusError::Kind { line: 1, .. })
        ));
        assert!(matches!(
            Corpus::parse("a|decode|PLA|PLA|z\na|decode|PLA|PLA|z"),
            Err(CorpusError::DuplicateId { line: 2, .. })
        ));
        assert_eq!(
            Corpus::parse("a|decode| |PLA|z"),
            Err(CorpusError::EmptyField { line: 1, field: "input" })
        );
    }

    #[test]
    fn empty_corpus_passes() {
        let s = run_all(Corpus::default().fixtures(), None, &Codebook::shipped());
        assert_eq!((s.passed, s.total), (0, 0));
        assert!(s.all_passed());
    }

    #[test]
    fn sabotaged_fixture_fails_with_diff() {
        let cb = Codebook::shipped();
        let c = Corpus::parse("x|decode|PLA ANT|PLANK|test").unwrap();
        let s = run_all(c.fixtures(), None, &cb);
        assert_eq!(s.passed, 0);
        assert_eq!(s.results[0].diff.as_deref(), Some("+PLANT -PLANK"));
    }

    #[test]
    fn diff_marks_changes() {
        assert_eq!(word_diff("A B C", "A X C"), "A +X -B C");
        assert_eq!(word_diff("", "A"), "+A");
    }

    #[test]
    fn ort_ort_stats() {
        let t = SymbolTable::shipped();
        let doc = parse_document("l: ORT ORT", &t).unwrap();
        let s = token_stats(&doc, &t);
        assert_eq!(s.frequencies.get(&1), Some(&2));
        assert_eq!(s.symbol_tokens, 2);
        assert_eq!(s.mean_letters_per_symbol(), Some(3.0));
        assert_eq!(token_stats(&Document::default(), &t), StatsReport::default());
    }
}
