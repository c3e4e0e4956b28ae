//! Reading lattices, ranking and explanation.

mod search;
mod segment;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

pub use crate::merge::merge_boundaries;
use crate::merge::{dedups, keeps_double, push_merged};
use crate::rules::{build_columns, parse_pieces, render_pieces, Column, Piece, RuleId};
use crate::symbol_table::Codebook;
use crate::transcription::TokenLine;
pub use search::k_best;
use search::Key3;
pub use segment::{segment, segment_words, Segment, Segmentation};

/// Options for each group before the line-level search.
const GROUP_OPTIONS: usize = 2048;
/// Paths rescored exactly per line, independent of the requested k.
const POOL: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecodeOptions {
    pub max_readings: usize,
    pub keep_marks: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            max_readings: 16,
            keep_marks: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingLattice {
    pub columns: Vec<Column>,
    pub source: TokenLine,
    pub options: DecodeOptions,
}

/// Ranking key: fewer letters outside the lexicon, then words that keep to
/// the drawn grouping, then cheaper spellings, then fewer fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Score {
    pub opaque_chars: u32,
    /// Word splits and break crossings of the segmentation, plus gaps
    /// closed by rules.
    pub misalignment: u32,
    pub rank_cost: u32,
    pub fragments: u32,
    pub lexicon_chars: u32,
}

impl Score {
    fn key(&self) -> (u32, u32, u32, u32) {
        (self.opaque_chars, self.misalignment, self.rank_cost, self.fragments)
    }
}

impl Ord for Score {
    /// `Less` means better.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "opaque={} misalign={} cost={} frag={} lex={}",
            self.opaque_chars, self.misalignment, self.rank_cost, self.fragments, self.lexicon_chars
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub span: Range<usize>,
    pub rule: RuleId,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RuleTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reading {
    pub surface: String,
    pub segmentation: Segmentation,
    pub score: Score,
    pub trace: RuleTrace,
    /// Chosen candidate index per column.
    pub choice: Vec<usize>,
}

impl Reading {
    /// Surface without marks, as used for fixture comparison.
    pub fn normalized(&self) -> String {
        let words: Vec<&str> = self
            .surface
            .split(' ')
            .filter(|w| !matches!(*w, "." | "," | "(pl.)"))
            .collect();
        normalize(&words.join(" "))
    }
}

/// Uppercase, drop everything but letters, digits and spaces, collapse
/// spaces.
pub fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_ascii_alphanumeric())
                .map(|c| c.to_ascii_uppercase())
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Out {
    Word(String),
    Dot,
    Comma,
    Plural,
}

struct Rendered {
    out: Vec<Out>,
    dedup_steps: Vec<TraceStep>,
}

impl Rendered {
    fn words(&self) -> Vec<&str> {
        self.out
            .iter()
            .filter_map(|o| match o {
                Out::Word(w) => Some(w.as_str()),
                _ => None,
            })
            .collect()
    }

    fn surface(&self, keep_marks: bool) -> String {
        self.out
            .iter()
            .filter_map(|o| match o {
                Out::Word(w) => Some(w.as_str()),
                Out::Dot if keep_marks => Some("."),
                Out::Comma if keep_marks => Some(","),
                Out::Plural if keep_marks => Some("(pl.)"),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Joins pieces into words under the boundary rule.
fn render<'a, I>(items: I) -> Rendered
where
    I: IntoIterator<Item = (&'a Range<usize>, &'a [Piece])>,
{
    let mut out = Vec::new();
    let mut dedup_steps = Vec::new();
    let mut word = String::new();
    let mut word_span: Option<Range<usize>> = None;
    let flush = |word: &mut String, word_span: &mut Option<Range<usize>>, out: &mut Vec<Out>| {
        if !word.is_empty() {
            out.push(Out::Word(std::mem::take(word)));
        }
        *word_span = None;
    };
    for (span, pieces) in items {
        for p in pieces {
            match p {
                Piece::Letters(s) => {
                    if dedups(&word, s) {
                        let before = format!("{word},{s}");
                        let start = word_span.as_ref().map_or(span.start, |w| w.start);
                        push_merged(&mut word, s);
                        dedup_steps.push(TraceStep {
                            span: start..span.end,
                            rule: RuleId::BoundaryDedup,
                            before,
                            after: word.clone(),
                        });
                    } else {
                        word.push_str(s);
                    }
                    word_span = Some(match word_span {
                        Some(w) => w.start..span.end,
                        None => span.clone(),
                    });
                }
                Piece::Break => flush(&mut word, &mut word_span, &mut out),
                mark => {
                    flush(&mut word, &mut word_span, &mut out);
                    out.push(match mark {
                        Piece::Dot => Out::Dot,
                        Piece::Comma => Out::Comma,
                        _ => Out::Plural,
                    });
                }
            }
        }
    }
    flush(&mut word, &mut word_span, &mut out);
    Rendered { out, dedup_steps }
}

impl ReadingLattice {
    fn render_choice(&self, choice: &[usize]) -> Rendered {
        render(
            self.columns
                .iter()
                .zip(choice)
                .map(|(c, &k)| (&c.span, c.candidates[k].pieces.as_slice())),
        )
    }

    fn reading(&self, choice: Vec<usize>, cb: &Codebook) -> Reading {
        let rendered = self.render_choice(&choice);
        let segmentation = segment_words(&rendered.words(), &cb.lexicon);
        let (rank_cost, joins) = self.tally(&self.columns, &choice);
        let mut steps = Vec::new();
        for (c, &k) in self.columns.iter().zip(&choice) {
            for s in &c.candidates[k].steps {
                steps.push(TraceStep {
                    span: c.span.clone(),
                    rule: s.rule,
                    before: s.before.clone(),
                    after: s.after.clone(),
                });
            }
        }
        steps.extend(rendered.dedup_steps.iter().cloned());
        Reading {
            surface: rendered.surface(self.options.keep_marks),
            score: Score {
                opaque_chars: segmentation.opaque_chars,
                misalignment: segmentation.misalignment() + joins,
                rank_cost,
                fragments: segmentation.fragments,
                lexicon_chars: segmentation.lexicon_chars,
            },
            segmentation,
            trace: RuleTrace { steps },
            choice,
        }
    }

    /// Summed cost and gap joins of a choice over `cols`.
    fn tally(&self, cols: &[Column], choice: &[usize]) -> (u32, u32) {
        cols.iter().zip(choice).fold((0, 0), |(c, j), (col, &k)| {
            let cand = &col.candidates[k];
            (c + cand.cost, j + cand.joins)
        })
    }

    /// Column ranges between drawn gaps.
    fn groups(&self) -> Vec<Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for (i, c) in self.columns.iter().enumerate() {
            let is_gap = c.readers.is_empty()
                && c.candidates.len() == 1
                && c.candidates[0].pieces == [Piece::Break];
            if is_gap {
                if start < i {
                    groups.push(start..i);
                }
                start = i + 1;
            }
        }
        if start < self.columns.len() {
            groups.push(start..self.columns.len());
        }
        groups
    }

    /// Distinct options of one group, best local score first.
    fn group_options(&self, group: &Range<usize>, cb: &Codebook) -> Vec<(Key3, Vec<usize>)> {
        let cols = &self.columns[group.clone()];
        let lists: Vec<Vec<u32>> = cols
            .iter()
            .map(|c| c.candidates.iter().map(|x| x.cost).collect())
            .collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for idx in k_best(&lists, GROUP_OPTIONS) {
            let rendered = render(
                cols.iter()
                    .zip(&idx)
                    .map(|(c, &k)| (&c.span, c.candidates[k].pieces.as_slice())),
            );
            if !seen.insert(rendered.out.clone()) {
                continue;
            }
            let seg = segment_words(&rendered.words(), &cb.lexicon);
            let (cost, joins) = self.tally(cols, &idx);
            out.push((
                Key3(
                    seg.opaque_chars as i64,
                    (seg.misalignment() + joins) as i64,
                    cost as i64,
                ),
                idx,
            ));
        }
        out.sort();
        out
    }

    fn pool(&self, cb: &Codebook) -> Vec<Reading> {
        let groups = self.groups();
        let options: Vec<Vec<(Key3, Vec<usize>)>> =
            groups.iter().map(|g| self.group_options(g, cb)).collect();
        let lists: Vec<Vec<Key3>> = options
            .iter()
            .map(|o| o.iter().map(|(k, _)| *k).collect())
            .collect();
        let mut readings = Vec::new();
        for pick in k_best(&lists, POOL) {
            let mut choice = vec![0usize; self.columns.len()];
            for ((g, opts), &p) in groups.iter().zip(&options).zip(&pick) {
                for (offset, &k) in opts[p].1.iter().enumerate() {
                    choice[g.start + offset] = k;
                }
            }
            readings.push(self.reading(choice, cb));
        }
        readings.sort_by(|a, b| {
            a.score
                .cmp(&b.score)
                .then_with(|| a.surface.cmp(&b.surface))
                .then_with(|| a.choice.cmp(&b.choice))
        });
        let mut seen = HashSet::new();
        readings.retain(|r| seen.insert(r.surface.clone()));
        readings
    }

    /// True if some path through the lattice renders `text` once marks are
    /// dropped. `text` is compared after `normalize`.
    pub fn admits(&self, text: &str) -> bool {
        let target = normalize(text);
        let t = target.as_bytes();
        // State: (position in target, inside a word).
        let mut states: BTreeSet<(usize, bool)> = BTreeSet::new();
        states.insert((0, false));
        for col in &self.columns {
            let mut next = BTreeSet::new();
            for &(pos, in_word) in &states {
                for cand in &col.candidates {
                    if let Some(s) = advance(t, pos, in_word, &cand.pieces) {
                        next.insert(s);
                    }
                }
            }
            states = next;
            if states.is_empty() {
                return false;
            }
        }
        states.iter().any(|&(pos, _)| pos == t.len())
    }
}

fn advance(t: &[u8], mut pos: usize, mut in_word: bool, pieces: &[Piece]) -> Option<(usize, bool)> {
    for p in pieces {
        match p {
            Piece::Letters(s) => {
                let s = s.as_bytes();
                let skip = in_word
                    && pos > 0
                    && t[pos - 1] == s[0]
                    && !(pos >= 2 && &t[pos - 2..pos] == b"RI" && s[0] == b'I');
                let rest = if skip { &s[1..] } else { s };
                if t.len() < pos + rest.len() || &t[pos..pos + rest.len()] != rest {
                    return None;
                }
                pos += rest.len();
                in_word = true;
            }
            _ => {
                if in_word {
                    if pos < t.len() && t[pos] == b' ' {
                        pos += 1;
                        in_word = false;
                    } else if pos == t.len() {
                        in_word = false;
                    } else {
                        return None;
                    }
                }
            }
        }
    }
    Some((pos, in_word))
}

/// Builds the lattice for a line.
pub fn decode_line(line: &TokenLine, opts: DecodeOptions, cb: &Codebook) -> ReadingLattice {
    ReadingLattice {
        columns: build_columns(line, cb),
        source: line.clone(),
        options: opts,
    }
}

pub fn enumerate_readings(lattice: &ReadingLattice, k: usize, cb: &Codebook) -> Vec<Reading> {
    let mut all = lattice.pool(cb);
    all.truncate(k.max(1));
    all
}

pub fn best_reading(lattice: &ReadingLattice, cb: &Codebook) -> Reading {
    enumerate_readings(lattice, 1, cb)
        .into_iter()
        .next()
        .expect("every lattice has at least one path")
}

pub fn explain(line: &TokenLine, cb: &Codebook) -> RuleTrace {
    let lattice = decode_line(line, DecodeOptions::default(), cb);
    best_reading(&lattice, cb).trace
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index} expects {expected:?} but the column reads {found:?}")]
    Mismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("step {index} spans {span:?}, which is not a column")]
    NoColumn { index: usize, span: Range<usize> },
    #[error("boundary step {index} is not produced by the merge")]
    Dedup { index: usize },
}

/// Replays a trace from the rank-1 renderings of the lattice's columns and
/// returns the resulting surface.
pub fn replay(lattice: &ReadingLattice, trace: &RuleTrace) -> Result<String, ReplayError> {
    let mut current: Vec<String> = lattice.columns.iter().map(|c| c.raw.clone()).collect();
    let mut dedup = Vec::new();
    for (index, step) in trace.steps.iter().enumerate() {
        if step.rule == RuleId::BoundaryDedup {
            dedup.push((index, step));
            continue;
        }
        let col = lattice
            .columns
            .iter()
            .position(|c| c.span == step.span)
            .ok_or(ReplayError::NoColumn {
                index,
                span: step.span.clone(),
            })?;
        if current[col] != step.before {
            return Err(ReplayError::Mismatch {
                index,
                expected: step.before.clone(),
                found: current[col].clone(),
            });
        }
        current[col] = step.after.clone();
    }
    let pieces: Vec<Vec<Piece>> = current.iter().map(|s| parse_pieces(s)).collect();
    let rendered = render(lattice.columns.iter().zip(&pieces).map(|(c, p)| (&c.span, p.as_slice())));
    for (index, step) in dedup {
        if !rendered.dedup_steps.contains(step) {
            return Err(ReplayError::Dedup { index });
        }
    }
    Ok(rendered.surface(lattice.options.keep_marks))
}

/// True if the RI+I exception applies at this junction.
pub fn riin_exception(acc: &str, next: &str) -> bool {
    keeps_double(acc, next)
}

pub fn render_candidate(pieces: &[Piece]) -> String {
    render_pieces(pieces)
}
