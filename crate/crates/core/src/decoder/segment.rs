//! Dictionary segmentation of a decoded letter stream.

use std::cmp::Reverse;

use serde::Serialize;

use crate::merge::keeps_double;
use crate::symbol_table::Lexicon;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// The word, with a plural ending removed when `plural` is set.
    pub word: String,
    pub lexicon: bool,
    pub gloss: Option<String>,
    pub plural: bool,
}

impl Segment {
    /// The letters this segment covers in the stream.
    pub fn text(&self) -> String {
        if self.plural {
            format!("{}AT", self.word)
        } else {
            self.word.clone()
        }
    }

    pub fn display(&self) -> String {
        if self.plural {
            format!("{} (pl.)", self.word)
        } else {
            self.word.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    pub lexicon_chars: u32,
    /// Letters no lexicon word covers.
    pub opaque_chars: u32,
    /// Number of segments.
    pub fragments: u32,
    /// Segment boundaries inside a surface word.
    pub splits: u32,
    /// Word breaks inside a segment.
    pub crossings: u32,
}

impl Segmentation {
    pub fn reassemble(&self) -> String {
        self.segments.iter().map(Segment::text).collect()
    }

    pub fn words(&self) -> Vec<String> {
        self.segments.iter().map(Segment::display).collect()
    }

    /// How far the segments stray from the surface words.
    pub fn misalignment(&self) -> u32 {
        self.splits + self.crossings
    }
}

/// Tie-break after coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Fewest segments: regroups words freely.
    LongestMatch,
    /// Segments that follow the surface words.
    Aligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lex,
    Opaque,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    cov: u32,
    segs: u32,
    splits: u32,
    crossings: u32,
}

impl Tally {
    fn rank(&self, obj: Objective) -> (Reverse<u32>, u32, u32) {
        match obj {
            Objective::LongestMatch => (Reverse(self.cov), self.segs, self.crossings + self.splits),
            Objective::Aligned => (Reverse(self.cov), self.crossings + self.splits, self.segs),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    tally: Tally,
    /// (previous end, previous kind, extends an opaque run)
    back: (usize, Option<Kind>, bool),
}

/// Segments surface words against the lexicon, keeping to the words where
/// coverage allows.
pub fn segment_words<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> Segmentation {
    segment_with(words, lexicon, Objective::Aligned)
}

/// Segments `surface`, regrouping across spaces into the fewest words.
pub fn segment(surface: &str, lexicon: &Lexicon) -> Segmentation {
    let words: Vec<&str> = surface.split_whitespace().collect();
    segment_with(&words, lexicon, Objective::LongestMatch)
}

pub fn segment_with<S: AsRef<str>>(words: &[S], lexicon: &Lexicon, obj: Objective) -> Segmentation {
    let mut stream = String::new();
    let mut breaks = Vec::new();
    for w in words {
        let w = w.as_ref();
        if w.is_empty() {
            continue;
        }
        if !stream.is_empty() {
            breaks.push(stream.len());
        }
        stream.push_str(w);
    }
    segment_stream(&stream, &breaks, lexicon, obj)
}

fn segment_stream(stream: &str, breaks: &[usize], lexicon: &Lexicon, obj: Objective) -> Segmentation {
    let n = stream.len();
    if n == 0 {
        return Segmentation::default();
    }
    let b = stream.as_bytes();
    let mut is_break = vec![false; n + 1];
    for &p in breaks {
        is_break[p] = true;
    }
    let crossings = |s: usize, t: usize| (s + 1..t).filter(|&p| is_break[p]).count() as u32;
    let max_len = lexicon.max_len();
    let idx = |k: Kind| k as usize;

    // cells[e][kind]: best segmentation of stream[..e] whose last segment
    // has that kind.
    let mut cells: Vec<[Option<Cell>; 2]> = vec![[None, None]; n + 1];
    let relax = |cells: &mut Vec<[Option<Cell>; 2]>, t: usize, kind: Kind, cell: Cell| {
        let slot = &mut cells[t][idx(kind)];
        if slot.is_none_or(|c| cell.tally.rank(obj) < c.tally.rank(obj)) {
            *slot = Some(cell);
        }
    };

    for e in 0..n {
        let sources: Vec<(Option<Kind>, Tally)> = if e == 0 {
            vec![(None, Tally::default())]
        } else {
            [Kind::Lex, Kind::Opaque]
                .into_iter()
                .filter_map(|k| cells[e][idx(k)].map(|c| (Some(k), c.tally)))
                .collect()
        };
        for (prev_kind, tally) in sources {
            // A boundary between equal letters is only possible where the
            // merge would have kept both.
            let can_start = e == 0
                || is_break[e]
                || b[e - 1] != b[e]
                || keeps_double(&stream[..e], &stream[e..]);
            let split = u32::from(e > 0 && !is_break[e]);
            if can_start {
                for t in e + 1..=n.min(e + max_len) {
                    if lexicon.contains(&stream[e..t]) {
                        let tally = Tally {
                            cov: tally.cov + (t - e) as u32,
                            segs: tally.segs + 1,
                            splits: tally.splits + split,
                            crossings: tally.crossings + crossings(e, t),
                        };
                        let back = (e, prev_kind, false);
                        relax(&mut cells, t, Kind::Lex, Cell { tally, back });
                    }
                }
            }
            if prev_kind == Some(Kind::Opaque) && !is_break[e] {
                let back = (e, prev_kind, true);
                relax(&mut cells, e + 1, Kind::Opaque, Cell { tally, back });
            } else if can_start {
                let tally = Tally {
                    segs: tally.segs + 1,
                    splits: tally.splits + split,
                    ..tally
                };
                let back = (e, prev_kind, false);
                relax(&mut cells, e + 1, Kind::Opaque, Cell { tally, back });
            }
        }
    }

    let (mut kind, best) = [Kind::Lex, Kind::Opaque]
        .into_iter()
        .filter_map(|k| cells[n][idx(k)].map(|c| (k, c)))
        .min_by_key(|(_, c)| c.tally.rank(obj))
        .expect("an opaque segmentation always exists");

    // Walk back, then fold opaque extensions into their segment.
    let mut steps: Vec<(usize, usize, Kind, bool)> = Vec::new();
    let mut e = n;
    loop {
        let (prev_end, prev_kind, extend) = cells[e][idx(kind)].expect("reached cells are set").back;
        steps.push((prev_end, e, kind, extend));
        match prev_kind {
            None => break,
            Some(k) => {
                e = prev_end;
                kind = k;
            }
        }
    }
    steps.reverse();
    let mut spans: Vec<(usize, usize, Kind)> = Vec::new();
    for (s, t, kind, extend) in steps {
        match spans.last_mut() {
            Some(last) if extend => last.1 = t,
            _ => spans.push((s, t, kind)),
        }
    }

    let segments = spans
        .into_iter()
        .map(|(s, t, kind)| {
            let text = &stream[s..t];
            match (kind, lexicon.lookup(text)) {
                (Kind::Lex, Some(entry)) => {
                    let stem = lexicon.plural_stem(text);
                    Segment {
                        word: stem.map_or(text, |st| st.word.as_str()).to_string(),
                        lexicon: true,
                        gloss: Some(entry.gloss.clone()),
                        plural: stem.is_some(),
                    }
                }
                _ => Segment {
                    word: text.to_string(),
                    lexicon: false,
                    gloss: None,
                    plural: false,
                },
            }
        })
        .collect();
    let t = best.tally;
    Segmentation {
        segments,
        lexicon_chars: t.cov,
        opaque_chars: n as u32 - t.cov,
        fragments: t.segs,
        splits: t.splits,
        crossings: t.crossings,
    }
}
