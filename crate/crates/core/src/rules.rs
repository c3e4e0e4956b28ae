//! Composition rules and per-token candidate expansion.

use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::symbol_table::{
    Codebook, KeyId, Position, PositionContext, SymbolKey, SymbolTable, TableError, KEY_AT,
    RULE_A, RULE_O,
};
use crate::transcription::{Linkage, Token, TokenLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    OPrefixElision,
    OPostfixReversal,
    OUnlinkedReading,
    ASandwich,
    BoundaryDedup,
    LigatureOrder,
    TerminalAt,
    ContextSpelling,
    GapTransparency,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {rule} does not apply to {spelling:?}")]
    RuleNotApplicable { rule: RuleId, spelling: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

fn not_applicable(rule: RuleId, spelling: &str) -> RuleError {
    RuleError::RuleNotApplicable {
        rule,
        spelling: spelling.to_string(),
    }
}

/// One unit of decoder output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Piece {
    Letters(String),
    /// Word break: a drawn gap or an `o` read as a space.
    Break,
    Dot,
    Comma,
    Plural,
}

impl Piece {
    pub fn letters(s: &str) -> Piece {
        Piece::Letters(s.to_string())
    }

    fn render(&self) -> &str {
        match self {
            Piece::Letters(s) => s,
            Piece::Break => "_",
            Piece::Dot => ".",
            Piece::Comma => "comma",
            Piece::Plural => "(pl.)",
        }
    }

    fn parse(s: &str) -> Piece {
        match s {
            "_" => Piece::Break,
            "." => Piece::Dot,
            "comma" => Piece::Comma,
            "(pl.)" => Piece::Plural,
            other => Piece::Letters(other.to_string()),
        }
    }
}

/// Comma-separated rendering used in traces.
pub fn render_pieces(pieces: &[Piece]) -> String {
    pieces
        .iter()
        .map(Piece::render)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_pieces(s: &str) -> Vec<Piece> {
    if s.is_empty() {
        return Vec::new();
    }
    s.split(',').map(Piece::parse).collect()
}

/// A reading of an unlinked `o`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OReading {
    Text(String),
    Space,
    Dot,
}

impl OReading {
    fn piece(&self) -> Piece {
        match self {
            OReading::Text(s) => Piece::Letters(s.clone()),
            OReading::Space => Piece::Break,
            OReading::Dot => Piece::Dot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: RuleId,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub pieces: Vec<Piece>,
    pub cost: u32,
    /// Drawn gaps this reading closes up.
    pub joins: u32,
    pub rules: Vec<RuleId>,
    pub steps: Vec<Step>,
}

impl Candidate {
    pub fn text(&self) -> String {
        render_pieces(&self.pieces)
    }
}

/// A group of tokens read together, with its alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub span: Range<usize>,
    /// Tokens of the span that contribute a reading; linked `o`s, flanking
    /// `a`s and gaps swallowed by a rule are not listed.
    pub readers: Vec<usize>,
    /// Rank-1 rendering the trace steps start from.
    pub raw: String,
    pub candidates: Vec<Candidate>,
}

pub fn is_vowel(c: char) -> bool {
    matches!(c, 'A' | 'E' | 'I' | 'O' | 'U')
}

/// Drops the middle letter of a three-letter rank-1 spelling.
pub fn apply_o_prefix(key: &SymbolKey) -> Result<String, RuleError> {
    elide(key.primary())
}

fn elide(s: &str) -> Result<String, RuleError> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() != 3 {
        return Err(not_applicable(RuleId::OPrefixElision, s));
    }
    Ok([chars[0], chars[2]].iter().collect())
}

/// Reverses the rank-1 spelling.
pub fn apply_o_postfix(key: &SymbolKey) -> Result<String, RuleError> {
    if key.is_rule_symbol {
        return Err(not_applicable(RuleId::OPostfixReversal, key.primary()));
    }
    Ok(key.primary().chars().rev().collect())
}

/// Last consonant of the rank-1 spelling followed by I.
pub fn apply_a_sandwich(key: &SymbolKey) -> Result<String, RuleError> {
    let s = key.primary();
    if key.is_rule_symbol {
        return Err(not_applicable(RuleId::ASandwich, s));
    }
    s.chars()
        .rev()
        .find(|c| c.is_ascii_uppercase() && !is_vowel(*c))
        .map(|c| format!("{c}I"))
        .ok_or_else(|| not_applicable(RuleId::ASandwich, s))
}

/// Reading order of a ligature: the overlay comes first.
pub fn resolve_ligature(base: KeyId, overlay: KeyId) -> (KeyId, KeyId) {
    (overlay, base)
}

/// Readings of an unlinked `o`, best first.
pub fn o_unlinked_readings(table: &SymbolTable, ctx: PositionContext) -> Vec<OReading> {
    o_readings_at(table, Position::single(ctx))
}

pub fn o_readings_at(table: &SymbolTable, pos: Position) -> Vec<OReading> {
    let words: Vec<OReading> = table
        .spellings_at(RULE_O, pos)
        .unwrap_or_default()
        .into_iter()
        .map(|s| OReading::Text(s.text))
        .collect();
    if pos.has(PositionContext::BeforeRuleO) {
        let mut out = vec![OReading::Dot];
        out.extend(words);
        out.push(OReading::Space);
        return out;
    }
    let mut out = words;
    if pos.has(PositionContext::LineFinal) {
        out.extend([OReading::Dot, OReading::Space]);
    } else {
        out.extend([OReading::Space, OReading::Dot]);
    }
    out
}

/// Context flags for every token of a line.
pub fn positions(tokens: &[Token]) -> Vec<Position> {
    let n = tokens.len();
    let prev_real = |i: usize| (0..i).rev().find(|&j| !tokens[j].is_gap());
    let next_real = |i: usize| (i + 1..n).find(|&j| !tokens[j].is_gap());
    (0..n)
        .map(|i| {
            let mut p = Position::new();
            if i == 0 {
                p.insert(PositionContext::LineInitial);
            }
            if i + 1 == n {
                p.insert(PositionContext::LineFinal);
            }
            let group_start = i == 0 || tokens[i - 1].is_gap();
            let group_end = i + 1 == n || tokens[i + 1].is_gap();
            if group_end {
                p.insert(PositionContext::WordFinal);
            }
            if group_start && group_end {
                p.insert(PositionContext::Isolated);
            }
            if i > 0 && tokens[i - 1] == Token::RuleA {
                p.insert(PositionContext::AfterRuleA);
                if i + 1 < n && tokens[i + 1] == Token::RuleA {
                    p.insert(PositionContext::BetweenRuleA);
                }
            }
            if prev_real(i).is_some_and(|j| tokens[j].is_rule_o()) {
                p.insert(PositionContext::AfterRuleO);
            }
            if next_real(i).is_some_and(|j| tokens[j].is_rule_o()) {
                p.insert(PositionContext::BeforeRuleO);
            }
            p
        })
        .collect()
}

/// Records the rule steps that turn the raw rendering into a candidate.
#[derive(Clone)]
struct Chain {
    cur: Vec<Piece>,
    cost: u32,
    rules: Vec<RuleId>,
    steps: Vec<Step>,
}

impl Chain {
    fn new(raw: Vec<Piece>) -> Self {
        Chain {
            cur: raw,
            cost: 0,
            rules: Vec::new(),
            steps: Vec::new(),
        }
    }

    fn tag(&mut self, rule: RuleId) {
        if !self.rules.contains(&rule) {
            self.rules.push(rule);
        }
    }

    fn apply(&mut self, rule: RuleId, next: Vec<Piece>) {
        self.tag(rule);
        if next != self.cur {
            self.steps.push(Step {
                rule,
                before: render_pieces(&self.cur),
                after: render_pieces(&next),
            });
            self.cur = next;
        }
    }

    fn finish(self) -> Candidate {
        Candidate {
            pieces: self.cur,
            cost: self.cost,
            joins: 0,
            rules: self.rules,
            steps: self.steps,
        }
    }
}

/// One choice for a single symbol: its pieces, cost and rule tags.
#[derive(Debug, Clone)]
struct Choice {
    pieces: Vec<Piece>,
    cost: u32,
    rule: Option<RuleId>,
}

fn symbol_choices(cb: &Codebook, id: KeyId, pos: Position) -> Vec<Choice> {
    let key = match cb.table.lookup(id) {
        Ok(k) => k,
        Err(_) => return Vec::new(),
    };
    let primary = key.primary().to_string();
    let spellings = cb.table.spellings_at(id, pos).unwrap_or_default();
    let terminal_at = id == KEY_AT
        && pos.has(PositionContext::WordFinal)
        && !pos.has(PositionContext::Isolated);
    let mut out: Vec<Choice> = spellings
        .iter()
        .enumerate()
        .map(|(i, s)| Choice {
            pieces: vec![Piece::Letters(s.text.clone())],
            cost: i as u32 + 1,
            rule: if s.text == primary {
                None
            } else if terminal_at {
                Some(RuleId::TerminalAt)
            } else {
                Some(RuleId::ContextSpelling)
            },
        })
        .collect();
    if terminal_at {
        let n = out.len() as u32;
        out.push(Choice {
            pieces: vec![Piece::Plural],
            cost: n + 1,
            rule: Some(RuleId::TerminalAt),
        });
        out.push(Choice {
            pieces: vec![Piece::Comma],
            cost: n + 2,
            rule: Some(RuleId::TerminalAt),
        });
    }
    out
}

fn o_choices(cb: &Codebook, pos: Position) -> Vec<Choice> {
    o_readings_at(&cb.table, pos)
        .iter()
        .enumerate()
        .map(|(i, r)| Choice {
            pieces: vec![r.piece()],
            cost: i as u32 + 1,
            rule: Some(RuleId::OUnlinkedReading),
        })
        .collect()
}

fn primary_piece(cb: &Codebook, id: KeyId) -> Piece {
    Piece::Letters(cb.table.primary(id).unwrap_or("").to_string())
}

/// Plan of how the tokens of a line group into columns.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Plan {
    Gap(usize),
    Plain(usize),
    Sandwich { span: Range<usize>, target: usize },
    Linked { o: usize, target: usize },
    Unlinked { o: usize, prev: Option<usize>, next: Option<usize> },
}

fn plan(line: &TokenLine) -> Vec<Plan> {
    let t = &line.tokens;
    let n = t.len();
    let is_sym = |i: usize| matches!(t[i], Token::Symbol(_));
    let mut claimed = vec![false; n];

    let mut sandwich = vec![false; n];
    for i in 1..n.saturating_sub(1) {
        if is_sym(i) && t[i - 1] == Token::RuleA && t[i + 1] == Token::RuleA {
            sandwich[i] = true;
            claimed[i - 1] = true;
            claimed[i] = true;
            claimed[i + 1] = true;
        }
    }

    let mut link_target: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let target = match t[i] {
            Token::RuleO(Linkage::LinkedToNext) if i + 1 < n => i + 1,
            Token::RuleO(Linkage::LinkedToPrevious) if i > 0 => i - 1,
            _ => continue,
        };
        if is_sym(target) && !claimed[target] {
            claimed[target] = true;
            claimed[i] = true;
            link_target[i] = Some(target);
        }
    }

    let mut unlinked: Vec<Option<(Option<usize>, Option<usize>)>> = vec![None; n];
    for i in 0..n {
        if !t[i].is_rule_o() || claimed[i] {
            continue;
        }
        claimed[i] = true;
        let free = |j: usize, claimed: &[bool]| is_sym(j) && !claimed[j];
        let prev = (0..i)
            .rev()
            .find(|&j| !t[j].is_gap())
            .filter(|&j| free(j, &claimed));
        if let Some(j) = prev {
            claimed[j] = true;
        }
        let next = (i + 1..n)
            .find(|&j| !t[j].is_gap())
            .filter(|&j| free(j, &claimed));
        if let Some(j) = next {
            claimed[j] = true;
        }
        unlinked[i] = Some((prev, next));
    }

    let mut plans = Vec::new();
    let mut covered = vec![false; n];
    let cover = |r: Range<usize>, covered: &mut Vec<bool>| {
        for k in r {
            covered[k] = true;
        }
    };
    // Walk in order; a plan is emitted at the first token of its span.
    let mut items: Vec<(usize, Plan)> = Vec::new();
    for i in 0..n {
        if let Some((prev, next)) = unlinked[i] {
            let start = prev.unwrap_or(i);
            let end = next.unwrap_or(i) + 1;
            items.push((start, Plan::Unlinked { o: i, prev, next }));
            cover(start..end, &mut covered);
        }
        if let Some(target) = link_target[i] {
            let start = i.min(target);
            items.push((start, Plan::Linked { o: i, target }));
            cover(start..i.max(target) + 1, &mut covered);
        }
        if sandwich[i] {
            // A shared middle `a` belongs to the earlier sandwich.
            let start = if covered[i - 1] { i } else { i - 1 };
            items.push((start, Plan::Sandwich { span: start..i + 2, target: i }));
            cover(start..i + 2, &mut covered);
        }
    }
    for i in 0..n {
        if !covered[i] {
            items.push((
                i,
                if t[i].is_gap() {
                    Plan::Gap(i)
                } else {
                    Plan::Plain(i)
                },
            ));
        }
    }
    items.sort_by_key(|(start, _)| *start);
    plans.extend(items.into_iter().map(|(_, p)| p));
    plans
}

fn finish_column(span: Range<usize>, readers: Vec<usize>, raw: &[Piece], chains: Vec<Chain>) -> Column {
    let breaks = |p: &[Piece]| p.iter().filter(|x| **x == Piece::Break).count() as u32;
    let mut candidates: Vec<Candidate> = Vec::new();
    for c in chains {
        let mut cand = c.finish();
        cand.joins = breaks(raw).saturating_sub(breaks(&cand.pieces));
        match candidates.iter_mut().find(|x| x.pieces == cand.pieces) {
            Some(existing) if existing.cost <= cand.cost => {}
            Some(existing) => *existing = cand,
            None => candidates.push(cand),
        }
    }
    candidates.sort_by(|a, b| a.cost.cmp(&b.cost).then_with(|| a.pieces.cmp(&b.pieces)));
    Column {
        span,
        readers,
        raw: render_pieces(raw),
        candidates,
    }
}

/// Replaces raw pieces by the chosen spellings, one step per change.
fn apply_choices(chain: &mut Chain, parts: &[(usize, &Choice)]) {
    let mut next = chain.cur.clone();
    for (idx, choice) in parts {
        chain.cost += choice.cost;
        next[*idx] = choice.pieces[0].clone();
        if let Some(rule) = choice.rule {
            chain.apply(rule, next.clone());
        }
    }
}

fn choice_chain(raw: &[Piece], parts: &[(usize, &Choice)]) -> Chain {
    let mut chain = Chain::new(raw.to_vec());
    apply_choices(&mut chain, parts);
    chain
}

fn build_column(cb: &Codebook, line: &TokenLine, pos: &[Position], plan: &Plan) -> Column {
    let t = &line.tokens;
    match plan {
        Plan::Gap(i) => {
            let raw = vec![Piece::Break];
            finish_column(*i..*i + 1, Vec::new(), &raw, vec![Chain::new(raw.clone())])
        }
        Plan::Plain(i) => {
            let i = *i;
            match &t[i] {
                Token::Symbol(id) => {
                    let raw = vec![primary_piece(cb, *id)];
                    let chains = symbol_choices(cb, *id, pos[i])
                        .iter()
                        .map(|c| choice_chain(&raw, &[(0, c)]))
                        .collect();
                    finish_column(i..i + 1, vec![i], &raw, chains)
                }
                Token::RuleA => {
                    let raw = vec![primary_piece(cb, RULE_A)];
                    let chains = symbol_choices(cb, RULE_A, pos[i])
                        .iter()
                        .map(|c| choice_chain(&raw, &[(0, c)]))
                        .collect();
                    finish_column(i..i + 1, vec![i], &raw, chains)
                }
                Token::RuleO(_) => {
                    let raw = vec![primary_piece(cb, RULE_O)];
                    let chains = o_choices(cb, pos[i])
                        .iter()
                        .map(|c| choice_chain(&raw, &[(0, c)]))
                        .collect();
                    finish_column(i..i + 1, vec![i], &raw, chains)
                }
                Token::Ligature { base, overlay } => {
                    let raw = vec![primary_piece(cb, *base), primary_piece(cb, *overlay)];
                    let (first, second) = resolve_ligature(*base, *overlay);
                    let mut chains = Vec::new();
                    for a in symbol_choices(cb, first, pos[i]) {
                        for b in symbol_choices(cb, second, pos[i]) {
                            if !matches!(a.pieces[0], Piece::Letters(_))
                                || !matches!(b.pieces[0], Piece::Letters(_))
                            {
                                continue;
                            }
                            let mut chain = Chain::new(raw.clone());
                            chain.apply(
                                RuleId::LigatureOrder,
                                vec![primary_piece(cb, first), primary_piece(cb, second)],
                            );
                            apply_choices(&mut chain, &[(0, &a), (1, &b)]);
                            chain.cost -= 1;
                            chains.push(chain);
                        }
                    }
                    finish_column(i..i + 1, vec![i], &raw, chains)
                }
                Token::Unread(s) => {
                    let raw = vec![Piece::Letters(s.clone())];
                    let mut chain = Chain::new(raw.clone());
                    chain.cost = 1;
                    finish_column(i..i + 1, vec![i], &raw, vec![chain])
                }
                Token::Gap => unreachable!("gaps are planned separately"),
            }
        }
        Plan::Sandwich { span, target } => {
            let id = match t[*target] {
                Token::Symbol(id) => id,
                _ => unreachable!("sandwich targets are symbols"),
            };
            let raw = vec![primary_piece(cb, id)];
            let mut chain = Chain::new(raw.clone());
            chain.cost = 1;
            match cb.table.lookup(id).map_err(RuleError::from).and_then(apply_a_sandwich) {
                Ok(s) => chain.apply(RuleId::ASandwich, vec![Piece::Letters(s)]),
                Err(_) => chain.tag(RuleId::ASandwich),
            }
            finish_column(span.clone(), vec![*target], &raw, vec![chain])
        }
        Plan::Linked { o, target } => {
            let (o, target) = (*o, *target);
            let id = match t[target] {
                Token::Symbol(id) => id,
                _ => unreachable!("link targets are symbols"),
            };
            let key = cb.table.lookup(id).expect("parsed ids exist");
            let span = o.min(target)..o.max(target) + 1;
            let before_target = o < target;
            let raw = vec![primary_piece(cb, id)];
            let mut chains = Vec::new();
            let (first_rule, first) = if before_target {
                (RuleId::OPrefixElision, apply_o_prefix(key))
            } else {
                (RuleId::OPostfixReversal, apply_o_postfix(key))
            };
            if let Ok(s) = first {
                let mut chain = Chain::new(raw.clone());
                chain.apply(first_rule, vec![Piece::Letters(s)]);
                chain.cost = 1;
                chains.push(chain);
            }
            if !before_target {
                if let Ok(s) = apply_o_prefix(key) {
                    let mut chain = Chain::new(raw.clone());
                    chain.apply(RuleId::OPrefixElision, vec![Piece::Letters(s)]);
                    chain.cost = 2;
                    chains.push(chain);
                }
            }
            let readers = vec![target];
            finish_column(span, readers, &raw, chains)
        }
        Plan::Unlinked { o, prev, next } => unlinked_column(cb, line, pos, *o, *prev, *next),
    }
}

fn unlinked_column(
    cb: &Codebook,
    line: &TokenLine,
    pos: &[Position],
    o: usize,
    prev: Option<usize>,
    next: Option<usize>,
) -> Column {
    let t = &line.tokens;
    let sym = |i: usize| match t[i] {
        Token::Symbol(id) => id,
        _ => unreachable!("unlinked neighbours are symbols"),
    };
    let start = prev.unwrap_or(o);
    let end = next.unwrap_or(o) + 1;
    let gap_before = prev.is_some_and(|p| p + 1 < o);
    let gap_after = next.is_some_and(|q| o + 1 < q);

    // Raw layout: [prev] [_] TO [_] [next]
    let mut raw = Vec::new();
    let mut prev_idx = None;
    let mut next_idx = None;
    if let Some(p) = prev {
        prev_idx = Some(raw.len());
        raw.push(primary_piece(cb, sym(p)));
        if gap_before {
            raw.push(Piece::Break);
        }
    }
    let o_idx = raw.len();
    raw.push(primary_piece(cb, RULE_O));
    if let Some(q) = next {
        if gap_after {
            raw.push(Piece::Break);
        }
        next_idx = Some(raw.len());
        raw.push(primary_piece(cb, sym(q)));
    }

    let prev_choices = prev.map(|p| symbol_choices(cb, sym(p), pos[p]));
    let next_choices = next.map(|q| symbol_choices(cb, sym(q), pos[q]));
    let one = |c: &Option<Vec<Choice>>| -> Vec<Option<Choice>> {
        match c {
            Some(v) => v.iter().cloned().map(Some).collect(),
            None => vec![None],
        }
    };

    let mut chains = Vec::new();
    for oc in o_choices(cb, pos[o]) {
        for pc in one(&prev_choices) {
            for nc in one(&next_choices) {
                let mut parts: Vec<(usize, &Choice)> = vec![(o_idx, &oc)];
                if let (Some(i), Some(c)) = (prev_idx, pc.as_ref()) {
                    parts.push((i, c));
                }
                if let (Some(i), Some(c)) = (next_idx, nc.as_ref()) {
                    parts.push((i, c));
                }
                let mut chain = choice_chain(&raw, &parts);
                chain.tag(RuleId::OUnlinkedReading);
                chains.push(chain);
            }
        }
    }

    // The o acting as a rule on one or both neighbours.
    let reversed = prev
        .and_then(|p| cb.table.lookup(sym(p)).ok())
        .and_then(|k| apply_o_postfix(k).ok());
    let elided = next
        .and_then(|q| cb.table.lookup(sym(q)).ok())
        .and_then(|k| apply_o_prefix(k).ok());
    let mut rule_forms: Vec<(Option<String>, Option<String>, u32)> = Vec::new();
    if let Some(r) = &reversed {
        rule_forms.push((Some(r.clone()), None, 1));
    }
    if let Some(e) = &elided {
        rule_forms.push((None, Some(e.clone()), 1));
    }
    if let (Some(r), Some(e)) = (&reversed, &elided) {
        rule_forms.push((Some(r.clone()), Some(e.clone()), 3));
    }
    for (rev, eli, base) in rule_forms {
        let prev_opts: Vec<Option<Choice>> = match (&rev, &prev_choices) {
            (Some(_), _) => vec![None],
            (None, c) => one(c),
        };
        let next_opts: Vec<Option<Choice>> = match (&eli, &next_choices) {
            (Some(_), _) => vec![None],
            (None, c) => one(c),
        };
        for pc in &prev_opts {
            for nc in &next_opts {
                let mut chain = Chain::new(raw.clone());
                let cost = base + 2;
                let mut cur = raw.clone();
                if let Some(r) = &rev {
                    cur[prev_idx.unwrap()] = Piece::Letters(r.clone());
                    chain.apply(RuleId::OPostfixReversal, cur.clone());
                }
                if let Some(e) = &eli {
                    cur[next_idx.unwrap()] = Piece::Letters(e.clone());
                    chain.apply(RuleId::OPrefixElision, cur.clone());
                }
                chain.cost = cost;
                let mut parts: Vec<(usize, &Choice)> = Vec::new();
                if let (Some(i), Some(c)) = (prev_idx, pc) {
                    parts.push((i, c));
                }
                if let (Some(i), Some(c)) = (next_idx, nc) {
                    parts.push((i, c));
                }
                apply_choices(&mut chain, &parts);
                let cur = chain.cur.clone();
                // The rule consumes the o; gaps around it no longer separate.
                let joined: Vec<Piece> = cur
                    .iter()
                    .enumerate()
                    .filter(|(k, p)| *k != o_idx && **p != Piece::Break)
                    .map(|(_, p)| p.clone())
                    .collect();
                let rule = if gap_before || gap_after {
                    RuleId::GapTransparency
                } else {
                    RuleId::OUnlinkedReading
                };
                chain.apply(rule, joined);
                chains.push(chain);
            }
        }
    }

    let mut readers: Vec<usize> = prev.into_iter().collect();
    readers.push(o);
    readers.extend(next);
    finish_column(start..end, readers, &raw, chains)
}

/// Groups the tokens of a line into columns of alternatives.
pub fn build_columns(line: &TokenLine, cb: &Codebook) -> Vec<Column> {
    let pos = positions(&line.tokens);
    plan(line)
        .iter()
        .map(|p| build_column(cb, line, &pos, p))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub pieces: Vec<Piece>,
    pub rules: Vec<RuleId>,
    pub cost: u32,
}

impl Expansion {
    pub fn text(&self) -> String {
        render_pieces(&self.pieces)
    }
}

/// Candidate set for token `i` given its neighbours. Tokens consumed by a
/// rule (linked `o`, flanking `a`) expand to nothing.
pub fn expand_token(line: &TokenLine, i: usize, cb: &Codebook) -> Vec<Expansion> {
    build_columns(line, cb)
        .into_iter()
        .find(|c| c.span.contains(&i))
        .filter(|c| c.readers.contains(&i) || (c.readers.is_empty() && line.tokens[i].is_gap()))
        .map(|c| {
            c.candidates
                .into_iter()
                .map(|cand| Expansion {
                    pieces: cand.pieces,
                    rules: cand.rules,
                    cost: cand.cost,
                })
                .collect()
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcription::parse_line;

    fn cb() -> Codebook {
        Codebook::shipped()
    }

    fn key(cb: &Codebook, name: &str) -> SymbolKey {
        cb.table.by_name(name).unwrap().clone()
    }

    fn line(cb: &Codebook, s: &str) -> TokenLine {
        parse_line(s, "t", &cb.table).unwrap()
    }

    #[test]
    fn prefix_elision() {
        let cb = cb();
        assert_eq!(apply_o_prefix(&key(&cb, "AND")).unwrap(), "AD");
        assert_eq!(apply_o_prefix(&key(&cb, "INN")).unwrap(), "IN");
        assert!(matches!(
            apply_o_prefix(&key(&cb, "HEAT")),
            Err(RuleError::RuleNotApplicable { .. })
        ));
    }

    #[test]
    fn postfix_reversal() {
        let cb = cb();
        assert_eq!(apply_o_postfix(&key(&cb, "TRE")).unwrap(), "ERT");
        assert_eq!(apply_o_postfix(&key(&cb, "RET")).unwrap(), "TER");
        let mut k = key(&cb, "ORT");
        k.spellings[0].text = "ANA".into();
        assert_eq!(apply_o_postfix(&k).unwrap(), "ANA");
        assert!(apply_o_postfix(cb.table.lookup(RULE_O).unwrap()).is_err());
    }

    #[test]
    fn sandwich() {
        let cb = cb();
        assert_eq!(apply_a_sandwich(&key(&cb, "INN")).unwrap(), "NI");
        assert_eq!(apply_a_sandwich(&key(&cb, "ALL")).unwrap(), "LI");
        assert_eq!(apply_a_sandwich(&key(&cb, "RET")).unwrap(), "TI");
        assert!(apply_a_sandwich(&key(&cb, "FORTY")).is_err());
    }

    #[test]
    fn ligature_order() {
        assert_eq!(resolve_ligature(17, 42), (42, 17));
        assert_eq!(resolve_ligature(33, 44), (44, 33));
    }

    #[test]
    fn o_readings_order() {
        let t = SymbolTable::shipped();
        let text = |r: &OReading| match r {
            OReading::Text(s) => s.clone(),
            OReading::Space => "<space>".into(),
            OReading::Dot => "<dot>".into(),
        };
        let any: Vec<String> = o_unlinked_readings(&t, PositionContext::Any).iter().map(text).collect();
        assert_eq!(any, ["TO", "O", "<space>", "<dot>"]);
        let fin: Vec<String> = o_unlinked_readings(&t, PositionContext::LineFinal).iter().map(text).collect();
        let dot = fin.iter().position(|s| s == "<dot>").unwrap();
        let space = fin.iter().position(|s| s == "<space>").unwrap();
        assert!(dot < space);
    }

    #[test]
    fn expand_linked_and() {
        let cb = cb();
        let l = line(&cb, "o> AND");
        let e = expand_token(&l, 1, &cb);
        assert_eq!(e[0].pieces, [Piece::letters("AD")]);
        assert_eq!(e[0].rules, [RuleId::OPrefixElision]);
        assert!(expand_token(&l, 0, &cb).is_empty());
    }

    #[test]
    fn expand_sandwich() {
        let cb = cb();
        let l = line(&cb, "a INN a");
        let e = expand_token(&l, 1, &cb);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].pieces, [Piece::letters("NI")]);
        assert_eq!(e[0].rules, [RuleId::ASandwich]);
        assert!(expand_token(&l, 0, &cb).is_empty());
        assert!(expand_token(&l, 2, &cb).is_empty());
    }

    #[test]
    fn chained_sandwich_shares_middle_a() {
        let cb = cb();
        let l = line(&cb, "a BEE a ALL a");
        let cols = build_columns(&l, &cb);
        assert_eq!(cols.len(), 2);
        assert_eq!(cols[0].span, 0..3);
        assert_eq!(cols[1].span, 3..5);
        assert_eq!(cols[1].candidates[0].pieces, [Piece::letters("LI")]);
    }

    #[test]
    fn terminal_at() {
        let cb = cb();
        let l = line(&cb, "RET AT");
        let e = expand_token(&l, 1, &cb);
        assert!(e
            .iter()
            .any(|x| x.pieces == [Piece::letters("A")] && x.rules == [RuleId::TerminalAt]));
        assert!(e.iter().any(|x| x.pieces == [Piece::Plural]));
        assert!(e.iter().any(|x| x.pieces == [Piece::Comma]));
        assert!(e.iter().any(|x| x.pieces == [Piece::letters("AT")]));
    }

    #[test]
    fn ligature_column_reads_overlay_first() {
        let cb = cb();
        let l = line(&cb, "TRE~ME");
        let cols = build_columns(&l, &cb);
        let best = &cols[0].candidates[0];
        assert_eq!(best.pieces, [Piece::letters("ME"), Piece::letters("TRE")]);
        assert_eq!(best.steps[0].before, "TRE,ME");
        assert_eq!(best.steps[0].after, "ME,TRE");
    }

    #[test]
    fn unlinked_o_keeps_all_variants() {
        let cb = cb();
        let l = line(&cb, "TRE o INN");
        let texts: Vec<String> = build_columns(&l, &cb)[0]
            .candidates
            .iter()
            .map(|c| c.text())
            .collect();
        for want in ["TRE,TO,INN", "TRE,IN", "ERT,INN", "ERT,IN"] {
            assert!(texts.contains(&want.to_string()), "{want} missing from {texts:?}");
        }
    }

    #[test]
    fn positions_flags() {
        let cb = cb();
        let l = line(&cb, "PLA / o / a INN a AT");
        let p = positions(&l.tokens);
        assert!(p[0].has(PositionContext::Isolated));
        assert!(p[0].has(PositionContext::BeforeRuleO));
        assert!(p[5].has(PositionContext::BetweenRuleA));
        assert!(p[7].has(PositionContext::LineFinal));
        assert!(!p[7].has(PositionContext::Isolated));
    }

    #[test]
    fn pieces_round_trip() {
        let p = vec![
            Piece::letters("ME"),
            Piece::Break,
            Piece::Dot,
            Piece::Comma,
            Piece::Plural,
        ];
        assert_eq!(parse_pieces(&render_pieces(&p)), p);
    }
}
