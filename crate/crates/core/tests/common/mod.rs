//! Property checks shared by the property suite and the acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};

use dunstan::decoder::{decode_line, enumerate_readings, DecodeOptions};
use dunstan::encoder::{encode_word, spell};
use dunstan::merge_boundaries;
use dunstan::rules::apply_o_postfix;
use dunstan::symbol_table::{KeyId, PositionContext, Spelling, SymbolKey};
use dunstan::transcription::{Linkage, Token, TokenLine};
use dunstan::{parse_line, serialize, Codebook};

pub const CASES: u32 = 1000;

pub fn plain_ids(cb: &Codebook) -> Vec<KeyId> {
    cb.table
        .keys()
        .iter()
        .filter(|k| !k.is_rule_symbol)
        .map(|k| k.id)
        .collect()
}

fn key_id(cb: &Codebook) -> impl Strategy<Value = KeyId> {
    proptest::sample::select(plain_ids(cb))
}

fn token(cb: &Codebook) -> impl Strategy<Value = Token> {
    prop_oneof![
        6 => key_id(cb).prop_map(Token::Symbol),
        2 => Just(Token::RuleO(Linkage::Unlinked)),
        1 => Just(Token::RuleO(Linkage::LinkedToNext)),
        1 => Just(Token::RuleO(Linkage::LinkedToPrevious)),
        2 => Just(Token::RuleA),
        1 => (key_id(cb), key_id(cb))
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(base, overlay)| Token::Ligature { base, overlay }),
        2 => Just(Token::Gap),
        1 => "[A-Z]{1,4}".prop_map(Token::Unread),
    ]
}

/// Drops edge and doubled gaps and unlinks links that point at nothing.
fn repair(mut tokens: Vec<Token>) -> Vec<Token> {
    tokens.dedup_by(|a, b| a.is_gap() && b.is_gap());
    while tokens.first().is_some_and(Token::is_gap) {
        tokens.remove(0);
    }
    while tokens.last().is_some_and(Token::is_gap) {
        tokens.pop();
    }
    let n = tokens.len();
    for i in 0..n {
        let dangling = match tokens[i] {
            Token::RuleO(Linkage::LinkedToNext) => i + 1 == n || tokens[i + 1].is_gap(),
            Token::RuleO(Linkage::LinkedToPrevious) => i == 0 || tokens[i - 1].is_gap(),
            _ => false,
        };
        if dangling {
            tokens[i] = Token::RuleO(Linkage::Unlinked);
        }
    }
    tokens
}

/// Valid lines of 1 to 10 tokens.
pub fn token_line(cb: &Codebook) -> impl Strategy<Value = TokenLine> {
    proptest::collection::vec(token(cb), 1..=10)
        .prop_map(repair)
        .prop_filter("nonempty", |t| !t.is_empty())
        .prop_map(|t| TokenLine::new(t, "p"))
}

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

fn key_with(spelling: String) -> SymbolKey {
    SymbolKey {
        id: 99,
        name: "P".into(),
        spellings: vec![Spelling {
            text: spelling,
            context: PositionContext::Any,
            rank: 1,
        }],
        is_rule_symbol: false,
        anchor: String::new(),
    }
}

pub fn reversal_involution() -> Result<(), String> {
    run("[A-Z]{1,8}", |s| {
        let once = apply_o_postfix(&key_with(s.clone())).unwrap();
        let twice = apply_o_postfix(&key_with(once)).unwrap();
        prop_assert_eq!(twice, s);
        Ok(())
    })
}

fn is_subsequence(small: &str, big: &str) -> bool {
    let mut it = big.chars();
    small.chars().all(|c| it.any(|d| d == c))
}

pub fn merge_properties() -> Result<(), String> {
    run(proptest::collection::vec("[A-E]{1,4}", 1..6), |parts| {
        let merged = merge_boundaries(&parts);
        let concat: String = parts.concat();
        prop_assert!(is_subsequence(&merged, &concat));
        prop_assert!(merged.len() <= concat.len());
        prop_assert!(merged.len() + parts.len() > concat.len());
        prop_assert!(merged.starts_with(parts[0].as_str()));
        // Folding pairwise gives the same word.
        let folded = parts[1..]
            .iter()
            .fold(parts[0].clone(), |acc, p| merge_boundaries(&[acc, p.clone()]));
        prop_assert_eq!(&merged, &folded);
        // Letters survive in order: sorting both sides, merged is a sub-multiset.
        let mut m: Vec<char> = merged.chars().collect();
        let mut c: Vec<char> = concat.chars().collect();
        m.sort_unstable();
        c.sort_unstable();
        prop_assert!(is_subsequence(&m.iter().collect::<String>(), &c.iter().collect::<String>()));
        Ok(())
    })
}

pub fn encode_decode_membership(cb: &Codebook) -> Result<(), String> {
    run(proptest::collection::vec(key_id(cb), 1..=4), |ids| {
        let word = spell(&ids, cb);
        let line = TokenLine::new(ids.iter().map(|&i| Token::Symbol(i)).collect(), "p");
        let lattice = decode_line(&line, DecodeOptions::default(), cb);
        prop_assert!(lattice.admits(&word), "{} not admitted by {:?}", word, ids);
        let cands = encode_word(&word, cb).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for c in &cands {
            prop_assert_eq!(&spell(c, cb), &word);
        }
        let first = TokenLine::new(cands[0].iter().map(|&i| Token::Symbol(i)).collect(), "p");
        prop_assert!(decode_line(&first, DecodeOptions::default(), cb).admits(&word));
        Ok(())
    })
}

pub fn decode_determinism(cb: &Codebook) -> Result<(), String> {
    run(token_line(cb), |line| {
        let go = || {
            let lattice = decode_line(&line, DecodeOptions::default(), cb);
            serde_json::to_string(&enumerate_readings(&lattice, 4, cb)).unwrap()
        };
        let a = go();
        prop_assert!(!a.is_empty());
        prop_assert_eq!(a, go());
        Ok(())
    })
}

pub fn parse_serialize_identity(cb: &Codebook) -> Result<(), String> {
    run(token_line(cb), |line| {
        let text = serialize(&line, &cb.table);
        let parsed = parse_line(&text, "p", &cb.table)
            .map_err(|e| TestCaseError::fail(format!("{text:?}: {e}")))?;
        prop_assert_eq!(&parsed, &line);
        prop_assert_eq!(serialize(&parsed, &cb.table), text);
        Ok(())
    })
}
