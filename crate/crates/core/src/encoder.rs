//! Text to DST: decomposition of words into plain key sequences.

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::merge::{dedups, merge_boundaries};
use crate::symbol_table::{Codebook, KeyId};
use crate::transcription::{Token, TokenLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("{word:?} has no decomposition into key spellings")]
    NotEncodable { word: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Encoding {
    pub line: TokenLine,
    /// Byte spans of input words that could not be encoded.
    pub residual: Vec<Range<usize>>,
}

/// Every decomposition of `word` into rank-1 spellings of plain keys, best
/// first: the lexicon's own composition, then fewer tokens, then key names.
pub fn encode_word(word: &str, cb: &Codebook) -> Result<Vec<Vec<KeyId>>, EncodeError> {
    let not_encodable = || EncodeError::NotEncodable {
        word: word.to_string(),
    };
    if word.is_empty() || !word.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit()) {
        return Err(not_encodable());
    }
    let keys: Vec<(KeyId, &str, &str)> = cb
        .table
        .keys()
        .iter()
        .filter(|k| !k.is_rule_symbol)
        .map(|k| (k.id, k.name.as_str(), k.primary()))
        .filter(|(_, _, s)| !s.is_empty())
        .collect();
    let mut memo = HashMap::new();
    let mut all = suffixes(word, 0, &keys, &mut memo);
    if all.is_empty() {
        return Err(not_encodable());
    }
    let name = |id: &KeyId| cb.table.name_of(*id).to_string();
    let preferred = cb
        .lexicon
        .lookup(word)
        .and_then(|e| e.composition.clone());
    all.sort_by_cached_key(|ids| {
        (
            Some(ids) != preferred.as_ref(),
            ids.len(),
            ids.iter().map(name).collect::<Vec<_>>(),
        )
    });
    Ok(all)
}

/// Decompositions of `word[i..]` given that `word[..i]` is already written.
fn suffixes(
    word: &str,
    i: usize,
    keys: &[(KeyId, &str, &str)],
    memo: &mut HashMap<usize, Vec<Vec<KeyId>>>,
) -> Vec<Vec<KeyId>> {
    if i == word.len() {
        return vec![Vec::new()];
    }
    if let Some(v) = memo.get(&i) {
        return v.clone();
    }
    let mut out = Vec::new();
    for &(id, _, spelling) in keys {
        let start = if dedups(&word[..i], spelling) { i - 1 } else { i };
        let end = start + spelling.len();
        if end <= i || !word[start..].starts_with(spelling) {
            continue;
        }
        for mut rest in suffixes(word, end, keys, memo) {
            rest.insert(0, id);
            out.push(rest);
        }
    }
    memo.insert(i, out.clone());
    out
}

/// Encodes space-separated words, one gap between encoded words.
pub fn encode_line(text: &str, cb: &Codebook) -> Encoding {
    let mut tokens = Vec::new();
    let mut residual = Vec::new();
    let mut offset = 0;
    for word in text.split(' ') {
        let span = offset..offset + word.len();
        offset = span.end + 1;
        if word.is_empty() {
            continue;
        }
        match encode_word(word, cb) {
            Ok(cands) => {
                if !tokens.is_empty() {
                    tokens.push(Token::Gap);
                }
                tokens.extend(cands[0].iter().map(|&id| Token::Symbol(id)));
            }
            Err(_) => residual.push(span),
        }
    }
    Encoding {
        line: TokenLine::new(tokens, "encoded"),
        residual,
    }
}

/// The surface the plain tokens of `ids` spell.
pub fn spell(ids: &[KeyId], cb: &Codebook) -> String {
    let parts: Vec<&str> = ids
        .iter()
        .map(|&id| cb.table.primary(id).unwrap_or(""))
        .collect();
    merge_boundaries(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcription::serialize;

    fn names(cb: &Codebook, ids: &[KeyId]) -> Vec<String> {
        ids.iter().map(|&i| cb.table.name_of(i).to_string()).collect()
    }

    #[test]
    fn plant_first() {
        let cb = Codebook::shipped();
        let c = encode_word("PLANT", &cb).unwrap();
        assert_eq!(names(&cb, &c[0]), ["PLA", "ANT"]);
    }

    #[test]
    fn retortat_first() {
        let cb = Codebook::shipped();
        let c = encode_word("RETORTAT", &cb).unwrap();
        assert_eq!(names(&cb, &c[0]), ["RET", "ORT", "AT"]);
    }

    #[test]
    fn q_is_not_encodable() {
        let cb = Codebook::shipped();
        assert_eq!(
            encode_word("Q", &cb),
            Err(EncodeError::NotEncodable { word: "Q".into() })
        );
    }

    #[test]
    fn every_candidate_spells_the_word() {
        let cb = Codebook::shipped();
        for w in ["PLANT", "TREBONE", "METRE", "HERE"] {
            for c in encode_word(w, &cb).unwrap() {
                assert_eq!(spell(&c, &cb), w);
            }
        }
    }

    #[test]
    fn lines() {
        let cb = Codebook::shipped();
        let e = encode_line("PLAT RET", &cb);
        assert_eq!(serialize(&e.line, &cb.table), "PLA AT / RET");
        assert!(e.residual.is_empty());
        let e = encode_line("TREBONE", &cb);
        assert_eq!(serialize(&e.line, &cb.table), "TRE BONE");
        let e = encode_line("", &cb);
        assert!(e.line.is_empty() && e.residual.is_empty());
        let e = encode_line("PLA QX TRE", &cb);
        assert_eq!(serialize(&e.line, &cb.table), "PLA / TRE");
        assert_eq!(e.residual, [4..6]);
    }
}
