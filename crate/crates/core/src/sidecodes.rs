//! Masked letters hidden in drawings, and the roman-numeral date.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacedLetter {
    pub ch: char,
    /// Larger is further right.
    pub x: f64,
    /// Larger is higher.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SideError {
    #[error("{0:?} is not a roman numeral")]
    InvalidNumeral(char),
    #[error("line {line}: expected CH,x,y but found {text:?}")]
    BadPlacement { line: usize, text: String },
}

impl FromStr for PlacedLetter {
    type Err = String;

    /// `CH,x,y`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [ch, x, y] = parts.as_slice() else {
            return Err(s.to_string());
        };
        let mut chars = ch.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(s.to_string());
        };
        let x: f64 = x.parse().map_err(|_| s.to_string())?;
        let y: f64 = y.parse().map_err(|_| s.to_string())?;
        if !c.is_ascii_alphabetic() || !x.is_finite() || !y.is_finite() {
            return Err(s.to_string());
        }
        Ok(PlacedLetter {
            ch: c.to_ascii_uppercase(),
            x,
            y,
        })
    }
}

/// Reads one placement per line; blank lines and `#` comments are skipped.
pub fn parse_placements(text: &str) -> Result<Vec<PlacedLetter>, SideError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse().map_err(|text| SideError::BadPlacement { line: i + 1, text })
        })
        .collect()
}

/// Higher letters first, then left to right.
pub fn order_masked_letters(letters: &[PlacedLetter]) -> String {
    let mut v = letters.to_vec();
    v.sort_by(|a, b| {
        b.y.partial_cmp(&a.y)
            .unwrap_or(Ordering::Equal)
            .then(a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal))
    });
    v.iter().map(|l| l.ch).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Interpretation {
    PlainSum,
    /// X and V counted negative.
    SubtractXV,
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpretation::PlainSum => "PlainSum",
            Interpretation::SubtractXV => "SubtractXV",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DateCandidate {
    pub value: i64,
    pub interpretation: Interpretation,
    pub terms: Vec<(char, i64)>,
}

pub fn numeral_value(c: char) -> Option<i64> {
    Some(match c {
        'I' => 1,
        'V' => 5,
        'X' => 10,
        'L' => 50,
        'C' => 100,
        'D' => 500,
        'M' => 1000,
        _ => return None,
    })
}

pub fn roman_date_candidates(letters: &str) -> Result<Vec<DateCandidate>, SideError> {
    let values: Vec<(char, i64)> = letters
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| numeral_value(c).map(|v| (c, v)).ok_or(SideError::InvalidNumeral(c)))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(SideError::InvalidNumeral(' '));
    }
    let candidate = |interpretation, terms: Vec<(char, i64)>| DateCandidate {
        value: terms.iter().map(|t| t.1).sum(),
        interpretation,
        terms,
    };
    let negated = values
        .iter()
        .map(|&(c, v)| (c, if matches!(c, 'X' | 'V') { -v } else { v }))
        .collect();
    Ok(vec![
        candidate(Interpretation::PlainSum, values),
        candidate(Interpretation::SubtractXV, negated),
    ])
}
