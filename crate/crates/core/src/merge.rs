//! The boundary rule: a letter shared across a junction is written once.

/// True when `acc` followed by `next` must keep both copies of the shared
/// letter. This is the RIIN exception, which covers any RI+I junction.
pub fn keeps_double(acc: &str, next: &str) -> bool {
    acc.ends_with("RI") && next.starts_with('I')
}

/// True when joining `acc` and `next` drops one letter.
pub fn dedups(acc: &str, next: &str) -> bool {
    match (acc.as_bytes().last(), next.as_bytes().first()) {
        (Some(a), Some(b)) => a == b && !keeps_double(acc, next),
        _ => false,
    }
}

/// Appends `next` to `acc` under the boundary rule.
pub fn push_merged(acc: &mut String, next: &str) {
    if dedups(acc, next) {
        acc.push_str(&next[1..]);
    } else {
        acc.push_str(next);
    }
}

pub fn merge_boundaries<S: AsRef<str>>(parts: &[S]) -> String {
    let mut acc = String::new();
    for p in parts {
        push_merged(&mut acc, p.as_ref());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant() {
        assert_eq!(merge_boundaries(&["PLA", "ANT"]), "PLANT");
    }

    #[test]
    fn vilanovi() {
        assert_eq!(merge_boundaries(&["VI", "ILA", "NOVI"]), "VILANOVI");
    }

    #[test]
    fn riin_exception() {
        assert_eq!(merge_boundaries(&["RI", "IN"]), "RIIN");
        assert_eq!(merge_boundaries(&["RI", "IS"]), "RIIS");
        assert_eq!(merge_boundaries(&["ORT", "RI"]), "ORTRI");
    }

    #[test]
    fn singleton_and_empty() {
        assert_eq!(merge_boundaries(&["ORT"]), "ORT");
        assert_eq!(merge_boundaries::<&str>(&[]), "");
    }

    #[test]
    fn only_one_letter_collapses() {
        assert_eq!(merge_boundaries(&["PLA", "AAD"]), "PLAAD");
        assert_eq!(merge_boundaries(&["ME", "TRE"]), "METRE");
    }
}
