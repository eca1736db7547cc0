use serde::{Deserialize, Serialize};

use crate::corpus::DocId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedTitle {
    pub doc_id: DocId,
    pub tokens: Vec<String>,
}

impl TokenizedTitle {
    pub fn new(doc_id: DocId, title: &str) -> Self {
        TokenizedTitle {
            doc_id,
            tokens: tokenize_title(title),
        }
    }
}

/// Lowercase a title, delete digits, and split on everything that is not a
/// letter. A hyphen survives only between two letters of the digit-free text.
pub fn tokenize_title(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw
        .chars()
        .filter(|c| !c.is_numeric())
        .flat_map(char::to_lowercase)
        .collect();
    let mut cleaned = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            cleaned.push(c);
        } else if c == '-'
            && i > 0
            && chars[i - 1].is_alphabetic()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            cleaned.push('-');
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn digits_and_year_ranges_dissolve() {
        let got = tokenize_title(
            "Migration in a mature economy: emigration and internal migration in England and Wales 1861-1900",
        );
        assert_eq!(
            got,
            toks(&[
                "migration", "in", "a", "mature", "economy", "emigration", "and", "internal",
                "migration", "in", "england", "and", "wales"
            ])
        );
    }

    #[test]
    fn interior_hyphens_survive() {
        let got = tokenize_title("Life-cycle, housing tenure and intra-urban residential mobility: A causal model");
        assert!(got.contains(&"life-cycle".to_string()));
        assert!(got.contains(&"intra-urban".to_string()));
        assert_eq!(got.len(), 10);
    }

    #[test]
    fn edge_hyphens_and_lone_hyphens_drop() {
        assert_eq!(tokenize_title("-pre post- - -- a--b"), toks(&["pre", "post", "a", "b"]));
        assert_eq!(tokenize_title("covid-19 housing"), toks(&["covid", "housing"]));
        assert_eq!(tokenize_title("G7-summit"), toks(&["g-summit"]));
    }

    #[test]
    fn empty_and_punctuation_only() {
        assert!(tokenize_title("").is_empty());
        assert!(tokenize_title("... 2001 !!").is_empty());
    }

    #[test]
    fn apostrophes_split_words() {
        assert_eq!(tokenize_title("New York City's Chinese"), toks(&["new", "york", "city", "s", "chinese"]));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(raw in "[A-Za-z0-9 ,.:;'()-]{0,60}") {
            let once = tokenize_title(&raw);
            let twice = tokenize_title(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.starts_with('-') && !t.ends_with('-'));
                prop_assert!(t.chars().all(|c| c.is_alphabetic() || c == '-'));
            }
        }
    }
}
