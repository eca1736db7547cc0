use std::collections::HashSet;
use std::sync::OnceLock;

/// Merged SMART/Snowball English stopword list, one token per line.
pub const STOPWORDS_TXT: &str = include_str!("../../data/stopwords_en.txt");

pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

pub fn remove_stopwords(tokens: Vec<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !is_stopword(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn pinned_list_size() {
        assert_eq!(stopwords().len(), 174);
        for w in ["the", "of", "from"] {
            assert!(is_stopword(w));
        }
    }

    #[test]
    fn removal_preserves_order() {
        assert_eq!(remove_stopwords(v(&["a", "theory", "of", "migration"])), v(&["theory", "migration"]));
        assert_eq!(remove_stopwords(v(&["housing", "the", "the", "market"])), v(&["housing", "market"]));
        assert!(remove_stopwords(Vec::new()).is_empty());
    }
}
