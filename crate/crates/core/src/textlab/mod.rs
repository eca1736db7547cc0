//! Title-text analytics: tokenization, stopwords, Porter stemming, the binary
//! term-document matrix, term counts and word associations.

mod porter;
mod stopwords;
mod tdm;
mod tokenize;

use thiserror::Error;

pub use porter::{porter_stem, stem_token};
pub use stopwords::{is_stopword, remove_stopwords, stopwords, STOPWORDS_TXT};
pub use tdm::{
    associations, build_tdm, phi, top_terms, Associations, TermDocMatrix, DEFAULT_MIN_FREQ,
};
pub use tokenize::{tokenize_title, TokenizedTitle};

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("term {0:?} is not in the vocabulary")]
    UnknownTerm(String),
    #[error("term {0:?} occurs in every document or in none; its correlation is undefined")]
    ZeroVariance(String),
}

/// Tokens ready for the term-document matrix: stopwords removed, then
/// stemmed.
pub fn analysis_terms(title: &str) -> Vec<String> {
    remove_stopwords(tokenize_title(title))
        .iter()
        .map(|t| stem_token(t))
        .collect()
}
