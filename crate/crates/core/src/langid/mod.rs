//! Character n-gram language identification for titles.
//!
//! Each profile is a smoothed distribution over the bigrams and trigrams of
//! space-padded words. A title goes to the profile with the highest
//! log-likelihood, or to `und` when the lead over the runner-up is too thin.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::UNDETERMINED;

pub const PROFILE_HEADER: &str = "# litmap langid profile v1";
pub const DEFAULT_MARGIN: f64 = 2.0;
pub const MIN_LETTERS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum LangIdError {
    #[error("no training samples for {0}")]
    EmptySamples(String),
    #[error("profile line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageProfile {
    pub lang: String,
    /// log prior added to every score
    pub prior: f64,
    pub ngram_logfreq: BTreeMap<String, f64>,
    /// log probability shared by every n-gram not in the map
    pub unseen: f64,
}

/// Lowercased words of letters only, each padded with one space per side.
fn padded_words(text: &str) -> Vec<Vec<char>> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut v = vec![' '];
            v.extend(w.chars().flat_map(char::to_lowercase));
            v.push(' ');
            v
        })
        .collect()
}

/// Bigrams and trigrams of the padded words, in order.
pub fn ngrams(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for w in padded_words(text) {
        for n in [2, 3] {
            for win in w.windows(n) {
                out.push(win.iter().collect());
            }
        }
    }
    out
}

impl LanguageProfile {
    /// Add-one smoothed profile. One extra slot is reserved for unseen
    /// n-grams, so the seen probabilities plus `unseen` sum to one.
    pub fn train<S: AsRef<str>>(samples: &[S], lang: &str) -> Result<Self, LangIdError> {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0u64;
        for s in samples {
            for g in ngrams(s.as_ref()) {
                *counts.entry(g).or_default() += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(LangIdError::EmptySamples(lang.to_string()));
        }
        let denom = (total + counts.len() as u64 + 1) as f64;
        let ngram_logfreq = counts
            .into_iter()
            .map(|(g, c)| (g, ((c + 1) as f64 / denom).ln()))
            .collect();
        Ok(LanguageProfile {
            lang: lang.to_string(),
            prior: 0.0,
            ngram_logfreq,
            unseen: (1.0 / denom).ln(),
        })
    }

    pub fn logprob(&self, ngram: &str) -> f64 {
        self.ngram_logfreq.get(ngram).copied().unwrap_or(self.unseen)
    }

    pub fn score(&self, text: &str) -> f64 {
        self.prior + ngrams(text).iter().map(|g| self.logprob(g)).sum::<f64>()
    }

    /// Total probability mass, seen n-grams plus the unseen slot.
    pub fn mass(&self) -> f64 {
        self.ngram_logfreq.values().map(|l| l.exp()).sum::<f64>() + self.unseen.exp()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{PROFILE_HEADER}").unwrap();
        writeln!(s, "lang\t{}", self.lang).unwrap();
        writeln!(s, "prior\t{}", self.prior).unwrap();
        writeln!(s, "unseen\t{}", self.unseen).unwrap();
        for (g, l) in &self.ngram_logfreq {
            writeln!(s, "{g}\t{l}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, LangIdError> {
        let err = |line: usize, message: &str| LangIdError::Format { line, message: message.to_string() };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == PROFILE_HEADER => {}
            _ => return Err(err(1, "missing or unsupported header")),
        }
        let mut field = |name: &str| -> Result<String, LangIdError> {
            let (i, l) = lines.next().ok_or_else(|| err(0, "truncated header"))?;
            l.strip_prefix(name)
                .and_then(|r| r.strip_prefix('\t'))
                .map(str::to_string)
                .ok_or_else(|| err(i + 1, &format!("expected {name}")))
        };
        let lang = field("lang")?;
        let prior = field("prior")?.parse().map_err(|_| err(3, "bad prior"))?;
        let unseen = field("unseen")?.parse().map_err(|_| err(4, "bad unseen"))?;
        let mut ngram_logfreq = BTreeMap::new();
        for (i, l) in lines {
            let (g, v) = l.rsplit_once('\t').ok_or_else(|| err(i + 1, "expected ngram TAB logfreq"))?;
            let v: f64 = v.parse().map_err(|_| err(i + 1, "bad log frequency"))?;
            ngram_logfreq.insert(g.to_string(), v);
        }
        Ok(LanguageProfile { lang, prior, ngram_logfreq, unseen })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub lang: String,
    /// best log-likelihood minus the runner-up's, in nats
    pub margin: f64,
}

impl Detection {
    fn undetermined(margin: f64) -> Self {
        Detection { lang: UNDETERMINED.to_string(), margin }
    }
}

/// Per-language log-likelihoods, sorted by language code.
pub fn scores(title: &str, profiles: &[LanguageProfile]) -> Vec<(String, f64)> {
    let mut s: Vec<(String, f64)> = profiles.iter().map(|p| (p.lang.clone(), p.score(title))).collect();
    s.sort_by(|a, b| a.0.cmp(&b.0));
    s
}

/// Maximum-likelihood language, ties going to the smaller code.
pub fn detect_with_margin(title: &str, profiles: &[LanguageProfile], margin: f64) -> Detection {
    if title.chars().filter(|c| c.is_alphabetic()).count() < MIN_LETTERS || profiles.is_empty() {
        return Detection::undetermined(0.0);
    }
    let s = scores(title, profiles);
    let mut best = 0;
    for i in 1..s.len() {
        if s[i].1 > s[best].1 {
            best = i;
        }
    }
    let runner_up = s
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, x)| x.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let lead = s[best].1 - runner_up;
    if lead < margin {
        return Detection::undetermined(lead);
    }
    Detection { lang: s[best].0.clone(), margin: lead }
}

pub fn detect(title: &str, profiles: &[LanguageProfile]) -> Detection {
    detect_with_margin(title, profiles, DEFAULT_MARGIN)
}

const BUNDLED: [(&str, &str); 6] = [
    ("de", include_str!("../../data/langid/de.txt")),
    ("en", include_str!("../../data/langid/en.txt")),
    ("es", include_str!("../../data/langid/es.txt")),
    ("fr", include_str!("../../data/langid/fr.txt")),
    ("pt", include_str!("../../data/langid/pt.txt")),
    ("zh", include_str!("../../data/langid/zh.txt")),
];

/// Profiles trained once from the bundled sample texts.
pub fn bundled_profiles() -> &'static [LanguageProfile] {
    static PROFILES: OnceLock<Vec<LanguageProfile>> = OnceLock::new();
    PROFILES.get_or_init(|| {
        BUNDLED
            .iter()
            .map(|(lang, text)| {
                let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
                LanguageProfile::train(&lines, lang).expect("bundled sample text is non-empty")
            })
            .collect()
    })
}
