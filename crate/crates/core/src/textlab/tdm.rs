use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use serde::Serialize;

use super::TextError;
use crate::corpus::DocId;

/// Minimum document frequency for a term to enter the matrix.
pub const DEFAULT_MIN_FREQ: usize = 50;

/// Sparse binary term × document incidence.
///
/// Rows are stored as sorted document-index lists. Terms are ordered by
/// document frequency (descending), then lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocMatrix {
    terms: Vec<String>,
    docs: Vec<DocId>,
    rows: Vec<Vec<u32>>,
    df: Vec<usize>,
    min_freq: usize,
    index: HashMap<String, usize>,
}

impl TermDocMatrix {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    pub fn min_freq(&self) -> usize {
        self.min_freq
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Stored document frequency of a term.
    pub fn df(&self, term: &str) -> Option<usize> {
        self.term_index(term).map(|i| self.df[i])
    }

    pub fn df_by_index(&self, i: usize) -> usize {
        self.df[i]
    }

    /// Sorted document indices where term `i` occurs.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn get(&self, term: usize, doc: usize) -> u8 {
        u8::from(self.rows[term].binary_search(&(doc as u32)).is_ok())
    }

    /// Dense 0/1 indicator vector for one term.
    pub fn dense_row(&self, i: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.docs.len()];
        for &d in &self.rows[i] {
            v[d as usize] = 1;
        }
        v
    }

    /// MatrixMarket coordinate triplets (1-based `term doc 1`).
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate integer general")?;
        writeln!(out, "{} {} {}", self.n_terms(), self.n_docs(), self.nnz())?;
        for (t, row) in self.rows.iter().enumerate() {
            for d in row {
                writeln!(out, "{} {} 1", t + 1, d + 1)?;
            }
        }
        Ok(())
    }

    /// Vocabulary sidecar: one `term TAB df` per line, in row order.
    pub fn write_vocabulary<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (t, df) in self.terms.iter().zip(&self.df) {
            writeln!(out, "{t}\t{df}")?;
        }
        Ok(())
    }

    /// Document sidecar: one doc id per line, in column order.
    pub fn write_doc_ids<W: Write>(&self, mut out: W) -> io::Result<()> {
        for d in &self.docs {
            writeln!(out, "{d}")?;
        }
        Ok(())
    }
}

/// Build the binary incidence matrix over already filtered and stemmed
/// tokens. Columns follow the input order.
pub fn build_tdm(docs: &[(DocId, Vec<String>)], min_freq: usize) -> TermDocMatrix {
    let mut postings: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for (col, (_, tokens)) in docs.iter().enumerate() {
        for t in tokens {
            postings.entry(t.as_str()).or_default().insert(col as u32);
        }
    }
    let mut kept: Vec<(&str, Vec<u32>)> = postings
        .into_iter()
        .filter(|(_, cols)| cols.len() >= min_freq.max(1))
        .map(|(t, cols)| (t, cols.into_iter().collect()))
        .collect();
    kept.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));

    let terms: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
    let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let df = kept.iter().map(|(_, r)| r.len()).collect();
    let rows = kept.into_iter().map(|(_, r)| r).collect();
    TermDocMatrix {
        terms,
        docs: docs.iter().map(|(d, _)| d.clone()).collect(),
        rows,
        df,
        min_freq,
        index,
    }
}

fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Phi coefficient between two terms' incidence rows. `None` when either
/// row has zero variance.
pub fn phi(tdm: &TermDocMatrix, a: usize, b: usize) -> Option<f64> {
    let n = tdm.n_docs() as f64;
    let na = tdm.rows[a].len() as f64;
    let nb = tdm.rows[b].len() as f64;
    let var = (na * (n - na)) * (nb * (n - nb));
    if var <= 0.0 {
        return None;
    }
    let both = intersection_size(&tdm.rows[a], &tdm.rows[b]) as f64;
    let score = (n * both - na * nb) / var.sqrt();
    Some(score.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Associations {
    pub term: String,
    /// (other term, phi) with phi ≥ min_score, highest first
    pub scores: Vec<(String, f64)>,
    /// vocabulary terms skipped because their incidence row is constant
    pub zero_variance: Vec<String>,
}

/// Terms whose incidence correlates with `term` at or above `min_score`.
pub fn associations(tdm: &TermDocMatrix, term: &str, min_score: f64) -> Result<Associations, TextError> {
    let a = tdm
        .term_index(term)
        .ok_or_else(|| TextError::UnknownTerm(term.to_string()))?;
    let n = tdm.n_docs();
    let constant = |i: usize| tdm.rows[i].is_empty() || tdm.rows[i].len() == n;
    if constant(a) {
        return Err(TextError::ZeroVariance(term.to_string()));
    }
    let mut scores = Vec::new();
    let mut zero_variance = Vec::new();
    for b in 0..tdm.n_terms() {
        if b == a {
            continue;
        }
        match phi(tdm, a, b) {
            Some(s) if s >= min_score => scores.push((tdm.terms[b].clone(), s)),
            Some(_) => {}
            None => zero_variance.push(tdm.terms[b].clone()),
        }
    }
    scores.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    Ok(Associations {
        term: term.to_string(),
        scores,
        zero_variance,
    })
}

/// Most frequent tokens pooled across titles; ties broken lexicographically.
pub fn top_terms<S: AsRef<str>>(docs: &[Vec<S>], n: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for t in doc {
            *counts.entry(t.as_ref()).or_default() += 1;
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(n);
    out
}
