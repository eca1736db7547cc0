use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocId, Document, QueryId, QuerySpec};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SourceError {
    #[error("document {0} not found at source")]
    NotFound(DocId),
    #[error("query {0} has no results at source")]
    UnknownQuery(QueryId),
    /// worth retrying after a pause
    #[error("transient source failure: {0}")]
    Transient(String),
    #[error("source failure: {0}")]
    Fatal(String),
}

impl SourceError {
    pub fn is_transient(&self) -> bool {
        matches!(self, SourceError::Transient(_))
    }
}

/// Ranked search and cited-by lookups against a bibliographic service.
pub trait ScholarlySource {
    /// Top `k` results for a query, best first.
    fn search(&self, query: &QuerySpec, k: usize) -> Result<Vec<Document>, SourceError>;

    /// Documents citing `doc_id` in source order; `limit` caps how many the
    /// source should fetch (`None` asks for all of them).
    fn citers(&self, doc_id: &DocId, limit: Option<usize>) -> Result<Vec<Document>, SourceError>;
}

impl<S: ScholarlySource + ?Sized> ScholarlySource for &S {
    fn search(&self, query: &QuerySpec, k: usize) -> Result<Vec<Document>, SourceError> {
        (**self).search(query, k)
    }

    fn citers(&self, doc_id: &DocId, limit: Option<usize>) -> Result<Vec<Document>, SourceError> {
        (**self).citers(doc_id, limit)
    }
}

/// One line of a replay fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayRecord {
    Document(Document),
    Search { query_id: QueryId, ranked: Vec<DocId> },
    Citers { doc_id: DocId, ranked: Vec<DocId> },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay fixture io: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay fixture line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay fixture references undefined document {0}")]
    Dangling(DocId),
}

/// Deterministic source backed by recorded result lists.
///
/// Searches are looked up by query id; the query string is ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplaySource {
    docs: BTreeMap<DocId, Document>,
    searches: BTreeMap<QueryId, Vec<DocId>>,
    citers: BTreeMap<DocId, Vec<DocId>>,
}

impl ReplaySource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document(&mut self, doc: Document) {
        self.docs.insert(doc.doc_id.clone(), doc);
    }

    pub fn set_search(&mut self, query_id: impl Into<QueryId>, ranked: Vec<DocId>) {
        self.searches.insert(query_id.into(), ranked);
    }

    pub fn set_citers(&mut self, doc_id: impl Into<DocId>, ranked: Vec<DocId>) {
        self.citers.insert(doc_id.into(), ranked);
    }

    pub fn document(&self, id: &DocId) -> Option<&Document> {
        self.docs.get(id)
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn search_ids(&self, query_id: &QueryId) -> Option<&[DocId]> {
        self.searches.get(query_id).map(Vec::as_slice)
    }

    /// Full recorded citer list, unranked and uncapped.
    pub fn citer_ids(&self, doc_id: &DocId) -> &[DocId] {
        self.citers.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn from_records<I: IntoIterator<Item = ReplayRecord>>(records: I) -> Result<Self, ReplayError> {
        let mut src = ReplaySource::new();
        for r in records {
            match r {
                ReplayRecord::Document(d) => src.add_document(d),
                ReplayRecord::Search { query_id, ranked } => src.set_search(query_id, ranked),
                ReplayRecord::Citers { doc_id, ranked } => src.set_citers(doc_id, ranked),
            }
        }
        src.check()?;
        Ok(src)
    }

    fn check(&self) -> Result<(), ReplayError> {
        let lists = self.searches.values().chain(self.citers.values());
        for id in lists.flatten().chain(self.citers.keys()) {
            if !self.docs.contains_key(id) {
                return Err(ReplayError::Dangling(id.clone()));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ReplayError> {
        let reader = BufReader::new(File::open(path)?);
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(&line).map_err(|e| ReplayError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        Self::from_records(records)
    }

    /// Documents first, then searches, then citer lists, each sorted by key.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = |r: ReplayRecord| -> std::io::Result<()> {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")
        };
        for d in self.docs.values() {
            line(ReplayRecord::Document(d.clone()))?;
        }
        for (q, ranked) in &self.searches {
            line(ReplayRecord::Search { query_id: q.clone(), ranked: ranked.clone() })?;
        }
        for (d, ranked) in &self.citers {
            line(ReplayRecord::Citers { doc_id: d.clone(), ranked: ranked.clone() })?;
        }
        Ok(())
    }

    fn resolve(&self, ids: &[DocId]) -> Vec<Document> {
        ids.iter().filter_map(|id| self.docs.get(id).cloned()).collect()
    }
}

impl ScholarlySource for ReplaySource {
    fn search(&self, query: &QuerySpec, k: usize) -> Result<Vec<Document>, SourceError> {
        let ids = self
            .searches
            .get(&query.query_id)
            .ok_or_else(|| SourceError::UnknownQuery(query.query_id.clone()))?;
        Ok(self.resolve(&ids[..ids.len().min(k)]))
    }

    fn citers(&self, doc_id: &DocId, limit: Option<usize>) -> Result<Vec<Document>, SourceError> {
        if !self.docs.contains_key(doc_id) {
            return Err(SourceError::NotFound(doc_id.clone()));
        }
        let ids = self.citer_ids(doc_id);
        let n = limit.map_or(ids.len(), |l| l.min(ids.len()));
        Ok(self.resolve(&ids[..n]))
    }
}
