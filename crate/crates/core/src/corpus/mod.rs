//! Canonical bibliographic data model and the persistent document store.

mod key;
mod snapshot;
mod store;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use key::{dedup_key, near_duplicates, normalized_title, NearDuplicate};
pub use snapshot::{
    load_snapshot, read_snapshot, save_snapshot, write_snapshot, RecordLog, SnapshotRecord,
    FORMAT_VERSION,
};
pub use store::{MergeOutcome, MergeReport, Store, DEFAULT_MAX_LAYER};

use crate::screening::DecisionRecord;

/// Stable opaque document identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(pub String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Self {
        DocId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DocId {
    fn from(s: &str) -> Self {
        DocId(s.to_string())
    }
}

/// Short query code such as `1_IMH` or `3GT`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueryId(pub String);

impl QueryId {
    pub fn new(id: impl Into<String>) -> Self {
        QueryId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QueryId {
    fn from(s: &str) -> Self {
        QueryId(s.to_string())
    }
}

/// Position of a document in the screening and harvesting flow.
///
/// Stages only move forward. `Excluded` is terminal and ranks above every
/// other stage so that merges never resurrect an excluded record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Identified,
    Screened,
    Eligible,
    Seed,
    CitationCorpus,
    Excluded,
}

impl Stage {
    pub fn rank(self) -> u8 {
        match self {
            Stage::Identified => 0,
            Stage::Screened => 1,
            Stage::Eligible => 2,
            Stage::Seed => 3,
            Stage::CitationCorpus => 4,
            Stage::Excluded => 5,
        }
    }

    /// The further advanced of two stages.
    pub fn max(self, other: Stage) -> Stage {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Identified => "identified",
            Stage::Screened => "screened",
            Stage::Eligible => "eligible",
            Stage::Seed => "seed",
            Stage::CitationCorpus => "citation-corpus",
            Stage::Excluded => "excluded",
        }
    }
}

/// Language code used when a title's language is unknown.
pub const UNDETERMINED: &str = "und";

fn default_language() -> String {
    UNDETERMINED.to_string()
}

fn default_stage() -> Stage {
    Stage::Identified
}

/// One bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    pub title: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub cited_by: u64,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default)]
    pub layer: u8,
    #[serde(default = "default_stage")]
    pub stage: Stage,
}

impl Document {
    /// A layer-0 record in the `identified` stage with no bibliographic extras.
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, year: Option<i32>) -> Self {
        Document {
            doc_id: DocId(doc_id.into()),
            title: title.into(),
            year,
            authors: Vec::new(),
            venue: None,
            cited_by: 0,
            language: default_language(),
            layer: 0,
            stage: Stage::Identified,
        }
    }

    pub fn with_cited_by(mut self, cited_by: u64) -> Self {
        self.cited_by = cited_by;
        self
    }

    pub fn with_authors<I, S>(mut self, authors: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.authors = authors.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_venue(mut self, venue: impl Into<String>) -> Self {
        self.venue = Some(venue.into());
        self
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn with_layer(mut self, layer: u8) -> Self {
        self.layer = layer;
        self
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }
}

/// Theoretical genre a query belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Genre {
    /// internal migration + housing
    IMH,
    /// internal migration
    IM,
    /// residential mobility
    RM,
    /// urban migration
    UM,
}

impl Genre {
    pub fn as_str(self) -> &'static str {
        match self {
            Genre::IMH => "IMH",
            Genre::IM => "IM",
            Genre::RM => "RM",
            Genre::UM => "UM",
        }
    }
}

/// Narrowing specifier appended to a genre query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Specifier {
    /// geography (Britain OR UK OR England)
    G,
    /// data set (census)
    D,
    /// housing theme
    T,
}

fn default_k() -> u32 {
    100
}

/// One ranked search query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    #[serde(alias = "id")]
    pub query_id: QueryId,
    pub genre: Genre,
    #[serde(default)]
    pub specifiers: BTreeSet<Specifier>,
    #[serde(alias = "query")]
    pub query_string: String,
    #[serde(default = "default_k")]
    pub k: u32,
}

impl QuerySpec {
    pub fn new(query_id: &str, genre: Genre, specifiers: &[Specifier], query_string: &str) -> Self {
        QuerySpec {
            query_id: QueryId::new(query_id),
            genre,
            specifiers: specifiers.iter().copied().collect(),
            query_string: query_string.to_string(),
            k: default_k(),
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.k == 0 {
            return Err(CorpusError::InvalidQuery(format!(
                "query {} has k = 0",
                self.query_id
            )));
        }
        if self.query_id.0.trim().is_empty() {
            return Err(CorpusError::InvalidQuery("empty query id".into()));
        }
        Ok(())
    }
}

/// Directed citing → cited link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing: DocId,
    pub cited: DocId,
    pub layer: u8,
}

/// A document's rank in one query's result list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Membership {
    pub doc_id: DocId,
    pub query_id: QueryId,
    pub rank: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid edge {citing} -> {cited}: {reason}")]
    InvalidEdge {
        citing: DocId,
        cited: DocId,
        reason: String,
    },
    #[error("invalid membership of {doc_id} in {query_id}: {reason}")]
    InvalidMembership {
        doc_id: DocId,
        query_id: QueryId,
        reason: String,
    },
    #[error("unknown document {0}")]
    UnknownDocument(DocId),
    #[error("stage regression for {doc_id}: {from} -> {to}")]
    StageRegression {
        doc_id: DocId,
        from: &'static str,
        to: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("snapshot is missing its header record (expected format_version {expected})")]
    MissingHeader { expected: u32 },
    #[error("snapshot format_version {found} is not supported (expected format_version {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("snapshot record rejected: {0}")]
    Rejected(#[from] CorpusError),
}

/// Convenience for places that hold decisions alongside documents.
pub(crate) type Decisions = Vec<DecisionRecord>;
