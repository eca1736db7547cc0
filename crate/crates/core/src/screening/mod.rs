//! Staged relevance screening and flow accounting.
//!
//! Titles are triaged into five relevance groups. Groups 3 and 4 are
//! retained outright; groups 0–2 are pooled for a deeper abstract or
//! full-text check, where a group-0 outcome excludes the document.

mod engine;
mod flow;
mod script;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::corpus::{CorpusError, DocId};

pub use engine::{
    ConflictView, DecisionInput, Outcome, QueueItem, ResolveInput, Routing, ScreeningConfig,
    ScreeningEngine, Submitted,
};
pub use flow::{prisma_flow, FlowReport, PassTally};
pub use script::{apply_script, read_script, write_script, ScriptStats, ScriptedDecision};

/// Screening pass, in workflow order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Title,
    Abstract,
    Fulltext,
}

impl Pass {
    pub const ALL: [Pass; 3] = [Pass::Title, Pass::Abstract, Pass::Fulltext];

    pub fn as_str(self) -> &'static str {
        match self {
            Pass::Title => "title",
            Pass::Abstract => "abstract",
            Pass::Fulltext => "fulltext",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pass {
    type Err = ScreeningError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "title" => Ok(Pass::Title),
            "abstract" => Ok(Pass::Abstract),
            "fulltext" => Ok(Pass::Fulltext),
            other => Err(ScreeningError::Validation(format!("unknown pass {other:?}"))),
        }
    }
}

/// Relevance group labels, indexed by group number.
pub const GROUP_LABELS: [&str; 5] = ["Unlikely", "Marginal", "Check", "Suitable", "Look-into"];

/// Highest valid relevance group.
pub const MAX_GROUP: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionAction {
    /// an individual reviewer's call
    Review,
    /// settles a conflict between reviewers
    Resolution,
}

/// One entry of the append-only decision log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub seq: u64,
    pub decision_id: Uuid,
    pub doc_id: DocId,
    pub pass: Pass,
    pub reviewer: String,
    pub group: u8,
    pub action: DecisionAction,
    pub decided_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DecisionRecord {
    pub fn label(&self) -> &'static str {
        GROUP_LABELS[self.group.min(MAX_GROUP) as usize]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScreeningError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("unknown document {0}")]
    UnknownDocument(DocId),
    #[error("{doc_id} cannot be decided at the {pass} pass before its {requires} pass is settled")]
    Ordering {
        doc_id: DocId,
        pass: Pass,
        requires: Pass,
    },
    #[error("{doc_id} is not queued at the {pass} pass")]
    NotQueued { doc_id: DocId, pass: Pass },
    #[error("{reviewer} already decided {doc_id} at the {pass} pass")]
    Duplicate {
        doc_id: DocId,
        pass: Pass,
        reviewer: String,
    },
    #[error("decision id {0} was already used for a different decision")]
    IdempotencyMismatch(Uuid),
    #[error("{doc_id} has no pending conflict at the {pass} pass")]
    NoConflict { doc_id: DocId, pass: Pass },
    #[error("the {pass} pass is incomplete: {} undecided document(s), first {}", pending.len(), pending.first().map(|d| d.as_str()).unwrap_or("-"))]
    IncompletePass { pass: Pass, pending: Vec<DocId> },
    #[error("flow invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Store(#[from] CorpusError),
}
