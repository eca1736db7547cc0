use std::collections::BTreeMap;

use serde::Serialize;

use super::key::dedup_key;
use super::snapshot::SnapshotRecord;
use super::{
    CitationEdge, CorpusError, Decisions, DocId, Document, Membership, QueryId, Stage,
};
use crate::screening::DecisionRecord;

/// Deepest citation layer accepted unless configured otherwise.
pub const DEFAULT_MAX_LAYER: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeOutcome {
    Inserted,
    Merged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub outcome: MergeOutcome,
    pub doc_id: DocId,
}

/// In-memory document store.
///
/// Every record is keyed by its canonical id. When two records share a dedup
/// key they are merged and the lexicographically smaller id becomes
/// canonical; the other id is kept as an alias so that later references
/// resolve to the surviving record.
#[derive(Debug, Clone, Default)]
pub struct Store {
    docs: BTreeMap<DocId, Document>,
    keys: BTreeMap<String, DocId>,
    aliases: BTreeMap<DocId, DocId>,
    edges: BTreeMap<(DocId, DocId), u8>,
    by_rank: BTreeMap<(QueryId, u32), DocId>,
    by_doc: BTreeMap<(DocId, QueryId), u32>,
    decisions: Decisions,
    max_layer: u8,
    journal: Option<Vec<SnapshotRecord>>,
}

impl PartialEq for Store {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs
            && self.aliases == other.aliases
            && self.edges == other.edges
            && self.by_rank == other.by_rank
            && self.decisions == other.decisions
    }
}

impl Store {
    pub fn new() -> Self {
        Store {
            max_layer: DEFAULT_MAX_LAYER,
            ..Default::default()
        }
    }

    pub fn with_max_layer(max_layer: u8) -> Self {
        Store {
            max_layer,
            ..Default::default()
        }
    }

    pub fn max_layer(&self) -> u8 {
        self.max_layer
    }

    pub fn set_max_layer(&mut self, max_layer: u8) {
        self.max_layer = max_layer;
    }

    /// Start recording every mutation as a log record.
    pub fn enable_journal(&mut self) {
        if self.journal.is_none() {
            self.journal = Some(Vec::new());
        }
    }

    /// Take the mutation records accumulated since the last drain.
    pub fn drain_journal(&mut self) -> Vec<SnapshotRecord> {
        self.journal.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn journal(&mut self, record: SnapshotRecord) {
        if let Some(j) = self.journal.as_mut() {
            j.push(record);
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Resolve an id (canonical or alias) to its canonical id.
    pub fn canonical(&self, id: &DocId) -> Option<&DocId> {
        if let Some((k, _)) = self.docs.get_key_value(id) {
            return Some(k);
        }
        self.aliases.get(id).filter(|c| self.docs.contains_key(*c))
    }

    pub fn get(&self, id: &DocId) -> Option<&Document> {
        self.canonical(id).and_then(|c| self.docs.get(c))
    }

    pub fn contains(&self, id: &DocId) -> bool {
        self.canonical(id).is_some()
    }

    /// Documents in canonical id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&DocId, &DocId)> {
        self.aliases.iter()
    }

    fn validate(&self, doc: &Document) -> Result<String, CorpusError> {
        let key = dedup_key(doc)?;
        if doc.doc_id.0.is_empty() {
            return Err(CorpusError::InvalidDocument("empty doc_id".into()));
        }
        if doc.layer > self.max_layer {
            return Err(CorpusError::InvalidDocument(format!(
                "{} has layer {} beyond the configured depth {}",
                doc.doc_id, doc.layer, self.max_layer
            )));
        }
        if doc.language.trim().is_empty() {
            return Err(CorpusError::InvalidDocument(format!(
                "{} has an empty language code",
                doc.doc_id
            )));
        }
        Ok(key)
    }

    /// Insert a record, or merge it into the record that shares its dedup key.
    pub fn upsert(&mut self, doc: Document) -> Result<MergeReport, CorpusError> {
        let key = self.validate(&doc)?;
        let incoming_id = self
            .canonical(&doc.doc_id)
            .cloned()
            .unwrap_or_else(|| doc.doc_id.clone());

        let existing_id = match self.keys.get(&key) {
            Some(id) => id.clone(),
            None => {
                if self.docs.contains_key(&incoming_id) {
                    return Err(CorpusError::InvalidDocument(format!(
                        "{} is already stored under a different title or year",
                        doc.doc_id
                    )));
                }
                let mut doc = doc;
                doc.doc_id = incoming_id.clone();
                self.keys.insert(key, incoming_id.clone());
                self.docs.insert(incoming_id.clone(), doc.clone());
                self.journal(SnapshotRecord::Document(doc));
                return Ok(MergeReport {
                    outcome: MergeOutcome::Inserted,
                    doc_id: incoming_id,
                });
            }
        };

        if incoming_id != existing_id && self.docs.contains_key(&incoming_id) {
            return Err(CorpusError::InvalidDocument(format!(
                "{} is already stored under a different title or year",
                doc.doc_id
            )));
        }

        let existing = self.docs[&existing_id].clone();
        let mut merged = merge_fields(&existing, &doc);
        let canonical = existing_id.clone().min(incoming_id.clone());
        merged.doc_id = canonical.clone();

        if canonical != existing_id {
            self.rename(&existing_id, &canonical);
            self.journal(SnapshotRecord::Alias {
                from: existing_id.clone(),
                to: canonical.clone(),
            });
        }
        if incoming_id != canonical && self.aliases.get(&incoming_id) != Some(&canonical) {
            self.aliases.insert(incoming_id.clone(), canonical.clone());
            self.journal(SnapshotRecord::Alias {
                from: incoming_id.clone(),
                to: canonical.clone(),
            });
        }
        self.keys.insert(key, canonical.clone());
        let changed = self.docs.get(&canonical) != Some(&merged);
        self.docs.insert(canonical.clone(), merged.clone());
        if changed {
            self.journal(SnapshotRecord::Document(merged));
        }
        Ok(MergeReport {
            outcome: MergeOutcome::Merged,
            doc_id: canonical,
        })
    }

    /// Move a record to a new canonical id and rewrite every reference.
    fn rename(&mut self, from: &DocId, to: &DocId) {
        if let Some(mut doc) = self.docs.remove(from) {
            doc.doc_id = to.clone();
            if let Ok(key) = dedup_key(&doc) {
                self.keys.insert(key, to.clone());
            }
            self.docs.insert(to.clone(), doc);
        }
        for target in self.aliases.values_mut() {
            if target == from {
                *target = to.clone();
            }
        }
        self.aliases.insert(from.clone(), to.clone());
        self.aliases.remove(to);

        let touched: Vec<(DocId, DocId)> = self
            .edges
            .keys()
            .filter(|(a, b)| a == from || b == from)
            .cloned()
            .collect();
        for pair in touched {
            let layer = self.edges.remove(&pair).unwrap_or(0);
            let citing = if &pair.0 == from { to.clone() } else { pair.0 };
            let cited = if &pair.1 == from { to.clone() } else { pair.1 };
            if citing == cited {
                continue;
            }
            let slot = self.edges.entry((citing, cited)).or_insert(layer);
            *slot = (*slot).min(layer);
        }

        let moved: Vec<(QueryId, u32)> = self
            .by_doc
            .range((from.clone(), QueryId(String::new()))..)
            .take_while(|((d, _), _)| d == from)
            .map(|((_, q), r)| (q.clone(), *r))
            .collect();
        for (query, rank) in moved {
            self.by_doc.remove(&(from.clone(), query.clone()));
            match self.by_doc.get(&(to.clone(), query.clone())).copied() {
                Some(other) => {
                    let keep = other.min(rank);
                    let drop = other.max(rank);
                    self.by_rank.remove(&(query.clone(), drop));
                    self.by_rank.insert((query.clone(), keep), to.clone());
                    self.by_doc.insert((to.clone(), query), keep);
                }
                None => {
                    self.by_rank.insert((query.clone(), rank), to.clone());
                    self.by_doc.insert((to.clone(), query), rank);
                }
            }
        }

        for d in self.decisions.iter_mut() {
            if &d.doc_id == from {
                d.doc_id = to.clone();
            }
        }
    }

    /// Record a citation edge. Returns `false` when the pair already exists.
    pub fn add_edge(&mut self, citing: &DocId, cited: &DocId, layer: u8) -> Result<bool, CorpusError> {
        let err = |reason: &str| CorpusError::InvalidEdge {
            citing: citing.clone(),
            cited: cited.clone(),
            reason: reason.to_string(),
        };
        let a = self.canonical(citing).cloned().ok_or_else(|| err("unknown citing document"))?;
        let b = self.canonical(cited).cloned().ok_or_else(|| err("unknown cited document"))?;
        if a == b {
            return Err(err("self-citation"));
        }
        if layer == 0 || layer > self.max_layer {
            return Err(err("layer outside 1..=max_layer"));
        }
        if self.edges.contains_key(&(a.clone(), b.clone())) {
            return Ok(false);
        }
        self.edges.insert((a.clone(), b.clone()), layer);
        self.journal(SnapshotRecord::Edge(CitationEdge {
            citing: a,
            cited: b,
            layer,
        }));
        Ok(true)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in (citing, cited) order.
    pub fn edges(&self) -> impl Iterator<Item = CitationEdge> + '_ {
        self.edges.iter().map(|((a, b), l)| CitationEdge {
            citing: a.clone(),
            cited: b.clone(),
            layer: *l,
        })
    }

    /// Record a document's rank in a query. Re-recording the same triple is a
    /// no-op.
    pub fn add_membership(&mut self, doc_id: &DocId, query_id: &QueryId, rank: u32) -> Result<(), CorpusError> {
        let err = |reason: String| CorpusError::InvalidMembership {
            doc_id: doc_id.clone(),
            query_id: query_id.clone(),
            reason,
        };
        let id = self
            .canonical(doc_id)
            .cloned()
            .ok_or_else(|| err("unknown document".into()))?;
        if rank == 0 {
            return Err(err("ranks start at 1".into()));
        }
        if let Some(existing) = self.by_doc.get(&(id.clone(), query_id.clone())) {
            if *existing == rank {
                return Ok(());
            }
            return Err(err(format!("already ranked {existing}")));
        }
        if let Some(holder) = self.by_rank.get(&(query_id.clone(), rank)) {
            return Err(err(format!("rank {rank} already held by {holder}")));
        }
        self.by_rank.insert((query_id.clone(), rank), id.clone());
        self.by_doc.insert((id.clone(), query_id.clone()), rank);
        self.journal(SnapshotRecord::Membership(Membership {
            doc_id: id,
            query_id: query_id.clone(),
            rank,
        }));
        Ok(())
    }

    /// Memberships ordered by (query, rank).
    pub fn memberships(&self) -> impl Iterator<Item = Membership> + '_ {
        self.by_rank.iter().map(|((q, r), d)| Membership {
            doc_id: d.clone(),
            query_id: q.clone(),
            rank: *r,
        })
    }

    pub fn membership_count(&self) -> usize {
        self.by_rank.len()
    }

    /// Queries (and ranks) in which a document appears.
    pub fn memberships_of(&self, id: &DocId) -> Vec<(QueryId, u32)> {
        let Some(id) = self.canonical(id) else {
            return Vec::new();
        };
        self.by_doc
            .range((id.clone(), QueryId(String::new()))..)
            .take_while(|((d, _), _)| d == id)
            .map(|((_, q), r)| (q.clone(), *r))
            .collect()
    }

    pub fn has_membership(&self, id: &DocId) -> bool {
        !self.memberships_of(id).is_empty()
    }

    /// Move a document forward in the flow.
    pub fn set_stage(&mut self, id: &DocId, stage: Stage) -> Result<(), CorpusError> {
        let canonical = self
            .canonical(id)
            .cloned()
            .ok_or_else(|| CorpusError::UnknownDocument(id.clone()))?;
        let doc = self.docs.get_mut(&canonical).expect("canonical id resolves");
        if doc.stage == stage {
            return Ok(());
        }
        if doc.stage == Stage::Excluded || stage.rank() < doc.stage.rank() {
            return Err(CorpusError::StageRegression {
                doc_id: canonical,
                from: doc.stage.as_str(),
                to: stage.as_str(),
            });
        }
        doc.stage = stage;
        let doc = doc.clone();
        self.journal(SnapshotRecord::Document(doc));
        Ok(())
    }

    pub fn set_language(&mut self, id: &DocId, language: &str) -> Result<(), CorpusError> {
        let canonical = self
            .canonical(id)
            .cloned()
            .ok_or_else(|| CorpusError::UnknownDocument(id.clone()))?;
        let doc = self.docs.get_mut(&canonical).expect("canonical id resolves");
        if doc.language != language {
            doc.language = language.to_string();
            let doc = doc.clone();
            self.journal(SnapshotRecord::Document(doc));
        }
        Ok(())
    }

    pub fn decisions(&self) -> &[DecisionRecord] {
        &self.decisions
    }

    /// Append a screening decision; the store assigns its sequence number.
    pub fn push_decision(&mut self, mut record: DecisionRecord) -> Result<DecisionRecord, CorpusError> {
        let id = self
            .canonical(&record.doc_id)
            .cloned()
            .ok_or_else(|| CorpusError::UnknownDocument(record.doc_id.clone()))?;
        record.doc_id = id;
        record.seq = self.decisions.len() as u64 + 1;
        self.decisions.push(record.clone());
        self.journal(SnapshotRecord::Decision(record.clone()));
        Ok(record)
    }

    /// Apply one snapshot or log record, as produced by the journal.
    pub fn apply_record(&mut self, record: SnapshotRecord) -> Result<(), CorpusError> {
        match record {
            SnapshotRecord::Header { .. } => Ok(()),
            SnapshotRecord::Document(doc) => {
                let key = self.validate(&doc)?;
                if let Some(previous) = self.docs.get(&doc.doc_id) {
                    if let Ok(old_key) = dedup_key(previous) {
                        if old_key != key {
                            self.keys.remove(&old_key);
                        }
                    }
                }
                if let Some(holder) = self.keys.get(&key) {
                    if holder != &doc.doc_id && self.docs.contains_key(holder) {
                        return Err(CorpusError::InvalidDocument(format!(
                            "{} duplicates the dedup key of {}",
                            doc.doc_id, holder
                        )));
                    }
                }
                self.keys.insert(key, doc.doc_id.clone());
                self.docs.insert(doc.doc_id.clone(), doc);
                Ok(())
            }
            SnapshotRecord::Alias { from, to } => {
                if self.docs.contains_key(&from) {
                    self.rename(&from, &to);
                } else {
                    self.aliases.insert(from, to);
                }
                Ok(())
            }
            SnapshotRecord::Edge(e) => self.add_edge(&e.citing, &e.cited, e.layer).map(|_| ()),
            SnapshotRecord::Membership(m) => self.add_membership(&m.doc_id, &m.query_id, m.rank),
            SnapshotRecord::Decision(d) => {
                let expected = self.decisions.len() as u64 + 1;
                if d.seq != expected {
                    return Err(CorpusError::InvalidDocument(format!(
                        "decision sequence {} out of order (expected {expected})",
                        d.seq
                    )));
                }
                if !self.contains(&d.doc_id) {
                    return Err(CorpusError::UnknownDocument(d.doc_id));
                }
                self.decisions.push(d);
                Ok(())
            }
        }
    }
}

fn min_nonempty_string(a: &Option<String>, b: &Option<String>) -> Option<String> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.clone().min(y.clone())),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

/// Field-wise merge. Every rule is symmetric so the result does not depend
/// on arrival order.
fn merge_fields(a: &Document, b: &Document) -> Document {
    let authors = match (a.authors.is_empty(), b.authors.is_empty()) {
        (true, _) => b.authors.clone(),
        (_, true) => a.authors.clone(),
        _ => a.authors.clone().min(b.authors.clone()),
    };
    let language = match (a.language.as_str(), b.language.as_str()) {
        (super::UNDETERMINED, other) | (other, super::UNDETERMINED) => other.to_string(),
        (x, y) => x.min(y).to_string(),
    };
    Document {
        doc_id: a.doc_id.clone().min(b.doc_id.clone()),
        title: a.title.clone().min(b.title.clone()),
        year: a.year.or(b.year),
        authors,
        venue: min_nonempty_string(&a.venue, &b.venue),
        cited_by: a.cited_by.max(b.cited_by),
        language,
        layer: a.layer.min(b.layer),
        stage: a.stage.max(b.stage),
    }
}
