use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{DecisionAction, DecisionRecord, Pass, ScreeningError, MAX_GROUP};
use crate::corpus::{DocId, Stage, Store};

/// How pooled titles reach the deeper checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routing {
    /// each pooled title gets exactly one deeper check, abstract or full text
    #[default]
    Split,
    /// pooled titles go to the abstract pass; abstract groups 1–2 continue to
    /// the full-text pass
    Sequential,
}

fn default_reviewers() -> usize {
    1
}

fn default_threshold() -> u8 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    #[serde(default)]
    pub routing: Routing,
    /// independent reviews required before a pass outcome is final
    #[serde(default = "default_reviewers")]
    pub reviewers_per_doc: usize,
    /// group difference at which two reviews conflict
    #[serde(default = "default_threshold")]
    pub conflict_threshold: u8,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            routing: Routing::Split,
            reviewers_per_doc: default_reviewers(),
            conflict_threshold: default_threshold(),
        }
    }
}

/// State of one document at one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "state", content = "group")]
pub enum Outcome {
    Pending,
    /// some reviews recorded, more required
    Partial,
    Conflict,
    Final(u8),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionInput {
    #[serde(default)]
    pub decision_id: Option<Uuid>,
    pub doc_id: DocId,
    pub pass: Pass,
    pub reviewer: String,
    pub group: i64,
    #[serde(default)]
    pub note: Option<String>,
}

pub type ResolveInput = DecisionInput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Submitted {
    pub record: DecisionRecord,
    /// false when the decision id was seen before and the original record is
    /// returned unchanged
    pub created: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueueItem {
    pub doc_id: DocId,
    pub title: String,
    pub year: Option<i32>,
    pub venue: Option<String>,
    pub cited_by: u64,
    pub pass: Pass,
    /// reviews by other reviewers; their groups stay hidden until the
    /// requesting reviewer has decided
    pub other_decisions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictView {
    pub doc_id: DocId,
    pub pass: Pass,
    pub reviews: Vec<DecisionRecord>,
}

/// Decisions grouped by (doc, pass), derived from the store's log.
struct Ledger<'a> {
    by_key: BTreeMap<(DocId, Pass), Vec<&'a DecisionRecord>>,
}

impl<'a> Ledger<'a> {
    fn new(store: &'a Store) -> Self {
        let mut by_key: BTreeMap<(DocId, Pass), Vec<&DecisionRecord>> = BTreeMap::new();
        for d in store.decisions() {
            by_key.entry((d.doc_id.clone(), d.pass)).or_default().push(d);
        }
        Ledger { by_key }
    }

    fn records(&self, doc: &DocId, pass: Pass) -> &[&'a DecisionRecord] {
        self.by_key.get(&(doc.clone(), pass)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Stateless rules engine; all state lives in the store's decision log.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScreeningEngine {
    pub config: ScreeningConfig,
}

impl ScreeningEngine {
    pub fn new(config: ScreeningConfig) -> Self {
        ScreeningEngine { config }
    }

    fn outcome_in(&self, ledger: &Ledger<'_>, doc: &DocId, pass: Pass) -> Outcome {
        let records = ledger.records(doc, pass);
        if let Some(r) = records.iter().rev().find(|r| r.action == DecisionAction::Resolution) {
            return Outcome::Final(r.group);
        }
        let reviews: Vec<u8> = records.iter().map(|r| r.group).collect();
        if reviews.is_empty() {
            return Outcome::Pending;
        }
        let lo = *reviews.iter().min().unwrap();
        let hi = *reviews.iter().max().unwrap();
        if hi - lo >= self.config.conflict_threshold {
            Outcome::Conflict
        } else if reviews.len() >= self.config.reviewers_per_doc.max(1) {
            Outcome::Final(hi)
        } else {
            Outcome::Partial
        }
    }

    pub fn outcome(&self, store: &Store, doc: &DocId, pass: Pass) -> Outcome {
        let Some(id) = store.canonical(doc) else {
            return Outcome::Pending;
        };
        self.outcome_in(&Ledger::new(store), id, pass)
    }

    /// The deeper pass a pooled title was sent to under split routing: the
    /// pass of its earliest deeper decision.
    fn claimed_pass(&self, ledger: &Ledger<'_>, doc: &DocId) -> Option<Pass> {
        let a = ledger.records(doc, Pass::Abstract).first().map(|r| r.seq);
        let f = ledger.records(doc, Pass::Fulltext).first().map(|r| r.seq);
        match (a, f) {
            (Some(x), Some(y)) => Some(if x <= y { Pass::Abstract } else { Pass::Fulltext }),
            (Some(_), None) => Some(Pass::Abstract),
            (None, Some(_)) => Some(Pass::Fulltext),
            (None, None) => None,
        }
    }

    /// Whether a document belongs to a pass's population.
    fn in_pass(&self, store: &Store, ledger: &Ledger<'_>, doc: &DocId, pass: Pass) -> bool {
        if !store.has_membership(doc) {
            return false;
        }
        let title = self.outcome_in(ledger, doc, Pass::Title);
        let pooled = matches!(title, Outcome::Final(g) if g <= 2);
        match (pass, self.config.routing) {
            (Pass::Title, _) => true,
            (_, Routing::Split) => {
                pooled && self.claimed_pass(ledger, doc).is_none_or(|p| p == pass)
            }
            (Pass::Abstract, Routing::Sequential) => pooled,
            (Pass::Fulltext, Routing::Sequential) => {
                pooled
                    && matches!(self.outcome_in(ledger, doc, Pass::Abstract), Outcome::Final(g) if (1..=2).contains(&g))
            }
        }
    }

    /// Documents that take part in a pass (decided or not), in id order.
    pub fn population(&self, store: &Store, pass: Pass) -> Vec<DocId> {
        let ledger = Ledger::new(store);
        store
            .documents()
            .filter(|d| self.in_pass(store, &ledger, &d.doc_id, pass))
            .map(|d| d.doc_id.clone())
            .collect()
    }

    /// Final outcomes at a pass, keyed by document.
    pub fn outcomes(&self, store: &Store, pass: Pass) -> BTreeMap<DocId, Outcome> {
        let ledger = Ledger::new(store);
        store
            .documents()
            .filter(|d| self.in_pass(store, &ledger, &d.doc_id, pass))
            .map(|d| (d.doc_id.clone(), self.outcome_in(&ledger, &d.doc_id, pass)))
            .collect()
    }

    /// Pending documents at a pass for one reviewer, paged.
    pub fn queue(
        &self,
        store: &Store,
        pass: Pass,
        reviewer: Option<&str>,
        page: usize,
        page_size: usize,
    ) -> (usize, Vec<QueueItem>) {
        let ledger = Ledger::new(store);
        let pending: Vec<QueueItem> = store
            .documents()
            .filter(|d| self.in_pass(store, &ledger, &d.doc_id, pass))
            .filter(|d| {
                matches!(
                    self.outcome_in(&ledger, &d.doc_id, pass),
                    Outcome::Pending | Outcome::Partial
                )
            })
            .filter(|d| {
                reviewer.is_none_or(|r| {
                    !ledger.records(&d.doc_id, pass).iter().any(|x| x.reviewer == r)
                })
            })
            .map(|d| QueueItem {
                doc_id: d.doc_id.clone(),
                title: d.title.clone(),
                year: d.year,
                venue: d.venue.clone(),
                cited_by: d.cited_by,
                pass,
                other_decisions: ledger.records(&d.doc_id, pass).len(),
            })
            .collect();
        let total = pending.len();
        let page_size = page_size.max(1);
        let items = pending.into_iter().skip(page.saturating_mul(page_size)).take(page_size).collect();
        (total, items)
    }

    fn replayed(&self, store: &Store, input: &DecisionInput, action: DecisionAction) -> Result<Option<DecisionRecord>, ScreeningError> {
        let Some(id) = input.decision_id else {
            return Ok(None);
        };
        let Some(existing) = store.decisions().iter().find(|d| d.decision_id == id) else {
            return Ok(None);
        };
        let same_doc = store.canonical(&input.doc_id) == Some(&existing.doc_id);
        if same_doc
            && existing.pass == input.pass
            && existing.reviewer == input.reviewer
            && i64::from(existing.group) == input.group
            && existing.action == action
        {
            Ok(Some(existing.clone()))
        } else {
            Err(ScreeningError::IdempotencyMismatch(id))
        }
    }

    fn validate(&self, store: &Store, input: &DecisionInput) -> Result<(DocId, u8), ScreeningError> {
        if !(0..=i64::from(MAX_GROUP)).contains(&input.group) {
            return Err(ScreeningError::Validation(format!(
                "group {} is outside 0..={MAX_GROUP}",
                input.group
            )));
        }
        if input.reviewer.trim().is_empty() {
            return Err(ScreeningError::Validation("reviewer id is empty".into()));
        }
        let id = store
            .canonical(&input.doc_id)
            .cloned()
            .ok_or_else(|| ScreeningError::UnknownDocument(input.doc_id.clone()))?;
        Ok((id, input.group as u8))
    }

    fn check_order(&self, ledger: &Ledger<'_>, doc: &DocId, pass: Pass) -> Result<(), ScreeningError> {
        let requires = match (pass, self.config.routing) {
            (Pass::Title, _) => return Ok(()),
            (Pass::Fulltext, Routing::Sequential) => Pass::Abstract,
            _ => Pass::Title,
        };
        if requires == Pass::Abstract {
            self.check_order(ledger, doc, Pass::Abstract)?;
        }
        match self.outcome_in(ledger, doc, requires) {
            Outcome::Final(_) => Ok(()),
            _ => Err(ScreeningError::Ordering {
                doc_id: doc.clone(),
                pass,
                requires,
            }),
        }
    }

    /// Record one reviewer's group for a queued document.
    pub fn decide(&self, store: &mut Store, input: DecisionInput, now: DateTime<Utc>) -> Result<Submitted, ScreeningError> {
        if let Some(record) = self.replayed(store, &input, DecisionAction::Review)? {
            return Ok(Submitted { record, created: false });
        }
        let (doc, group) = self.validate(store, &input)?;
        {
            let ledger = Ledger::new(store);
            if !store.has_membership(&doc) {
                return Err(ScreeningError::NotQueued { doc_id: doc, pass: input.pass });
            }
            self.check_order(&ledger, &doc, input.pass)?;
            if !self.in_pass(store, &ledger, &doc, input.pass) {
                return Err(ScreeningError::NotQueued { doc_id: doc, pass: input.pass });
            }
            if ledger.records(&doc, input.pass).iter().any(|r| r.reviewer == input.reviewer) {
                return Err(ScreeningError::Duplicate {
                    doc_id: doc,
                    pass: input.pass,
                    reviewer: input.reviewer,
                });
            }
            if !matches!(
                self.outcome_in(&ledger, &doc, input.pass),
                Outcome::Pending | Outcome::Partial
            ) {
                return Err(ScreeningError::NotQueued { doc_id: doc, pass: input.pass });
            }
        }
        self.append(store, doc, group, input, DecisionAction::Review, now)
    }

    /// Settle a conflict with an explicit resolution record. The conflicting
    /// reviews stay in the log.
    pub fn resolve(&self, store: &mut Store, input: ResolveInput, now: DateTime<Utc>) -> Result<Submitted, ScreeningError> {
        if let Some(record) = self.replayed(store, &input, DecisionAction::Resolution)? {
            return Ok(Submitted { record, created: false });
        }
        let (doc, group) = self.validate(store, &input)?;
        if self.outcome(store, &doc, input.pass) != Outcome::Conflict {
            return Err(ScreeningError::NoConflict { doc_id: doc, pass: input.pass });
        }
        self.append(store, doc, group, input, DecisionAction::Resolution, now)
    }

    fn append(
        &self,
        store: &mut Store,
        doc: DocId,
        group: u8,
        input: DecisionInput,
        action: DecisionAction,
        now: DateTime<Utc>,
    ) -> Result<Submitted, ScreeningError> {
        let record = DecisionRecord {
            seq: 0,
            decision_id: input.decision_id.unwrap_or_else(Uuid::new_v4),
            doc_id: doc.clone(),
            pass: input.pass,
            reviewer: input.reviewer,
            group,
            action,
            decided_at: now,
            note: input.note,
        };
        let record = store.push_decision(record)?;
        if let Outcome::Final(g) = self.outcome(store, &doc, input.pass) {
            self.apply_outcome(store, &doc, input.pass, g)?;
        }
        Ok(Submitted { record, created: true })
    }

    /// Move the document's stage once a pass outcome is final.
    fn apply_outcome(&self, store: &mut Store, doc: &DocId, pass: Pass, group: u8) -> Result<(), ScreeningError> {
        let target = match (pass, self.config.routing) {
            (Pass::Title, _) if group >= 3 => Stage::Eligible,
            (Pass::Title, _) => Stage::Screened,
            (Pass::Abstract, Routing::Sequential) if (1..=2).contains(&group) => Stage::Screened,
            (_, _) if group == 0 => Stage::Excluded,
            _ => Stage::Eligible,
        };
        if pass == Pass::Title {
            store.set_stage(doc, Stage::Screened)?;
        }
        store.set_stage(doc, target)?;
        Ok(())
    }

    pub fn conflicts(&self, store: &Store) -> Vec<ConflictView> {
        let ledger = Ledger::new(store);
        let mut out = Vec::new();
        for ((doc, pass), records) in &ledger.by_key {
            if self.outcome_in(&ledger, doc, *pass) == Outcome::Conflict {
                out.push(ConflictView {
                    doc_id: doc.clone(),
                    pass: *pass,
                    reviews: records.iter().map(|r| (*r).clone()).collect(),
                });
            }
        }
        out
    }

    /// Documents that continue from `pass` to a deeper check. Fails while any
    /// document at `pass` is undecided or in conflict.
    pub fn pool_for_next_pass(&self, store: &Store, pass: Pass) -> Result<BTreeSet<DocId>, ScreeningError> {
        let outcomes = self.outcomes(store, pass);
        let pending: Vec<DocId> = outcomes
            .iter()
            .filter(|(_, o)| !matches!(o, Outcome::Final(_)))
            .map(|(d, _)| d.clone())
            .collect();
        if !pending.is_empty() {
            return Err(ScreeningError::IncompletePass { pass, pending });
        }
        let pooled = |g: u8| match (pass, self.config.routing) {
            (Pass::Title, _) => g <= 2,
            (Pass::Abstract, Routing::Sequential) => (1..=2).contains(&g),
            _ => false,
        };
        Ok(outcomes
            .into_iter()
            .filter_map(|(d, o)| match o {
                Outcome::Final(g) if pooled(g) => Some(d),
                _ => None,
            })
            .collect())
    }

    /// Documents retained outright at the title pass (groups 3–4).
    pub fn retained_at_title(&self, store: &Store) -> BTreeSet<DocId> {
        self.outcomes(store, Pass::Title)
            .into_iter()
            .filter_map(|(d, o)| matches!(o, Outcome::Final(g) if g >= 3).then_some(d))
            .collect()
    }

    /// Pooled titles still waiting for a final deeper outcome.
    pub fn unsettled_deeper(&self, store: &Store) -> Vec<DocId> {
        let ledger = Ledger::new(store);
        store
            .documents()
            .filter(|d| store.has_membership(&d.doc_id))
            .filter(|d| matches!(self.outcome_in(&ledger, &d.doc_id, Pass::Title), Outcome::Final(g) if g <= 2))
            .filter(|d| d.stage != Stage::Excluded && d.stage.rank() < Stage::Eligible.rank())
            .map(|d| d.doc_id.clone())
            .collect()
    }

    /// Promote every eligible scoping document to `seed`. Fails while any
    /// scoping document is still undecided.
    pub fn finalize_eligible(&self, store: &mut Store) -> Result<usize, ScreeningError> {
        self.pool_for_next_pass(store, Pass::Title)?;
        let unsettled = self.unsettled_deeper(store);
        if !unsettled.is_empty() {
            let pass = match self.config.routing {
                Routing::Split => Pass::Abstract,
                Routing::Sequential => Pass::Fulltext,
            };
            return Err(ScreeningError::IncompletePass { pass, pending: unsettled });
        }
        let eligible: Vec<DocId> = store
            .documents()
            .filter(|d| d.stage == Stage::Eligible && store.has_membership(&d.doc_id))
            .map(|d| d.doc_id.clone())
            .collect();
        for d in &eligible {
            store.set_stage(d, Stage::Seed)?;
        }
        Ok(eligible.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, QueryId};
    use chrono::TimeZone;

    fn now() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2020, 8, 1, 12, 0, 0).unwrap()
    }

    fn scoping_store(n: usize) -> Store {
        let mut s = Store::new();
        for i in 0..n {
            let id = format!("d{i:02}");
            s.upsert(Document::new(&id, format!("Title {}", (b'a' + i as u8) as char), Some(2000))).unwrap();
            s.add_membership(&DocId(id), &QueryId::from("1_IMH"), i as u32 + 1).unwrap();
        }
        s
    }

    fn input(doc: &str, pass: Pass, reviewer: &str, group: i64) -> DecisionInput {
        DecisionInput {
            decision_id: None,
            doc_id: DocId::from(doc),
            pass,
            reviewer: reviewer.into(),
            group,
            note: None,
        }
    }

    #[test]
    fn look_into_is_retained() {
        let mut s = scoping_store(1);
        let e = ScreeningEngine::default();
        e.decide(&mut s, input("d00", Pass::Title, "r1", 4), now()).unwrap();
        assert_eq!(s.get(&"d00".into()).unwrap().stage, Stage::Eligible);
        assert!(e.retained_at_title(&s).contains(&DocId::from("d00")));
    }

    #[test]
    fn distant_groups_conflict() {
        let mut s = scoping_store(1);
        let e = ScreeningEngine::new(ScreeningConfig {
            reviewers_per_doc: 2,
            ..Default::default()
        });
        e.decide(&mut s, input("d00", Pass::Title, "r1", 3), now()).unwrap();
        assert_eq!(e.outcome(&s, &"d00".into(), Pass::Title), Outcome::Partial);
        e.decide(&mut s, input("d00", Pass::Title, "r2", 0), now()).unwrap();
        assert_eq!(e.outcome(&s, &"d00".into(), Pass::Title), Outcome::Conflict);
        assert_eq!(e.conflicts(&s).len(), 1);
        let r = e.resolve(&mut s, input("d00", Pass::Title, "lead", 3), now()).unwrap();
        assert_eq!(r.record.action, DecisionAction::Resolution);
        assert_eq!(e.outcome(&s, &"d00".into(), Pass::Title), Outcome::Final(3));
        assert!(e.conflicts(&s).is_empty());
        // originals remain in the log
        assert_eq!(s.decisions().len(), 3);
    }

    #[test]
    fn adjacent_groups_take_the_higher() {
        let mut s = scoping_store(1);
        let e = ScreeningEngine::new(ScreeningConfig {
            reviewers_per_doc: 2,
            ..Default::default()
        });
        e.decide(&mut s, input("d00", Pass::Title, "r1", 2), now()).unwrap();
        e.decide(&mut s, input("d00", Pass::Title, "r2", 3), now()).unwrap();
        assert_eq!(e.outcome(&s, &"d00".into(), Pass::Title), Outcome::Final(3));
    }

    #[test]
    fn invalid_group_and_ordering() {
        let mut s = scoping_store(2);
        let e = ScreeningEngine::default();
        assert!(matches!(
            e.decide(&mut s, input("d00", Pass::Title, "r1", 7), now()),
            Err(ScreeningError::Validation(_))
        ));
        assert!(matches!(
            e.decide(&mut s, input("d00", Pass::Title, "r1", -1), now()),
            Err(ScreeningError::Validation(_))
        ));
        assert!(matches!(
            e.decide(&mut s, input("d00", Pass::Abstract, "r1", 2), now()),
            Err(ScreeningError::Ordering { requires: Pass::Title, .. })
        ));
        assert!(matches!(
            e.decide(&mut s, input("nope", Pass::Title, "r1", 2), now()),
            Err(ScreeningError::UnknownDocument(_))
        ));
        e.decide(&mut s, input("d01", Pass::Title, "r1", 3), now()).unwrap();
        assert!(matches!(
            e.decide(&mut s, input("d01", Pass::Abstract, "r1", 2), now()),
            Err(ScreeningError::NotQueued { .. })
        ));
    }

    #[test]
    fn decision_ids_make_retries_idempotent() {
        let mut s = scoping_store(1);
        let e = ScreeningEngine::default();
        let id = Uuid::from_u128(42);
        let mut i = input("d00", Pass::Title, "r1", 1);
        i.decision_id = Some(id);
        let first = e.decide(&mut s, i.clone(), now()).unwrap();
        let again = e.decide(&mut s, i.clone(), now()).unwrap();
        assert!(first.created);
        assert!(!again.created);
        assert_eq!(first.record, again.record);
        assert_eq!(s.decisions().len(), 1);
        i.group = 2;
        assert_eq!(e.decide(&mut s, i, now()), Err(ScreeningError::IdempotencyMismatch(id)));
    }

    #[test]
    fn pooling_counts_groups_zero_to_two() {
        let groups = [0, 0, 1, 2, 2, 3, 3, 4, 4, 4];
        let mut s = scoping_store(groups.len());
        let e = ScreeningEngine::default();
        assert!(matches!(
            e.pool_for_next_pass(&s, Pass::Title),
            Err(ScreeningError::IncompletePass { .. })
        ));
        for (i, g) in groups.iter().enumerate() {
            e.decide(&mut s, input(&format!("d{i:02}"), Pass::Title, "r1", *g), now()).unwrap();
        }
        let pooled = e.pool_for_next_pass(&s, Pass::Title).unwrap();
        let oracle = groups.iter().filter(|g| **g <= 2).count();
        assert_eq!(pooled.len(), oracle);
        assert_eq!(pooled.len(), 5);
        let retained = e.retained_at_title(&s);
        assert!(pooled.is_disjoint(&retained));
        assert_eq!(pooled.len() + retained.len(), groups.len());
    }

    #[test]
    fn all_look_into_pools_nothing() {
        let mut s = scoping_store(4);
        let e = ScreeningEngine::default();
        for i in 0..4 {
            e.decide(&mut s, input(&format!("d{i:02}"), Pass::Title, "r1", 4), now()).unwrap();
        }
        assert!(e.pool_for_next_pass(&s, Pass::Title).unwrap().is_empty());
    }

    #[test]
    fn split_routing_claims_one_deeper_pass() {
        let mut s = scoping_store(2);
        let e = ScreeningEngine::default();
        e.decide(&mut s, input("d00", Pass::Title, "r1", 1), now()).unwrap();
        e.decide(&mut s, input("d01", Pass::Title, "r1", 2), now()).unwrap();
        assert_eq!(e.queue(&s, Pass::Abstract, None, 0, 10).0, 2);
        assert_eq!(e.queue(&s, Pass::Fulltext, None, 0, 10).0, 2);
        e.decide(&mut s, input("d00", Pass::Fulltext, "r1", 0), now()).unwrap();
        assert_eq!(s.get(&"d00".into()).unwrap().stage, Stage::Excluded);
        assert!(matches!(
            e.decide(&mut s, input("d00", Pass::Abstract, "r1", 2), now()),
            Err(ScreeningError::NotQueued { .. })
        ));
        e.decide(&mut s, input("d01", Pass::Abstract, "r1", 1), now()).unwrap();
        assert_eq!(s.get(&"d01".into()).unwrap().stage, Stage::Eligible);
        assert_eq!(e.finalize_eligible(&mut s).unwrap(), 1);
        assert_eq!(s.get(&"d01".into()).unwrap().stage, Stage::Seed);
    }

    #[test]
    fn sequential_routing_requires_abstract_before_fulltext() {
        let mut s = scoping_store(2);
        let e = ScreeningEngine::new(ScreeningConfig {
            routing: Routing::Sequential,
            ..Default::default()
        });
        e.decide(&mut s, input("d00", Pass::Title, "r1", 2), now()).unwrap();
        assert!(matches!(
            e.decide(&mut s, input("d00", Pass::Fulltext, "r1", 2), now()),
            Err(ScreeningError::Ordering { requires: Pass::Abstract, .. })
        ));
        e.decide(&mut s, input("d00", Pass::Abstract, "r1", 1), now()).unwrap();
        assert_eq!(e.pool_for_next_pass(&s, Pass::Abstract).unwrap().len(), 1);
        assert!(e.finalize_eligible(&mut s).is_err());
        e.decide(&mut s, input("d00", Pass::Fulltext, "r1", 0), now()).unwrap();
        assert_eq!(s.get(&"d00".into()).unwrap().stage, Stage::Excluded);
    }

    #[test]
    fn queue_hides_own_decisions_and_pages() {
        let mut s = scoping_store(5);
        let e = ScreeningEngine::new(ScreeningConfig {
            reviewers_per_doc: 2,
            ..Default::default()
        });
        e.decide(&mut s, input("d00", Pass::Title, "r1", 3), now()).unwrap();
        let (total, items) = e.queue(&s, Pass::Title, Some("r1"), 0, 2);
        assert_eq!(total, 4);
        assert_eq!(items.len(), 2);
        let (total, items) = e.queue(&s, Pass::Title, Some("r2"), 0, 10);
        assert_eq!(total, 5);
        assert_eq!(items[0].other_decisions, 1);
        assert!(e.queue(&s, Pass::Title, Some("r2"), 9, 10).1.is_empty());
    }
}
