use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::{Outcome, ScreeningEngine};
use super::{Pass, ScreeningError};
use crate::corpus::{Stage, Store};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassTally {
    /// final outcomes per relevance group, indexed 0..=4
    pub groups: [u64; 5],
    pub pending: u64,
    pub conflicts: u64,
}

impl PassTally {
    pub fn decided(&self) -> u64 {
        self.groups.iter().sum()
    }

    pub fn queued(&self) -> u64 {
        self.decided() + self.pending + self.conflicts
    }
}

/// Stage accounting over the whole store.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowReport {
    /// unique documents returned by the queries
    pub scoping: u64,
    /// scoping documents excluded during screening
    pub pruned: u64,
    pub eligible: u64,
    /// notable references injected directly as seeds
    pub notable_added: u64,
    pub seeds: u64,
    /// seeds plus every harvested citing document
    pub citation_corpus: u64,
    pub passes: BTreeMap<Pass, PassTally>,
}

impl FlowReport {
    /// The arithmetic identities every report satisfies.
    pub fn check(&self) -> Result<(), ScreeningError> {
        if self.eligible + self.pruned != self.scoping {
            return Err(ScreeningError::Invariant(format!(
                "eligible {} + pruned {} != scoping {}",
                self.eligible, self.pruned, self.scoping
            )));
        }
        if self.seeds != self.eligible + self.notable_added {
            return Err(ScreeningError::Invariant(format!(
                "seeds {} != eligible {} + notable {}",
                self.seeds, self.eligible, self.notable_added
            )));
        }
        if self.citation_corpus < self.seeds {
            return Err(ScreeningError::Invariant(format!(
                "citation corpus {} smaller than seeds {}",
                self.citation_corpus, self.seeds
            )));
        }
        Ok(())
    }
}

pub fn prisma_flow(store: &Store, engine: &ScreeningEngine) -> FlowReport {
    let mut r = FlowReport::default();
    let mut harvested = 0;
    for doc in store.documents() {
        let scoping = store.has_membership(&doc.doc_id);
        let excluded = doc.stage == Stage::Excluded;
        match (scoping, doc.layer) {
            (true, _) => {
                r.scoping += 1;
                if excluded {
                    r.pruned += 1;
                }
            }
            (false, 0) if !excluded => r.notable_added += 1,
            (false, _) if !excluded => harvested += 1,
            _ => {}
        }
    }
    r.eligible = r.scoping - r.pruned;
    r.seeds = r.eligible + r.notable_added;
    r.citation_corpus = r.seeds + harvested;
    for pass in Pass::ALL {
        let mut tally = PassTally::default();
        for outcome in engine.outcomes(store, pass).values() {
            match outcome {
                Outcome::Final(g) => tally.groups[*g as usize] += 1,
                Outcome::Conflict => tally.conflicts += 1,
                Outcome::Pending | Outcome::Partial => tally.pending += 1,
            }
        }
        r.passes.insert(pass, tally);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocId, Document, QueryId};
    use crate::screening::DecisionInput;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn store_with(n: usize) -> Store {
        let mut s = Store::new();
        for i in 0..n {
            let id = format!("d{i:03}");
            s.upsert(Document::new(&id, format!("Paper {}", word(i)), Some(2001))).unwrap();
            s.add_membership(&DocId(id), &QueryId::from("2G"), i as u32 + 1).unwrap();
        }
        s
    }

    fn word(i: usize) -> String {
        let letters: Vec<char> = "abcdefghijklmnopqrstuvwxyz".chars().collect();
        format!("{}{}", letters[i % 26], letters[(i / 26) % 26])
    }

    fn decide(e: &ScreeningEngine, s: &mut Store, i: usize, pass: Pass, group: i64) -> Result<(), ScreeningError> {
        e.decide(
            s,
            DecisionInput {
                decision_id: None,
                doc_id: DocId(format!("d{i:03}")),
                pass,
                reviewer: "r1".into(),
                group,
                note: None,
            },
            Utc.timestamp_opt(0, 0).unwrap(),
        )
        .map(|_| ())
    }

    #[test]
    fn empty_store_reports_zeros() {
        let r = prisma_flow(&Store::new(), &ScreeningEngine::default());
        assert_eq!((r.scoping, r.pruned, r.eligible, r.notable_added, r.seeds, r.citation_corpus), (0, 0, 0, 0, 0, 0));
        r.check().unwrap();
    }

    #[test]
    fn twenty_docs_five_excluded() {
        let mut s = store_with(20);
        let e = ScreeningEngine::default();
        for i in 0..20 {
            decide(&e, &mut s, i, Pass::Title, if i < 8 { 1 } else { 4 }).unwrap();
        }
        for i in 0..8 {
            decide(&e, &mut s, i, Pass::Abstract, if i < 5 { 0 } else { 2 }).unwrap();
        }
        let r = prisma_flow(&s, &e);
        assert_eq!(r.scoping, 20);
        assert_eq!(r.pruned, 5);
        assert_eq!(r.eligible, 15);
        assert_eq!(r.eligible + r.pruned, r.scoping);
        assert_eq!(r.passes[&Pass::Title].groups, [0, 8, 0, 0, 12]);
        assert_eq!(r.passes[&Pass::Abstract].decided(), 8);
    }

    #[test]
    fn notables_and_harvest_counted() {
        let mut s = store_with(3);
        s.upsert(Document::new("lee", "A Theory of Migration", Some(1966)).with_stage(Stage::Seed)).unwrap();
        s.upsert(Document::new("c1", "Citing work", Some(2010)).with_layer(1).with_stage(Stage::CitationCorpus)).unwrap();
        let r = prisma_flow(&s, &ScreeningEngine::default());
        assert_eq!((r.scoping, r.notable_added, r.seeds, r.citation_corpus), (3, 1, 4, 5));
        r.check().unwrap();
    }

    proptest! {
        #[test]
        fn excluding_one_more_decrements_eligible(groups in prop::collection::vec(0i64..5, 1..25), pick in any::<prop::sample::Index>()) {
            let n = groups.len();
            let mut s = store_with(n);
            let e = ScreeningEngine::default();
            for (i, g) in groups.iter().enumerate() {
                decide(&e, &mut s, i, Pass::Title, *g).unwrap();
            }
            let before = prisma_flow(&s, &e);
            before.check().unwrap();
            let pooled: Vec<DocId> = e.pool_for_next_pass(&s, Pass::Title).unwrap().into_iter().collect();
            prop_assume!(!pooled.is_empty());
            let victim = pick.get(&pooled);
            e.decide(&mut s, DecisionInput {
                decision_id: None,
                doc_id: victim.clone(),
                pass: Pass::Fulltext,
                reviewer: "r1".into(),
                group: 0,
                note: None,
            }, Utc.timestamp_opt(0, 0).unwrap()).unwrap();
            let after = prisma_flow(&s, &e);
            after.check().unwrap();
            prop_assert_eq!(after.eligible + 1, before.eligible);
            prop_assert_eq!(after.pruned, before.pruned + 1);
        }
    }
}
