//! Ranked query harvesting and capped cited-by snowballing.

#[cfg(feature = "live")]
pub mod live;
mod rate;
mod source;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, DocId, Document, MergeOutcome, QueryId, QuerySpec, Stage, Store};

pub use rate::{Clock, Exhausted, ManualClock, Politeness, RateGate, SystemClock};
pub use source::{ReplayError, ReplayRecord, ReplaySource, ScholarlySource, SourceError};

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("invalid harvest plan: {0}")]
    Plan(String),
    #[error("snowball needs at least one seed")]
    EmptySeeds,
    #[error("document {0} not found")]
    NotFound(DocId),
    #[error("source failed after {attempts} attempt(s): {error}")]
    Source { attempts: u32, error: SourceError },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl From<Exhausted> for HarvestError {
    fn from(e: Exhausted) -> Self {
        match e.error {
            SourceError::NotFound(id) => HarvestError::NotFound(id),
            error => HarvestError::Source { attempts: e.attempts, error },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiterRanking {
    SourceOrder,
    #[default]
    CitedByDesc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarvestPlan {
    pub queries: Vec<QuerySpec>,
    pub depth: u8,
    /// citers kept per expanded document
    pub k: usize,
    pub citer_ranking: CiterRanking,
    /// how many citers to request before ranking; `None` requests all
    pub citer_pool: Option<usize>,
    /// expansions between checkpoint writes
    pub checkpoint_every: usize,
}

impl Default for HarvestPlan {
    fn default() -> Self {
        HarvestPlan {
            queries: Vec::new(),
            depth: 2,
            k: 100,
            citer_ranking: CiterRanking::default(),
            citer_pool: None,
            checkpoint_every: 25,
        }
    }
}

impl HarvestPlan {
    pub fn validate(&self, max_layer: u8) -> Result<(), HarvestError> {
        if self.k == 0 {
            return Err(HarvestError::Plan("k must be at least 1".into()));
        }
        if self.depth > max_layer {
            return Err(HarvestError::Plan(format!("depth {} exceeds the store's max layer {max_layer}", self.depth)));
        }
        let mut ids = BTreeSet::new();
        for q in &self.queries {
            q.validate()?;
            if !ids.insert(&q.query_id) {
                return Err(HarvestError::Plan(format!("duplicate query id {}", q.query_id)));
            }
        }
        Ok(())
    }
}

/// Orders citers and keeps the top `k`.
///
/// Cited-by ranking sorts by count descending, ties by doc id ascending.
pub fn rank_citers(mut docs: Vec<Document>, ranking: CiterRanking, k: usize) -> Vec<Document> {
    if ranking == CiterRanking::CitedByDesc {
        docs.sort_by(|a, b| b.cited_by.cmp(&a.cited_by).then_with(|| a.doc_id.cmp(&b.doc_id)));
    }
    docs.truncate(k);
    docs
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerCount {
    pub layer: u8,
    /// documents first reached at this layer
    pub documents: u64,
    /// documents of the previous layer whose citers were fetched
    pub expanded: u64,
}

/// Resumable snowball progress.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnowballState {
    pub seeds: Vec<DocId>,
    /// layer currently being built
    pub layer: u8,
    pub frontier: Vec<DocId>,
    pub expanded: BTreeSet<DocId>,
    pub next: BTreeSet<DocId>,
    pub layers: Vec<LayerCount>,
    pub new_documents: u64,
    pub new_edges: u64,
    pub done: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestCheckpoint {
    pub completed_queries: BTreeSet<QueryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snowball: Option<SnowballState>,
}

impl HarvestCheckpoint {
    pub fn load(path: &Path) -> Result<Self, HarvestError> {
        let text = fs::read_to_string(path).map_err(|e| HarvestError::Checkpoint(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarvestError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), HarvestError> {
        let err = |e: std::io::Error| HarvestError::Checkpoint(format!("{}: {e}", path.display()));
        let tmp = path.with_extension("tmp");
        let json = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        fs::write(&tmp, json).map_err(err)?;
        fs::rename(&tmp, path).map_err(err)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnowballReport {
    /// layer 0 holds the seeds
    pub layers: Vec<LayerCount>,
    pub new_documents: u64,
    pub new_edges: u64,
}

/// Called with the current checkpoint whenever progress should be persisted.
pub type Progress<'a> = &'a mut dyn FnMut(&HarvestCheckpoint, &mut Store) -> Result<(), HarvestError>;

/// A progress hook that persists nothing.
pub fn no_progress(_: &HarvestCheckpoint, _: &mut Store) -> Result<(), HarvestError> {
    Ok(())
}

struct Fetched {
    docs: Vec<Document>,
    inserted: u64,
    edges: u64,
}

pub struct Harvester<S> {
    source: S,
    gate: RateGate,
    plan: HarvestPlan,
}

impl<S: ScholarlySource> Harvester<S> {
    pub fn new(source: S, plan: HarvestPlan, gate: RateGate) -> Self {
        Harvester { source, gate, plan }
    }

    pub fn plan(&self) -> &HarvestPlan {
        &self.plan
    }

    pub fn gate(&self) -> &RateGate {
        &self.gate
    }

    /// Runs one query and records its memberships. Returns the store's
    /// canonical records in rank order.
    pub fn fetch_query_results(&self, store: &mut Store, query: &QuerySpec) -> Result<Vec<Document>, HarvestError> {
        query.validate()?;
        let k = query.k as usize;
        let mut results = self.gate.call(|| self.source.search(query, k))?;
        results.truncate(k);
        let mut out = Vec::with_capacity(results.len());
        for (i, mut doc) in results.into_iter().enumerate() {
            doc.layer = 0;
            doc.stage = Stage::Identified;
            let id = store.upsert(doc)?.doc_id;
            if !store.memberships_of(&id).iter().any(|(q, _)| q == &query.query_id) {
                store.add_membership(&id, &query.query_id, i as u32 + 1)?;
            }
            out.push(store.get(&id).expect("upserted").clone());
        }
        tracing::debug!(query = %query.query_id, results = out.len(), "query harvested");
        Ok(out)
    }

    /// Fetches the top citers of `doc_id` and records them at `layer`.
    pub fn fetch_citers(&self, store: &mut Store, doc_id: &DocId, layer: u8) -> Result<Vec<Document>, HarvestError> {
        Ok(self.fetch_citers_counted(store, doc_id, layer)?.docs)
    }

    fn fetch_citers_counted(&self, store: &mut Store, doc_id: &DocId, layer: u8) -> Result<Fetched, HarvestError> {
        let cited = store.canonical(doc_id).cloned().ok_or_else(|| HarvestError::NotFound(doc_id.clone()))?;
        let pool = match self.plan.citer_ranking {
            CiterRanking::SourceOrder => Some(self.plan.k),
            CiterRanking::CitedByDesc => self.plan.citer_pool,
        };
        let raw = self.gate.call(|| self.source.citers(&cited, pool))?;
        let ranked = rank_citers(raw, self.plan.citer_ranking, self.plan.k);
        let mut f = Fetched { docs: Vec::with_capacity(ranked.len()), inserted: 0, edges: 0 };
        for mut doc in ranked {
            doc.layer = layer;
            doc.stage = Stage::CitationCorpus;
            let report = store.upsert(doc)?;
            if report.outcome == MergeOutcome::Inserted {
                f.inserted += 1;
            }
            if report.doc_id != cited && store.add_edge(&report.doc_id, &cited, layer)? {
                f.edges += 1;
            }
            f.docs.push(store.get(&report.doc_id).expect("upserted").clone());
        }
        Ok(f)
    }

    /// Runs every plan query not yet marked complete in `checkpoint`.
    pub fn harvest_queries(
        &self,
        store: &mut Store,
        checkpoint: &mut HarvestCheckpoint,
        progress: Progress<'_>,
    ) -> Result<usize, HarvestError> {
        self.plan.validate(store.max_layer())?;
        let mut ran = 0;
        for q in &self.plan.queries {
            if checkpoint.completed_queries.contains(&q.query_id) {
                continue;
            }
            if let Err(e) = self.fetch_query_results(store, q) {
                let _ = progress(checkpoint, store);
                return Err(e);
            }
            checkpoint.completed_queries.insert(q.query_id.clone());
            ran += 1;
            progress(checkpoint, store)?;
        }
        Ok(ran)
    }

    /// Breadth-first cited-by expansion from `seeds` up to the plan depth.
    ///
    /// Each layer expands only the documents first reached at the previous
    /// layer. An unfinished state in `checkpoint` is resumed; a finished
    /// one is reported as is.
    pub fn snowball(
        &self,
        store: &mut Store,
        seeds: &[DocId],
        checkpoint: &mut HarvestCheckpoint,
        progress: Progress<'_>,
    ) -> Result<SnowballReport, HarvestError> {
        self.plan.validate(store.max_layer())?;
        let mut st = match checkpoint.snowball.take() {
            Some(st) => st,
            None => {
                let mut ids = BTreeSet::new();
                for s in seeds {
                    ids.insert(store.canonical(s).cloned().ok_or_else(|| HarvestError::NotFound(s.clone()))?);
                }
                if ids.is_empty() {
                    return Err(HarvestError::EmptySeeds);
                }
                let seeds: Vec<DocId> = ids.into_iter().collect();
                SnowballState {
                    layers: vec![LayerCount { layer: 0, documents: seeds.len() as u64, expanded: 0 }],
                    frontier: seeds.clone(),
                    seeds,
                    layer: 1,
                    ..Default::default()
                }
            }
        };
        let every = self.plan.checkpoint_every.max(1);
        let mut since = 0;
        while !st.done && st.layer <= self.plan.depth {
            for id in st.frontier.clone() {
                if st.expanded.contains(&id) {
                    continue;
                }
                let fetched = match self.fetch_citers_counted(store, &id, st.layer) {
                    Ok(f) => f,
                    Err(e) => {
                        checkpoint.snowball = Some(st);
                        let _ = progress(checkpoint, store);
                        return Err(e);
                    }
                };
                for d in &fetched.docs {
                    if d.layer == st.layer {
                        st.next.insert(d.doc_id.clone());
                    }
                }
                st.new_documents += fetched.inserted;
                st.new_edges += fetched.edges;
                st.expanded.insert(id);
                since += 1;
                if since >= every {
                    since = 0;
                    checkpoint.snowball = Some(st.clone());
                    progress(checkpoint, store)?;
                }
            }
            st.layers.push(LayerCount {
                layer: st.layer,
                documents: st.next.len() as u64,
                expanded: st.frontier.len() as u64,
            });
            tracing::info!(layer = st.layer, documents = st.next.len(), "snowball layer complete");
            st.frontier = std::mem::take(&mut st.next).into_iter().collect();
            st.expanded.clear();
            st.layer += 1;
            checkpoint.snowball = Some(st.clone());
            progress(checkpoint, store)?;
        }
        st.done = true;
        st.frontier.clear();
        let report = SnowballReport {
            layers: st.layers.clone(),
            new_documents: st.new_documents,
            new_edges: st.new_edges,
        };
        checkpoint.snowball = Some(st);
        progress(checkpoint, store)?;
        Ok(report)
    }
}

/// Adds references of notable interest directly to the seed set.
pub fn inject_notables(store: &mut Store, notables: &[Document]) -> Result<Vec<DocId>, HarvestError> {
    let mut ids = Vec::with_capacity(notables.len());
    for n in notables {
        let mut doc = n.clone();
        doc.layer = 0;
        doc.stage = Stage::Seed;
        ids.push(store.upsert(doc)?.doc_id);
    }
    Ok(ids)
}

/// Layer-0 documents in the seed stage.
pub fn seed_ids(store: &Store) -> Vec<DocId> {
    store
        .documents()
        .filter(|d| d.layer == 0 && d.stage == Stage::Seed)
        .map(|d| d.doc_id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Genre;
    use std::cell::Cell;

    fn harvester<S: ScholarlySource>(source: S, plan: HarvestPlan) -> Harvester<S> {
        Harvester::new(source, plan, RateGate::new(Politeness::none(), std::sync::Arc::new(ManualClock::default())))
    }

    fn doc(id: &str, cited_by: u64) -> Document {
        Document::new(id, format!("Study {}", id.replace(|c: char| c.is_ascii_digit(), "")), Some(2000)).with_cited_by(cited_by)
    }

    fn word(i: usize) -> String {
        let mut s = String::new();
        let mut n = i;
        loop {
            s.push((b'a' + (n % 26) as u8) as char);
            n /= 26;
            if n == 0 {
                break;
            }
        }
        s
    }

    fn named(prefix: &str, i: usize, cited_by: u64) -> Document {
        Document::new(format!("{prefix}{i}"), format!("{prefix} {}", word(i)), Some(2000)).with_cited_by(cited_by)
    }

    #[test]
    fn query_cap_and_short_lists() {
        let mut src = ReplaySource::new();
        let long: Vec<DocId> = (0..250).map(|i| {
            src.add_document(named("p", i, 0));
            DocId(format!("p{i}"))
        }).collect();
        src.set_search("2G", long);
        let short: Vec<DocId> = (0..37).map(|i| {
            src.add_document(named("s", i, 0));
            DocId(format!("s{i}"))
        }).collect();
        src.set_search("3G", short);
        let h = harvester(src, HarvestPlan::default());
        let mut store = Store::new();
        let got = h.fetch_query_results(&mut store, &QuerySpec::new("2G", Genre::IM, &[], "q")).unwrap();
        assert_eq!(got.len(), 100);
        let ranks: Vec<u32> = store.memberships().filter(|m| m.query_id.as_str() == "2G").map(|m| m.rank).collect();
        assert_eq!(ranks, (1..=100).collect::<Vec<_>>());
        assert_eq!(got[0].doc_id.as_str(), "p0");
        let got = h.fetch_query_results(&mut store, &QuerySpec::new("3G", Genre::RM, &[], "q")).unwrap();
        assert_eq!(got.len(), 37);
    }

    #[test]
    fn citers_ranked_by_count_with_id_ties() {
        let mut src = ReplaySource::new();
        src.add_document(named("seed", 0, 0));
        let ids: Vec<DocId> = (0..150).map(|i| {
            src.add_document(named("c", i, (i % 10) as u64));
            DocId(format!("c{i}"))
        }).collect();
        src.set_citers("seed0", ids);
        src.add_document(named("leaf", 0, 0));
        let h = harvester(src, HarvestPlan::default());
        let mut store = Store::new();
        store.upsert(named("seed", 0, 0)).unwrap();
        store.upsert(named("leaf", 0, 0)).unwrap();
        let got = h.fetch_citers(&mut store, &"seed0".into(), 1).unwrap();
        assert_eq!(got.len(), 100);
        assert!(got.windows(2).all(|w| w[0].cited_by > w[1].cited_by
            || (w[0].cited_by == w[1].cited_by && w[0].doc_id < w[1].doc_id)));
        assert_eq!(got[0].cited_by, 9);
        assert_eq!(store.edge_count(), 100);
        assert!(store.edges().all(|e| e.layer == 1 && e.cited.as_str() == "seed0"));
        assert!(h.fetch_citers(&mut store, &"leaf0".into(), 1).unwrap().is_empty());
        assert!(matches!(h.fetch_citers(&mut store, &"ghost".into(), 1), Err(HarvestError::NotFound(_))));
    }

    #[test]
    fn source_order_ranking_keeps_first_k() {
        let docs = vec![doc("a", 1), doc("b", 9), doc("c", 5)];
        let got = rank_citers(docs.clone(), CiterRanking::SourceOrder, 2);
        assert_eq!(got.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        let got = rank_citers(docs, CiterRanking::CitedByDesc, 2);
        assert_eq!(got.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>(), ["b", "c"]);
    }

    #[test]
    fn exactly_k_citers_all_returned() {
        let mut src = ReplaySource::new();
        src.add_document(named("seed", 0, 0));
        let ids: Vec<DocId> = (0..100).map(|i| {
            src.add_document(named("c", i, 0));
            DocId(format!("c{i}"))
        }).collect();
        src.set_citers("seed0", ids);
        let h = harvester(src, HarvestPlan::default());
        let mut store = Store::new();
        store.upsert(named("seed", 0, 0)).unwrap();
        assert_eq!(h.fetch_citers(&mut store, &"seed0".into(), 1).unwrap().len(), 100);
    }

    #[test]
    fn depth_zero_is_seeds_only() {
        let mut src = ReplaySource::new();
        src.add_document(named("seed", 0, 0));
        src.add_document(named("c", 0, 0));
        src.set_citers("seed0", vec!["c0".into()]);
        let h = harvester(src, HarvestPlan { depth: 0, ..Default::default() });
        let mut store = Store::new();
        store.upsert(named("seed", 0, 0)).unwrap();
        let r = h.snowball(&mut store, &["seed0".into()], &mut HarvestCheckpoint::default(), &mut no_progress).unwrap();
        assert_eq!(r.layers, vec![LayerCount { layer: 0, documents: 1, expanded: 0 }]);
        assert_eq!((store.len(), store.edge_count()), (1, 0));
        assert_eq!(h.gate().requests(), 0);
    }

    #[test]
    fn empty_seed_set_rejected() {
        let h = harvester(ReplaySource::new(), HarvestPlan::default());
        let err = h.snowball(&mut Store::new(), &[], &mut HarvestCheckpoint::default(), &mut no_progress).unwrap_err();
        assert!(matches!(err, HarvestError::EmptySeeds));
    }

    #[test]
    fn plan_validation() {
        assert!(HarvestPlan { k: 0, ..Default::default() }.validate(2).is_err());
        assert!(HarvestPlan { depth: 3, ..Default::default() }.validate(2).is_err());
        assert!(HarvestPlan { depth: 3, ..Default::default() }.validate(3).is_ok());
    }

    /// Fails on the n-th citer request, then behaves.
    struct Flaky<'a> {
        inner: &'a ReplaySource,
        calls: Cell<usize>,
        fail_at: usize,
    }

    impl ScholarlySource for Flaky<'_> {
        fn search(&self, q: &QuerySpec, k: usize) -> Result<Vec<Document>, SourceError> {
            self.inner.search(q, k)
        }

        fn citers(&self, id: &DocId, limit: Option<usize>) -> Result<Vec<Document>, SourceError> {
            let n = self.calls.get() + 1;
            self.calls.set(n);
            if n == self.fail_at {
                return Err(SourceError::Fatal("connection reset".into()));
            }
            self.inner.citers(id, limit)
        }
    }

    #[test]
    fn interrupted_snowball_resumes_to_same_store() {
        let mut src = ReplaySource::new();
        src.add_document(named("s", 0, 0));
        src.add_document(named("s", 1, 0));
        for i in 0..20 {
            src.add_document(named("a", i, i as u64));
        }
        for i in 0..40 {
            src.add_document(named("b", i, 0));
        }
        src.set_citers("s0", (0..12).map(|i| DocId(format!("a{i}"))).collect());
        src.set_citers("s1", (8..20).map(|i| DocId(format!("a{i}"))).collect());
        for i in 0..20 {
            src.set_citers(format!("a{i}").as_str(), (i..i + 20).map(|j| DocId(format!("b{j}"))).collect());
        }
        let plan = HarvestPlan { k: 5, checkpoint_every: 1, ..Default::default() };
        let fresh = || {
            let mut s = Store::new();
            s.upsert(named("s", 0, 0).with_stage(Stage::Seed)).unwrap();
            s.upsert(named("s", 1, 0).with_stage(Stage::Seed)).unwrap();
            s
        };
        let seeds = vec![DocId::from("s0"), DocId::from("s1")];

        let mut clean = fresh();
        let full = harvester(&src, plan.clone())
            .snowball(&mut clean, &seeds, &mut HarvestCheckpoint::default(), &mut no_progress)
            .unwrap();

        let mut store = fresh();
        let mut ckpt = HarvestCheckpoint::default();
        let mut saved: Option<(HarvestCheckpoint, Store)> = None;
        let flaky = Flaky { inner: &src, calls: Cell::new(0), fail_at: 4 };
        let err = harvester(&flaky, plan.clone())
            .snowball(&mut store, &seeds, &mut ckpt, &mut |c, s| {
                saved = Some((c.clone(), s.clone()));
                Ok(())
            })
            .unwrap_err();
        assert!(matches!(err, HarvestError::Source { attempts: 1, .. }));
        let (mut ckpt, mut store) = saved.unwrap();
        assert!(!ckpt.snowball.as_ref().unwrap().done);
        let resumed = harvester(&src, plan).snowball(&mut store, &seeds, &mut ckpt, &mut no_progress).unwrap();
        assert_eq!(store, clean);
        assert_eq!(resumed.layers, full.layers);
    }

    #[test]
    fn notables_become_seeds() {
        let mut store = Store::new();
        let ids = inject_notables(&mut store, &[Document::new("lee1966", "A Theory of Migration", Some(1966)).with_cited_by(6592)]).unwrap();
        assert_eq!(ids, vec![DocId::from("lee1966")]);
        assert_eq!(seed_ids(&store), ids);
        assert_eq!(store.get(&ids[0]).unwrap().stage, Stage::Seed);
    }
}
