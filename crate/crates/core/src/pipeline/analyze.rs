use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Artifact, PipelineConfig, PipelineError, REPORTS_DIR};
use crate::corpus::{near_duplicates, DocId, Document, Membership, QueryId, Stage, Store};
use crate::graphlab::{bridging_rank, write_centrality_csv, CitationGraph};
use crate::metrics::{
    collapse_memberships, corpus_reading_budget, growth_series, query_intersections, write_budget_csv,
    write_growth_csv, write_intersections_csv, IntersectionSummary, Intersections, ReadingBudget,
};
use crate::screening::FlowReport;
use crate::textlab::{analysis_terms, associations, build_tdm, top_terms, TextError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThemeSummary {
    pub nodes: u64,
    pub edges: u64,
}

/// Headline numbers, also stored in the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub documents: u64,
    pub edges: u64,
    pub queries: IntersectionSummary,
    pub query_groups: IntersectionSummary,
    /// documents returned by the most queries
    pub max_overlap_docs: Vec<DocId>,
    pub languages: BTreeMap<String, u64>,
    pub non_english_share: f64,
    pub budgets: Vec<ReadingBudget>,
    pub tdm_terms: u64,
    pub tdm_docs: u64,
    /// association terms that could not be scored, with the reason
    pub skipped_associations: BTreeMap<String, String>,
    pub themes: BTreeMap<String, ThemeSummary>,
    pub near_duplicates: u64,
}

struct Reports<'a> {
    root: &'a Path,
    written: Vec<Artifact>,
}

impl Reports<'_> {
    fn put(&mut self, name: &str, data: Vec<u8>) -> Result<(), PipelineError> {
        let rel = format!("{REPORTS_DIR}/{name}");
        fs::write(self.root.join(&rel), &data)?;
        self.written.push(Artifact::of(&rel, &data));
        Ok(())
    }

    fn csv<F>(&mut self, name: &str, f: F) -> Result<(), PipelineError>
    where
        F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::Io(e.to_string()))?;
        self.put(name, buf)
    }
}

fn csv_rows<W: std::io::Write>(out: W, header: &[&str], rows: Vec<Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn intersections_of(memberships: &[Membership], known: &BTreeSet<QueryId>) -> Result<Intersections, PipelineError> {
    query_intersections(memberships, known).map_err(|e| PipelineError::Invariant(e.to_string()))
}

/// Computes every report from `store` and writes them under
/// `<root>/reports/`. Returns the written artifacts in write order.
pub fn analyze_store(
    store: &Store,
    config: &PipelineConfig,
    flow: &FlowReport,
    root: &Path,
) -> Result<(Vec<Artifact>, AnalysisSummary), PipelineError> {
    let mut r = Reports { root, written: Vec::new() };
    let mut summary = AnalysisSummary {
        documents: store.len() as u64,
        edges: store.edge_count() as u64,
        ..Default::default()
    };
    r.put("flow.json", serde_json::to_vec_pretty(flow).expect("flow serializes"))?;

    // query overlap, per query and per group
    let memberships: Vec<Membership> = store.memberships().collect();
    let known: BTreeSet<QueryId> = config.queries.iter().map(|q| q.query_id.clone()).collect();
    let ix = intersections_of(&memberships, &known)?;
    let groups = config.groups();
    let collapsed = collapse_memberships(&memberships, &groups);
    let group_ids: BTreeSet<QueryId> = groups.values().map(|g| QueryId::new(g.clone())).collect();
    let gx = intersections_of(&collapsed, &group_ids)?;
    r.csv("intersections.csv", |b| write_intersections_csv(&ix, b))?;
    r.csv("intersections_groups.csv", |b| write_intersections_csv(&gx, b))?;
    let hits: Vec<Vec<String>> = ix
        .doc_hits
        .iter()
        .map(|(id, n)| {
            let title = store.get(id).map(|d| d.title.clone()).unwrap_or_default();
            let qs: Vec<String> = store.memberships_of(id).into_iter().map(|(q, rank)| format!("{q}#{rank}")).collect();
            vec![id.to_string(), title, n.to_string(), qs.join(" ")]
        })
        .collect();
    r.csv("doc_hits.csv", |b| csv_rows(b, &["doc_id", "title", "hits", "queries"], hits))?;
    summary.max_overlap_docs = ix
        .doc_hits
        .iter()
        .filter(|(_, n)| *n == ix.summary.max_overlap && *n > 0)
        .map(|(id, _)| id.clone())
        .collect();
    summary.queries = ix.summary.clone();
    summary.query_groups = gx.summary.clone();

    // growth by year and language, over the non-excluded corpus
    let corpus: Vec<Document> = store.documents().filter(|d| d.stage != Stage::Excluded).cloned().collect();
    let growth = growth_series(&corpus);
    r.csv("growth.csv", |b| write_growth_csv(&growth, b))?;
    for d in &corpus {
        *summary.languages.entry(d.language.clone()).or_default() += 1;
    }
    summary.non_english_share = growth.non_english_share();

    // reading budgets for the eligible set, the seeds and the whole corpus
    let mut budgets = Vec::new();
    for n in [flow.eligible, flow.seeds, flow.citation_corpus] {
        budgets.push(corpus_reading_budget(n, &config.reading).map_err(|e| PipelineError::Config(e.to_string()))?);
    }
    r.csv("budget.csv", |b| write_budget_csv(&budgets, b))?;
    summary.budgets = budgets;

    // title text over English titles
    let english: Vec<&Document> = corpus.iter().filter(|d| d.language == "en").collect();
    let terms: Vec<(DocId, Vec<String>)> = english.iter().map(|d| (d.doc_id.clone(), analysis_terms(&d.title))).collect();
    let bags: Vec<Vec<String>> = terms.iter().map(|(_, t)| t.clone()).collect();
    let top = top_terms(&bags, config.analysis.top_terms);
    r.csv("top_terms.csv", |b| {
        csv_rows(b, &["term", "count"], top.iter().map(|(t, n)| vec![t.clone(), n.to_string()]).collect())
    })?;
    let tdm = build_tdm(&terms, config.analysis.min_freq);
    summary.tdm_terms = tdm.n_terms() as u64;
    summary.tdm_docs = tdm.n_docs() as u64;
    let mut buf = Vec::new();
    tdm.write_vocabulary(&mut buf)?;
    r.put("tdm_terms.txt", buf)?;
    let mut buf = Vec::new();
    tdm.write_doc_ids(&mut buf)?;
    r.put("tdm_docs.txt", buf)?;
    let mut buf = Vec::new();
    tdm.write_triplets(&mut buf)?;
    r.put("tdm_triplets.tsv", buf)?;
    let mut rows = Vec::new();
    for term in &config.analysis.association_terms {
        match associations(&tdm, term, config.analysis.min_score) {
            Ok(a) => {
                for (other, phi) in a.scores {
                    rows.push(vec![term.clone(), other, format!("{phi:.6}")]);
                }
            }
            Err(e @ (TextError::UnknownTerm(_) | TextError::ZeroVariance(_))) => {
                summary.skipped_associations.insert(term.clone(), e.to_string());
            }
        }
    }
    r.csv("associations.csv", |b| csv_rows(b, &["term", "associated", "phi"], rows))?;

    // citation graph
    let graph = CitationGraph::from_store(store, config.analysis.graph_mode);
    let mut buf = Vec::new();
    graph.write_edge_list(&mut buf)?;
    r.put("edges.tsv", buf)?;
    let ranked = bridging_rank(&graph, config.analysis.top_bridging);
    r.csv("centrality.csv", |b| write_centrality_csv(&ranked, b))?;
    for (name, stems) in &config.analysis.stem_theme_sets {
        let sub = graph.theme_subgraph(stems);
        summary.themes.insert(
            name.clone(),
            ThemeSummary { nodes: sub.node_count() as u64, edges: sub.edge_count() as u64 },
        );
        let ranked = bridging_rank(&sub, config.analysis.top_bridging);
        r.csv(&format!("centrality_{name}.csv"), |b| write_centrality_csv(&ranked, b))?;
    }

    let dups = near_duplicates(store.documents());
    summary.near_duplicates = dups.len() as u64;
    let rows = dups
        .iter()
        .map(|d| {
            vec![
                d.normalized_title.clone(),
                d.first.to_string(),
                d.first_year.to_string(),
                d.second.to_string(),
                d.second_year.to_string(),
            ]
        })
        .collect();
    r.csv("near_duplicates.csv", |b| {
        csv_rows(b, &["normalized_title", "first", "first_year", "second", "second_year"], rows)
    })?;

    r.put("summary.json", serde_json::to_vec_pretty(&summary).expect("summary serializes"))?;
    Ok((r.written, summary))
}
