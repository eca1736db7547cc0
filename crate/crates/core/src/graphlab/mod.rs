//! Citation-graph analytics: betweenness centrality, bridging-document
//! ranking and theme-restricted subgraphs.

mod brandes;

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocId, Stage, Store};
use crate::textlab::analysis_terms;

pub use brandes::{betweenness, betweenness_scores};

/// Whether shortest paths follow citation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    Directed,
    /// an edge {u, v} exists when either direction does
    #[default]
    UndirectedProjection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub doc_id: DocId,
    pub title: String,
    pub year: Option<i32>,
    pub cited_by: u64,
    /// stemmed title terms
    pub stems: BTreeSet<String>,
}

impl GraphNode {
    pub fn new(doc_id: impl Into<String>, title: &str, year: Option<i32>, cited_by: u64) -> Self {
        GraphNode {
            doc_id: DocId(doc_id.into()),
            title: title.to_string(),
            year,
            cited_by,
            stems: analysis_terms(title).into_iter().collect(),
        }
    }
}

/// Immutable citation graph over a fixed node order.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    nodes: Vec<GraphNode>,
    /// directed (citing, cited, layer) triples, sorted
    edges: Vec<(usize, usize, u8)>,
    /// neighbour lists used for path search under `mode`
    adjacency: Vec<Vec<usize>>,
    mode: GraphMode,
}

impl CitationGraph {
    /// Build from nodes and directed edges. Self-loops, unknown endpoints and
    /// duplicate pairs are dropped.
    pub fn new(nodes: Vec<GraphNode>, edges: &[(DocId, DocId, u8)], mode: GraphMode) -> Self {
        let index: HashMap<&DocId, usize> = nodes.iter().enumerate().map(|(i, n)| (&n.doc_id, i)).collect();
        let mut set = BTreeSet::new();
        let mut layers = HashMap::new();
        for (a, b, layer) in edges {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                if i != j && set.insert((i, j)) {
                    layers.insert((i, j), *layer);
                }
            }
        }
        let edges: Vec<(usize, usize, u8)> = set.into_iter().map(|(i, j)| (i, j, layers[&(i, j)])).collect();
        let adjacency = build_adjacency(nodes.len(), &edges, mode);
        CitationGraph {
            nodes,
            edges,
            adjacency,
            mode,
        }
    }

    /// Every non-excluded document and the citation edges among them.
    pub fn from_store(store: &Store, mode: GraphMode) -> Self {
        let nodes: Vec<GraphNode> = store
            .documents()
            .filter(|d| d.stage != Stage::Excluded)
            .map(|d| GraphNode::new(d.doc_id.0.clone(), &d.title, d.year, d.cited_by))
            .collect();
        let edges: Vec<(DocId, DocId, u8)> = store.edges().map(|e| (e.citing, e.cited, e.layer)).collect();
        CitationGraph::new(nodes, &edges, mode)
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of edges under the graph's mode (undirected pairs are counted
    /// once).
    pub fn edge_count(&self) -> usize {
        match self.mode {
            GraphMode::Directed => self.edges.len(),
            GraphMode::UndirectedProjection => self.adjacency.iter().map(Vec::len).sum::<usize>() / 2,
        }
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&DocId, &DocId, u8)> {
        self.edges
            .iter()
            .map(|&(i, j, l)| (&self.nodes[i].doc_id, &self.nodes[j].doc_id, l))
    }

    pub(crate) fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Induced subgraph on the nodes whose title stems meet `stems`.
    pub fn theme_subgraph(&self, stems: &BTreeSet<String>) -> CitationGraph {
        let keep: Vec<bool> = self.nodes.iter().map(|n| !n.stems.is_disjoint(stems)).collect();
        let nodes: Vec<GraphNode> = self
            .nodes
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(n, _)| n.clone())
            .collect();
        let edges: Vec<(DocId, DocId, u8)> = self
            .edges
            .iter()
            .filter(|(i, j, _)| keep[*i] && keep[*j])
            .map(|&(i, j, l)| (self.nodes[i].doc_id.clone(), self.nodes[j].doc_id.clone(), l))
            .collect();
        CitationGraph::new(nodes, &edges, self.mode)
    }

    /// `citing TAB cited TAB layer`, one edge per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b, l) in self.directed_edges() {
            writeln!(out, "{a}\t{b}\t{l}")?;
        }
        Ok(())
    }
}

fn build_adjacency(n: usize, edges: &[(usize, usize, u8)], mode: GraphMode) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(i, j, _) in edges {
        adj[i].insert(j);
        if mode == GraphMode::UndirectedProjection {
            adj[j].insert(i);
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgingEntry {
    pub rank: usize,
    pub doc_id: DocId,
    pub title: String,
    pub year: Option<i32>,
    pub cited_by: u64,
    pub betweenness: f64,
}

/// Scores closer than this are treated as tied when ranking.
const TIE_RESOLUTION: f64 = 1e-6;

/// Nodes by betweenness (desc), then cited-by (desc), then doc id.
pub fn bridging_rank(graph: &CitationGraph, top_n: usize) -> Vec<BridgingEntry> {
    let scores = betweenness_scores(graph, false);
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    let quantized = |s: f64| (s / TIE_RESOLUTION).round() as i64;
    order.sort_by(|&a, &b| {
        let (na, nb) = (&graph.nodes[a], &graph.nodes[b]);
        quantized(scores[b])
            .cmp(&quantized(scores[a]))
            .then_with(|| nb.cited_by.cmp(&na.cited_by))
            .then_with(|| na.doc_id.cmp(&nb.doc_id))
    });
    order
        .into_iter()
        .take(top_n.max(1))
        .enumerate()
        .map(|(r, i)| {
            let n = &graph.nodes[i];
            BridgingEntry {
                rank: r + 1,
                doc_id: n.doc_id.clone(),
                title: n.title.clone(),
                year: n.year,
                cited_by: n.cited_by,
                betweenness: scores[i],
            }
        })
        .collect()
}

/// Centrality report as CSV: doc_id, title, year, cited_by, betweenness, rank.
pub fn write_centrality_csv<W: Write>(entries: &[BridgingEntry], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["doc_id", "title", "year", "cited_by", "betweenness", "rank"])?;
    for e in entries {
        w.write_record([
            e.doc_id.as_str(),
            &e.title,
            &e.year.map(|y| y.to_string()).unwrap_or_default(),
            &e.cited_by.to_string(),
            &format!("{:.6}", e.betweenness),
            &e.rank.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
