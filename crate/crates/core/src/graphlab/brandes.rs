//! Exact shortest-path betweenness (Brandes accumulation, unweighted).
//!
//! Undirected scores count unordered source–target pairs; directed scores
//! count ordered pairs. Normalization divides by (n-1)(n-2)/2 and (n-1)(n-2)
//! respectively.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use super::{CitationGraph, GraphMode};
use crate::corpus::DocId;

/// Per-source dependency accumulation, added into `acc`.
fn accumulate_source(graph: &CitationGraph, s: usize, acc: &mut [f64], ws: &mut Workspace) {
    let n = graph.node_count();
    ws.reset(n);
    ws.sigma[s] = 1.0;
    ws.dist[s] = 0;
    ws.queue.push_back(s);
    while let Some(v) = ws.queue.pop_front() {
        ws.stack.push(v);
        for &w in graph.neighbours(v) {
            if ws.dist[w] < 0 {
                ws.dist[w] = ws.dist[v] + 1;
                ws.queue.push_back(w);
            }
            if ws.dist[w] == ws.dist[v] + 1 {
                ws.sigma[w] += ws.sigma[v];
                ws.preds[w].push(v);
            }
        }
    }
    while let Some(w) = ws.stack.pop() {
        let coeff = (1.0 + ws.delta[w]) / ws.sigma[w];
        for i in 0..ws.preds[w].len() {
            let v = ws.preds[w][i];
            ws.delta[v] += ws.sigma[v] * coeff;
        }
        if w != s {
            acc[w] += ws.delta[w];
        }
    }
}

struct Workspace {
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    preds: Vec<Vec<usize>>,
    stack: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            stack: Vec::with_capacity(n),
            queue: VecDeque::with_capacity(n),
        }
    }

    fn reset(&mut self, n: usize) {
        self.sigma.iter_mut().for_each(|x| *x = 0.0);
        self.dist.iter_mut().for_each(|x| *x = -1);
        self.delta.iter_mut().for_each(|x| *x = 0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.stack.clear();
        self.queue.clear();
        debug_assert_eq!(self.sigma.len(), n);
    }
}

/// Betweenness per node, indexed like `graph.nodes()`.
///
/// Sources are processed in fixed-size chunks whose partial sums are added
/// in chunk order, so the result does not depend on the thread count.
pub fn betweenness_scores(graph: &CitationGraph, normalized: bool) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    let chunk = (n / 64).max(64);
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(chunk)
        .map(|srcs| {
            let mut acc = vec![0.0; n];
            let mut ws = Workspace::new(n);
            for &s in srcs {
                accumulate_source(graph, s, &mut acc, &mut ws);
            }
            acc
        })
        .collect();
    let mut scores = vec![0.0; n];
    for p in partials {
        for (s, x) in scores.iter_mut().zip(p) {
            *s += x;
        }
    }
    let undirected = graph.mode() == GraphMode::UndirectedProjection;
    if undirected {
        scores.iter_mut().for_each(|s| *s /= 2.0);
    }
    if normalized {
        let pairs = if n > 2 {
            let p = ((n - 1) * (n - 2)) as f64;
            if undirected {
                p / 2.0
            } else {
                p
            }
        } else {
            0.0
        };
        for s in &mut scores {
            *s = if pairs > 0.0 { *s / pairs } else { 0.0 };
        }
    }
    scores
}

/// Betweenness keyed by document id.
pub fn betweenness(graph: &CitationGraph, normalized: bool) -> BTreeMap<DocId, f64> {
    graph
        .nodes()
        .iter()
        .zip(betweenness_scores(graph, normalized))
        .map(|(node, s)| (node.doc_id.clone(), s))
        .collect()
}
