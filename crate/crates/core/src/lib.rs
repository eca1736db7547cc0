//! litmap-core: build a citation corpus from ranked scholarly search results,
//! screen it in relevance passes, and compute title-text, language, overlap
//! and citation-graph analytics over the result.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: documents, memberships, citation edges and the snapshot store
//! - [`harvest`]: ranked query fetching and capped cited-by snowballing
//! - [`screening`]: staged relevance decisions and flow accounting
//! - [`textlab`]: title tokenization, stemming and term-document statistics
//! - [`langid`]: character n-gram language identification
//! - [`graphlab`]: betweenness centrality and thematic subgraphs
//! - [`metrics`]: reading budgets, growth series, query intersections
//! - [`pipeline`]: configuration and end-to-end orchestration

pub mod corpus;
pub mod graphlab;
pub mod harvest;
pub mod langid;
pub mod metrics;
pub mod pipeline;
pub mod screening;
pub mod textlab;

pub use corpus::{CitationEdge, DocId, Document, Membership, QueryId, QuerySpec, Stage, Store};
