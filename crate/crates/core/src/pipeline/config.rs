use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{Document, QueryId, QuerySpec};
use crate::graphlab::GraphMode;
use crate::harvest::{CiterRanking, HarvestPlan, Politeness};
use crate::metrics::ReadingParams;
use crate::screening::ScreeningConfig;
use crate::textlab::DEFAULT_MIN_FREQ;

/// Where documents come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceConfig {
    /// a recorded JSONL replay file
    Replay { path: PathBuf },
    /// the anonymous HTML adapter; needs the `live` feature
    Live {
        #[cfg(feature = "live")]
        #[serde(default, flatten)]
        settings: crate::harvest::live::LiveSettings,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanSettings {
    pub depth: u8,
    pub k: usize,
    pub citer_ranking: CiterRanking,
    pub citer_pool: Option<usize>,
    pub checkpoint_every: usize,
}

impl Default for PlanSettings {
    fn default() -> Self {
        let p = HarvestPlan::default();
        PlanSettings {
            depth: p.depth,
            k: p.k,
            citer_ranking: p.citer_ranking,
            citer_pool: p.citer_pool,
            checkpoint_every: p.checkpoint_every,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningSettings {
    #[serde(flatten)]
    pub engine: ScreeningConfig,
    /// recorded decisions applied before the eligible set is finalized
    pub decisions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    pub min_freq: usize,
    pub min_score: f64,
    pub top_terms: usize,
    /// stemmed terms whose associations are reported
    pub association_terms: Vec<String>,
    /// named stem sets, each giving a thematic subgraph
    pub stem_theme_sets: BTreeMap<String, BTreeSet<String>>,
    pub graph_mode: GraphMode,
    pub top_bridging: usize,
    pub langid_margin: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            min_freq: DEFAULT_MIN_FREQ,
            min_score: 0.1,
            top_terms: 50,
            association_terms: vec!["hous".into(), "migrat".into()],
            stem_theme_sets: BTreeMap::from([("housing".to_string(), BTreeSet::from(["hous".to_string()]))]),
            graph_mode: GraphMode::default(),
            top_bridging: 25,
            langid_margin: crate::langid::DEFAULT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub dir: PathBuf,
    /// timestamp written into snapshot headers; fixed for reproducible runs
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub queries: Vec<QuerySpec>,
    /// query id → label for the collapsed overlap view; defaults to genre
    #[serde(default)]
    pub query_groups: BTreeMap<QueryId, String>,
    #[serde(default)]
    pub notable_refs: Vec<Document>,
    #[serde(default)]
    pub plan: PlanSettings,
    #[serde(default)]
    pub politeness: Politeness,
    #[serde(default)]
    pub reading: ReadingParams,
    #[serde(default)]
    pub screening: ScreeningSettings,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    pub source: SourceConfig,
    pub output: OutputSettings,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let SourceConfig::Replay { path } = &mut self.source {
            join(path);
        }
        if let Some(p) = &mut self.screening.decisions {
            join(p);
        }
        join(&mut self.output.dir);
    }

    pub fn harvest_plan(&self) -> HarvestPlan {
        HarvestPlan {
            queries: self.queries.clone(),
            depth: self.plan.depth,
            k: self.plan.k,
            citer_ranking: self.plan.citer_ranking,
            citer_pool: self.plan.citer_pool,
            checkpoint_every: self.plan.checkpoint_every,
        }
    }

    /// Query → group label, filling unmapped queries with their genre.
    pub fn groups(&self) -> BTreeMap<QueryId, String> {
        self.queries
            .iter()
            .map(|q| {
                let label = self.query_groups.get(&q.query_id).cloned().unwrap_or_else(|| q.genre.as_str().to_string());
                (q.query_id.clone(), label)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.queries.is_empty() {
            return bad("at least one query is required".into());
        }
        self.harvest_plan()
            .validate(self.plan.depth)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.reading.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.screening.engine.reviewers_per_doc == 0 {
            return bad("reviewers_per_doc must be at least 1".into());
        }
        if self.analysis.min_freq == 0 {
            return bad("min_freq must be at least 1".into());
        }
        if !(-1.0..=1.0).contains(&self.analysis.min_score) {
            return bad(format!("min_score {} outside [-1, 1]", self.analysis.min_score));
        }
        for n in &self.notable_refs {
            if n.title.trim().is_empty() {
                return bad(format!("notable reference {} has no title", n.doc_id));
            }
        }
        for q in self.query_groups.keys() {
            if !self.queries.iter().any(|x| &x.query_id == q) {
                return bad(format!("query_groups names unknown query {q}"));
            }
        }
        match &self.source {
            SourceConfig::Replay { path } if !path.is_file() => {
                return bad(format!("replay file {} does not exist", path.display()));
            }
            #[cfg(not(feature = "live"))]
            SourceConfig::Live { .. } => return bad("live source requires the `live` feature".into()),
            _ => {}
        }
        if let Some(p) = &self.screening.decisions {
            if !p.is_file() {
                return bad(format!("decisions file {} does not exist", p.display()));
            }
        }
        if self.output.dir.as_os_str().is_empty() {
            return bad("output.dir is empty".into());
        }
        Ok(())
    }
}
