//! End-to-end orchestration: harvest → screen → snowball → analyze.
//!
//! Every stage persists its progress under `<out>/.state/`, so a failed or
//! interrupted run continues from the last checkpoint with `resume`. Runs
//! over a replay source with a fixed `output.created_at` are byte-for-byte
//! reproducible.

mod analyze;
mod config;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{load_snapshot, save_snapshot, SnapshotError, Store};
use crate::harvest::{
    inject_notables, seed_ids, HarvestCheckpoint, HarvestError, Harvester, Politeness, RateGate, ReplaySource,
    ScholarlySource, SnowballReport, SystemClock,
};
use crate::langid::{bundled_profiles, detect_with_margin};
use crate::screening::{apply_script, prisma_flow, read_script, FlowReport, ScreeningEngine, ScreeningError, ScriptStats};

pub use analyze::{analyze_store, AnalysisSummary};
pub use config::{AnalysisSettings, OutputSettings, PipelineConfig, PlanSettings, ScreeningSettings, SourceConfig};

pub const SNAPSHOT_FILE: &str = "snapshot.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORTS_DIR: &str = "reports";
const STATE_DIR: &str = ".state";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("source: {0}")]
    Source(String),
    #[error("invariant: {0}")]
    Invariant(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Source(_) => 3,
            PipelineError::Invariant(_) => 4,
            PipelineError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

impl From<SnapshotError> for PipelineError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Io(e) => PipelineError::Io(e.to_string()),
            e => PipelineError::Invariant(e.to_string()),
        }
    }
}

impl From<HarvestError> for PipelineError {
    fn from(e: HarvestError) -> Self {
        match e {
            HarvestError::Plan(m) => PipelineError::Config(m),
            HarvestError::Source { .. } | HarvestError::NotFound(_) => PipelineError::Source(e.to_string()),
            HarvestError::Checkpoint(m) => PipelineError::Io(m),
            e => PipelineError::Invariant(e.to_string()),
        }
    }
}

impl From<ScreeningError> for PipelineError {
    fn from(e: ScreeningError) -> Self {
        match e {
            ScreeningError::Validation(m) => PipelineError::Config(m),
            e => PipelineError::Invariant(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageName {
    Harvest,
    Screen,
    Snowball,
    Analyze,
}

/// Progress persisted between stages and across restarts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub completed: BTreeSet<StageName>,
    pub harvest: HarvestCheckpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screening: Option<ScriptStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snowball: Option<SnowballReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// relative to the output directory
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn of(rel: &str, data: &[u8]) -> Artifact {
        Artifact {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(data)),
            bytes: data.len() as u64,
        }
    }

    pub fn read(root: &Path, rel: &str) -> Result<Artifact, PipelineError> {
        let data = fs::read(root.join(rel))?;
        Ok(Artifact::of(rel, &data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub snapshot: Artifact,
    pub reports: Vec<Artifact>,
    pub flow: FlowReport,
    pub summary: AnalysisSummary,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    created_at: DateTime<Utc>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let created_at = config.output.created_at.unwrap_or_else(Utc::now);
        Ok(Pipeline { config, created_at })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.output.dir
    }

    pub fn engine(&self) -> ScreeningEngine {
        ScreeningEngine::new(self.config.screening.engine)
    }

    fn state_dir(&self) -> PathBuf {
        self.out_dir().join(STATE_DIR)
    }

    pub fn state_store_path(&self) -> PathBuf {
        self.state_dir().join("store.jsonl")
    }

    fn state_path(&self) -> PathBuf {
        self.state_dir().join("progress.json")
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.out_dir().join(SNAPSHOT_FILE)
    }

    /// Loads saved progress when `resume` is set and a checkpoint exists;
    /// otherwise clears old state and starts empty.
    pub fn open(&self, resume: bool) -> Result<(Store, RunState), PipelineError> {
        let dir = self.state_dir();
        if resume && self.state_path().is_file() && self.state_store_path().is_file() {
            let text = fs::read_to_string(self.state_path())?;
            let state: RunState = serde_json::from_str(&text).map_err(|e| PipelineError::Io(format!("progress file: {e}")))?;
            let (store, _) = load_snapshot(&self.state_store_path(), self.config.plan.depth)?;
            tracing::info!(completed = ?state.completed, documents = store.len(), "resuming");
            return Ok((store, state));
        }
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        Ok((Store::with_max_layer(self.config.plan.depth), RunState::default()))
    }

    /// Writes the store and progress file atomically enough that a crash
    /// leaves the previous pair readable.
    pub fn persist(&self, store: &Store, state: &RunState) -> Result<(), PipelineError> {
        fs::create_dir_all(self.state_dir())?;
        let tmp = self.state_dir().join("store.jsonl.tmp");
        save_snapshot(store, self.created_at, &tmp)?;
        fs::rename(&tmp, self.state_store_path())?;
        let json = serde_json::to_vec_pretty(state).expect("state serializes");
        let tmp = self.state_dir().join("progress.json.tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, self.state_path())?;
        Ok(())
    }

    fn source(&self) -> Result<Box<dyn ScholarlySource>, PipelineError> {
        match &self.config.source {
            SourceConfig::Replay { path } => {
                let src = ReplaySource::load(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
                Ok(Box::new(src))
            }
            #[cfg(feature = "live")]
            SourceConfig::Live { settings } => {
                let src = crate::harvest::live::LiveSource::new(settings.clone()).map_err(|e| PipelineError::Source(e.to_string()))?;
                Ok(Box::new(src))
            }
            #[cfg(not(feature = "live"))]
            SourceConfig::Live { .. } => Err(PipelineError::Config("live source requires the `live` feature".into())),
        }
    }

    fn gate(&self) -> RateGate {
        let politeness = match self.config.source {
            SourceConfig::Replay { .. } => Politeness::none(),
            SourceConfig::Live { .. } => self.config.politeness.clone(),
        };
        RateGate::new(politeness, Arc::new(SystemClock::default()))
    }

    fn harvester<'s>(&self, source: &'s dyn ScholarlySource) -> Harvester<&'s dyn ScholarlySource> {
        Harvester::new(source, self.config.harvest_plan(), self.gate())
    }

    /// Runs the scoping queries.
    pub fn harvest(&self, store: &mut Store, state: &mut RunState) -> Result<(), PipelineError> {
        if state.completed.contains(&StageName::Harvest) {
            return Ok(());
        }
        let source = self.source()?;
        let h = self.harvester(source.as_ref());
        let mut checkpoint = state.harvest.clone();
        let mut persist = |cp: &HarvestCheckpoint, s: &mut Store| -> Result<(), HarvestError> {
            let st = RunState { harvest: cp.clone(), ..state.clone() };
            self.persist(s, &st).map_err(|e| HarvestError::Checkpoint(e.to_string()))
        };
        h.harvest_queries(store, &mut checkpoint, &mut persist)?;
        state.harvest = checkpoint;
        state.completed.insert(StageName::Harvest);
        self.persist(store, state)?;
        tracing::info!(documents = store.len(), memberships = store.membership_count(), "harvest complete");
        Ok(())
    }

    /// Applies the recorded decisions, if any. Safe to repeat.
    pub fn screen(&self, store: &mut Store, state: &mut RunState) -> Result<ScriptStats, PipelineError> {
        self.require(state, StageName::Harvest)?;
        let stats = match &self.config.screening.decisions {
            Some(path) => {
                let script = read_script(path)?;
                apply_script(&self.engine(), store, &script)?
            }
            None => ScriptStats::default(),
        };
        state.screening = Some(stats);
        state.completed.insert(StageName::Screen);
        self.persist(store, state)?;
        tracing::info!(applied = stats.applied, replayed = stats.replayed, "screening decisions applied");
        Ok(stats)
    }

    /// Finalizes the eligible set, adds the notable references and expands
    /// the seeds through their citers. Fails while screening is unfinished.
    pub fn snowball(&self, store: &mut Store, state: &mut RunState) -> Result<SnowballReport, PipelineError> {
        self.require(state, StageName::Harvest)?;
        if let (true, Some(r)) = (state.completed.contains(&StageName::Snowball), &state.snowball) {
            return Ok(r.clone());
        }
        if state.harvest.snowball.is_none() {
            self.engine().finalize_eligible(store)?;
            inject_notables(store, &self.config.notable_refs)?;
            self.persist(store, state)?;
        }
        let source = self.source()?;
        let h = self.harvester(source.as_ref());
        let seeds = seed_ids(store);
        let mut checkpoint = state.harvest.clone();
        let mut persist = |cp: &HarvestCheckpoint, s: &mut Store| -> Result<(), HarvestError> {
            let st = RunState { harvest: cp.clone(), ..state.clone() };
            self.persist(s, &st).map_err(|e| HarvestError::Checkpoint(e.to_string()))
        };
        let report = h.snowball(store, &seeds, &mut checkpoint, &mut persist)?;
        self.label_languages(store)?;
        let flow = prisma_flow(store, &self.engine());
        flow.check()?;
        state.harvest = checkpoint;
        state.snowball = Some(report.clone());
        state.completed.insert(StageName::Snowball);
        self.persist(store, state)?;
        fs::create_dir_all(self.out_dir())?;
        save_snapshot(store, self.created_at, &self.snapshot_path())?;
        Ok(report)
    }

    /// Sets each document's language from its title.
    pub fn label_languages(&self, store: &mut Store) -> Result<(), PipelineError> {
        let profiles = bundled_profiles();
        let margin = self.config.analysis.langid_margin;
        let labels: Vec<_> = store
            .documents()
            .map(|d| (d.doc_id.clone(), detect_with_margin(&d.title, profiles, margin).lang))
            .collect();
        for (id, lang) in labels {
            store.set_language(&id, &lang).map_err(|e| PipelineError::Invariant(e.to_string()))?;
        }
        Ok(())
    }

    /// Writes every report for the corpus snapshot plus the manifest. The
    /// snapshot itself is only read.
    pub fn analyze(&self) -> Result<Manifest, PipelineError> {
        let path = self.snapshot_path();
        if !path.is_file() {
            return Err(PipelineError::Invariant(format!("no corpus snapshot at {}; run snowball first", path.display())));
        }
        let (store, _) = load_snapshot(&path, self.config.plan.depth)?;
        let out = self.out_dir();
        let reports_dir = out.join(REPORTS_DIR);
        if reports_dir.exists() {
            fs::remove_dir_all(&reports_dir)?;
        }
        fs::create_dir_all(&reports_dir)?;
        let flow = prisma_flow(&store, &self.engine());
        flow.check()?;
        let (reports, summary) = analyze_store(&store, &self.config, &flow, out)?;
        let manifest = Manifest {
            snapshot: Artifact::read(out, SNAPSHOT_FILE)?,
            reports,
            flow,
            summary,
        };
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        fs::write(out.join(MANIFEST_FILE), json)?;
        Ok(manifest)
    }

    /// All stages in order.
    pub fn run(&self, resume: bool) -> Result<Manifest, PipelineError> {
        let (mut store, mut state) = self.open(resume)?;
        self.harvest(&mut store, &mut state)?;
        if !state.completed.contains(&StageName::Snowball) {
            self.screen(&mut store, &mut state)?;
        }
        self.snowball(&mut store, &mut state)?;
        let manifest = self.analyze()?;
        state.completed.insert(StageName::Analyze);
        self.persist(&store, &state)?;
        Ok(manifest)
    }

    fn require(&self, state: &RunState, stage: StageName) -> Result<(), PipelineError> {
        if state.completed.contains(&stage) {
            Ok(())
        } else {
            Err(PipelineError::Invariant(format!("stage {stage:?} has not completed; run it first")))
        }
    }
}

/// Reads a manifest written by [`Pipeline::analyze`].
pub fn read_manifest(out_dir: &Path) -> Result<Manifest, PipelineError> {
    let text = fs::read_to_string(out_dir.join(MANIFEST_FILE))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Io(format!("manifest: {e}")))
}
