use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::engine::{DecisionInput, ScreeningEngine};
use super::{DecisionAction, ScreeningError};
use crate::corpus::Store;

fn review() -> DecisionAction {
    DecisionAction::Review
}

/// A recorded decision, replayed with its original timestamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedDecision {
    #[serde(flatten)]
    pub input: DecisionInput,
    pub decided_at: DateTime<Utc>,
    #[serde(default = "review")]
    pub action: DecisionAction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStats {
    pub applied: usize,
    /// decisions whose id was already in the log
    pub replayed: usize,
}

pub fn read_script(path: &Path) -> Result<Vec<ScriptedDecision>, ScreeningError> {
    let file = File::open(path).map_err(|e| ScreeningError::Validation(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ScreeningError::Validation(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let d = serde_json::from_str(&line)
            .map_err(|e| ScreeningError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(d);
    }
    Ok(out)
}

pub fn write_script<W: Write>(script: &[ScriptedDecision], mut out: W) -> std::io::Result<()> {
    for d in script {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Applies decisions in order. Ids already in the log are skipped, so a
/// partially applied script can be run again.
pub fn apply_script(engine: &ScreeningEngine, store: &mut Store, script: &[ScriptedDecision]) -> Result<ScriptStats, ScreeningError> {
    let mut stats = ScriptStats::default();
    for d in script {
        let sub = match d.action {
            DecisionAction::Review => engine.decide(store, d.input.clone(), d.decided_at)?,
            DecisionAction::Resolution => engine.resolve(store, d.input.clone(), d.decided_at)?,
        };
        if sub.created {
            stats.applied += 1;
        } else {
            stats.replayed += 1;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocId, Document, QueryId, Stage};
    use crate::screening::Pass;
    use chrono::TimeZone;
    use uuid::Uuid;

    #[test]
    fn script_round_trip_and_rerun() {
        let mut store = Store::new();
        for i in 0..3 {
            let id = format!("d{i}");
            store.upsert(Document::new(&id, format!("Paper {}", ["one", "two", "three"][i]), Some(2001))).unwrap();
            store.add_membership(&DocId(id), &QueryId::from("3G"), i as u32 + 1).unwrap();
        }
        let at = Utc.with_ymd_and_hms(2020, 8, 1, 9, 0, 0).unwrap();
        let mk = |n: u128, doc: &str, pass: Pass, group: i64| ScriptedDecision {
            input: DecisionInput {
                decision_id: Some(Uuid::from_u128(n)),
                doc_id: DocId::from(doc),
                pass,
                reviewer: "r1".into(),
                group,
                note: None,
            },
            decided_at: at,
            action: DecisionAction::Review,
        };
        let script = vec![
            mk(1, "d0", Pass::Title, 4),
            mk(2, "d1", Pass::Title, 0),
            mk(3, "d2", Pass::Title, 2),
            mk(4, "d1", Pass::Fulltext, 0),
            mk(5, "d2", Pass::Abstract, 3),
        ];
        let mut buf = Vec::new();
        write_script(&script, &mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decisions.jsonl");
        std::fs::write(&path, &buf).unwrap();
        let back = read_script(&path).unwrap();
        assert_eq!(back.len(), 5);
        let e = ScreeningEngine::default();
        let stats = apply_script(&e, &mut store, &back).unwrap();
        assert_eq!(stats, ScriptStats { applied: 5, replayed: 0 });
        let again = apply_script(&e, &mut store, &back).unwrap();
        assert_eq!(again, ScriptStats { applied: 0, replayed: 5 });
        assert_eq!(store.get(&"d1".into()).unwrap().stage, Stage::Excluded);
        assert_eq!(store.get(&"d2".into()).unwrap().stage, Stage::Eligible);
        assert_eq!(store.decisions()[0].decided_at, at);
    }
}
