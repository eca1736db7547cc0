//! JSON Lines snapshot and append-only record log.
//!
//! A snapshot starts with a header record carrying the format version and a
//! creation timestamp, followed by one record per line in (kind, id) order.
//! The record log uses the same record kinds, in mutation order.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{CitationEdge, DocId, Document, Membership, SnapshotError, Store};
use crate::screening::DecisionRecord;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SnapshotRecord {
    Header {
        format_version: u32,
        created_at: DateTime<Utc>,
    },
    Document(Document),
    Alias {
        from: DocId,
        to: DocId,
    },
    Edge(CitationEdge),
    Membership(Membership),
    Decision(DecisionRecord),
}

/// Serialize a store. `created_at` is supplied by the caller so that runs
/// over identical inputs produce identical bytes.
pub fn write_snapshot<W: Write>(
    store: &Store,
    created_at: DateTime<Utc>,
    mut out: W,
) -> Result<(), SnapshotError> {
    let mut line = |record: &SnapshotRecord| -> Result<(), SnapshotError> {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    line(&SnapshotRecord::Header {
        format_version: FORMAT_VERSION,
        created_at,
    })?;
    for doc in store.documents() {
        line(&SnapshotRecord::Document(doc.clone()))?;
    }
    for (from, to) in store.aliases() {
        line(&SnapshotRecord::Alias {
            from: from.clone(),
            to: to.clone(),
        })?;
    }
    for edge in store.edges() {
        line(&SnapshotRecord::Edge(edge))?;
    }
    let mut memberships: Vec<Membership> = store.memberships().collect();
    memberships.sort_by(|a, b| (&a.doc_id, &a.query_id).cmp(&(&b.doc_id, &b.query_id)));
    for m in memberships {
        line(&SnapshotRecord::Membership(m))?;
    }
    for d in store.decisions() {
        line(&SnapshotRecord::Decision(d.clone()))?;
    }
    Ok(())
}

/// Parse a snapshot, checking the header's format version first.
pub fn read_snapshot<R: BufRead>(input: R, max_layer: u8) -> Result<(Store, DateTime<Utc>), SnapshotError> {
    let mut store = Store::with_max_layer(max_layer);
    let mut created = None;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if created.is_none() {
            let created_at = parse_header(&line, idx + 1)?;
            created = Some(created_at);
            continue;
        }
        let record: SnapshotRecord = serde_json::from_str(&line).map_err(|e| SnapshotError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if matches!(record, SnapshotRecord::Header { .. }) {
            return Err(SnapshotError::Parse {
                line: idx + 1,
                message: "second header record".into(),
            });
        }
        store.apply_record(record)?;
    }
    let created = created.ok_or(SnapshotError::MissingHeader {
        expected: FORMAT_VERSION,
    })?;
    Ok((store, created))
}

fn parse_header(line: &str, line_no: usize) -> Result<DateTime<Utc>, SnapshotError> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| SnapshotError::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    if value.get("kind").and_then(|k| k.as_str()) != Some("header") {
        return Err(SnapshotError::MissingHeader {
            expected: FORMAT_VERSION,
        });
    }
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or(SnapshotError::MissingHeader {
            expected: FORMAT_VERSION,
        })? as u32;
    if found != FORMAT_VERSION {
        return Err(SnapshotError::VersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    match serde_json::from_value::<SnapshotRecord>(value) {
        Ok(SnapshotRecord::Header { created_at, .. }) => Ok(created_at),
        Ok(_) => unreachable!("kind checked above"),
        Err(e) => Err(SnapshotError::Parse {
            line: line_no,
            message: e.to_string(),
        }),
    }
}

pub fn save_snapshot(store: &Store, created_at: DateTime<Utc>, path: &Path) -> Result<(), SnapshotError> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_snapshot(store, created_at, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_snapshot(path: &Path, max_layer: u8) -> Result<(Store, DateTime<Utc>), SnapshotError> {
    let f = File::open(path)?;
    read_snapshot(BufReader::new(f), max_layer)
}

/// Append-only record log. Records are written in mutation order and can be
/// replayed on top of the snapshot they follow.
pub struct RecordLog {
    out: BufWriter<File>,
}

impl RecordLog {
    pub fn open(path: &Path) -> Result<Self, SnapshotError> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordLog {
            out: BufWriter::new(f),
        })
    }

    pub fn append(&mut self, records: &[SnapshotRecord]) -> Result<(), SnapshotError> {
        for r in records {
            serde_json::to_writer(&mut self.out, r).map_err(std::io::Error::from)?;
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        Ok(())
    }

    /// Replay a log file onto a store.
    pub fn replay(path: &Path, store: &mut Store) -> Result<usize, SnapshotError> {
        let f = File::open(path)?;
        let mut n = 0;
        for (idx, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SnapshotRecord = serde_json::from_str(&line).map_err(|e| SnapshotError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            store.apply_record(record)?;
            n += 1;
        }
        Ok(n)
    }
}
