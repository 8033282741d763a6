//! Append-only JSON-lines event log.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use critters_core::engine::Setup;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LOG_FILE: &str = "events.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum Event {
    PlayerCreated { display_name: String },
    SessionCreated { session_id: String, seed: u64 },
    TestsSubmitted { session_id: String, setup: Setup },
    TestBlockAdded { session_id: String, count: usize },
    TestBlockRemoved { session_id: String, count: usize },
    GameStarted { session_id: String, setup_seconds: f64 },
    GameFinished(GameFinished),
}

/// Everything needed to recompute a finished game, plus its headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameFinished {
    pub session_id: String,
    pub seed: u64,
    pub setup: Setup,
    pub setup_seconds: f64,
    pub total: i64,
    pub stars: u8,
    pub healthy_total: usize,
    /// Healthy critters saved or collectors that completed.
    pub healthy_passed: usize,
    pub mutants_total: usize,
    pub mutants_detected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub timestamp: u64,
    pub player: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("event log {path} line {line}: {source}")]
    Corrupt { path: PathBuf, line: usize, source: serde_json::Error },
}

pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    /// Opens (creating if needed) the log in `dir` and returns it with every
    /// record already written. A torn final line from an interrupted append
    /// is dropped; damage anywhere else is an error.
    pub fn open(dir: &Path) -> Result<(EventLog, Vec<Record>), LogError> {
        let path = dir.join(LOG_FILE);
        let io = |source| LogError::Io { path: path.clone(), source };
        std::fs::create_dir_all(dir).map_err(io)?;
        let bytes = if path.exists() { std::fs::read(&path).map_err(io)? } else { Vec::new() };
        let mut records = Vec::new();
        let mut good_len = 0usize;
        let mut lines = bytes.split(|b| *b == b'\n').enumerate().peekable();
        while let Some((i, line)) = lines.next() {
            let terminated = lines.peek().is_some();
            if line.is_empty() {
                good_len += usize::from(terminated);
                continue;
            }
            match serde_json::from_slice::<Record>(line) {
                Ok(r) if terminated => {
                    records.push(r);
                    good_len += line.len() + 1;
                }
                Ok(_) => break,
                Err(_) if !terminated => break,
                Err(source) => return Err(LogError::Corrupt { path: path.clone(), line: i + 1, source }),
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        if file.metadata().map_err(io)?.len() > good_len as u64 {
            file.set_len(good_len as u64).map_err(io)?;
        }
        Ok((EventLog { path, file }, records))
    }

    /// Writes one record as a single line and syncs it to disk.
    pub fn append(&mut self, record: &Record) -> Result<(), LogError> {
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        let io = |source| LogError::Io { path: self.path.clone(), source };
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seq: u64) -> Record {
        Record {
            seq,
            timestamp: 10 * seq,
            player: "p".into(),
            level: Some("loop-01".into()),
            event: Event::TestBlockAdded { session_id: "s".into(), count: 2 },
        }
    }

    #[test]
    fn record_json_shape() {
        let text = serde_json::to_string(&record(1)).unwrap();
        assert_eq!(
            text,
            r#"{"seq":1,"timestamp":10,"player":"p","level":"loop-01","event":"test_block_added","payload":{"sessionId":"s","count":2}}"#
        );
        assert_eq!(serde_json::from_str::<Record>(&text).unwrap(), record(1));
    }

    #[test]
    fn reopen_returns_appended_records() {
        let dir = tempfile::tempdir().unwrap();
        let (mut log, old) = EventLog::open(dir.path()).unwrap();
        assert!(old.is_empty());
        log.append(&record(1)).unwrap();
        log.append(&record(2)).unwrap();
        drop(log);
        let (_, records) = EventLog::open(dir.path()).unwrap();
        assert_eq!(records, vec![record(1), record(2)]);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let (mut log, _) = EventLog::open(dir.path()).unwrap();
        log.append(&record(1)).unwrap();
        let path = log.path().to_path_buf();
        drop(log);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"seq":2,"times"#).unwrap();
        drop(f);
        let (mut log, records) = EventLog::open(dir.path()).unwrap();
        assert_eq!(records, vec![record(1)]);
        log.append(&record(2)).unwrap();
        let (_, records) = EventLog::open(dir.path()).unwrap();
        assert_eq!(records, vec![record(1), record(2)]);
    }

    #[test]
    fn damage_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(LOG_FILE), "garbage\n{}\n").unwrap();
        assert!(matches!(EventLog::open(dir.path()), Err(LogError::Corrupt { line: 1, .. })));
    }
}
