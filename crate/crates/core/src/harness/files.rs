//! JSON-lines files, run manifests and resume handling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent_gateway::SteeringCondition;
use crate::record::{RecordStatus, TrialRecord};
use crate::task_battery::Domain;

use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Writes all items, one JSON document per line, via a temporary file.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).map_err(|e| io_err(path, e))?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| io_err(path, e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Validation(format!("{}: {e}", path.display())))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(item);
    }
    Ok(out)
}

pub fn sha256_file(path: &Path) -> Result<String, HarnessError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// `trials.jsonl` -> `trials.manifest.json`.
pub fn manifest_path(data: &Path) -> PathBuf {
    data.with_extension("manifest.json")
}

/// Keeps the longest prefix of complete, parseable record lines and
/// returns their trial ids. A torn final line from a crash is cut off.
pub fn prepare_resume(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let mut kept = Vec::new();
    let mut good_len = 0usize;
    let mut start = 0usize;
    while let Some(nl) = bytes[start..].iter().position(|&b| b == b'\n') {
        let line = &bytes[start..start + nl];
        match serde_json::from_slice::<TrialRecord>(line) {
            Ok(r) => kept.push(r),
            Err(_) => break,
        }
        start += nl + 1;
        good_len = start;
    }
    if good_len < bytes.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| io_err(path, e))?;
        f.set_len(good_len as u64).map_err(|e| io_err(path, e))?;
    }
    Ok(kept)
}

/// Appends one record per call as a single write of a full line.
pub struct RecordWriter {
    file: File,
    path: PathBuf,
}

impl RecordWriter {
    pub fn append(path: &Path) -> Result<Self, HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_err(path, e))?;
        Ok(Self { file, path: path.to_path_buf() })
    }

    pub fn write(&mut self, rec: &TrialRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(rec).map_err(std::io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub trials: usize,
    pub parsed: usize,
    pub parse_failed: usize,
    pub transport_failed: usize,
}

impl Counts {
    pub fn of(records: &[TrialRecord]) -> Self {
        let mut c = Counts { trials: records.len(), ..Default::default() };
        for r in records {
            match r.status {
                RecordStatus::Ok => c.parsed += 1,
                RecordStatus::ParseFailed => c.parse_failed += 1,
                RecordStatus::TransportFailed { .. } => c.transport_failed += 1,
            }
        }
        c
    }

    pub fn balanced(&self) -> bool {
        self.trials == self.parsed + self.parse_failed + self.transport_failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub config_digest: String,
    pub asset_digest: String,
    pub battery_seed: u64,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<SteeringCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    pub counts: Counts,
    pub domain_counts: BTreeMap<Domain, usize>,
}

/// Run id derived from everything that determines the records.
pub fn run_id(config_digest: &str, agent: Option<&str>, condition: Option<&SteeringCondition>) -> String {
    let mut h = Sha256::new();
    h.update(config_digest.as_bytes());
    h.update([0x1f]);
    h.update(agent.unwrap_or("").as_bytes());
    h.update([0x1f]);
    h.update(condition.map(SteeringCondition::label).unwrap_or_default().as_bytes());
    hex::encode(&h.finalize()[..6])
}

pub fn recorded_ids(records: &[TrialRecord]) -> BTreeSet<String> {
    records.iter().map(|r| r.trial.trial_id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task_battery::{generate_battery, AssetStore, BatteryConfig};

    fn records(n: usize) -> Vec<TrialRecord> {
        let cfg = BatteryConfig::new(1).with_domains(&[Domain::Ultimatum]);
        generate_battery(&cfg, &AssetStore::embedded())
            .unwrap()
            .into_iter()
            .take(n)
            .map(|t| TrialRecord::answered(t, SteeringCondition::None, "t", "ACCEPT"))
            .collect()
    }

    #[test]
    fn torn_tail_is_cut_on_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let recs = records(4);
        let mut w = RecordWriter::append(&path).unwrap();
        for r in &recs[..3] {
            w.write(r).unwrap();
        }
        let full = serde_json::to_string(&recs[3]).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&full.as_bytes()[..full.len() / 2]).unwrap();
        drop(f);
        let kept = prepare_resume(&path).unwrap();
        assert_eq!(kept, recs[..3].to_vec());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 3);
        assert!(prepare_resume(&dir.path().join("none.jsonl")).unwrap().is_empty());
    }

    #[test]
    fn jsonl_round_trip_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/r.jsonl");
        let recs = records(5);
        write_jsonl(&path, &recs).unwrap();
        let back: Vec<TrialRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, recs);
        let c = Counts::of(&back);
        assert_eq!((c.trials, c.parsed), (5, 5));
        assert!(c.balanced());
        assert_eq!(manifest_path(&path), dir.path().join("sub/r.manifest.json"));
    }

    #[test]
    fn bad_lines_name_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        fs::write(&path, "{}\n").unwrap();
        let err = read_jsonl::<TrialRecord>(&path).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
