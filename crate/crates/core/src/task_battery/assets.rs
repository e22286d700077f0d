//! Plain-text asset tables.
//!
//! Every asset is a tab-separated file. Blank lines and lines starting with
//! `#` are ignored; `\n` inside a cell stands for a line break. The shipped
//! copies are compiled in, and a directory of the same files can replace them.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::BatteryError;

/// Every file the battery and gateway know how to read.
pub const ASSET_FILES: [&str; 14] = [
    "templates.tsv",
    "completeness.tsv",
    "transitivity.tsv",
    "continuity.tsv",
    "independence.tsv",
    "endowment_items.tsv",
    "stereotype.tsv",
    "persuasion.tsv",
    "moral.tsv",
    "blame.tsv",
    "welfare.tsv",
    "icp.tsv",
    "likert_normalization.tsv",
    "assistance_normalization.tsv",
];

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../assets/", $name)))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded!(
    "templates.tsv",
    "completeness.tsv",
    "transitivity.tsv",
    "continuity.tsv",
    "independence.tsv",
    "endowment_items.tsv",
    "stereotype.tsv",
    "persuasion.tsv",
    "moral.tsv",
    "blame.tsv",
    "welfare.tsv",
    "icp.tsv",
    "likert_normalization.tsv",
    "assistance_normalization.tsv",
);

/// One parsed table row with its 1-based source line.
#[derive(Debug, Clone)]
pub struct Row {
    pub line: usize,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AssetStore {
    files: BTreeMap<String, String>,
}

impl AssetStore {
    /// The asset set compiled into the library.
    pub fn embedded() -> Self {
        let files = EMBEDDED.iter().map(|(n, c)| (n.to_string(), c.to_string())).collect();
        Self { files }
    }

    /// Read whichever known asset files exist in `dir`. Absent files surface
    /// as `MissingAsset` when a generator asks for them.
    pub fn from_dir(dir: &Path) -> Result<Self, BatteryError> {
        let mut files = BTreeMap::new();
        for name in ASSET_FILES {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    files.insert(name.to_string(), text);
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(BatteryError::Io(format!("{}: {e}", path.display()))),
            }
        }
        Ok(Self { files })
    }

    /// `from_dir` when a directory is given, otherwise the embedded set.
    pub fn load(dir: Option<&Path>) -> Result<Self, BatteryError> {
        match dir {
            Some(d) => Self::from_dir(d),
            None => Ok(Self::embedded()),
        }
    }

    pub fn without(mut self, name: &str) -> Self {
        self.files.remove(name);
        self
    }

    pub fn raw(&self, name: &str) -> Result<&str, BatteryError> {
        self.files.get(name).map(String::as_str).ok_or_else(|| BatteryError::MissingAsset(name.to_string()))
    }

    /// Data rows of a table, each with at least `min_cols` cells.
    pub fn rows(&self, name: &str, min_cols: usize) -> Result<Vec<Row>, BatteryError> {
        let text = self.raw(name)?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<String> = line.split('\t').map(|c| c.trim().replace("\\n", "\n")).collect();
            if cells.len() < min_cols {
                return Err(BatteryError::InvalidAsset {
                    file: name.to_string(),
                    line: i + 1,
                    detail: format!("expected at least {min_cols} columns, found {}", cells.len()),
                });
            }
            out.push(Row { line: i + 1, cells });
        }
        Ok(out)
    }

    /// SHA-256 over every file name and body, in name order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (name, body) in &self.files {
            h.update(name.as_bytes());
            h.update([0u8]);
            h.update(body.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}

impl Default for AssetStore {
    fn default() -> Self {
        Self::embedded()
    }
}

pub(crate) fn invalid(file: &str, row: &Row, detail: impl Into<String>) -> BatteryError {
    BatteryError::InvalidAsset { file: file.to_string(), line: row.line, detail: detail.into() }
}

pub(crate) fn parse_cell<T: std::str::FromStr>(file: &str, row: &Row, col: usize) -> Result<T, BatteryError> {
    row.cells[col]
        .parse()
        .map_err(|_| invalid(file, row, format!("column {} is not a valid number: `{}`", col + 1, row.cells[col])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_has_every_file() {
        let store = AssetStore::embedded();
        for name in ASSET_FILES {
            assert!(store.raw(name).is_ok(), "{name}");
        }
    }

    #[test]
    fn missing_dir_files_are_reported_lazily() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("moral.tsv"), "m1\tharm\t3\tSomething happened.\n").unwrap();
        let store = AssetStore::from_dir(dir.path()).unwrap();
        assert_eq!(store.rows("moral.tsv", 4).unwrap().len(), 1);
        assert!(matches!(store.rows("blame.tsv", 3), Err(BatteryError::MissingAsset(f)) if f == "blame.tsv"));
    }

    #[test]
    fn short_rows_are_rejected_with_line() {
        let store = AssetStore::embedded();
        let err = store.rows("continuity.tsv", 9).unwrap_err();
        assert!(matches!(err, BatteryError::InvalidAsset { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn digest_changes_with_content() {
        let a = AssetStore::embedded();
        let b = AssetStore::embedded().without("icp.tsv");
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), AssetStore::embedded().digest());
    }
}
