//! Versioned plain-text data tables.
//!
//! Every table is tab-separated with `#` header lines. Two header keys are
//! required: `# screenlab table: <name>` and `# version: <n>`. The embedded
//! copies are compiled in; `MANIFEST` lists their sha256 checksums. A
//! [`DataSource::Dir`] replaces them file by file and, when the directory has
//! its own `MANIFEST`, is verified against it.

use std::borrow::Cow;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DATA_ENV: &str = "SCREENLAB_DATA";

pub const EMBEDDED: [(&str, &str); 8] = [
    ("weights.tsv", include_str!("../data/weights.tsv")),
    ("isotopes.tsv", include_str!("../data/isotopes.tsv")),
    ("crippen.tsv", include_str!("../data/crippen.tsv")),
    ("tpsa.tsv", include_str!("../data/tpsa.tsv")),
    ("alerts.tsv", include_str!("../data/alerts.tsv")),
    ("qed_ads.tsv", include_str!("../data/qed_ads.tsv")),
    ("gasteiger.tsv", include_str!("../data/gasteiger.tsv")),
    ("sas_default.tsv", include_str!("../data/sas_default.tsv")),
];

pub const EMBEDDED_MANIFEST: &str = include_str!("../data/MANIFEST");

#[derive(Debug, Error)]
pub enum DataError {
    #[error("data table {0} not found")]
    Missing(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{table} line {line}: {msg}")]
    Parse {
        table: String,
        line: usize,
        msg: String,
    },
    #[error("checksum mismatch for {table}: manifest {expected}, file {actual}")]
    Checksum {
        table: String,
        expected: String,
        actual: String,
    },
}

impl DataError {
    pub(crate) fn parse(table: &str, line: usize, msg: impl Into<String>) -> DataError {
        DataError::Parse {
            table: table.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DataSource {
    #[default]
    Embedded,
    Dir(PathBuf),
}

impl DataSource {
    /// `Dir` when `SCREENLAB_DATA` is set and non-empty, otherwise `Embedded`.
    pub fn from_env() -> DataSource {
        match std::env::var_os(DATA_ENV) {
            Some(d) if !d.is_empty() => DataSource::Dir(PathBuf::from(d)),
            _ => DataSource::Embedded,
        }
    }

    pub fn read(&self, name: &str) -> Result<Cow<'static, str>, DataError> {
        match self {
            DataSource::Embedded => EMBEDDED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| Cow::Borrowed(*t))
                .ok_or_else(|| DataError::Missing(name.to_string())),
            DataSource::Dir(dir) => {
                let path = dir.join(name);
                if !path.exists() {
                    return Err(DataError::Missing(path.display().to_string()));
                }
                let text = read_file(&path)?;
                if let Some(manifest) = self.manifest()? {
                    check_one(&manifest, name, &text)?;
                }
                Ok(Cow::Owned(text))
            }
        }
    }

    fn manifest(&self) -> Result<Option<String>, DataError> {
        match self {
            DataSource::Embedded => Ok(Some(EMBEDDED_MANIFEST.to_string())),
            DataSource::Dir(dir) => {
                let path = dir.join("MANIFEST");
                if path.exists() {
                    read_file(&path).map(Some)
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// Checks every table named in the manifest.
    pub fn verify(&self) -> Result<(), DataError> {
        let Some(manifest) = self.manifest()? else {
            return Ok(());
        };
        for (name, _) in manifest_entries(&manifest) {
            let text = match self {
                DataSource::Embedded => self.read(name)?.into_owned(),
                DataSource::Dir(dir) => read_file(&dir.join(name))?,
            };
            check_one(&manifest, name, &text)?;
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `(file name, sha256)` pairs from `<sha256>  <name>` lines.
pub fn manifest_entries(manifest: &str) -> impl Iterator<Item = (&str, &str)> {
    manifest
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            let hash = it.next()?;
            let name = it.next()?;
            Some((name, hash))
        })
}

fn check_one(manifest: &str, name: &str, text: &str) -> Result<(), DataError> {
    if let Some((_, expected)) = manifest_entries(manifest).find(|(n, _)| *n == name) {
        let actual = sha256_hex(text.as_bytes());
        if actual != expected {
            return Err(DataError::Checksum {
                table: name.to_string(),
                expected: expected.to_string(),
                actual,
            });
        }
    }
    Ok(())
}

/// A parsed table: header metadata plus data rows with their line numbers.
#[derive(Debug, Clone)]
pub struct Table<'a> {
    pub name: String,
    pub version: u32,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Table<'a> {
    /// Parses `text`, requiring the header to name `expected` and every row to
    /// have exactly `columns` fields.
    pub fn parse(expected: &str, text: &'a str, columns: usize) -> Result<Table<'a>, DataError> {
        let mut meta = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.split_once(':') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != columns {
                return Err(DataError::parse(
                    expected,
                    line_no,
                    format!("expected {columns} fields, found {}", fields.len()),
                ));
            }
            rows.push((line_no, fields));
        }
        let get = |k: &str| meta.iter().find(|(mk, _)| mk == k).map(|(_, v)| v.as_str());
        let name = get("screenlab table").ok_or_else(|| DataError::parse(expected, 1, "missing table header"))?;
        if name != expected {
            return Err(DataError::parse(expected, 1, format!("header names table '{name}'")));
        }
        let version = get("version")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| DataError::parse(expected, 1, "missing or bad version"))?;
        Ok(Table {
            name: name.to_string(),
            version,
            meta,
            rows,
        })
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub(crate) fn parse_f64(table: &str, line: usize, field: &str) -> Result<f64, DataError> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::parse(table, line, format!("bad number '{field}'")))
}
