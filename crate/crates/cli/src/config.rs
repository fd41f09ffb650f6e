//! Pipeline configuration: flat `key = value` files, overridden by flags.
//!
//! Relative paths in a config file resolve against the file's directory.

use std::path::{Path, PathBuf};

use screenlab_core::fingerprints::{DEFAULT_RADIUS, DEFAULT_WIDTH, MAX_RADIUS, MAX_WIDTH, MIN_WIDTH};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::read_text;

pub const DEFAULT_THRESHOLD_KCAL: f64 = -10.6;
pub const DEFAULT_PERCENTILE: f64 = 99.0;
pub const DEFAULT_CONTACT_ANGSTROM: f64 = 5.0;
pub const DEFAULT_GROUP_SIZE: usize = 100;

pub const KEYS: [&str; 16] = [
    "seed_smiles",
    "seed_name",
    "generated",
    "training_set",
    "poses",
    "receptor",
    "receptor_chain",
    "fda_reference",
    "threshold_kcal",
    "percentile",
    "contact_angstrom",
    "fp_radius",
    "fp_bits",
    "group_size",
    "jobs",
    "out",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed_smiles: String,
    pub seed_name: String,
    pub generated: PathBuf,
    /// Set the similarity cutoff is taken from; the generated set when absent.
    pub training_set: Option<PathBuf>,
    pub poses: PathBuf,
    pub receptor: PathBuf,
    /// Receptor chain to keep; all chains when absent.
    pub receptor_chain: Option<char>,
    pub fda_reference: Option<PathBuf>,
    pub threshold_kcal: f64,
    pub percentile: f64,
    pub contact_angstrom: f64,
    pub fp_radius: u32,
    pub fp_bits: usize,
    /// Ligands per group in the top/bottom affinity comparison.
    pub group_size: usize,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

/// Unvalidated key/value settings, in the order they were given.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: Vec<(String, String, Option<PathBuf>)>,
}

impl Settings {
    pub fn parse_file(path: &Path) -> Result<Settings> {
        let text = read_text(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
            s.set_from(k.trim(), v.trim(), Some(base.clone()))
                .map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(s)
    }

    /// A flag value; later settings win.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.set_from(key, &value.into(), None)
    }

    fn set_from(&mut self, key: &str, value: &str, base: Option<PathBuf>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("unknown setting '{key}'")));
        }
        self.entries.retain(|(k, _, _)| k != key);
        self.entries.push((key.to_string(), value.to_string(), base));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&(String, String, Option<PathBuf>)> {
        self.entries.iter().find(|(k, _, _)| k == key)
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|(_, v, _)| v.as_str()).filter(|v| !v.is_empty())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let (_, v, base) = self.get(key)?;
        if v.is_empty() {
            return None;
        }
        Some(match base {
            Some(b) if Path::new(v).is_relative() => b.join(v),
            _ => PathBuf::from(v),
        })
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.text(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("{key}: '{v}' is not a valid number"))),
        }
    }

    fn required_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key).ok_or_else(|| CliError::Usage(format!("missing required setting '{key}'")))
    }

    pub fn into_config(self) -> Result<PipelineConfig> {
        let chain = match self.text("receptor_chain") {
            None => None,
            Some(c) if c.chars().count() == 1 => c.chars().next(),
            Some(c) => return Err(CliError::Usage(format!("receptor_chain: '{c}' is not a single character"))),
        };
        let jobs = match self.text("jobs") {
            None => None,
            Some(_) => Some(self.number("jobs", 0usize)?),
        };
        let cfg = PipelineConfig {
            seed_smiles: self
                .text("seed_smiles")
                .ok_or_else(|| CliError::Usage("missing required setting 'seed_smiles'".into()))?
                .to_string(),
            seed_name: self.text("seed_name").unwrap_or("seed").to_string(),
            generated: self.required_path("generated")?,
            training_set: self.path("training_set"),
            poses: self.required_path("poses")?,
            receptor: self.required_path("receptor")?,
            receptor_chain: chain,
            fda_reference: self.path("fda_reference"),
            threshold_kcal: self.number("threshold_kcal", DEFAULT_THRESHOLD_KCAL)?,
            percentile: self.number("percentile", DEFAULT_PERCENTILE)?,
            contact_angstrom: self.number("contact_angstrom", DEFAULT_CONTACT_ANGSTROM)?,
            fp_radius: self.number("fp_radius", DEFAULT_RADIUS)?,
            fp_bits: self.number("fp_bits", DEFAULT_WIDTH)?,
            group_size: self.number("group_size", DEFAULT_GROUP_SIZE)?,
            jobs,
            out: self.path("out").unwrap_or_else(|| PathBuf::from("screen_out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PipelineConfig {
    /// Value checks are usage errors; missing input files are input errors.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("threshold_kcal", self.threshold_kcal),
            ("percentile", self.percentile),
            ("contact_angstrom", self.contact_angstrom),
        ] {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("{name} must be finite")));
            }
        }
        if !(0.0..=100.0).contains(&self.percentile) {
            return Err(CliError::Usage("percentile must lie in [0, 100]".into()));
        }
        if self.contact_angstrom <= 0.0 {
            return Err(CliError::Usage("contact_angstrom must be positive".into()));
        }
        check_fingerprint(self.fp_radius, self.fp_bits)?;
        if self.group_size == 0 {
            return Err(CliError::Usage("group_size must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("jobs must be positive".into()));
        }
        let mut files = vec![("generated", &self.generated), ("receptor", &self.receptor)];
        files.extend(self.training_set.as_ref().map(|p| ("training_set", p)));
        files.extend(self.fda_reference.as_ref().map(|p| ("fda_reference", p)));
        for (name, p) in files {
            if !p.is_file() {
                return Err(CliError::input(format!("{name}: {} does not exist", p.display())));
            }
        }
        if !self.poses.is_dir() {
            return Err(CliError::input(format!("poses: {} is not a directory", self.poses.display())));
        }
        Ok(())
    }
}

pub fn check_fingerprint(radius: u32, bits: usize) -> Result<()> {
    if radius > MAX_RADIUS {
        return Err(CliError::Usage(format!("fp_radius must be at most {MAX_RADIUS}")));
    }
    if !bits.is_power_of_two() || !(MIN_WIDTH..=MAX_WIDTH).contains(&bits) {
        return Err(CliError::Usage(format!("fp_bits must be a power of two in [{MIN_WIDTH}, {MAX_WIDTH}]")));
    }
    Ok(())
}
