//! Data tables and fingerprint settings shared by every subcommand.

use screenlab_core::data::DataSource;
use screenlab_core::descriptors::{compute_descriptors_with, DescriptorSet, DescriptorTables};
use screenlab_core::druglikeness::{qed_with, sas, FragmentScores, QedParams};
use screenlab_core::fingerprints::{fingerprint, tanimoto, Fingerprint};
use screenlab_core::molgraph::smi::SmiRecord;
use screenlab_core::Molecule;

use crate::error::{CliError, Result};

pub struct Toolkit {
    pub tables: DescriptorTables,
    pub qed: QedParams<f64>,
    pub sas: FragmentScores,
    pub fp_radius: u32,
    pub fp_bits: usize,
}

impl Toolkit {
    /// Tables from `SCREENLAB_DATA` when set, else the embedded copies.
    pub fn load(fp_radius: u32, fp_bits: usize) -> Result<Toolkit> {
        let src = DataSource::from_env();
        let data = |e: screenlab_core::data::DataError| CliError::input(format!("data tables: {e}"));
        Ok(Toolkit {
            tables: DescriptorTables::load(&src).map_err(data)?,
            qed: QedParams::load(&src).map_err(data)?,
            sas: FragmentScores::load(&src).map_err(data)?,
            fp_radius,
            fp_bits,
        })
    }

    pub fn descriptors(&self, m: &Molecule) -> DescriptorSet {
        compute_descriptors_with(m, &self.tables)
    }

    pub fn qed(&self, d: &DescriptorSet) -> Result<f64, String> {
        qed_with(d, &self.qed).map_err(|e| e.to_string())
    }

    pub fn sas(&self, m: &Molecule) -> Result<f64, String> {
        sas(m, &self.sas).map_err(|e| e.to_string())
    }

    pub fn fingerprint(&self, m: &Molecule) -> Fingerprint {
        fingerprint(m, self.fp_radius, self.fp_bits).expect("fingerprint settings validated with the config")
    }

    pub fn similarity(&self, a: &Fingerprint, b: &Fingerprint) -> f64 {
        tanimoto(a, b).expect("fingerprints share one width")
    }
}

/// Rejects `.smi` files whose records share a label.
pub fn unique_labels(records: &[SmiRecord], source: &str) -> Result<()> {
    let mut seen = std::collections::BTreeMap::new();
    for r in records {
        if let Some(first) = seen.insert(r.label(), r.line) {
            return Err(CliError::input(format!(
                "{source}: label '{}' on lines {first} and {} is ambiguous",
                r.label(),
                r.line
            )));
        }
    }
    Ok(())
}
