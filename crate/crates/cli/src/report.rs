//! The screening report document and its per-table CSV renderings.
//!
//! The JSON carries no timestamp, so identical inputs give identical bytes.

use screenlab_core::contacts::{Contact, ContactFrequencyTable};
use screenlab_core::descriptors::DescriptorSet;
use screenlab_core::druglikeness::{Candidate, RuleReport};
use screenlab_core::stats::{BoxplotSummary, GroupComparison};
use serde::{Deserialize, Serialize};

use crate::io::{csv_field, num};

pub const SCHEMA_VERSION: u32 = 1;

/// Sections `plotdata` needs, by JSON key.
pub const REQUIRED_SECTIONS: [&str; 9] = [
    "schema_version",
    "similarity",
    "descriptor_distributions",
    "docked",
    "high_affinity",
    "group_comparison",
    "correlations",
    "contact_frequencies",
    "score_distributions",
];

pub fn conventions() -> Vec<String> {
    [
        "percentiles and medians: nearest rank, ceil(p/100*n)-th smallest; medians are lower medians",
        "finetune set: similarity >= cutoff",
        "high affinity: best-pose energy <= threshold_kcal",
        "best pose: lowest energy, ties to the lowest model rank",
        "group comparison: energy ascending, ties by label; A = first k, B = last k",
        "contacts: receptor N/O to ligand N/O within contact_angstrom inclusive; frequencies count ligands",
        "boxplots: nearest-rank quartiles, whiskers at the extreme values inside 1.5 IQR fences",
        "z-scores: sample standard deviation",
        "leads: qed >= median(qed) and sas <= median(sas) over the high-affinity set",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub seed_name: String,
    pub generated: String,
    pub training_set: Option<String>,
    pub poses: String,
    pub receptor: String,
    pub receptor_chain: Option<char>,
    pub fda_reference: Option<String>,
    pub threshold_kcal: f64,
    pub percentile: f64,
    pub contact_angstrom: f64,
    pub fp_radius: u32,
    pub fp_bits: usize,
    pub group_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedProfile {
    pub name: String,
    pub smiles: String,
    pub canonical_smiles: String,
    pub descriptors: DescriptorSet,
    pub lipinski: RuleReport,
    pub failed_rules: Vec<String>,
    pub qed: f64,
    pub sas: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    /// Equal-width bins over [lo, hi]; the last bin is closed.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
        let mut counts = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let k = if width > 0.0 { ((v - lo) / width).floor() as isize } else { 0 };
            counts[k.clamp(0, bins as isize - 1) as usize] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + w * k as f64, self.lo + w * (k + 1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySet {
    pub source: String,
    pub count: usize,
    pub skipped: usize,
    pub median: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneEntry {
    pub label: String,
    pub smiles: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySection {
    /// Sample drawn before finetuning (the training set), if supplied.
    pub pre: Option<SimilaritySet>,
    /// The generated set being screened.
    pub post: SimilaritySet,
    pub percentile: f64,
    /// Which set the cutoff was computed on: "pre" or "post".
    pub cutoff_source: String,
    pub cutoff: Option<f64>,
    /// Molecules of the cutoff set at or above the cutoff, by similarity
    /// descending then label.
    pub finetune_set: Vec<FinetuneEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyDistribution {
    pub property: String,
    pub count: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub seed_value: f64,
    pub seed_z: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockedRow {
    pub label: String,
    pub best_energy: f64,
    pub pose_rank: usize,
    pub poses: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighAffinityRow {
    pub label: String,
    pub smiles: String,
    pub energy: f64,
    pub pose_rank: usize,
    pub descriptors: DescriptorSet,
    pub lipinski_violations: usize,
    pub failed_rules: Vec<String>,
    pub qed: f64,
    pub sas: f64,
    /// Residues with at least one polar contact, by residue number.
    pub contact_residues: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSection {
    pub k: usize,
    /// Empty when fewer than 2k ligands were docked.
    pub rows: Vec<GroupComparison<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    pub n: usize,
    /// Missing when fewer than two rows or either side has zero variance.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LigandContacts {
    pub label: String,
    pub contacts: Vec<Contact<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    /// "high_affinity" or "reference".
    pub set: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub summary: Option<BoxplotSummary<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistributions {
    pub qed: Vec<ScoreSeries>,
    pub sas: Vec<ScoreSeries>,
    pub reference_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LigandError {
    pub label: String,
    /// "parse", "pose", or "score".
    pub stage: String,
    pub message: String,
}

/// Every generated-set record lands in exactly one of docked, not_docked and
/// errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounting {
    pub smi_records: usize,
    pub pose_files: usize,
    pub docked: usize,
    pub not_docked: usize,
    pub errors: usize,
    pub high_affinity: usize,
}

impl Accounting {
    pub fn balanced(&self) -> bool {
        self.smi_records == self.docked + self.not_docked + self.errors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub schema_version: u32,
    pub conventions: Vec<String>,
    pub config: ReportConfig,
    pub seed: SeedProfile,
    pub similarity: SimilaritySection,
    pub descriptor_distributions: Vec<PropertyDistribution>,
    /// By label.
    pub docked: Vec<DockedRow>,
    pub not_docked: Vec<String>,
    /// By energy, ties by label.
    pub high_affinity: Vec<HighAffinityRow>,
    pub group_comparison: GroupSection,
    pub correlations: Vec<Correlation>,
    pub contacts: Vec<LigandContacts>,
    pub contact_frequencies: ContactFrequencyTable,
    pub score_distributions: ScoreDistributions,
    pub leads: Vec<Candidate>,
    pub errors: Vec<LigandError>,
    pub accounting: Accounting,
    pub warnings: Vec<String>,
}

impl ScreeningReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `ligand_label,best_energy_kcal_mol,pose_rank`.
    pub fn poses_csv(&self) -> String {
        let mut s = String::from("ligand_label,best_energy_kcal_mol,pose_rank\n");
        for r in &self.docked {
            s.push_str(&format!("{},{},{}\n", csv_field(&r.label), r.best_energy, r.pose_rank));
        }
        s
    }

    pub fn high_affinity_csv(&self) -> String {
        let mut s = String::from(
            "ligand_label,energy_kcal_mol,pose_rank,mw,lp,tpsa,hbd,hba,aromatic_rings,carboxylic_acids,rotatable_bonds,alerts,lipinski_violations,failed_rules,qed,sas,smiles\n",
        );
        for r in &self.high_affinity {
            let d = &r.descriptors;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&r.label),
                r.energy,
                r.pose_rank,
                d.mw,
                d.lp,
                d.tpsa,
                d.hbd,
                d.hba,
                d.aromatic_rings,
                d.carboxylic_acids,
                d.rotatable_bonds,
                d.alerts,
                r.lipinski_violations,
                r.failed_rules.join(";"),
                r.qed,
                r.sas,
                csv_field(&r.smiles),
            ));
        }
        s
    }

    pub fn contacts_csv(&self) -> String {
        let mut s = String::from("ligand_label,residue_label,chain,residue_atom,receptor_atom_index,ligand_atom_index,distance\n");
        for l in &self.contacts {
            for c in &l.contacts {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_field(&l.label),
                    c.residue_label,
                    c.chain,
                    csv_field(&c.residue_atom),
                    c.receptor_atom_index,
                    c.ligand_atom_index,
                    c.distance
                ));
            }
        }
        s
    }

    pub fn leads_csv(&self) -> String {
        let mut s = String::from("ligand_label,qed,sas\n");
        for c in &self.leads {
            s.push_str(&format!("{},{},{}\n", csv_field(&c.label), c.qed, c.sas));
        }
        s
    }

    pub fn correlations_csv(&self) -> String {
        let mut s = String::from("x,y,n,r\n");
        for c in &self.correlations {
            s.push_str(&format!("{},{},{},{}\n", c.x, c.y, c.n, num(c.r)));
        }
        s
    }

    pub fn errors_csv(&self) -> String {
        let mut s = String::from("ligand_label,stage,message\n");
        for e in &self.errors {
            s.push_str(&format!("{},{},{}\n", csv_field(&e.label), e.stage, csv_field(&e.message)));
        }
        s
    }

    pub fn finetune_smi(&self) -> String {
        self.similarity
            .finetune_set
            .iter()
            .map(|f| format!("{} {}\n", f.smiles, f.label))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins() {
        let h = Histogram::new(&[0.0, 0.01, 0.5, 0.999, 1.0], 0.0, 1.0, 50);
        assert_eq!(h.counts.len(), 50);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[25], 1);
        assert_eq!(h.counts[49], 2);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);
        let (lo, hi) = h.edges(25);
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.52).abs() < 1e-12);
    }

    #[test]
    fn degenerate_histogram_range() {
        let h = Histogram::new(&[3.0, 3.0], 3.0, 3.0, 10);
        assert_eq!(h.counts[0], 2);
    }
}
