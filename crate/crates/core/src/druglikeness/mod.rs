//! Rule-of-five evaluation, QED, synthetic accessibility and lead selection.

mod qed;
mod sas;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::descriptors::DescriptorSet;
use crate::stats::median;

pub use qed::{embedded_qed_params, qed, qed_from_desirabilities, qed_from_values, qed_values, qed_with, Ads, QedParams, QED_PROPERTIES};
pub use sas::{
    fit_sas, sas, sas_terms, spiro_and_bridgeheads, FragmentScores, SasTerms, CONTRIBUTION_FLOOR, DIFFICULTY_SPAN,
    MIN_CORPUS, SAS_RADIUS,
};

#[derive(Debug, Error)]
pub enum DruglikenessError {
    #[error("descriptor '{0}' is missing")]
    MissingDescriptor(&'static str),
    #[error("corpus has {got} molecules, at least {need} are needed")]
    CorpusTooSmall { got: usize, need: usize },
    #[error("fragment score table is empty")]
    EmptyFragmentScores,
    #[error(transparent)]
    Data(#[from] DataError),
}

pub const MAX_MW: f64 = 500.0;
pub const MAX_LP: f64 = 5.0;
pub const MAX_HBD: usize = 5;
pub const MAX_HBA: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl RuleOutcome {
    fn at_most(value: f64, limit: f64) -> RuleOutcome {
        RuleOutcome {
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub mw: RuleOutcome,
    pub lp: RuleOutcome,
    pub hbd: RuleOutcome,
    pub hba: RuleOutcome,
    pub violations: usize,
}

impl RuleReport {
    pub fn outcomes(&self) -> [(&'static str, RuleOutcome); 4] {
        [("mw", self.mw), ("lp", self.lp), ("hbd", self.hbd), ("hba", self.hba)]
    }

    /// Names of the failed rules.
    pub fn failed(&self) -> Vec<&'static str> {
        self.outcomes().into_iter().filter(|(_, o)| !o.pass).map(|(n, _)| n).collect()
    }
}

/// Rule of five, every bound inclusive.
pub fn lipinski(d: &DescriptorSet) -> RuleReport {
    let mw = RuleOutcome::at_most(d.mw, MAX_MW);
    let lp = RuleOutcome::at_most(d.lp, MAX_LP);
    let hbd = RuleOutcome::at_most(d.hbd as f64, MAX_HBD as f64);
    let hba = RuleOutcome::at_most(d.hba as f64, MAX_HBA as f64);
    let violations = [mw, lp, hbd, hba].iter().filter(|o| !o.pass).count();
    RuleReport {
        mw,
        lp,
        hbd,
        hba,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub qed: f64,
    pub sas: f64,
}

/// Candidates with qed at or above the lower median of qed and sas at or
/// below the lower median of sas, sorted by label. An empty input selects
/// nothing.
pub fn select_leads(candidates: &[Candidate]) -> Vec<Candidate> {
    let qs: Vec<f64> = candidates.iter().map(|c| c.qed).collect();
    let ss: Vec<f64> = candidates.iter().map(|c| c.sas).collect();
    let (Ok(mq), Ok(ms)) = (median(&qs), median(&ss)) else {
        return Vec::new();
    };
    let mut out: Vec<Candidate> = candidates
        .iter()
        .filter(|c| c.qed >= mq && c.sas <= ms)
        .cloned()
        .collect();
    out.sort_by(|a, b| a.label.cmp(&b.label).then(a.qed.total_cmp(&b.qed)).then(a.sas.total_cmp(&b.sas)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::compute_descriptors;
    use crate::molgraph::parse_smiles;

    fn set(mw: f64, lp: f64, hbd: usize, hba: usize) -> DescriptorSet {
        DescriptorSet {
            mw,
            lp,
            tpsa: 0.0,
            hbd,
            hba,
            aromatic_rings: 0,
            carboxylic_acids: 0,
            rotatable_bonds: 0,
            alerts: 0,
            unparameterized: Vec::new(),
        }
    }

    fn cand(label: &str, qed: f64, sas: f64) -> Candidate {
        Candidate {
            label: label.into(),
            qed,
            sas,
        }
    }

    #[test]
    fn lipinski_examples() {
        let methane = compute_descriptors(&parse_smiles("C").unwrap());
        assert_eq!(lipinski(&methane).violations, 0);
        let r = lipinski(&set(600.0, 6.0, 6, 11));
        assert_eq!(r.violations, 4);
        assert_eq!(r.failed(), ["mw", "lp", "hbd", "hba"]);
        assert_eq!(r.hba.value, 11.0);
    }

    #[test]
    fn lipinski_bounds_are_inclusive() {
        assert_eq!(lipinski(&set(500.0, 5.0, 5, 10)).violations, 0);
        assert_eq!(lipinski(&set(500.001, 5.0, 5, 10)).failed(), ["mw"]);
    }

    #[test]
    fn select_leads_examples() {
        let picked = select_leads(&[cand("A", 0.8, 3.0), cand("B", 0.4, 5.0)]);
        assert_eq!(picked, [cand("A", 0.8, 3.0)]);
        let same = vec![cand("x", 0.5, 4.0), cand("y", 0.5, 4.0), cand("z", 0.5, 4.0)];
        assert_eq!(select_leads(&same).len(), 3);
        assert!(select_leads(&[]).is_empty());
    }

    #[test]
    fn select_leads_uses_lower_median() {
        // qed lower median is 0.5, sas lower median is 3.
        let c = [cand("a", 0.9, 2.0), cand("b", 0.5, 3.0), cand("c", 0.6, 4.0), cand("d", 0.2, 5.0)];
        let labels: Vec<String> = select_leads(&c).into_iter().map(|c| c.label).collect();
        assert_eq!(labels, ["a", "b"]);
    }

    #[test]
    fn qed_of_peak_desirabilities_is_one() {
        assert!((qed_from_desirabilities(&[1.0f64; 8]) - 1.0).abs() < 1e-15);
        let d = [0.8f64, 0.9, 0.7, 1.0, 0.85, 0.95, 0.6, 0.9];
        // Geometric mean computed independently; 0.827458.
        assert!((qed_from_desirabilities(&d) - 0.827458).abs() < 1e-6);
        let mut tiny = [1.0f64; 8];
        tiny[3] = 1e-300;
        assert!(qed_from_desirabilities(&tiny) < 1e-30);
    }

    #[test]
    fn missing_descriptor_is_reported() {
        let mut v = qed_values(&set(300.0, 2.0, 1, 3));
        v[4] = Some(f64::NAN);
        assert!(matches!(
            qed_from_values(&v, embedded_qed_params()),
            Err(DruglikenessError::MissingDescriptor("tpsa"))
        ));
        v[4] = None;
        assert!(qed_from_values(&v, embedded_qed_params()).is_err());
    }
}
