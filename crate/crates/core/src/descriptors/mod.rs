//! Per-molecule descriptor profile: weight, Crippen logP, TPSA, Lipinski
//! donor/acceptor counts, group counts and structural alerts.

mod tables;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::molgraph::{BondOrder, Element, Molecule, Pattern};

pub use crate::stats::zscore;
pub use tables::{Alert, CrippenRule, DescriptorTables, TpsaRule};

const CARBOXYLIC_ACID: &str = "[CX3](=O)[OX2H1]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContributionTable {
    Weights,
    Crippen,
    Tpsa,
}

/// An atom no table row covers; its contribution is taken as zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unparameterized {
    pub table: ContributionTable,
    /// Atom index. For Crippen this indexes the hydrogen-explicit graph,
    /// whose first atoms are the heavy atoms in their original order.
    pub atom: usize,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub mw: f64,
    pub lp: f64,
    pub tpsa: f64,
    pub hbd: usize,
    pub hba: usize,
    pub aromatic_rings: usize,
    pub carboxylic_acids: usize,
    pub rotatable_bonds: usize,
    pub alerts: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unparameterized: Vec<Unparameterized>,
}

impl DescriptorSet {
    /// Whether `table` missed at least one atom.
    pub fn flagged(&self, table: ContributionTable) -> bool {
        self.unparameterized.iter().any(|u| u.table == table)
    }
}

pub fn compute_descriptors(m: &Molecule) -> DescriptorSet {
    compute_descriptors_with(m, DescriptorTables::embedded())
}

pub fn compute_descriptors_with(m: &Molecule, t: &DescriptorTables) -> DescriptorSet {
    let mut unparameterized = Vec::new();
    let mw = molecular_weight(m, t, &mut unparameterized);
    let lp = crippen_types(m, t)
        .into_iter()
        .enumerate()
        .map(|(i, rule)| match rule {
            Some(r) => t.crippen[r].logp,
            None => {
                unparameterized.push(Unparameterized {
                    table: ContributionTable::Crippen,
                    atom: i,
                    element: crippen_element(m, i).symbol().to_string(),
                });
                0.0
            }
        })
        .sum();
    let tpsa = tpsa_with(m, t, &mut unparameterized);
    DescriptorSet {
        mw,
        lp,
        tpsa,
        hbd: hbd(m),
        hba: hba(m),
        aromatic_rings: m.aromatic_rings().count(),
        carboxylic_acids: carboxylic_acid_pattern().count(m),
        rotatable_bonds: rotatable_bonds(m),
        alerts: t.alerts.iter().filter(|a| a.pattern.count(m) > 0).count(),
        unparameterized,
    }
}

fn carboxylic_acid_pattern() -> &'static Pattern {
    static P: OnceLock<Pattern> = OnceLock::new();
    P.get_or_init(|| Pattern::parse(CARBOXYLIC_ACID).expect("valid built-in pattern"))
}

fn molecular_weight(m: &Molecule, t: &DescriptorTables, flags: &mut Vec<Unparameterized>) -> f64 {
    let h = t.weight(Element::H).unwrap_or(0.0);
    let mut mw = 0.0;
    for (i, a) in m.atoms().iter().enumerate() {
        match a.isotope.map(|n| t.isotope_mass(a.element, n)).or_else(|| t.weight(a.element)) {
            Some(w) => mw += w,
            None => flags.push(Unparameterized {
                table: ContributionTable::Weights,
                atom: i,
                element: a.element.symbol().to_string(),
            }),
        }
        mw += h * a.implicit_h as f64;
    }
    mw
}

/// Element of atom `i` in the hydrogen-explicit graph built by
/// [`Molecule::with_explicit_hydrogens`].
fn crippen_element(m: &Molecule, i: usize) -> Element {
    m.atoms().get(i).map_or(Element::H, |a| a.element)
}

/// Row index of the Crippen type for every atom of the hydrogen-explicit
/// graph (heavy atoms first, then added hydrogens).
pub fn crippen_types(m: &Molecule, t: &DescriptorTables) -> Vec<Option<usize>> {
    let full = m.with_explicit_hydrogens();
    (0..full.atom_count())
        .map(|i| t.crippen.iter().position(|r| r.pattern.matches_at(&full, i)))
        .collect()
}

/// Per-atom TPSA contributions; `None` for N/O atoms without a matching row.
pub fn tpsa_contributions(m: &Molecule, t: &DescriptorTables) -> Vec<Option<f64>> {
    (0..m.atom_count())
        .map(|i| {
            let e = m.atoms()[i].element;
            if e == Element::N || e == Element::O {
                t.tpsa.iter().find(|r| r.pattern.matches_at(m, i)).map(|r| r.value)
            } else {
                Some(0.0)
            }
        })
        .collect()
}

fn tpsa_with(m: &Molecule, t: &DescriptorTables, flags: &mut Vec<Unparameterized>) -> f64 {
    let mut total = 0.0;
    for (i, c) in tpsa_contributions(m, t).into_iter().enumerate() {
        match c {
            Some(v) => total += v,
            None => flags.push(Unparameterized {
                table: ContributionTable::Tpsa,
                atom: i,
                element: m.atoms()[i].element.symbol().to_string(),
            }),
        }
    }
    total
}

fn is_n_or_o(e: Element) -> bool {
    e == Element::N || e == Element::O
}

fn attached_h(m: &Molecule, i: usize) -> usize {
    m.atoms()[i].implicit_h as usize
        + m.neighbors(i)
            .iter()
            .filter(|&&(v, _)| m.atoms()[v].element == Element::H)
            .count()
}

/// N and O atoms carrying at least one hydrogen.
pub fn hbd(m: &Molecule) -> usize {
    (0..m.atom_count())
        .filter(|&i| is_n_or_o(m.atoms()[i].element) && attached_h(m, i) > 0)
        .count()
}

/// N plus O atoms.
pub fn hba(m: &Molecule) -> usize {
    m.atoms().iter().filter(|a| is_n_or_o(a.element)).count()
}

fn heavy_degree(m: &Molecule, i: usize) -> usize {
    m.neighbors(i)
        .iter()
        .filter(|&&(v, _)| m.atoms()[v].element != Element::H)
        .count()
}

fn is_carbonyl_carbon(m: &Molecule, i: usize) -> bool {
    m.atoms()[i].element == Element::C
        && m.neighbors(i)
            .iter()
            .any(|&(v, b)| m.atoms()[v].element == Element::O && m.bonds()[b].order == BondOrder::Double)
}

/// Acyclic single bonds between heavy atoms of heavy degree at least two,
/// excluding amide C-N bonds.
pub fn rotatable_bonds(m: &Molecule) -> usize {
    m.bonds()
        .iter()
        .enumerate()
        .filter(|&(bi, b)| {
            let (ea, eb) = (m.atoms()[b.a].element, m.atoms()[b.b].element);
            if b.order != BondOrder::Single || m.is_ring_bond(bi) || ea == Element::H || eb == Element::H {
                return false;
            }
            if heavy_degree(m, b.a) < 2 || heavy_degree(m, b.b) < 2 {
                return false;
            }
            let amide = (eb == Element::N && is_carbonyl_carbon(m, b.a))
                || (ea == Element::N && is_carbonyl_carbon(m, b.b));
            !amide
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn d(s: &str) -> DescriptorSet {
        compute_descriptors(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene() {
        let b = d("c1ccccc1");
        assert!((b.mw - (6.0 * 12.011 + 6.0 * 1.008)).abs() < 1e-9);
        assert!((b.mw - 78.11).abs() < 0.01);
        assert_eq!((b.tpsa, b.hbd, b.hba, b.aromatic_rings), (0.0, 0, 0, 1));
        assert!(b.unparameterized.is_empty());
    }

    #[test]
    fn acetic_acid() {
        let a = d("CC(=O)O");
        assert_eq!((a.hbd, a.hba, a.carboxylic_acids), (1, 2, 1));
        assert!((a.tpsa - 37.30).abs() < 1e-9);
    }

    #[test]
    fn crippen_atom_types() {
        let t = DescriptorTables::embedded();
        let m = parse_smiles("CCO").unwrap();
        let types: Vec<&str> = crippen_types(&m, t)
            .iter()
            .map(|r| t.crippen[r.unwrap()].atom_type.as_str())
            .collect();
        assert_eq!(types, ["C1", "C3", "O2", "H1", "H1", "H1", "H1", "H1", "H2"]);
        let lp = d("CCO").lp;
        assert!((lp - (-0.0014)).abs() < 1e-9, "{lp}");
    }

    #[test]
    fn rotatable_bond_rules() {
        assert_eq!(d("CCCC").rotatable_bonds, 1);
        assert_eq!(d("CC(=O)NC").rotatable_bonds, 0);
        assert_eq!(d("c1ccccc1-c1ccccc1").rotatable_bonds, 1);
        assert_eq!(d("C1CCCCC1").rotatable_bonds, 0);
    }

    #[test]
    fn unmatched_environments_are_flagged() {
        let m = d("CN=[N+]=[N-]");
        assert!(m.flagged(ContributionTable::Tpsa));
        assert!(!m.flagged(ContributionTable::Crippen));
        let x = d("[Xe]");
        assert!(x.flagged(ContributionTable::Crippen));
        assert!(x.mw > 131.0);
        assert!(d("[Tc]").flagged(ContributionTable::Weights));
    }

    #[test]
    fn alerts_count_distinct_patterns() {
        assert_eq!(d("CCO").alerts, 0);
        assert_eq!(d("O=CCC[N+](=O)[O-]").alerts, 2);
    }
}
