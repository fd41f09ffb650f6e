//! Distance-only polar contacts between a receptor and a docked pose, and
//! per-residue counts over a set of ligands.
//!
//! Polar atoms are N and O on both sides. A pair is a contact when its
//! distance is at most the threshold. Receptor atoms are bucketed into a
//! uniform grid of [`GRID_CELL`] Å cells; [`polar_contacts_brute`] is the
//! all-pairs reference.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::molgraph::Element;
use crate::structio::{residue_label, DockedPose, ProteinStructure};
use crate::Scalar;

pub const DEFAULT_THRESHOLD: f64 = 5.0;
pub const GRID_CELL: f64 = 5.0;

pub fn is_polar(e: Element) -> bool {
    e == Element::N || e == Element::O
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact<T> {
    /// `"<seq>-<one-letter>"`.
    pub residue_label: String,
    pub residue_seq: i32,
    pub chain: char,
    pub residue_atom: String,
    pub receptor_atom_index: usize,
    pub ligand_atom_index: usize,
    pub distance: T,
}

fn contact<T: Scalar>(r: &ProteinStructure<T>, ri: usize, li: usize, d: T) -> Contact<T> {
    let res = r.residue_of(ri);
    Contact {
        residue_label: residue_label(res.seq, res.code),
        residue_seq: res.seq,
        chain: res.chain,
        residue_atom: r.atoms[ri].name.clone(),
        receptor_atom_index: ri,
        ligand_atom_index: li,
        distance: d,
    }
}

/// Sorted by residue number, then distance, then atom indices.
fn sort_contacts<T: Scalar>(c: &mut [Contact<T>]) {
    c.sort_by(|a, b| {
        a.residue_seq
            .cmp(&b.residue_seq)
            .then(a.distance.partial_cmp(&b.distance).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.receptor_atom_index.cmp(&b.receptor_atom_index))
            .then(a.ligand_atom_index.cmp(&b.ligand_atom_index))
    });
}

fn polar_ligand_atoms<T: Scalar>(pose: &DockedPose<T>) -> impl Iterator<Item = (usize, Vec3<T>)> + '_ {
    pose.atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| is_polar(a.element))
        .map(|(i, a)| (i, a.pos))
}

/// All-pairs reference implementation.
pub fn polar_contacts_brute<T: Scalar>(receptor: &ProteinStructure<T>, pose: &DockedPose<T>, threshold: T) -> Vec<Contact<T>> {
    let mut out = Vec::new();
    for (li, lp) in polar_ligand_atoms(pose) {
        for (ri, ra) in receptor.atoms.iter().enumerate() {
            if !is_polar(ra.element) {
                continue;
            }
            let d = ra.pos.distance(lp);
            if d <= threshold {
                out.push(contact(receptor, ri, li, d));
            }
        }
    }
    sort_contacts(&mut out);
    out
}

/// Receptor polar atoms bucketed by grid cell; reusable across poses.
#[derive(Debug, Clone)]
pub struct PolarGrid<'a, T> {
    receptor: &'a ProteinStructure<T>,
    cell: T,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl<'a, T: Scalar> PolarGrid<'a, T> {
    pub fn new(receptor: &'a ProteinStructure<T>) -> PolarGrid<'a, T> {
        let cell = T::lit(GRID_CELL);
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, a) in receptor.atoms.iter().enumerate() {
            if is_polar(a.element) {
                cells.entry(key(a.pos, cell)).or_default().push(i);
            }
        }
        PolarGrid { receptor, cell, cells }
    }

    pub fn contacts(&self, pose: &DockedPose<T>, threshold: T) -> Vec<Contact<T>> {
        let reach = (threshold / self.cell).ceil().to_i64().unwrap_or(0).max(0);
        let mut out = Vec::new();
        for (li, lp) in polar_ligand_atoms(pose) {
            let (cx, cy, cz) = key(lp, self.cell);
            for dx in -reach..=reach {
                for dy in -reach..=reach {
                    for dz in -reach..=reach {
                        let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &ri in bucket {
                            let d = self.receptor.atoms[ri].pos.distance(lp);
                            if d <= threshold {
                                out.push(contact(self.receptor, ri, li, d));
                            }
                        }
                    }
                }
            }
        }
        sort_contacts(&mut out);
        out
    }
}

fn key<T: Scalar>(p: Vec3<T>, cell: T) -> (i64, i64, i64) {
    let f = |v: T| (v / cell).floor().to_i64().unwrap_or(0);
    (f(p.x), f(p.y), f(p.z))
}

/// Every receptor N/O to ligand N/O pair within `threshold` Å (inclusive).
pub fn polar_contacts<T: Scalar>(receptor: &ProteinStructure<T>, pose: &DockedPose<T>, threshold: T) -> Vec<Contact<T>> {
    PolarGrid::new(receptor).contacts(pose, threshold)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueCount {
    pub residue_label: String,
    pub residue_seq: i32,
    /// Ligands with at least one contact to the residue.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactFrequencyTable {
    /// Descending count, then ascending residue number; zero counts omitted.
    pub rows: Vec<ResidueCount>,
    pub total_ligands: usize,
}

impl ContactFrequencyTable {
    pub fn count(&self, label: &str) -> usize {
        self.rows.iter().find(|r| r.residue_label == label).map_or(0, |r| r.count)
    }

    /// `residue_label,count` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("residue_label,count\n");
        for r in &self.rows {
            s.push_str(&format!("{},{}\n", r.residue_label, r.count));
        }
        s
    }
}

/// Counts ligands, not atom pairs, per residue.
pub fn contact_frequencies<T>(per_ligand: &[Vec<Contact<T>>]) -> ContactFrequencyTable {
    let mut counts: BTreeMap<(i32, String), usize> = BTreeMap::new();
    for contacts in per_ligand {
        let mut seen: Vec<(i32, &str)> = contacts.iter().map(|c| (c.residue_seq, c.residue_label.as_str())).collect();
        seen.sort_unstable();
        seen.dedup();
        for (seq, label) in seen {
            *counts.entry((seq, label.to_string())).or_default() += 1;
        }
    }
    let mut rows: Vec<ResidueCount> = counts
        .into_iter()
        .map(|((residue_seq, residue_label), count)| ResidueCount {
            residue_label,
            residue_seq,
            count,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.residue_seq.cmp(&b.residue_seq))
            .then(a.residue_label.cmp(&b.residue_label))
    });
    ContactFrequencyTable {
        rows,
        total_ligands: per_ligand.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::{parse_pdb, PdbOptions, PoseAtom};

    const RECEPTOR: &str = "\
ATOM      1  N   SER A 105       0.000   0.000   0.000  1.00  0.00           N
ATOM      2  CA  SER A 105       1.458   0.000   0.000  1.00  0.00           C
ATOM      3  OG  SER A 105      10.000  10.000  10.000  1.00  0.00           O
ATOM      4  O   GLY A 106      30.000   0.000   0.000  1.00  0.00           O
";

    fn receptor() -> ProteinStructure<f64> {
        parse_pdb(RECEPTOR, &PdbOptions::default()).unwrap()
    }

    fn pose(atoms: &[(Element, [f64; 3])]) -> DockedPose<f64> {
        DockedPose {
            source_ligand: "lig".into(),
            pose_rank: 1,
            binding_energy: -9.0,
            rmsd_lb: 0.0,
            rmsd_ub: 0.0,
            atoms: atoms
                .iter()
                .map(|&(element, [x, y, z])| PoseAtom {
                    name: element.symbol().into(),
                    ad_type: element.symbol().into(),
                    element,
                    pos: Vec3::new(x, y, z),
                    partial_charge: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn serine_hydroxyl_contact() {
        let p = pose(&[(Element::N, [13.2, 10.0, 10.0])]);
        let c = polar_contacts(&receptor(), &p, 5.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].residue_label, "105-S");
        assert_eq!(c[0].residue_atom, "OG");
        assert!((c[0].distance - 3.2).abs() < 1e-6);
    }

    #[test]
    fn too_far_and_nonpolar_atoms_do_not_count() {
        let far = pose(&[(Element::O, [16.0, 10.0, 10.0])]);
        assert!(polar_contacts(&receptor(), &far, 5.0).is_empty());
        let carbon = pose(&[(Element::C, [12.0, 10.0, 10.0])]);
        assert!(polar_contacts(&receptor(), &carbon, 5.0).is_empty());
    }

    #[test]
    fn threshold_is_inclusive() {
        let p = pose(&[(Element::O, [15.0, 10.0, 10.0])]);
        assert_eq!(polar_contacts(&receptor(), &p, 5.0).len(), 1);
        assert_eq!(polar_contacts(&receptor(), &p, 4.999).len(), 0);
    }

    #[test]
    fn large_threshold_scans_more_cells() {
        let p = pose(&[(Element::O, [0.0, 0.0, 12.0])]);
        let r = receptor();
        assert_eq!(polar_contacts(&r, &p, 20.0), polar_contacts_brute(&r, &p, 20.0));
        assert_eq!(polar_contacts(&r, &p, 20.0).len(), 2);
    }

    fn fake(label: &str, seq: i32) -> Contact<f64> {
        Contact {
            residue_label: label.into(),
            residue_seq: seq,
            chain: 'A',
            residue_atom: "O".into(),
            receptor_atom_index: 0,
            ligand_atom_index: 0,
            distance: 3.0,
        }
    }

    #[test]
    fn ligand_level_counting() {
        let three = vec![vec![fake("105-S", 105)]; 3];
        assert_eq!(contact_frequencies(&three).count("105-S"), 3);
        let many = vec![vec![fake("120-R", 120); 5]];
        let t = contact_frequencies(&many);
        assert_eq!(t.count("120-R"), 1);
        assert_eq!(t.total_ligands, 1);
    }

    #[test]
    fn frequency_order() {
        let t = contact_frequencies(&[
            vec![fake("129-S", 129), fake("101-N", 101)],
            vec![fake("129-S", 129), fake("105-S", 105)],
            vec![fake("105-S", 105)],
        ]);
        let labels: Vec<&str> = t.rows.iter().map(|r| r.residue_label.as_str()).collect();
        assert_eq!(labels, ["105-S", "129-S", "101-N"]);
        assert_eq!(t.to_csv(), "residue_label,count\n105-S,2\n129-S,2\n101-N,1\n");
    }
}
