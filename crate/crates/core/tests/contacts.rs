//! Grid contact search against the all-pairs scan on random geometries.
//!
//! Coordinates sit on a 1/64 Å lattice so that axis swaps, sign flips and
//! lattice translations preserve every distance exactly.

use proptest::prelude::*;

use screenlab_core::contacts::{contact_frequencies, polar_contacts_brute, Contact, PolarGrid};
use screenlab_core::geometry::Vec3;
use screenlab_core::molgraph::Element;
use screenlab_core::structio::{parse_pdb, write_pdb, DockedPose, PdbOptions, PoseAtom, ProteinAtom, ProteinStructure, RecordKind};

const ELEMENTS: [Element; 4] = [Element::N, Element::O, Element::C, Element::S];
const RESIDUES: [&str; 6] = ["SER", "GLY", "ASN", "LYS", "TRP", "GLU"];

fn lattice(v: i32) -> f64 {
    v as f64 / 64.0
}

type AtomSpec = (usize, [i32; 3]);

fn coords(span: i32) -> impl Strategy<Value = [i32; 3]> {
    [(-span..span), (-span..span), (-span..span)]
}

fn receptor_atoms() -> impl Strategy<Value = Vec<AtomSpec>> {
    prop::collection::vec((0..ELEMENTS.len(), coords(64 * 15)), 1..200)
}

fn pose_atoms() -> impl Strategy<Value = Vec<AtomSpec>> {
    prop::collection::vec((0..ELEMENTS.len(), coords(64 * 12)), 1..40)
}

fn receptor(spec: &[AtomSpec]) -> ProteinStructure<f64> {
    let atoms = spec
        .iter()
        .enumerate()
        .map(|(i, &(e, [x, y, z]))| {
            let seq = 100 + (i / 4) as i32;
            ProteinAtom {
                kind: RecordKind::Atom,
                serial: i as u32 + 1,
                name: format!("{}{}", ELEMENTS[e].symbol(), i % 4),
                res_name: RESIDUES[(seq as usize) % RESIDUES.len()].into(),
                chain: 'A',
                res_seq: seq,
                icode: None,
                pos: Vec3::new(lattice(x), lattice(y), lattice(z)),
                occupancy: 1.0,
                b_factor: 0.0,
                element: ELEMENTS[e],
            }
        })
        .collect();
    ProteinStructure::from_atoms(atoms).unwrap()
}

fn pose(spec: &[AtomSpec]) -> DockedPose<f64> {
    DockedPose {
        source_ligand: "lig".into(),
        pose_rank: 1,
        binding_energy: -10.0,
        rmsd_lb: 0.0,
        rmsd_ub: 0.0,
        atoms: spec
            .iter()
            .map(|&(e, [x, y, z])| PoseAtom {
                name: ELEMENTS[e].symbol().into(),
                ad_type: ELEMENTS[e].symbol().into(),
                element: ELEMENTS[e],
                pos: Vec3::new(lattice(x), lattice(y), lattice(z)),
                partial_charge: 0.0,
            })
            .collect(),
    }
}

/// Axis permutation with sign flips, then a lattice translation.
fn moved(spec: &[AtomSpec], perm: [usize; 3], flip: [bool; 3], shift: [i32; 3]) -> Vec<AtomSpec> {
    spec.iter()
        .map(|&(e, c)| {
            let mut out = [0; 3];
            for k in 0..3 {
                let v = c[perm[k]];
                out[k] = if flip[k] { -v } else { v } + shift[k];
            }
            (e, out)
        })
        .collect()
}

fn pairs(c: &[Contact<f64>]) -> Vec<(usize, usize)> {
    let mut p: Vec<_> = c.iter().map(|x| (x.receptor_atom_index, x.ligand_atom_index)).collect();
    p.sort_unstable();
    p
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn grid_matches_all_pairs(r in receptor_atoms(), p in pose_atoms(), t in 1.0f64..9.0) {
        let rec = receptor(&r);
        let pose = pose(&p);
        prop_assert_eq!(PolarGrid::new(&rec).contacts(&pose, t), polar_contacts_brute(&rec, &pose, t));
    }

    #[test]
    fn contacts_grow_with_threshold(r in receptor_atoms(), p in pose_atoms()) {
        let rec = receptor(&r);
        let pose = pose(&p);
        let grid = PolarGrid::new(&rec);
        let sets: Vec<Vec<(usize, usize)>> = [3.0, 4.0, 5.0, 6.0].iter().map(|&t| pairs(&grid.contacts(&pose, t))).collect();
        for w in sets.windows(2) {
            prop_assert!(w[0].iter().all(|x| w[1].binary_search(x).is_ok()));
        }
    }

    #[test]
    fn rigid_motion_keeps_contacts(
        r in receptor_atoms(),
        p in pose_atoms(),
        perm in 0..6usize,
        flip in any::<[bool; 3]>(),
        shift in coords(64 * 40),
    ) {
        let before = PolarGrid::new(&receptor(&r)).contacts(&pose(&p), 5.0);
        let moved_rec = receptor(&moved(&r, PERMS[perm], flip, shift));
        let after = PolarGrid::new(&moved_rec).contacts(&pose(&moved(&p, PERMS[perm], flip, shift)), 5.0);
        prop_assert_eq!(pairs(&before), pairs(&after));
        let (fa, fb) = (contact_frequencies(&[before]), contact_frequencies(&[after]));
        prop_assert_eq!(fa, fb);
    }

    /// Lattice coordinates are exact at three decimals plus rounding.
    #[test]
    fn pdb_round_trip(r in receptor_atoms()) {
        let rec = receptor(&r);
        let back: ProteinStructure<f64> = parse_pdb(&write_pdb(&rec), &PdbOptions::default()).unwrap();
        prop_assert_eq!(back.atoms.len(), rec.atoms.len());
        for (a, b) in rec.atoms.iter().zip(&back.atoms) {
            prop_assert!(a.pos.distance(b.pos) <= 0.001 * 3f64.sqrt());
            prop_assert_eq!(a.element, b.element);
            prop_assert_eq!(&a.name, &b.name);
            prop_assert_eq!(a.res_seq, b.res_seq);
        }
        prop_assert_eq!(back.residues, rec.residues);
    }
}

const MIXED: &str = "\
ATOM      1  N   SER R 105       0.000   0.000   0.000  1.00  0.00           N
ATOM      2  OG  SER R 105       1.000   1.000   1.000  1.00  0.00           O
ATOM      3  O   GLY R 106       3.000   0.000   0.000  1.00  0.00           O
ATOM      4  OG  SER A  10       1.000   0.500   0.000  1.00  0.00           O
HETATM    5  O1  SIP R 401       0.500   0.500   0.500  1.00  0.00           O
HETATM    6  O   HOH R 501       1.500   0.000   0.000  1.00  0.00           O
END
";

#[test]
fn receptor_view_keeps_one_protein_chain() {
    let rec: ProteinStructure<f64> = parse_pdb(MIXED, &PdbOptions::receptor(Some('R'))).unwrap();
    let labels: Vec<String> = rec.residues.iter().map(|r| r.label()).collect();
    assert_eq!(labels, ["105-S", "106-G"]);
    let all: ProteinStructure<f64> = parse_pdb(MIXED, &PdbOptions::default()).unwrap();
    assert_eq!(all.atoms.len(), 6);
    assert_eq!(all.chains(), ['A', 'R']);

    let p = pose(&[(1, [64, 0, 0])]);
    let hits = PolarGrid::new(&rec).contacts(&p, 3.0);
    let res: Vec<&str> = hits.iter().map(|c| c.residue_label.as_str()).collect();
    assert_eq!(res, ["105-S", "105-S", "106-G"]);
}
