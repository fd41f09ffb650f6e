//! Hydrogen-suppressed molecular graphs built from SMILES.
//!
//! A [`Molecule`] is immutable once constructed. Parsing assigns implicit
//! hydrogens from the valence table, kekulizes lowercase aromatic input,
//! perceives the smallest set of smallest rings and then re-perceives
//! aromaticity with a per-ring 4n+2 rule, so `c1ccccc1` and `C1=CC=CC=C1`
//! produce the same graph.

mod aromaticity;
mod canon;
pub mod element;
mod pattern;
mod rings;
pub mod smi;
mod smiles;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use canon::{canonical_ranks, canonical_smiles, write_smiles, WriteOptions};
pub use element::Element;
pub use pattern::{
    match_substructure, AtomPrimitive, AtomQuery, BondPrimitive, BondQuery, Expr, Pattern,
    MAX_PATTERN_ATOMS,
};
pub use smiles::{parse_smiles, MAX_SMILES_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MolError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("valence error on atom {atom}: {msg}")]
    Valence { atom: usize, msg: String },
    #[error("unsupported feature at position {pos}: {feature}")]
    Unsupported { pos: usize, feature: String },
    #[error("invalid molecular graph: {0}")]
    Graph(String),
    #[error("pattern has {atoms} atoms, more than the limit of {limit}")]
    PatternTooLarge { atoms: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Small integer code used in invariants and hashes.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Contribution to valence; aromatic bonds count 1.5.
    pub fn valence_f64(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Total attached hydrogens (implicit or written inside brackets).
    pub implicit_h: u8,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    /// Tetrahedral/extended chirality token as written; never interpreted.
    pub stereo: Option<String>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            formal_charge: 0,
            implicit_h: 0,
            isotope: None,
            aromatic: false,
            stereo: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    /// Directional mark ('/' or '\\') as written; opaque.
    pub direction: Option<char>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond {
            a,
            b,
            order,
            direction: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    rings: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_atom: Vec<bool>,
    ring_bond: Vec<bool>,
    name: Option<String>,
}

impl Molecule {
    /// Assembles a molecule from already-consistent parts, checking every
    /// graph invariant and recomputing the ring set. Aromatic flags are taken
    /// as given and must be backed by aromatic rings.
    pub fn from_parts(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        name: Option<String>,
    ) -> Result<Molecule, MolError> {
        let mol = Molecule::assemble(atoms, bonds, name)?;
        mol.check_valences()?;
        mol.check_aromatic_flags()?;
        Ok(mol)
    }

    /// Builds adjacency and rings without valence/aromaticity checks.
    pub(crate) fn assemble(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        name: Option<String>,
    ) -> Result<Molecule, MolError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(MolError::Graph(format!("bond {i} references a missing atom")));
            }
            if bond.a == bond.b {
                return Err(MolError::Graph(format!("bond {i} joins atom {} to itself", bond.a)));
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(MolError::Graph(format!(
                    "duplicate bond between atoms {} and {}",
                    key.0, key.1
                )));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let rings = rings::sssr(n, &bonds, &adjacency);
        let mut ring_atom = vec![false; n];
        let mut ring_bond = vec![false; bonds.len()];
        for ring in &rings {
            for k in 0..ring.len() {
                let (u, v) = (ring[k], ring[(k + 1) % ring.len()]);
                ring_atom[u] = true;
                if let Some(&(_, b)) = adjacency[u].iter().find(|(w, _)| *w == v) {
                    ring_bond[b] = true;
                }
            }
        }
        Ok(Molecule {
            atoms,
            bonds,
            rings,
            adjacency,
            ring_atom,
            ring_bond,
            name,
        })
    }

    pub(crate) fn check_valences(&self) -> Result<(), MolError> {
        let orders: Vec<BondOrder> = if self.bonds.iter().any(|b| b.order == BondOrder::Aromatic) {
            self.kekule_orders()?
        } else {
            self.bonds.iter().map(|b| b.order).collect()
        };
        for (i, atom) in self.atoms.iter().enumerate() {
            let Some(allowed) = atom.element.allowed_valences(atom.formal_charge) else {
                continue;
            };
            let bond_sum: u32 = self.adjacency[i]
                .iter()
                .map(|&(_, b)| orders[b].code() as u32)
                .sum();
            let total = bond_sum + atom.implicit_h as u32;
            if !allowed.iter().any(|&v| v as u32 == total) {
                return Err(MolError::Valence {
                    atom: i,
                    msg: format!(
                        "{} with charge {} has valence {total}, allowed {:?}",
                        atom.element, atom.formal_charge, allowed
                    ),
                });
            }
        }
        Ok(())
    }

    fn check_aromatic_flags(&self) -> Result<(), MolError> {
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.aromatic && !atom.element.is_aromatic_capable() {
                return Err(MolError::Graph(format!(
                    "atom {i} ({}) cannot be aromatic",
                    atom.element
                )));
            }
        }
        let aromatic_ring_bonds: HashSet<usize> = self
            .rings
            .iter()
            .filter(|r| r.iter().all(|&a| self.atoms[a].aromatic))
            .flat_map(|r| self.ring_bond_indices(r))
            .collect();
        for (i, bond) in self.bonds.iter().enumerate() {
            if bond.order == BondOrder::Aromatic && !aromatic_ring_bonds.contains(&i) {
                return Err(MolError::Graph(format!("aromatic bond {i} is not in an aromatic ring")));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: Option<String>) -> Molecule {
        self.name = name;
        self
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Heavy atoms, i.e. every graph node that is not hydrogen.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    pub fn total_hydrogens(&self) -> usize {
        self.atoms
            .iter()
            .map(|a| a.implicit_h as usize + usize::from(a.element == Element::H))
            .sum()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    pub fn bond_index(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|&(_, bi)| bi)
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.ring_atom[atom]
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    /// Number of SSSR rings containing the atom.
    pub fn ring_membership(&self, atom: usize) -> usize {
        self.rings.iter().filter(|r| r.contains(&atom)).count()
    }

    pub fn ring_bond_indices<'a>(&'a self, ring: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        (0..ring.len()).filter_map(move |k| self.bond_index(ring[k], ring[(k + 1) % ring.len()]))
    }

    /// Sum of bond orders with aromatic bonds counted as 1.5.
    pub fn bond_order_sum(&self, atom: usize) -> f64 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence_f64())
            .sum()
    }

    /// SSSR rings whose atoms are all aromatic.
    pub fn aromatic_rings(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.rings.iter().filter(|r| r.iter().all(|&a| self.atoms[a].aromatic))
    }

    /// Relabels atoms so that old atom `i` becomes atom `perm[i]`. Bond order
    /// follows the new atom order; rings are recomputed.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![Atom::new(Element::C); self.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = self.atoms[old].clone();
        }
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
                direction: b.direction,
            })
            .collect();
        bonds.sort_by_key(|b| (b.a.min(b.b), b.a.max(b.b)));
        Molecule::assemble(atoms, bonds, self.name.clone())
            .expect("relabeling preserves graph validity")
    }

    /// Both molecules as one disconnected record.
    pub fn disjoint_union(&self, other: &Molecule) -> Molecule {
        let offset = self.atoms.len();
        let atoms = self.atoms.iter().chain(other.atoms.iter()).cloned().collect();
        let bonds = self
            .bonds
            .iter()
            .cloned()
            .chain(other.bonds.iter().map(|b| Bond {
                a: b.a + offset,
                b: b.b + offset,
                ..b.clone()
            }))
            .collect();
        Molecule::assemble(atoms, bonds, self.name.clone()).expect("union of valid graphs")
    }

    /// A Kekulé assignment for the aromatic bonds (single/double), indexed
    /// like [`Molecule::bonds`].
    pub fn kekule_orders(&self) -> Result<Vec<BondOrder>, MolError> {
        aromaticity::kekulize_molecule(self)
    }

    /// A copy with every implicit hydrogen promoted to an explicit atom.
    /// Heavy atoms keep their indices; new hydrogens follow in atom order.
    pub fn with_explicit_hydrogens(&self) -> Molecule {
        let mut atoms = self.atoms.clone();
        let mut bonds = self.bonds.clone();
        for i in 0..self.atoms.len() {
            for _ in 0..self.atoms[i].implicit_h {
                bonds.push(Bond::new(i, atoms.len(), BondOrder::Single));
                atoms.push(Atom::new(Element::H));
            }
            atoms[i].implicit_h = 0;
        }
        Molecule::assemble(atoms, bonds, self.name.clone()).expect("adding hydrogens keeps the graph valid")
    }

    /// Connected components as sorted atom-index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut k = 0;
            while k < members.len() {
                let u = members[k];
                k += 1;
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical_smiles(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_and_self_bonds() {
        let atoms = vec![Atom::new(Element::C), Atom::new(Element::C)];
        let dup = vec![
            Bond::new(0, 1, BondOrder::Single),
            Bond::new(1, 0, BondOrder::Single),
        ];
        assert!(matches!(
            Molecule::assemble(atoms.clone(), dup, None),
            Err(MolError::Graph(_))
        ));
        let selfb = vec![Bond::new(0, 0, BondOrder::Single)];
        assert!(Molecule::assemble(atoms.clone(), selfb, None).is_err());
        let oob = vec![Bond::new(0, 2, BondOrder::Single)];
        assert!(Molecule::assemble(atoms, oob, None).is_err());
    }

    #[test]
    fn from_parts_checks_valence() {
        let mut c = Atom::new(Element::C);
        c.implicit_h = 4;
        assert!(Molecule::from_parts(vec![c.clone()], vec![], None).is_ok());
        c.implicit_h = 5;
        assert!(matches!(
            Molecule::from_parts(vec![c], vec![], None),
            Err(MolError::Valence { .. })
        ));
    }

    #[test]
    fn permutation_preserves_counts() {
        let m = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let n = m.atom_count();
        let perm: Vec<usize> = (0..n).rev().collect();
        let p = m.permuted(&perm);
        assert_eq!(p.atom_count(), n);
        assert_eq!(p.bonds().len(), m.bonds().len());
        assert_eq!(p.rings().len(), m.rings().len());
        assert_eq!(p.total_hydrogens(), m.total_hydrogens());
        assert_eq!(canonical_smiles(&p), canonical_smiles(&m));
    }

    #[test]
    fn union_is_disconnected() {
        let a = parse_smiles("CCO").unwrap();
        let b = parse_smiles("c1ccccc1").unwrap();
        let u = a.disjoint_union(&b);
        assert_eq!(u.atom_count(), 9);
        assert_eq!(u.components().len(), 2);
        assert_eq!(u.rings().len(), 1);
    }
}
