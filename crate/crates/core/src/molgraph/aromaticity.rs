//! Kekulization and aromaticity perception.
//!
//! An aromatic atom "needs a π bond" when its lowest allowed valence leaves a
//! free slot after its σ bonds and hydrogens. Kekulization pairs those atoms
//! along aromatic bonds with a perfect matching. Perception then scores each
//! SSSR ring: every member must be sp2-like and the π electron count must be
//! 4n+2. A double bond whose partner sits in the ring, or in a fused ring
//! whose members are all conjugatable, counts one electron; a double bond to
//! an exocyclic N/O/S counts zero; lone-pair donors count two. The counts do
//! not depend on which Kekulé structure was chosen.

use std::collections::HashSet;

use super::{Atom, Bond, BondOrder, Element, MolError, Molecule};

/// Whether an aromatic atom with σ-bond sum `sigma` (aromatic bonds counted
/// as one) and `h` hydrogens must take a double bond in a Kekulé structure.
pub(crate) fn needs_pi(element: Element, charge: i8, sigma: u32, h: u32) -> bool {
    let Some(allowed) = element.allowed_valences(charge) else {
        return false;
    };
    let used = sigma + h;
    allowed
        .iter()
        .map(|&v| v as u32)
        .find(|&v| v >= used)
        .is_some_and(|v| v - used >= 1)
}

/// Hydrogens implied for a bare (unbracketed) atom with σ-bond sum `sigma`.
/// Aromatic atoms reserve one valence for their π bond when they need it.
pub(crate) fn bare_hydrogens(element: Element, aromatic: bool, sigma: u32) -> Option<u32> {
    let allowed = element.allowed_valences(0)?;
    let v = allowed.iter().map(|&v| v as u32).find(|&v| v >= sigma)?;
    let free = v - sigma;
    if aromatic && free >= 1 {
        Some(free - 1)
    } else {
        Some(free)
    }
}

/// Perfect matching of `nodes` using `edges` (pairs of node positions).
/// Returns the matched edge indices, or `None` if no perfect matching exists.
pub(crate) fn perfect_matching(node_count: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); node_count];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut mate: Vec<Option<usize>> = vec![None; node_count];
    let mut chosen = Vec::new();
    if search(&adj, &mut mate, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn search(adj: &[Vec<(usize, usize)>], mate: &mut [Option<usize>], chosen: &mut Vec<usize>) -> bool {
    // most constrained unmatched node first
    let mut best: Option<(usize, usize)> = None;
    for u in 0..adj.len() {
        if mate[u].is_some() {
            continue;
        }
        let free = adj[u].iter().filter(|(v, _)| mate[*v].is_none()).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((u, free));
        }
    }
    let Some((u, _)) = best else {
        return true;
    };
    for &(v, e) in &adj[u] {
        if mate[v].is_some() {
            continue;
        }
        mate[u] = Some(v);
        mate[v] = Some(u);
        chosen.push(e);
        if search(adj, mate, chosen) {
            return true;
        }
        chosen.pop();
        mate[u] = None;
        mate[v] = None;
    }
    false
}

/// Kekulé bond orders for a finished molecule.
pub(crate) fn kekulize_molecule(mol: &Molecule) -> Result<Vec<BondOrder>, MolError> {
    let atoms = mol.atoms();
    let bonds = mol.bonds();
    let pi: Vec<bool> = (0..atoms.len())
        .map(|i| {
            let a = &atoms[i];
            a.aromatic && {
                let sigma: u32 = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(_, b)| sigma_order(bonds[b].order))
                    .sum();
                needs_pi(a.element, a.formal_charge, sigma, a.implicit_h as u32)
            }
        })
        .collect();
    kekulize(atoms.len(), bonds, &pi)
}

fn sigma_order(order: BondOrder) -> u32 {
    match order {
        BondOrder::Aromatic => 1,
        other => other.code() as u32,
    }
}

/// Assigns single/double to aromatic bonds so every atom flagged in `pi` gets
/// exactly one double bond.
pub(crate) fn kekulize(atom_count: usize, bonds: &[Bond], pi: &[bool]) -> Result<Vec<BondOrder>, MolError> {
    let mut index = vec![usize::MAX; atom_count];
    let mut nodes = Vec::new();
    for (i, &p) in pi.iter().enumerate() {
        if p {
            index[i] = nodes.len();
            nodes.push(i);
        }
    }
    let mut edges = Vec::new();
    let mut edge_bond = Vec::new();
    for (bi, b) in bonds.iter().enumerate() {
        if b.order == BondOrder::Aromatic && pi[b.a] && pi[b.b] {
            edges.push((index[b.a], index[b.b]));
            edge_bond.push(bi);
        }
    }
    let matched = perfect_matching(nodes.len(), &edges).ok_or_else(|| MolError::Valence {
        atom: nodes.first().copied().unwrap_or(0),
        msg: "aromatic system cannot be kekulized".into(),
    })?;
    let mut orders: Vec<BondOrder> = bonds
        .iter()
        .map(|b| match b.order {
            BondOrder::Aromatic => BondOrder::Single,
            o => o,
        })
        .collect();
    for e in matched {
        orders[edge_bond[e]] = BondOrder::Double;
    }
    Ok(orders)
}

/// Perceives aromatic rings on a Kekulé-form molecule (no aromatic bonds) and
/// returns the atoms and bonds with aromatic flags/orders applied.
pub(crate) fn perceive(mol: &Molecule) -> (Vec<Atom>, Vec<Bond>) {
    let atoms = mol.atoms();
    let bonds = mol.bonds();
    let n = atoms.len();

    let double_partner: Vec<Option<usize>> = (0..n)
        .map(|i| {
            mol.neighbors(i)
                .iter()
                .find(|&&(_, b)| bonds[b].order == BondOrder::Double)
                .map(|&(v, _)| v)
        })
        .collect();
    let basic: Vec<bool> = (0..n).map(|i| basic_candidate(mol, i)).collect();

    let rings = mol.rings();
    let ring_sets: Vec<HashSet<usize>> = rings.iter().map(|r| r.iter().copied().collect()).collect();
    let ring_edges: Vec<HashSet<usize>> =
        rings.iter().map(|r| mol.ring_bond_indices(r).collect()).collect();
    let candidate_ring: Vec<bool> = rings.iter().map(|r| r.iter().all(|&a| basic[a])).collect();

    let mut aromatic_atom = vec![false; n];
    let mut aromatic_bond = vec![false; bonds.len()];
    for (ri, ring) in rings.iter().enumerate() {
        if !candidate_ring[ri] {
            continue;
        }
        let fused_partner_ok = |p: usize| {
            (0..rings.len()).any(|rj| {
                rj != ri
                    && candidate_ring[rj]
                    && ring_sets[rj].contains(&p)
                    && !ring_edges[rj].is_disjoint(&ring_edges[ri])
            })
        };
        let mut electrons = 0u32;
        let mut ok = true;
        for &a in ring {
            match pi_electrons(mol, a, double_partner[a], &ring_sets[ri], &fused_partner_ok) {
                Some(e) => electrons += e,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && electrons >= 2 && (electrons - 2) % 4 == 0 {
            for &a in ring {
                aromatic_atom[a] = true;
            }
            for &b in &ring_edges[ri] {
                aromatic_bond[b] = true;
            }
        }
    }

    let new_atoms = atoms
        .iter()
        .zip(&aromatic_atom)
        .map(|(a, &ar)| Atom {
            aromatic: ar,
            ..a.clone()
        })
        .collect();
    let new_bonds = bonds
        .iter()
        .zip(&aromatic_bond)
        .map(|(b, &ar)| Bond {
            order: if ar { BondOrder::Aromatic } else { b.order },
            ..b.clone()
        })
        .collect();
    (new_atoms, new_bonds)
}

fn basic_candidate(mol: &Molecule, i: usize) -> bool {
    let atom = &mol.atoms()[i];
    if !atom.element.is_aromatic_capable() || !mol.is_ring_atom(i) {
        return false;
    }
    let mut doubles = 0;
    for &(_, b) in mol.neighbors(i) {
        match mol.bonds()[b].order {
            BondOrder::Triple => return false,
            BondOrder::Double => doubles += 1,
            _ => {}
        }
    }
    doubles <= 1
}

fn pi_electrons(
    mol: &Molecule,
    a: usize,
    partner: Option<usize>,
    ring: &HashSet<usize>,
    fused_partner_ok: &dyn Fn(usize) -> bool,
) -> Option<u32> {
    let atom = &mol.atoms()[a];
    let connections = mol.degree(a) + atom.implicit_h as usize;
    if let Some(p) = partner {
        if ring.contains(&p) || fused_partner_ok(p) {
            return Some(1);
        }
        let pe = mol.atoms()[p].element;
        return (pe == Element::O || pe == Element::N || pe == Element::S).then_some(0);
    }
    match (atom.element, atom.formal_charge) {
        (Element::C, -1) => Some(2),
        (Element::C, 1) => Some(0),
        (Element::N | Element::P, 0) if connections == 3 => Some(2),
        (Element::N | Element::P, -1) if connections == 2 => Some(2),
        (Element::O | Element::S, 0) if connections == 2 => Some(2),
        (Element::B, 0) if connections == 3 => Some(0),
        _ => None,
    }
}
