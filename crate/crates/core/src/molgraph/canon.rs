//! Canonical atom ranking and SMILES writing.
//!
//! Ranks come from iterative refinement of atom invariants by sorted
//! neighbor (bond, rank) lists. Remaining ties are broken by promoting the
//! lowest-indexed atom of the smallest tied class and refining again. The
//! writer walks each component depth-first from its lowest-ranked atom,
//! visiting neighbors in rank order. Stereo annotations are not written.

use std::collections::HashMap;

use super::aromaticity::bare_hydrogens;
use super::{BondOrder, Molecule};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOptions {
    /// Write aromatic systems as alternating single/double bonds with
    /// uppercase atoms.
    pub kekule: bool,
}

/// A permutation-invariant rank for every atom; ranks are `0..n` and unique.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let invariants: Vec<_> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                a.isotope.unwrap_or(0),
                a.formal_charge,
                mol.degree(i),
                a.implicit_h,
                a.aromatic,
                mol.is_ring_atom(i),
            )
        })
        .collect();
    let mut ranks = dense_rank(&invariants);
    refine(mol, &mut ranks);
    loop {
        let classes = class_count(&ranks);
        if classes == n {
            return ranks;
        }
        // smallest rank value shared by more than one atom
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).unwrap();
        let pick = (0..n).find(|&i| ranks[i] == tied).unwrap();
        let keys: Vec<(usize, bool)> = (0..n).map(|i| (ranks[i], i != pick)).collect();
        ranks = dense_rank(&keys);
        refine(mol, &mut ranks);
    }
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m + 1)
}

fn dense_rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for k in 0..order.len() {
        if k > 0 && keys[order[k]] != keys[order[k - 1]] {
            r += 1;
        }
        ranks[order[k]] = r;
    }
    ranks
}

fn refine(mol: &Molecule, ranks: &mut Vec<usize>) {
    let n = ranks.len();
    loop {
        let before = class_count(ranks);
        let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u8, usize)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(v, b)| (mol.bonds()[b].order.code(), ranks[v]))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        *ranks = dense_rank(&keys);
        if class_count(ranks) == before {
            return;
        }
    }
}

/// Canonical SMILES: aromatic form, no stereo.
pub fn canonical_smiles(mol: &Molecule) -> String {
    write_smiles(mol, &canonical_ranks(mol), WriteOptions::default())
}

/// Writes SMILES with traversal order driven by `ranks` (lower first).
pub fn write_smiles(mol: &Molecule, ranks: &[usize], options: WriteOptions) -> String {
    let n = mol.atom_count();
    assert_eq!(ranks.len(), n, "one rank per atom");
    let orders: Vec<BondOrder> = if options.kekule {
        mol.kekule_orders()
            .unwrap_or_else(|_| mol.bonds().iter().map(|b| b.order).collect())
    } else {
        mol.bonds().iter().map(|b| b.order).collect()
    };
    let aromatic: Vec<bool> = mol
        .atoms()
        .iter()
        .map(|a| a.aromatic && !options.kekule)
        .collect();

    let mut writer = Writer {
        mol,
        ranks,
        orders: &orders,
        aromatic: &aromatic,
        visited: vec![false; n],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
        out: String::new(),
        digits: HashMap::new(),
    };

    let mut starts: Vec<usize> = mol
        .components()
        .iter()
        .map(|c| *c.iter().min_by_key(|&&a| ranks[a]).unwrap())
        .collect();
    starts.sort_by_key(|&a| ranks[a]);
    for (k, &s) in starts.iter().enumerate() {
        if k > 0 {
            writer.out.push('.');
        }
        writer.build(s);
        writer.emit(s);
    }
    writer.out
}

struct Writer<'a> {
    mol: &'a Molecule,
    ranks: &'a [usize],
    orders: &'a [BondOrder],
    aromatic: &'a [bool],
    visited: Vec<bool>,
    /// Tree children as (atom, bond) in visit order.
    children: Vec<Vec<(usize, usize)>>,
    /// Ring-closure bonds opened at an atom, as (partner, bond).
    opens: Vec<Vec<(usize, usize)>>,
    /// Ring-closure bonds closed at an atom.
    closes: Vec<Vec<usize>>,
    out: String,
    /// Open ring bond -> digit.
    digits: HashMap<usize, u32>,
}

impl Writer<'_> {
    fn sorted_neighbors(&self, u: usize) -> Vec<(usize, usize)> {
        let mut nb = self.mol.neighbors(u).to_vec();
        nb.sort_by_key(|&(v, _)| self.ranks[v]);
        nb
    }

    fn build(&mut self, root: usize) {
        // iterative DFS so long chains do not overflow the stack
        let mut stack: Vec<(usize, usize, Vec<(usize, usize)>, usize)> = Vec::new();
        self.visited[root] = true;
        let nb = self.sorted_neighbors(root);
        stack.push((root, usize::MAX, nb, 0));
        let mut closed = vec![false; self.mol.bonds().len()];
        while let Some(frame) = stack.last_mut() {
            let (u, parent_bond) = (frame.0, frame.1);
            if frame.3 >= frame.2.len() {
                stack.pop();
                continue;
            }
            let (v, b) = frame.2[frame.3];
            frame.3 += 1;
            if b == parent_bond || closed[b] {
                continue;
            }
            if self.visited[v] {
                // back edge to an ancestor: v opens, u closes
                closed[b] = true;
                self.opens[v].push((u, b));
                self.closes[u].push(b);
            } else {
                closed[b] = true;
                self.visited[v] = true;
                self.children[u].push((v, b));
                let nb = self.sorted_neighbors(v);
                stack.push((v, b, nb, 0));
            }
        }
    }

    fn emit(&mut self, root: usize) {
        enum Step {
            Atom(usize, Option<usize>),
            Text(&'static str),
        }
        let mut stack = vec![Step::Atom(root, None)];
        while let Some(step) = stack.pop() {
            let (u, via) = match step {
                Step::Text(t) => {
                    self.out.push_str(t);
                    continue;
                }
                Step::Atom(u, via) => (u, via),
            };
            if let Some(b) = via {
                let (x, y) = (self.mol.bonds()[b].a, self.mol.bonds()[b].b);
                let sym = self.bond_symbol(b, x, y);
                self.out.push_str(sym);
            }
            self.write_atom(u);
            for b in self.closes[u].clone() {
                let d = self.digits.remove(&b).expect("ring bond was opened");
                push_digit(&mut self.out, d);
            }
            let mut opens = self.opens[u].clone();
            opens.sort_by_key(|&(p, _)| self.ranks[p]);
            for (p, b) in opens {
                let d = (1..).find(|d| !self.digits.values().any(|x| x == d)).unwrap();
                self.digits.insert(b, d);
                let sym = self.bond_symbol(b, u, p);
                self.out.push_str(sym);
                push_digit(&mut self.out, d);
            }
            let children = &self.children[u];
            let last = children.len();
            // push in reverse so the first child is written first
            for (k, &(v, b)) in children.iter().enumerate().rev() {
                if k + 1 < last {
                    stack.push(Step::Text(")"));
                    stack.push(Step::Atom(v, Some(b)));
                    stack.push(Step::Text("("));
                } else {
                    stack.push(Step::Atom(v, Some(b)));
                }
            }
        }
    }

    fn bond_symbol(&self, b: usize, x: usize, y: usize) -> &'static str {
        match self.orders[b] {
            BondOrder::Single if self.aromatic[x] && self.aromatic[y] => "-",
            BondOrder::Single => "",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => "",
        }
    }

    fn write_atom(&mut self, u: usize) {
        let atom = &self.mol.atoms()[u];
        let aromatic = self.aromatic[u];
        let sigma: u32 = self
            .mol
            .neighbors(u)
            .iter()
            .map(|&(_, b)| match self.orders[b] {
                BondOrder::Aromatic => 1,
                o => o.code() as u32,
            })
            .sum();
        let bare = atom.element.is_organic_subset()
            && atom.formal_charge == 0
            && atom.isotope.is_none()
            && bare_hydrogens(atom.element, aromatic, sigma) == Some(atom.implicit_h as u32);
        let symbol = if aromatic {
            atom.element.symbol().to_lowercase()
        } else {
            atom.element.symbol().to_string()
        };
        if bare {
            self.out.push_str(&symbol);
            return;
        }
        self.out.push('[');
        if let Some(iso) = atom.isotope {
            self.out.push_str(&iso.to_string());
        }
        self.out.push_str(&symbol);
        match atom.implicit_h {
            0 => {}
            1 => self.out.push('H'),
            h => {
                self.out.push('H');
                self.out.push_str(&h.to_string());
            }
        }
        match atom.formal_charge {
            0 => {}
            1 => self.out.push('+'),
            -1 => self.out.push('-'),
            q if q > 0 => self.out.push_str(&format!("+{q}")),
            q => self.out.push_str(&format!("-{}", -q)),
        }
        self.out.push(']');
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from_digit(d, 10).unwrap());
    } else {
        out.push_str(&format!("%{d}"));
    }
}
