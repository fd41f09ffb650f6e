//! SMILES reader.
//!
//! Supported: organic-subset atoms, bracket atoms with isotope, explicit H
//! count and charge, branches, ring closures (digits and `%nn`), lowercase
//! aromatic atoms, and stereo tokens (`@`, `@@`, `@TH1`..., `/`, `\`) which are
//! kept as opaque annotations. Atom classes, wildcards, quadruple bonds and
//! aromatic selenium/arsenic are reported as unsupported.

use std::collections::HashMap;

use super::aromaticity::{bare_hydrogens, kekulize, needs_pi, perceive};
use super::rings::ring_bond_flags;
use super::{Atom, Bond, BondOrder, Element, MolError, Molecule};

pub const MAX_SMILES_LEN: usize = 1000;

#[derive(Debug, Clone)]
struct RawAtom {
    element: Element,
    aromatic: bool,
    charge: i8,
    isotope: Option<u16>,
    explicit_h: Option<u8>,
    stereo: Option<String>,
    bracket: bool,
    pos: usize,
}

#[derive(Debug, Clone, Copy)]
struct RawBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
    direction: Option<char>,
}

#[derive(Debug, Clone, Copy)]
struct PendingBond {
    order: Option<BondOrder>,
    direction: Option<char>,
    pos: usize,
}

struct RingOpen {
    atom: usize,
    bond: Option<PendingBond>,
    pos: usize,
}

struct Reader<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    prev: Option<usize>,
    branches: Vec<(usize, usize)>, // (atom, atoms.len() when opened)
    pending: Option<PendingBond>,
    rings: HashMap<u32, RingOpen>,
}

fn syntax(pos: usize, msg: impl Into<String>) -> MolError {
    MolError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn unsupported(pos: usize, feature: impl Into<String>) -> MolError {
    MolError::Unsupported {
        pos,
        feature: feature.into(),
    }
}

/// Parses a SMILES string into a validated [`Molecule`].
pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    if text.is_empty() {
        return Err(syntax(0, "empty SMILES"));
    }
    if text.len() > MAX_SMILES_LEN {
        return Err(syntax(
            MAX_SMILES_LEN,
            format!("SMILES longer than {MAX_SMILES_LEN} characters"),
        ));
    }
    if let Some(p) = text.bytes().position(|c| !c.is_ascii_graphic()) {
        return Err(syntax(p, "unexpected character"));
    }
    let mut reader = Reader {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        branches: Vec::new(),
        pending: None,
        rings: HashMap::new(),
    };
    reader.read()?;
    build(reader.atoms, reader.bonds)
}

impl Reader<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.text.get(self.pos + offset).copied()
    }

    fn read(&mut self) -> Result<(), MolError> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(syntax(self.pos, "branch without a preceding atom"));
                    };
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "bond symbol before branch"));
                    }
                    if self.pos > 0 && self.text[self.pos - 1] == b'(' {
                        return Err(syntax(self.pos, "branch cannot start with a branch"));
                    }
                    self.branches.push((prev, self.atoms.len()));
                    self.pos += 1;
                }
                b')' => {
                    let Some((atom, mark)) = self.branches.pop() else {
                        return Err(syntax(self.pos, "unmatched ')'"));
                    };
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "dangling bond at end of branch"));
                    }
                    if self.atoms.len() == mark {
                        return Err(syntax(self.pos, "empty branch"));
                    }
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "two consecutive bond symbols"));
                    }
                    if self.prev.is_none() {
                        return Err(syntax(self.pos, "bond without a preceding atom"));
                    }
                    let (order, direction) = match c {
                        b'-' => (Some(BondOrder::Single), None),
                        b'=' => (Some(BondOrder::Double), None),
                        b'#' => (Some(BondOrder::Triple), None),
                        b':' => (Some(BondOrder::Aromatic), None),
                        _ => (None, Some(c as char)),
                    };
                    self.pending = Some(PendingBond {
                        order,
                        direction,
                        pos: self.pos,
                    });
                    self.pos += 1;
                }
                b'$' => return Err(unsupported(self.pos, "quadruple bond")),
                b'.' => {
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "bond symbol before '.'"));
                    }
                    if self.prev.is_none() {
                        return Err(syntax(self.pos, "'.' without a preceding atom"));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom)?;
                }
                b'*' => return Err(unsupported(self.pos, "wildcard atom")),
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom)?;
                }
            }
        }
        if let Some((_, _)) = self.branches.last() {
            return Err(syntax(self.text.len(), "unclosed branch"));
        }
        if let Some(p) = self.pending {
            return Err(syntax(p.pos, "dangling bond at end of input"));
        }
        if let Some((digit, open)) = self.rings.iter().min_by_key(|(d, _)| **d) {
            return Err(syntax(open.pos, format!("unclosed ring bond {digit}")));
        }
        if self.atoms.is_empty() {
            return Err(syntax(0, "no atoms"));
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: RawAtom) -> Result<(), MolError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        let pending = self.pending.take();
        if let Some(prev) = self.prev {
            self.bonds.push(RawBond {
                a: prev,
                b: idx,
                order: pending.and_then(|p| p.order),
                direction: pending.and_then(|p| p.direction),
            });
        } else if let Some(p) = pending {
            return Err(syntax(p.pos, "bond without a preceding atom"));
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), MolError> {
        let start = self.pos;
        let digit = if self.peek() == Some(b'%') {
            let d: Option<u32> = match (self.peek_at(1), self.peek_at(2)) {
                (Some(a), Some(b)) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    Some(((a - b'0') * 10 + (b - b'0')) as u32)
                }
                _ => None,
            };
            let Some(d) = d else {
                return Err(syntax(start, "'%' must be followed by two digits"));
            };
            self.pos += 3;
            d
        } else {
            let d = (self.peek().unwrap() - b'0') as u32;
            self.pos += 1;
            d
        };
        let Some(atom) = self.prev else {
            return Err(syntax(start, "ring closure without a preceding atom"));
        };
        let bond = self.pending.take();
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(digit, RingOpen { atom, bond, pos: start });
            }
            Some(open) => {
                if open.atom == atom {
                    return Err(syntax(start, format!("ring-closure digit {digit} reused on the same atom")));
                }
                if self
                    .bonds
                    .iter()
                    .any(|b| (b.a == open.atom && b.b == atom) || (b.a == atom && b.b == open.atom))
                {
                    return Err(syntax(start, format!("ring-closure digit {digit} duplicates an existing bond")));
                }
                let order = match (open.bond.and_then(|b| b.order), bond.and_then(|b| b.order)) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(syntax(start, format!("conflicting bond orders on ring closure {digit}")));
                    }
                    (x, y) => x.or(y),
                };
                let direction = open.bond.and_then(|b| b.direction).or(bond.and_then(|b| b.direction));
                self.bonds.push(RawBond {
                    a: open.atom,
                    b: atom,
                    order,
                    direction,
                });
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<RawAtom, MolError> {
        let pos = self.pos;
        let c = self.peek().unwrap();
        let (symbol, aromatic, len) = match (c, self.peek_at(1)) {
            (b'C', Some(b'l')) => ("Cl", false, 2),
            (b'B', Some(b'r')) => ("Br", false, 2),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                (std::str::from_utf8(&self.text[pos..pos + 1]).unwrap(), false, 1)
            }
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ if c.is_ascii_alphabetic() => {
                return Err(syntax(pos, format!("'{}' is not an organic-subset atom; use brackets", c as char)));
            }
            _ => return Err(syntax(pos, format!("unexpected character '{}'", c as char))),
        };
        self.pos += len;
        Ok(RawAtom {
            element: Element::from_symbol(symbol).unwrap(),
            aromatic,
            charge: 0,
            isotope: None,
            explicit_h: None,
            stereo: None,
            bracket: false,
            pos,
        })
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, MolError> {
        let open = self.pos;
        self.pos += 1;
        let isotope = match self.number() {
            Some(n) if n == 0 || n > 999 => return Err(syntax(open + 1, "isotope out of range")),
            Some(n) => Some(n as u16),
            None => None,
        };
        let sym_pos = self.pos;
        let (element, aromatic) = self.bracket_symbol()?;
        if aromatic && !element.is_aromatic_capable() {
            return Err(unsupported(sym_pos, format!("aromatic {}", element.symbol().to_lowercase())));
        }
        let mut stereo = None;
        if self.peek() == Some(b'@') {
            let start = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if let (Some(a), Some(b)) = (self.peek(), self.peek_at(1)) {
                if matches!(&[a, b], b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                    self.pos += 2;
                    if self.number().is_none() {
                        return Err(syntax(self.pos, "chirality class needs a number"));
                    }
                }
            }
            stereo = Some(String::from_utf8_lossy(&self.text[start..self.pos]).into_owned());
        }
        let mut explicit_h = None;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            let n = self.number().unwrap_or(1);
            if n > 9 {
                return Err(syntax(self.pos, "hydrogen count out of range"));
            }
            explicit_h = Some(n as u8);
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let s = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.number() {
                charge = s * n as i32;
            } else {
                charge = s;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += s;
                }
            }
            if charge.abs() > 8 {
                return Err(syntax(self.pos, "charge out of range"));
            }
        }
        if self.peek() == Some(b':') {
            return Err(unsupported(self.pos, "atom class"));
        }
        if self.peek() != Some(b']') {
            return Err(syntax(self.pos, "expected ']'"));
        }
        self.pos += 1;
        Ok(RawAtom {
            element,
            aromatic,
            charge: charge as i8,
            isotope,
            explicit_h,
            stereo,
            bracket: true,
            pos: open,
        })
    }

    fn bracket_symbol(&mut self) -> Result<(Element, bool), MolError> {
        let pos = self.pos;
        let Some(c) = self.peek() else {
            return Err(syntax(pos, "unterminated bracket atom"));
        };
        if c == b'*' {
            return Err(unsupported(pos, "wildcard atom"));
        }
        if c.is_ascii_lowercase() {
            let two = self.peek_at(1).filter(|d| d.is_ascii_lowercase());
            if let Some(d) = two {
                let s = [c.to_ascii_uppercase(), d];
                if matches!(&s, b"Se" | b"As" | b"Te") {
                    return Err(unsupported(pos, format!("aromatic {}{}", c as char, d as char)));
                }
            }
            let sym = (c.to_ascii_uppercase() as char).to_string();
            let element = Element::from_symbol(&sym)
                .filter(|e| e.is_aromatic_capable())
                .ok_or_else(|| syntax(pos, format!("unknown aromatic atom '{}'", c as char)))?;
            self.pos += 1;
            return Ok((element, true));
        }
        if !c.is_ascii_uppercase() {
            return Err(syntax(pos, "expected element symbol"));
        }
        if let Some(d) = self.peek_at(1).filter(|d| d.is_ascii_lowercase()) {
            let sym = format!("{}{}", c as char, d as char);
            if let Some(e) = Element::from_symbol(&sym) {
                self.pos += 2;
                return Ok((e, false));
            }
        }
        let sym = (c as char).to_string();
        let element =
            Element::from_symbol(&sym).ok_or_else(|| syntax(pos, format!("unknown element '{sym}'")))?;
        self.pos += 1;
        Ok((element, false))
    }
}

fn build(mut atoms: Vec<RawAtom>, mut bonds: Vec<RawBond>) -> Result<Molecule, MolError> {
    let folded = fold_hydrogens(&mut atoms, &mut bonds);

    let n = atoms.len();
    let pairs: Vec<(usize, usize)> = bonds.iter().map(|b| (b.a, b.b)).collect();
    let ring = ring_bond_flags(n, &pairs);
    let mut orders: Vec<BondOrder> = bonds
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let order = b
                .order
                .unwrap_or(if atoms[b.a].aromatic && atoms[b.b].aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                });
            if order == BondOrder::Aromatic && !ring[i] {
                BondOrder::Single
            } else {
                order
            }
        })
        .collect();
    for (i, b) in bonds.iter().enumerate() {
        if orders[i] == BondOrder::Aromatic && !(atoms[b.a].aromatic && atoms[b.b].aromatic) {
            // explicit ':' between non-aromatic atoms
            orders[i] = BondOrder::Single;
        }
    }

    let mut sigma = folded.clone();
    for (i, b) in bonds.iter().enumerate() {
        let o = match orders[i] {
            BondOrder::Aromatic => 1,
            o => o.code() as u32,
        };
        sigma[b.a] += o;
        sigma[b.b] += o;
    }
    let mut in_ring = vec![false; n];
    for (i, b) in bonds.iter().enumerate() {
        if ring[i] {
            in_ring[b.a] = true;
            in_ring[b.b] = true;
        }
    }

    let mut hydrogens = vec![0u8; n];
    let mut pi = vec![false; n];
    for (i, a) in atoms.iter().enumerate() {
        if a.aromatic && !in_ring[i] {
            return Err(MolError::Valence {
                atom: i,
                msg: format!("aromatic atom at position {} is not in a ring", a.pos),
            });
        }
        if a.bracket {
            let h = a.explicit_h.unwrap_or(0) as u32 + folded[i];
            hydrogens[i] = h as u8;
            pi[i] = a.aromatic && needs_pi(a.element, a.charge, sigma[i] - folded[i], h);
        } else {
            let h = bare_hydrogens(a.element, a.aromatic, sigma[i]).ok_or_else(|| MolError::Valence {
                atom: i,
                msg: format!("{} at position {} exceeds its allowed valence", a.element, a.pos),
            })?;
            hydrogens[i] = (h + folded[i]) as u8;
            pi[i] = a.aromatic && needs_pi(a.element, 0, sigma[i] - folded[i], h + folded[i]);
        }
    }

    let raw: Vec<Bond> = bonds
        .iter()
        .zip(&orders)
        .map(|(b, &order)| Bond {
            a: b.a,
            b: b.b,
            order,
            direction: b.direction,
        })
        .collect();
    let kekule = kekulize(n, &raw, &pi)?;

    let kekule_atoms: Vec<Atom> = atoms
        .iter()
        .zip(&hydrogens)
        .map(|(a, &h)| Atom {
            element: a.element,
            formal_charge: a.charge,
            implicit_h: h,
            isotope: a.isotope,
            aromatic: false,
            stereo: a.stereo.clone(),
        })
        .collect();
    let kekule_bonds: Vec<Bond> = raw
        .iter()
        .zip(&kekule)
        .map(|(b, &order)| Bond { order, ..b.clone() })
        .collect();
    let kmol = Molecule::assemble(kekule_atoms, kekule_bonds, None)?;
    kmol.check_valences()?;
    let (atoms, bonds) = perceive(&kmol);
    Molecule::assemble(atoms, bonds, None)
}

/// Removes plain `[H]` atoms bonded to a single heavy atom, returning the
/// number of hydrogens folded onto each remaining atom.
fn fold_hydrogens(atoms: &mut Vec<RawAtom>, bonds: &mut Vec<RawBond>) -> Vec<u32> {
    let n = atoms.len();
    let mut degree = vec![0usize; n];
    for b in bonds.iter() {
        degree[b.a] += 1;
        degree[b.b] += 1;
    }
    let mut remove = vec![false; n];
    let mut folded = vec![0u32; n];
    for b in bonds.iter() {
        for (h, heavy) in [(b.a, b.b), (b.b, b.a)] {
            let ha = &atoms[h];
            let heavy_atom = &atoms[heavy];
            if ha.element == Element::H
                && ha.isotope.is_none()
                && ha.charge == 0
                && ha.explicit_h.unwrap_or(0) == 0
                && ha.stereo.is_none()
                && degree[h] == 1
                && heavy_atom.element != Element::H
                && matches!(b.order, None | Some(BondOrder::Single))
                && !remove[h]
            {
                remove[h] = true;
                folded[heavy] += 1;
            }
        }
    }
    if !remove.iter().any(|&r| r) {
        return folded;
    }
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if !remove[i] {
            map[i] = next;
            next += 1;
        }
    }
    let kept_atoms: Vec<RawAtom> = atoms
        .iter()
        .enumerate()
        .filter(|(i, _)| !remove[*i])
        .map(|(_, a)| a.clone())
        .collect();
    let kept_folded = (0..n).filter(|&i| !remove[i]).map(|i| folded[i]).collect();
    let kept_bonds = bonds
        .iter()
        .filter(|b| !remove[b.a] && !remove[b.b])
        .map(|b| RawBond {
            a: map[b.a],
            b: map[b.b],
            ..*b
        })
        .collect();
    *atoms = kept_atoms;
    *bonds = kept_bonds;
    kept_folded
}
