//! Substructure patterns in a SMARTS subset.
//!
//! Atoms: `*`, `a`, `A`, organic symbols (uppercase aliphatic, lowercase
//! aromatic) or bracket expressions. Inside brackets the primitives are
//! element symbols, `#<n>` atomic number, `H<n>` total hydrogens, `X<n>` total
//! connections, `D<n>` explicit degree, `R` / `R<n>` ring membership (count of
//! SSSR rings), `r<n>` membership in an SSSR ring of size n, and charges
//! (`+`, `++`, `+2`, `-`, `-0`...). Operators by decreasing precedence: `!`,
//! `&` (or juxtaposition), `,`, `;`.
//!
//! Bonds: `-` `=` `#` `:` `~` `@`, combined with the same operators. An
//! unwritten bond matches single or aromatic. Branches and ring closures
//! follow SMILES rules; patterns must be connected.

use std::collections::HashSet;

use super::{BondOrder, Element, MolError, Molecule};

pub const MAX_PATTERN_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

impl<P> Expr<P> {
    fn eval(&self, f: &impl Fn(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(p),
            Expr::Not(e) => !e.eval(f),
            Expr::And(es) => es.iter().all(|e| e.eval(f)),
            Expr::Or(es) => es.iter().any(|e| e.eval(f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrimitive {
    Any,
    Aromatic(bool),
    /// Element with required aromaticity (symbol case).
    Element(Element, bool),
    AtomicNumber(u8),
    TotalH(u8),
    Connections(u8),
    Degree(u8),
    /// `R` with no count: any ring membership.
    InRing,
    RingCount(u8),
    RingSize(u8),
    Charge(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
    /// The unwritten default: single or aromatic.
    Implicit,
}

pub type AtomQuery = Expr<AtomPrimitive>;
pub type BondQuery = Expr<BondPrimitive>;

fn atom_matches(q: &AtomQuery, mol: &Molecule, i: usize) -> bool {
    let a = &mol.atoms()[i];
    q.eval(&|p: &AtomPrimitive| match *p {
        AtomPrimitive::Any => true,
        AtomPrimitive::Aromatic(ar) => a.aromatic == ar,
        AtomPrimitive::Element(e, ar) => a.element == e && a.aromatic == ar,
        AtomPrimitive::AtomicNumber(z) => a.element.atomic_number() == z,
        AtomPrimitive::TotalH(h) => total_h(mol, i) == h as usize,
        AtomPrimitive::Connections(x) => mol.degree(i) + a.implicit_h as usize == x as usize,
        AtomPrimitive::Degree(d) => mol.degree(i) == d as usize,
        AtomPrimitive::InRing => mol.is_ring_atom(i),
        AtomPrimitive::RingCount(0) => !mol.is_ring_atom(i),
        AtomPrimitive::RingCount(n) => mol.ring_membership(i) == n as usize,
        AtomPrimitive::RingSize(n) => mol.rings().iter().any(|r| r.len() == n as usize && r.contains(&i)),
        AtomPrimitive::Charge(q) => a.formal_charge == q,
    })
}

/// Implicit hydrogens plus explicit hydrogen neighbors.
fn total_h(mol: &Molecule, i: usize) -> usize {
    mol.atoms()[i].implicit_h as usize
        + mol
            .neighbors(i)
            .iter()
            .filter(|&&(v, _)| mol.atoms()[v].element == Element::H)
            .count()
}

fn bond_matches(q: &BondQuery, mol: &Molecule, b: usize) -> bool {
    let order = mol.bonds()[b].order;
    q.eval(&|p: &BondPrimitive| match *p {
        BondPrimitive::Single => order == BondOrder::Single,
        BondPrimitive::Double => order == BondOrder::Double,
        BondPrimitive::Triple => order == BondOrder::Triple,
        BondPrimitive::Aromatic => order == BondOrder::Aromatic,
        BondPrimitive::Any => true,
        BondPrimitive::Ring => mol.is_ring_bond(b),
        BondPrimitive::Implicit => matches!(order, BondOrder::Single | BondOrder::Aromatic),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    atoms: Vec<AtomQuery>,
    bonds: Vec<(usize, usize, BondQuery)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    order: Vec<(usize, Option<usize>)>,
    source: String,
}

fn syntax(pos: usize, msg: impl Into<String>) -> MolError {
    MolError::Syntax {
        pos,
        msg: msg.into(),
    }
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, MolError> {
        let mut p = PatternReader {
            s: text.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
        };
        p.read()?;
        Pattern::build(p.atoms, p.bonds, text.to_string())
    }

    /// Builds a pattern from explicit atom and bond queries.
    pub fn from_parts(
        atoms: Vec<AtomQuery>,
        bonds: Vec<(usize, usize, BondQuery)>,
    ) -> Result<Pattern, MolError> {
        Pattern::build(atoms, bonds, String::new())
    }

    fn build(
        atoms: Vec<AtomQuery>,
        bonds: Vec<(usize, usize, BondQuery)>,
        source: String,
    ) -> Result<Pattern, MolError> {
        let n = atoms.len();
        if n == 0 {
            return Err(syntax(0, "empty pattern"));
        }
        if n > MAX_PATTERN_ATOMS {
            return Err(MolError::PatternTooLarge {
                atoms: n,
                limit: MAX_PATTERN_ATOMS,
            });
        }
        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (i, (a, b, _)) in bonds.iter().enumerate() {
            let (a, b) = (*a, *b);
            if a >= n || b >= n || a == b || !seen.insert((a.min(b), a.max(b))) {
                return Err(MolError::Graph(format!("invalid pattern bond {a}-{b}")));
            }
            adjacency[a].push((b, i));
            adjacency[b].push((a, i));
        }
        let order = bfs_order(&adjacency);
        if order.len() != n {
            return Err(MolError::Graph("pattern is not connected".into()));
        }
        Ok(Pattern {
            atoms,
            bonds,
            adjacency,
            order,
            source,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Whether some embedding maps pattern atom 0 onto `atom`.
    pub fn matches_at(&self, mol: &Molecule, atom: usize) -> bool {
        if !atom_matches(&self.atoms[0], mol, atom) {
            return false;
        }
        let mut search = Search::new(mol, self, true);
        search.extend(0, atom);
        !search.found.is_empty()
    }

    /// Number of distinct matched atom sets.
    pub fn count(&self, mol: &Molecule) -> usize {
        match_substructure(mol, self).map_or(0, |m| m.len())
    }
}

fn bfs_order(adjacency: &[Vec<(usize, usize)>]) -> Vec<(usize, Option<usize>)> {
    let mut seen = vec![false; adjacency.len()];
    let mut order = vec![(0, None)];
    seen[0] = true;
    let mut k = 0;
    while k < order.len() {
        let u = order[k].0;
        k += 1;
        let mut nb: Vec<usize> = adjacency[u].iter().map(|&(v, _)| v).collect();
        nb.sort_unstable();
        for v in nb {
            if !seen[v] {
                seen[v] = true;
                order.push((v, Some(u)));
            }
        }
    }
    order
}

/// All embeddings of `pattern` in `mol`, one per distinct matched atom set.
/// Each embedding lists the molecule atom for every pattern atom.
pub fn match_substructure(mol: &Molecule, pattern: &Pattern) -> Result<Vec<Vec<usize>>, MolError> {
    if pattern.atoms.len() > MAX_PATTERN_ATOMS {
        return Err(MolError::PatternTooLarge {
            atoms: pattern.atoms.len(),
            limit: MAX_PATTERN_ATOMS,
        });
    }
    let mut state = Search::new(mol, pattern, false);
    for start in 0..mol.atom_count() {
        state.extend(0, start);
    }
    Ok(state.found)
}

struct Search<'a> {
    mol: &'a Molecule,
    pattern: &'a Pattern,
    map: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
    seen_sets: HashSet<Vec<usize>>,
    first_only: bool,
}

impl<'a> Search<'a> {
    fn new(mol: &'a Molecule, pattern: &'a Pattern, first_only: bool) -> Search<'a> {
        Search {
            mol,
            pattern,
            map: vec![usize::MAX; pattern.atoms.len()],
            used: vec![false; mol.atom_count()],
            found: Vec::new(),
            seen_sets: HashSet::new(),
            first_only,
        }
    }

    /// Tries to map pattern atom `order[depth]` onto molecule atom `target`.
    fn extend(&mut self, depth: usize, target: usize) {
        if self.first_only && !self.found.is_empty() {
            return;
        }
        let (p, _) = self.pattern.order[depth];
        if self.used[target] || !atom_matches(&self.pattern.atoms[p], self.mol, target) {
            return;
        }
        for &(q, bi) in &self.pattern.adjacency[p] {
            let mq = self.map[q];
            if mq == usize::MAX {
                continue;
            }
            match self.mol.bond_index(target, mq) {
                Some(b) if bond_matches(&self.pattern.bonds[bi].2, self.mol, b) => {}
                _ => return,
            }
        }
        self.map[p] = target;
        self.used[target] = true;
        if depth + 1 == self.pattern.order.len() {
            let mut set = self.map.clone();
            set.sort_unstable();
            if self.seen_sets.insert(set) {
                self.found.push(self.map.clone());
            }
        } else {
            let (_, parent) = self.pattern.order[depth + 1];
            let anchor = self.map[parent.expect("non-root atoms have a BFS parent")];
            for k in 0..self.mol.neighbors(anchor).len() {
                let c = self.mol.neighbors(anchor)[k].0;
                self.extend(depth + 1, c);
            }
        }
        self.map[p] = usize::MAX;
        self.used[target] = false;
    }
}

struct PatternReader<'a> {
    s: &'a [u8],
    pos: usize,
    atoms: Vec<AtomQuery>,
    bonds: Vec<(usize, usize, BondQuery)>,
}

fn combine<P>(mut parts: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}

impl PatternReader<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.s.get(self.pos + k).copied()
    }

    fn read(&mut self) -> Result<(), MolError> {
        let mut prev: Option<usize> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut pending: Option<BondQuery> = None;
        let mut rings: std::collections::HashMap<u32, (usize, Option<BondQuery>)> = Default::default();
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    branches.push(prev.ok_or_else(|| syntax(self.pos, "branch without atom"))?);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(syntax(self.pos, "dangling bond"));
                    }
                    prev = Some(branches.pop().ok_or_else(|| syntax(self.pos, "unmatched ')'"))?);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' => {
                    if pending.is_some() {
                        return Err(syntax(self.pos, "two consecutive bond expressions"));
                    }
                    pending = Some(self.bond_expr()?);
                }
                b'0'..=b'9' | b'%' => {
                    let d = if c == b'%' {
                        self.pos += 1;
                        let start = self.pos;
                        self.pos = (self.pos + 2).min(self.s.len());
                        std::str::from_utf8(&self.s[start..self.pos])
                            .ok()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| syntax(start, "bad ring number"))?
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let atom = prev.ok_or_else(|| syntax(self.pos, "ring closure without atom"))?;
                    if let Some((other, q)) = rings.remove(&d) {
                        let q = q.or(pending.take()).unwrap_or(Expr::Prim(BondPrimitive::Implicit));
                        self.bonds.push((other, atom, q));
                    } else {
                        rings.insert(d, (atom, pending.take()));
                    }
                }
                b'.' => return Err(syntax(self.pos, "patterns must be connected")),
                _ => {
                    let q = self.atom()?;
                    let idx = self.atoms.len();
                    self.atoms.push(q);
                    if let Some(p) = prev {
                        let bq = pending.take().unwrap_or(Expr::Prim(BondPrimitive::Implicit));
                        self.bonds.push((p, idx, bq));
                    } else if pending.is_some() {
                        return Err(syntax(self.pos, "bond without preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if !branches.is_empty() || !rings.is_empty() || pending.is_some() {
            return Err(syntax(self.s.len(), "incomplete pattern"));
        }
        Ok(())
    }

    fn bond_expr(&mut self) -> Result<BondQuery, MolError> {
        let mut low = Vec::new();
        loop {
            let mut ors = Vec::new();
            loop {
                let mut ands = Vec::new();
                while let Some(u) = self.bond_unary()? {
                    ands.push(u);
                    if self.peek() == Some(b'&') {
                        self.pos += 1;
                    }
                }
                if ands.is_empty() {
                    return Err(syntax(self.pos, "empty bond expression"));
                }
                ors.push(combine(ands, Expr::And));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            low.push(combine(ors, Expr::Or));
            if self.peek() == Some(b';') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(combine(low, Expr::And))
    }

    fn bond_unary(&mut self) -> Result<Option<BondQuery>, MolError> {
        let mut negate = false;
        while self.peek() == Some(b'!') {
            negate = !negate;
            self.pos += 1;
        }
        let prim = match self.peek() {
            Some(b'-') => BondPrimitive::Single,
            Some(b'=') => BondPrimitive::Double,
            Some(b'#') => BondPrimitive::Triple,
            Some(b':') => BondPrimitive::Aromatic,
            Some(b'~') => BondPrimitive::Any,
            Some(b'@') => BondPrimitive::Ring,
            _ if negate => return Err(syntax(self.pos, "'!' without operand")),
            _ => return Ok(None),
        };
        self.pos += 1;
        let e = Expr::Prim(prim);
        Ok(Some(if negate { Expr::Not(Box::new(e)) } else { e }))
    }

    fn atom(&mut self) -> Result<AtomQuery, MolError> {
        let pos = self.pos;
        let c = self.peek().unwrap();
        if c == b'[' {
            self.pos += 1;
            let q = self.atom_expr()?;
            if self.peek() != Some(b']') {
                return Err(syntax(self.pos, "expected ']'"));
            }
            self.pos += 1;
            return Ok(q);
        }
        let prim = match (c, self.peek_at(1)) {
            (b'*', _) => AtomPrimitive::Any,
            (b'a', _) => AtomPrimitive::Aromatic(true),
            (b'A', _) => AtomPrimitive::Aromatic(false),
            (b'C', Some(b'l')) => {
                self.pos += 1;
                AtomPrimitive::Element(Element::CL, false)
            }
            (b'B', Some(b'r')) => {
                self.pos += 1;
                AtomPrimitive::Element(Element::BR, false)
            }
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                AtomPrimitive::Element(Element::from_symbol(&(c as char).to_string()).unwrap(), false)
            }
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => AtomPrimitive::Element(
                Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).unwrap(),
                true,
            ),
            _ => return Err(syntax(pos, format!("unexpected '{}'", c as char))),
        };
        self.pos += 1;
        Ok(Expr::Prim(prim))
    }

    fn atom_expr(&mut self) -> Result<AtomQuery, MolError> {
        let mut low = Vec::new();
        loop {
            let mut ors = Vec::new();
            loop {
                let mut ands = Vec::new();
                while let Some(u) = self.atom_unary()? {
                    ands.push(u);
                    if self.peek() == Some(b'&') {
                        self.pos += 1;
                    }
                }
                if ands.is_empty() {
                    return Err(syntax(self.pos, "empty atom expression"));
                }
                ors.push(combine(ands, Expr::And));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            low.push(combine(ors, Expr::Or));
            if self.peek() == Some(b';') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(combine(low, Expr::And))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }

    fn atom_unary(&mut self) -> Result<Option<AtomQuery>, MolError> {
        let mut negate = false;
        while self.peek() == Some(b'!') {
            negate = !negate;
            self.pos += 1;
        }
        let Some(prim) = self.atom_primitive()? else {
            if negate {
                return Err(syntax(self.pos, "'!' without operand"));
            }
            return Ok(None);
        };
        let e = Expr::Prim(prim);
        Ok(Some(if negate { Expr::Not(Box::new(e)) } else { e }))
    }

    fn atom_primitive(&mut self) -> Result<Option<AtomPrimitive>, MolError> {
        let pos = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let count = |r: &mut Self, default: u32| -> Result<u8, MolError> {
            let n = r.number().unwrap_or(default);
            u8::try_from(n).map_err(|_| syntax(pos, "count out of range"))
        };
        let prim = match c {
            b'*' => {
                self.pos += 1;
                AtomPrimitive::Any
            }
            b'a' if !self.peek_at(1).is_some_and(|d| d == b's') => {
                self.pos += 1;
                AtomPrimitive::Aromatic(true)
            }
            b'A' if !self.peek_at(1).is_some_and(|d| d.is_ascii_lowercase()) => {
                self.pos += 1;
                AtomPrimitive::Aromatic(false)
            }
            b'#' => {
                self.pos += 1;
                let z = self.number().ok_or_else(|| syntax(self.pos, "expected atomic number"))?;
                AtomPrimitive::AtomicNumber(u8::try_from(z).map_err(|_| syntax(pos, "bad atomic number"))?)
            }
            b'H' => {
                self.pos += 1;
                AtomPrimitive::TotalH(count(self, 1)?)
            }
            b'X' => {
                self.pos += 1;
                AtomPrimitive::Connections(count(self, 1)?)
            }
            b'D' => {
                self.pos += 1;
                AtomPrimitive::Degree(count(self, 1)?)
            }
            b'R' => {
                self.pos += 1;
                match self.number() {
                    None => AtomPrimitive::InRing,
                    Some(n) => AtomPrimitive::RingCount(n.min(255) as u8),
                }
            }
            b'r' => {
                self.pos += 1;
                let n = self.number().ok_or_else(|| syntax(self.pos, "r needs a ring size"))?;
                AtomPrimitive::RingSize(n.min(255) as u8)
            }
            b'+' | b'-' => {
                let s: i32 = if c == b'+' { 1 } else { -1 };
                self.pos += 1;
                let q = match self.number() {
                    Some(n) => s * n as i32,
                    None => {
                        let mut q = s;
                        while self.peek() == Some(c) {
                            self.pos += 1;
                            q += s;
                        }
                        q
                    }
                };
                AtomPrimitive::Charge(q as i8)
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                self.pos += 1;
                let e = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).unwrap();
                AtomPrimitive::Element(e, true)
            }
            _ if c.is_ascii_uppercase() => {
                let two = self
                    .peek_at(1)
                    .filter(|d| d.is_ascii_lowercase())
                    .and_then(|d| Element::from_symbol(&format!("{}{}", c as char, d as char)));
                if let Some(e) = two {
                    self.pos += 2;
                    AtomPrimitive::Element(e, false)
                } else {
                    let e = Element::from_symbol(&(c as char).to_string())
                        .ok_or_else(|| syntax(pos, format!("unknown element '{}'", c as char)))?;
                    self.pos += 1;
                    AtomPrimitive::Element(e, false)
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(prim))
    }
}
