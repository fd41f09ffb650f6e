//! Fixed-column PDB coordinate records.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::molgraph::Element;
use crate::Scalar;

use super::StructError;

const WATER: [&str; 6] = ["HOH", "WAT", "H2O", "DOD", "TIP", "SOL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordKind {
    Atom,
    Hetatm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProteinAtom<T> {
    pub kind: RecordKind,
    pub serial: u32,
    /// Atom name with column padding removed, e.g. "CA", "OG".
    pub name: String,
    pub res_name: String,
    pub chain: char,
    pub res_seq: i32,
    pub icode: Option<char>,
    pub pos: Vec3<T>,
    pub occupancy: T,
    pub b_factor: T,
    pub element: Element,
}

impl<T> ProteinAtom<T> {
    pub fn is_water(&self) -> bool {
        WATER.contains(&self.res_name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residue {
    pub chain: char,
    pub seq: i32,
    pub icode: Option<char>,
    pub name: String,
    pub code: char,
    /// Indices into [`ProteinStructure::atoms`].
    pub atoms: Vec<usize>,
}

impl Residue {
    /// `"<seq>-<one-letter>"`, e.g. "105-S".
    pub fn label(&self) -> String {
        residue_label(self.seq, self.code)
    }
}

pub fn residue_label(seq: i32, code: char) -> String {
    format!("{seq}-{code}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProteinStructure<T> {
    pub atoms: Vec<ProteinAtom<T>>,
    /// In order of first appearance; every atom belongs to exactly one.
    pub residues: Vec<Residue>,
    /// Residue index of every atom.
    pub atom_residue: Vec<usize>,
}

impl<T: Scalar> ProteinStructure<T> {
    pub fn from_atoms(atoms: Vec<ProteinAtom<T>>) -> Result<ProteinStructure<T>, StructError> {
        if atoms.is_empty() {
            return Err(StructError::EmptyStructure);
        }
        let mut index: HashMap<(char, i32, Option<char>), usize> = HashMap::new();
        let mut residues: Vec<Residue> = Vec::new();
        let mut atom_residue = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            let r = *index.entry((a.chain, a.res_seq, a.icode)).or_insert_with(|| {
                residues.push(Residue {
                    chain: a.chain,
                    seq: a.res_seq,
                    icode: a.icode,
                    name: a.res_name.clone(),
                    code: one_letter(&a.res_name),
                    atoms: Vec::new(),
                });
                residues.len() - 1
            });
            residues[r].atoms.push(i);
            atom_residue.push(r);
        }
        Ok(ProteinStructure {
            atoms,
            residues,
            atom_residue,
        })
    }

    pub fn residue(&self, chain: char, seq: i32) -> Option<&Residue> {
        self.residues.iter().find(|r| r.chain == chain && r.seq == seq)
    }

    pub fn residue_of(&self, atom: usize) -> &Residue {
        &self.residues[self.atom_residue[atom]]
    }

    pub fn chains(&self) -> Vec<char> {
        let mut c: Vec<char> = self.residues.iter().map(|r| r.chain).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Which records survive parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PdbOptions {
    pub drop_hetero: bool,
    pub drop_water: bool,
    /// Keep only this chain.
    pub chain: Option<char>,
}

impl PdbOptions {
    /// ATOM records of one chain: the isolated-receptor view.
    pub fn receptor(chain: Option<char>) -> PdbOptions {
        PdbOptions {
            drop_hetero: true,
            drop_water: true,
            chain,
        }
    }
}

/// Three-letter residue name to one-letter code; unknown names map to 'X'.
pub fn one_letter(res_name: &str) -> char {
    match res_name {
        "ALA" => 'A',
        "ARG" => 'R',
        "ASN" => 'N',
        "ASP" | "ASH" => 'D',
        "CYS" | "CYX" | "CYM" => 'C',
        "GLN" => 'Q',
        "GLU" | "GLH" => 'E',
        "GLY" => 'G',
        "HIS" | "HID" | "HIE" | "HIP" | "HSD" | "HSE" | "HSP" => 'H',
        "ILE" => 'I',
        "LEU" => 'L',
        "LYS" | "LYN" => 'K',
        "MET" | "MSE" => 'M',
        "PHE" => 'F',
        "PRO" => 'P',
        "SER" => 'S',
        "THR" => 'T',
        "TRP" => 'W',
        "TYR" => 'Y',
        "VAL" => 'V',
        "SEC" => 'U',
        "PYL" => 'O',
        "ASX" => 'B',
        "GLX" => 'Z',
        _ => 'X',
    }
}

/// 1-based inclusive column range, trimmed; empty when the line is short.
pub(crate) fn cols(line: &str, from: usize, to: usize) -> &str {
    let end = to.min(line.len());
    if from > end {
        return "";
    }
    line[from - 1..end].trim()
}

fn normalize_symbol(s: &str) -> String {
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i == 0 {
            out.extend(ch.to_uppercase());
        } else {
            out.extend(ch.to_lowercase());
        }
    }
    out
}

/// Element from columns 77-78, else from the atom-name columns. A name
/// filling column 13 is read as a two-letter element only on HETATM records,
/// since protein hydrogens such as "HG21" also start there.
fn element_of(line: &str, kind: RecordKind) -> Option<Element> {
    let sym = cols(line, 77, 78);
    if !sym.is_empty() {
        return Element::from_symbol(&normalize_symbol(sym.trim_matches(|c: char| c.is_ascii_digit() || c == '+' || c == '-')));
    }
    let raw = if line.len() >= 16 { &line[12..16] } else { "" };
    let first = raw.chars().next().unwrap_or(' ');
    if first == ' ' || first.is_ascii_digit() {
        let c = raw.chars().nth(1)?;
        Element::from_symbol(&c.to_string())
    } else if kind == RecordKind::Atom {
        Element::from_symbol(&first.to_ascii_uppercase().to_string())
    } else {
        let two = normalize_symbol(&raw[..2]);
        Element::from_symbol(&two).or_else(|| Element::from_symbol(&first.to_ascii_uppercase().to_string()))
    }
}

pub(crate) fn coordinate<T: Scalar>(line: &str, lineno: usize, from: usize, to: usize, what: &str) -> Result<T, StructError> {
    let s = cols(line, from, to);
    let v: f64 = s
        .parse()
        .map_err(|_| StructError::malformed(lineno, format!("{what} '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(StructError::malformed(lineno, format!("{what} is not finite")));
    }
    Ok(T::lit(v))
}

pub(crate) fn position<T: Scalar>(line: &str, lineno: usize) -> Result<Vec3<T>, StructError> {
    if line.len() < 54 {
        return Err(StructError::malformed(lineno, format!("record has {} columns, coordinates need 54", line.len())));
    }
    Ok(Vec3::new(
        coordinate(line, lineno, 31, 38, "x")?,
        coordinate(line, lineno, 39, 46, "y")?,
        coordinate(line, lineno, 47, 54, "z")?,
    ))
}

fn optional<T: Scalar>(line: &str, lineno: usize, from: usize, to: usize, what: &str, default: f64) -> Result<T, StructError> {
    if cols(line, from, to).is_empty() {
        Ok(T::lit(default))
    } else {
        coordinate(line, lineno, from, to, what)
    }
}

fn parse_atom<T: Scalar>(line: &str, lineno: usize, kind: RecordKind) -> Result<ProteinAtom<T>, StructError> {
    let pos = position(line, lineno)?;
    let serial = cols(line, 7, 11);
    let serial = serial
        .parse()
        .map_err(|_| StructError::malformed(lineno, format!("serial '{serial}' is not a number")))?;
    let res_seq = cols(line, 23, 26);
    let res_seq = res_seq
        .parse()
        .map_err(|_| StructError::malformed(lineno, format!("residue number '{res_seq}' is not a number")))?;
    let name = cols(line, 13, 16);
    if name.is_empty() {
        return Err(StructError::malformed(lineno, "atom name is blank"));
    }
    let res_name = cols(line, 18, 20);
    if res_name.is_empty() {
        return Err(StructError::malformed(lineno, "residue name is blank"));
    }
    let element = element_of(line, kind).ok_or_else(|| StructError::malformed(lineno, "unknown element"))?;
    let char_at = |c: usize| line[c - 1..c].chars().next().filter(|ch| *ch != ' ');
    Ok(ProteinAtom {
        kind,
        serial,
        name: name.to_string(),
        res_name: res_name.to_string(),
        chain: char_at(22).unwrap_or(' '),
        res_seq,
        icode: char_at(27),
        pos,
        occupancy: optional(line, lineno, 55, 60, "occupancy", 1.0)?,
        b_factor: optional(line, lineno, 61, 66, "temperature factor", 0.0)?,
        element,
    })
}

/// ATOM/HETATM records of the first model. Alternate locations other than
/// blank or 'A' are dropped.
pub fn parse_pdb<T: Scalar>(text: &str, opts: &PdbOptions) -> Result<ProteinStructure<T>, StructError> {
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        let kind = if line.starts_with("ATOM") {
            RecordKind::Atom
        } else if line.starts_with("HETATM") {
            RecordKind::Hetatm
        } else if line.starts_with("ENDMDL") {
            break;
        } else {
            continue;
        };
        if !line.is_ascii() {
            return Err(StructError::malformed(lineno, "non-ASCII characters in a fixed-column record"));
        }
        if line.len() < 54 {
            return Err(StructError::malformed(lineno, format!("record has {} columns, coordinates need 54", line.len())));
        }
        let alt = &line[16..17];
        if alt != " " && alt != "A" {
            continue;
        }
        let atom: ProteinAtom<T> = parse_atom(line, lineno, kind)?;
        if (opts.drop_hetero && kind == RecordKind::Hetatm)
            || (opts.drop_water && atom.is_water())
            || opts.chain.is_some_and(|c| c != atom.chain)
        {
            continue;
        }
        atoms.push(atom);
    }
    ProteinStructure::from_atoms(atoms)
}

/// ATOM/HETATM records followed by END, in the standard column layout.
pub fn write_pdb<T: Scalar>(s: &ProteinStructure<T>) -> String {
    let mut out = String::new();
    for a in &s.atoms {
        let record = match a.kind {
            RecordKind::Atom => "ATOM",
            RecordKind::Hetatm => "HETATM",
        };
        let sym = a.element.symbol();
        let name = if a.name.len() < 4 && sym.len() == 1 {
            format!(" {:<3}", a.name)
        } else {
            format!("{:<4}", a.name)
        };
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        writeln!(
            out,
            "{record:<6}{:>5} {name} {:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            a.serial % 100_000,
            a.res_name,
            a.chain,
            a.res_seq,
            a.icode.unwrap_or(' '),
            f(a.pos.x),
            f(a.pos.y),
            f(a.pos.z),
            f(a.occupancy),
            f(a.b_factor),
            sym.to_uppercase(),
        )
        .unwrap();
    }
    out.push_str("END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SER_CA: &str = "ATOM    100  CA  SER A 105      10.000  20.000  30.000  1.00 25.00           C";

    #[test]
    fn single_serine_alpha_carbon() {
        let s: ProteinStructure<f64> = parse_pdb(SER_CA, &PdbOptions::default()).unwrap();
        assert_eq!(s.atoms.len(), 1);
        let a = &s.atoms[0];
        assert_eq!((a.name.as_str(), a.res_name.as_str(), a.chain, a.res_seq), ("CA", "SER", 'A', 105));
        assert_eq!(a.pos, Vec3::new(10.0, 20.0, 30.0));
        assert_eq!(a.element, Element::C);
        assert_eq!(s.residues[0].code, 'S');
        assert_eq!(s.residues[0].label(), "105-S");
    }

    #[test]
    fn water_only_file_is_empty_after_filtering() {
        let text = "HETATM    1  O   HOH A 301       1.000   2.000   3.000  1.00  0.00           O\n\
                    HETATM    2  O   HOH A 302       4.000   5.000   6.000  1.00  0.00           O\n";
        assert!(matches!(
            parse_pdb::<f64>(text, &PdbOptions::receptor(None)),
            Err(StructError::EmptyStructure)
        ));
        let kept: ProteinStructure<f64> = parse_pdb(text, &PdbOptions::default()).unwrap();
        assert_eq!(kept.atoms.len(), 2);
        let no_water = PdbOptions {
            drop_water: true,
            ..PdbOptions::default()
        };
        assert!(parse_pdb::<f64>(text, &no_water).is_err());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = format!("REMARK test\n{}\nATOM    101  CB  SER A 105      10.000  2x.000  30.000\n", SER_CA);
        match parse_pdb::<f64>(&text, &PdbOptions::default()) {
            Err(StructError::MalformedRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_pdb::<f64>("ATOM      1  N   GLY A   1", &PdbOptions::default()) {
            Err(StructError::MalformedRecord { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn element_falls_back_to_atom_name() {
        let line = "HETATM    5 FE   HEM A 200       0.000   0.000   0.000";
        let s: ProteinStructure<f64> = parse_pdb(line, &PdbOptions::default()).unwrap();
        assert_eq!(s.atoms[0].element.symbol(), "Fe");
        let line = "ATOM      2  OG  SER A 105       0.000   0.000   0.000";
        let s: ProteinStructure<f64> = parse_pdb(line, &PdbOptions::default()).unwrap();
        assert_eq!(s.atoms[0].element, Element::O);
    }

    #[test]
    fn chain_selection_and_altlocs() {
        let text = "ATOM      1  CA AGLY A   1       0.000   0.000   0.000  0.50  0.00           C\n\
                    ATOM      2  CA BGLY A   1       0.100   0.000   0.000  0.50  0.00           C\n\
                    ATOM      3  CA  GLY B   1       0.000   0.000   0.000  1.00  0.00           C\n";
        let s: ProteinStructure<f64> = parse_pdb(text, &PdbOptions::receptor(Some('A'))).unwrap();
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].serial, 1);
        let all: ProteinStructure<f64> = parse_pdb(text, &PdbOptions::default()).unwrap();
        assert_eq!(all.chains(), ['A', 'B']);
    }

    #[test]
    fn write_then_parse() {
        let s: ProteinStructure<f64> = parse_pdb(SER_CA, &PdbOptions::default()).unwrap();
        let text = write_pdb(&s);
        assert!(text.starts_with(&SER_CA[..54]), "{text}");
        assert_eq!(parse_pdb::<f64>(&text, &PdbOptions::default()).unwrap(), s);
    }

    #[test]
    fn one_letter_codes() {
        assert_eq!(one_letter("GLY"), 'G');
        assert_eq!(one_letter("MSE"), 'M');
        assert_eq!(one_letter("ZZZ"), 'X');
    }
}
