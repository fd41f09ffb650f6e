//! Partial equalization of orbital electronegativity.
//!
//! Each atom has χ(q) = a + b·q + c·q². In iteration k (from 1) every bond
//! moves charge from its less to its more electronegative atom:
//! Δq = (χ_hi − χ_lo) / χ⁺_lo · 0.5^k, where χ⁺ = a + b + c is the donor's
//! electronegativity as a cation (20.02 for hydrogen). All transfers of an
//! iteration use the charges from its start, so every bond conserves charge.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::data::{parse_f64, DataError, DataSource, Table};
use crate::molgraph::{BondOrder, Element, Molecule};
use crate::Scalar;

use super::StructError;

pub const MAX_ITERATIONS: usize = 8;
pub const CONVERGENCE: f64 = 1e-4;
/// Cation electronegativity used for hydrogen instead of a + b + c.
pub const HYDROGEN_CATION_CHI: f64 = 20.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hybridization {
    Sp,
    Sp2,
    Sp3,
}

impl Hybridization {
    fn parse(s: &str) -> Option<Hybridization> {
        match s {
            "sp" => Some(Hybridization::Sp),
            "sp2" => Some(Hybridization::Sp2),
            "sp3" => Some(Hybridization::Sp3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasteigerParams<T> {
    rows: Vec<(Element, Hybridization, ChiParams<T>)>,
    pub version: u32,
}

impl<T: Scalar> GasteigerParams<T> {
    pub fn load(src: &DataSource) -> Result<GasteigerParams<T>, DataError> {
        let text = src.read("gasteiger.tsv")?;
        let t = Table::parse("gasteiger", &text, 5)?;
        let rows = t
            .rows
            .iter()
            .map(|(line, f)| {
                let e = Element::from_symbol(f[0])
                    .ok_or_else(|| DataError::parse("gasteiger", *line, format!("unknown element '{}'", f[0])))?;
                let h = Hybridization::parse(f[1])
                    .ok_or_else(|| DataError::parse("gasteiger", *line, format!("unknown hybridization '{}'", f[1])))?;
                let v = |j: usize| parse_f64("gasteiger", *line, f[j]).map(T::lit);
                Ok((e, h, ChiParams { a: v(2)?, b: v(3)?, c: v(4)? }))
            })
            .collect::<Result<_, DataError>>()?;
        Ok(GasteigerParams { rows, version: t.version })
    }

    /// The row for `h`, else the next less unsaturated one (sp, sp2, sp3).
    pub fn lookup(&self, e: Element, h: Hybridization) -> Option<ChiParams<T>> {
        [Hybridization::Sp, Hybridization::Sp2, Hybridization::Sp3]
            .into_iter()
            .filter(|&x| x >= h)
            .find_map(|x| self.rows.iter().find(|r| r.0 == e && r.1 == x).map(|r| r.2))
    }
}

pub fn embedded_gasteiger_params() -> &'static GasteigerParams<f64> {
    static P: OnceLock<GasteigerParams<f64>> = OnceLock::new();
    P.get_or_init(|| GasteigerParams::load(&DataSource::Embedded).expect("embedded Gasteiger table is valid"))
}

pub fn hybridization(m: &Molecule, atom: usize) -> Hybridization {
    let (mut doubles, mut triple, mut aromatic) = (0, false, false);
    for &(_, b) in m.neighbors(atom) {
        match m.bonds()[b].order {
            BondOrder::Double => doubles += 1,
            BondOrder::Triple => triple = true,
            BondOrder::Aromatic => aromatic = true,
            BondOrder::Single => {}
        }
    }
    if triple || doubles >= 2 {
        Hybridization::Sp
    } else if doubles == 1 || aromatic || m.atoms()[atom].aromatic {
        Hybridization::Sp2
    } else {
        Hybridization::Sp3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeAssignment<T> {
    /// Indexed like [`Molecule::with_explicit_hydrogens`]: the input's atoms
    /// first, then one entry per added hydrogen.
    pub charges: Vec<T>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Largest single-atom charge change of each iteration.
    pub max_change: Vec<T>,
}

impl<T: Scalar> ChargeAssignment<T> {
    pub fn total(&self) -> T {
        self.charges.iter().copied().sum()
    }
}

pub fn gasteiger_charges<T: Scalar>(m: &Molecule) -> Result<ChargeAssignment<T>, StructError> {
    let p = embedded_gasteiger_params();
    let params = GasteigerParams {
        rows: p
            .rows
            .iter()
            .map(|&(e, h, c)| (e, h, ChiParams { a: T::lit(c.a), b: T::lit(c.b), c: T::lit(c.c) }))
            .collect(),
        version: p.version,
    };
    gasteiger_charges_with(m, &params)
}

pub fn gasteiger_charges_with<T: Scalar>(m: &Molecule, params: &GasteigerParams<T>) -> Result<ChargeAssignment<T>, StructError> {
    let full = m.with_explicit_hydrogens();
    let n = full.atom_count();
    let mut chi_params = Vec::with_capacity(n);
    for i in 0..n {
        let e = full.atoms()[i].element;
        let p = params
            .lookup(e, hybridization(&full, i))
            .ok_or_else(|| StructError::UnparameterizedElement {
                atom: i,
                element: e.symbol().to_string(),
            })?;
        chi_params.push(p);
    }
    let cation: Vec<T> = (0..n)
        .map(|i| {
            if full.atoms()[i].element == Element::H {
                T::lit(HYDROGEN_CATION_CHI)
            } else {
                let p = chi_params[i];
                p.a + p.b + p.c
            }
        })
        .collect();

    let mut q: Vec<T> = full.atoms().iter().map(|a| T::lit(a.formal_charge as f64)).collect();
    let mut delta = vec![T::zero(); n];
    let mut max_change = Vec::new();
    let mut converged = false;
    let mut damping = T::one();
    for _ in 0..MAX_ITERATIONS {
        damping = damping * T::lit(0.5);
        let chi: Vec<T> = (0..n)
            .map(|i| {
                let p = chi_params[i];
                p.a + p.b * q[i] + p.c * q[i] * q[i]
            })
            .collect();
        delta.iter_mut().for_each(|d| *d = T::zero());
        for b in full.bonds() {
            let (lo, hi) = if chi[b.a] <= chi[b.b] { (b.a, b.b) } else { (b.b, b.a) };
            let t = (chi[hi] - chi[lo]) / cation[lo] * damping;
            delta[lo] += t;
            delta[hi] -= t;
        }
        let mut biggest = T::zero();
        for i in 0..n {
            q[i] += delta[i];
            biggest = biggest.max(delta[i].abs());
        }
        max_change.push(biggest);
        if biggest < T::lit(CONVERGENCE) {
            converged = true;
            break;
        }
    }
    Ok(ChargeAssignment {
        iterations_used: max_change.len(),
        charges: q,
        converged,
        max_change,
    })
}
