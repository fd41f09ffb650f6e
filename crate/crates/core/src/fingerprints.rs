//! Circular environment fingerprints folded into fixed-width bitsets.
//!
//! Environment identifiers are FNV-1a 64-bit hashes over a fixed byte layout,
//! so fingerprints are identical on every platform:
//!
//! * layer 0: `[0, Z, charge as u8, heavy degree, total H, aromatic, in ring]`
//! * layer r: `[r] ++ id(r-1, atom) as little-endian u64 ++` every neighbor's
//!   `[bond code] ++ id(r-1, neighbor) as little-endian u64`, the neighbor
//!   entries sorted ascending by `(bond code, id)`.
//!
//! Bond codes are 1 single, 2 double, 3 triple, 4 aromatic. Every identifier of
//! every layer up to the radius sets bit `id mod width`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{Element, Molecule};

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_WIDTH: usize = 2048;
pub const MAX_RADIUS: u32 = 4;
pub const MIN_WIDTH: usize = 256;
pub const MAX_WIDTH: usize = 65536;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint width {0} is not a power of two in [256, 65536]")]
    InvalidWidth(usize),
    #[error("fingerprint radius {0} exceeds {MAX_RADIUS}")]
    InvalidRadius(u32),
    #[error("fingerprint shapes differ: width {0} radius {1} vs width {2} radius {3}")]
    WidthMismatch(usize, u32, usize, u32),
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Environment identifiers per layer: `ids[r][atom]` for r in 0..=radius.
/// Hydrogen atoms present as graph nodes are skipped (left as 0 and unused).
pub fn environment_ids(m: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let n = m.atom_count();
    let heavy: Vec<bool> = m.atoms().iter().map(|a| a.element != Element::H).collect();
    let mut layers = Vec::with_capacity(radius as usize + 1);
    let first: Vec<u64> = (0..n)
        .map(|i| {
            if !heavy[i] {
                return 0;
            }
            let a = &m.atoms()[i];
            let explicit_h = m.neighbors(i).iter().filter(|&&(v, _)| !heavy[v]).count();
            let degree = m.degree(i) - explicit_h;
            fnv1a64(&[
                0,
                a.element.atomic_number(),
                a.formal_charge as u8,
                degree as u8,
                (a.implicit_h as usize + explicit_h) as u8,
                a.aromatic as u8,
                m.is_ring_atom(i) as u8,
            ])
        })
        .collect();
    layers.push(first);
    let mut buf = Vec::new();
    for r in 1..=radius {
        let prev = &layers[r as usize - 1];
        let next: Vec<u64> = (0..n)
            .map(|i| {
                if !heavy[i] {
                    return 0;
                }
                let mut nb: Vec<(u8, u64)> = m
                    .neighbors(i)
                    .iter()
                    .filter(|&&(v, _)| heavy[v])
                    .map(|&(v, b)| (m.bonds()[b].order.code(), prev[v]))
                    .collect();
                nb.sort_unstable();
                buf.clear();
                buf.push(r as u8);
                buf.extend_from_slice(&prev[i].to_le_bytes());
                for (code, id) in nb {
                    buf.push(code);
                    buf.extend_from_slice(&id.to_le_bytes());
                }
                fnv1a64(&buf)
            })
            .collect();
        layers.push(next);
    }
    layers
}

/// Identifiers of all heavy-atom environments up to `radius`, layer by layer.
pub fn environment_list(m: &Molecule, radius: u32) -> Vec<u64> {
    let heavy: Vec<usize> = (0..m.atom_count()).filter(|&i| m.atoms()[i].element != Element::H).collect();
    environment_ids(m, radius)
        .into_iter()
        .flat_map(|layer| heavy.iter().map(move |&i| layer[i]).collect::<Vec<_>>())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    width: usize,
    radius: u32,
    words: Vec<u64>,
    popcount: usize,
}

fn check_width(width: usize) -> Result<(), FingerprintError> {
    if !width.is_power_of_two() || !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        return Err(FingerprintError::InvalidWidth(width));
    }
    Ok(())
}

pub fn fingerprint(m: &Molecule, radius: u32, width: usize) -> Result<Fingerprint, FingerprintError> {
    check_width(width)?;
    if radius > MAX_RADIUS {
        return Err(FingerprintError::InvalidRadius(radius));
    }
    let ids = environment_list(m, radius);
    Ok(Fingerprint::from_bits(width, radius, ids.iter().map(|&id| (id % width as u64) as usize)))
}

impl Fingerprint {
    /// Sets the given bit positions. Panics if a position is out of range.
    pub fn from_bits(width: usize, radius: u32, bits: impl IntoIterator<Item = usize>) -> Fingerprint {
        let mut words = vec![0u64; width.div_ceil(64)];
        for b in bits {
            assert!(b < width, "bit {b} outside width {width}");
            words[b / 64] |= 1 << (b % 64);
        }
        let popcount = words.iter().map(|w| w.count_ones() as usize).sum();
        Fingerprint {
            width,
            radius,
            words,
            popcount,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> usize {
        self.popcount
    }

    pub fn contains(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.contains(b))
    }

    /// ORs the upper halves onto the lower ones until `width` is reached.
    /// Equivalent to folding the environment ids modulo the smaller width.
    pub fn fold(&self, width: usize) -> Result<Fingerprint, FingerprintError> {
        check_width(width)?;
        if width > self.width {
            return Err(FingerprintError::InvalidWidth(width));
        }
        Ok(Fingerprint::from_bits(width, self.radius, self.ones().map(|b| b % width)))
    }

    /// Lowercase hex, most significant word first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in self.words.iter().rev() {
            write!(s, "{w:016x}").unwrap();
        }
        s
    }
}

/// |a ∧ b| / |a ∨ b|; two empty fingerprints are identical (1.0).
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.width != b.width || a.radius != b.radius {
        return Err(FingerprintError::WidthMismatch(a.width, a.radius, b.width, b.radius));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 { 1.0 } else { both as f64 / either as f64 })
}
