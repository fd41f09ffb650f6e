//! Fragment-frequency synthetic accessibility.
//!
//! `fit_sas` counts radius-2 circular environments (every layer 0..=2, the
//! identifiers of [`crate::fingerprints::environment_list`]) over a corpus.
//! A fragment contributes log10(count / count of the most frequent fragment),
//! clamped to [-4, 0]; unseen fragments take the floor.
//!
//! `sas` adds the negated mean contribution to four penalties (size, stereo
//! centers, ring complexity, macrocycles) and maps that difficulty affinely
//! onto [1, 10], clamping at both ends.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::data::{parse_f64, DataError, DataSource, Table};
use crate::fingerprints::environment_list;
use crate::molgraph::Molecule;

use super::DruglikenessError;

pub const SAS_RADIUS: u32 = 2;
pub const MIN_CORPUS: usize = 1000;
pub const CONTRIBUTION_FLOOR: f64 = -4.0;
/// Difficulty mapped onto the full 1..10 range; the same span as the
/// original score's -4..2.5 window.
pub const DIFFICULTY_SPAN: f64 = 6.5;
const TABLE_NAME: &str = "sas_fragments";

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentScores {
    scores: BTreeMap<u64, f64>,
    pub corpus_size: usize,
    pub provenance: String,
}

impl FragmentScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn contribution(&self, fragment: u64) -> f64 {
        self.scores.get(&fragment).copied().unwrap_or(CONTRIBUTION_FLOOR)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.scores.iter().map(|(&k, &v)| (k, v))
    }

    /// Sorted text table; byte-identical for identical fits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# screenlab table: {TABLE_NAME}").unwrap();
        writeln!(s, "# version: 1").unwrap();
        writeln!(s, "# provenance: {}", self.provenance.replace('\n', " ")).unwrap();
        writeln!(s, "# corpus_size: {}", self.corpus_size).unwrap();
        writeln!(s, "# radius: {SAS_RADIUS}").unwrap();
        writeln!(s, "# clamp: {CONTRIBUTION_FLOOR} 0").unwrap();
        writeln!(s, "# schema: fragment hash (hex)<TAB>log10(count / max count)").unwrap();
        for (k, v) in &self.scores {
            writeln!(s, "{k:016x}\t{v:.6}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<FragmentScores, DataError> {
        let t = Table::parse(TABLE_NAME, text, 2)?;
        let corpus_size = t
            .meta("corpus_size")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| DataError::parse(TABLE_NAME, 1, "missing corpus_size"))?;
        let mut scores = BTreeMap::new();
        for (line, f) in &t.rows {
            let k = u64::from_str_radix(f[0], 16)
                .map_err(|_| DataError::parse(TABLE_NAME, *line, format!("bad hash '{}'", f[0])))?;
            let v = parse_f64(TABLE_NAME, *line, f[1])?;
            if !(CONTRIBUTION_FLOOR..=0.0).contains(&v) {
                return Err(DataError::parse(TABLE_NAME, *line, "contribution outside [-4, 0]"));
            }
            scores.insert(k, v);
        }
        Ok(FragmentScores {
            scores,
            corpus_size,
            provenance: t.meta("provenance").unwrap_or_default().to_string(),
        })
    }

    pub fn load(src: &DataSource) -> Result<FragmentScores, DataError> {
        FragmentScores::from_text(&src.read("sas_default.tsv")?)
    }

    /// The bundled table fitted on the project's fixture corpus.
    pub fn embedded() -> &'static FragmentScores {
        static F: OnceLock<FragmentScores> = OnceLock::new();
        F.get_or_init(|| FragmentScores::load(&DataSource::Embedded).expect("embedded SAS table is valid"))
    }
}

pub fn fit_sas(corpus: &[Molecule], provenance: &str) -> Result<FragmentScores, DruglikenessError> {
    if corpus.len() < MIN_CORPUS {
        return Err(DruglikenessError::CorpusTooSmall {
            got: corpus.len(),
            need: MIN_CORPUS,
        });
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for m in corpus {
        for id in environment_list(m, SAS_RADIUS) {
            *counts.entry(id).or_default() += 1;
        }
    }
    let max = counts.values().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(DruglikenessError::EmptyFragmentScores);
    }
    let scores = counts
        .into_iter()
        .map(|(k, c)| {
            let v = (c as f64 / max as f64).log10().max(CONTRIBUTION_FLOOR);
            // Round to the serialized precision so a reloaded table is equal.
            (k, (v * 1e6).round() / 1e6)
        })
        .collect();
    Ok(FragmentScores {
        scores,
        corpus_size: corpus.len(),
        provenance: provenance.to_string(),
    })
}

/// Penalty terms, all non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SasTerms {
    /// Negated mean fragment contribution, in [0, 4].
    pub fragments: f64,
    pub size: f64,
    pub stereo: f64,
    pub ring_complexity: f64,
    pub macrocycle: f64,
}

impl SasTerms {
    pub fn difficulty(&self) -> f64 {
        self.fragments + self.size + self.stereo + self.ring_complexity + self.macrocycle
    }
}

pub fn sas_terms(m: &Molecule, fs: &FragmentScores) -> Result<SasTerms, DruglikenessError> {
    if fs.is_empty() {
        return Err(DruglikenessError::EmptyFragmentScores);
    }
    let ids = environment_list(m, SAS_RADIUS);
    let fragments = if ids.is_empty() {
        0.0
    } else {
        // Summed in sorted order so the result does not depend on atom order.
        let mut c: Vec<f64> = ids.iter().map(|&id| fs.contribution(id)).collect();
        c.sort_by(f64::total_cmp);
        -c.iter().sum::<f64>() / c.len() as f64
    };
    let heavy = m.heavy_atom_count() as f64;
    let stereo_centers = m.atoms().iter().filter(|a| a.stereo.is_some()).count();
    let (spiro, bridgeheads) = spiro_and_bridgeheads(m);
    Ok(SasTerms {
        fragments,
        size: heavy.powf(1.005) - heavy,
        stereo: ((stereo_centers + 1) as f64).log10(),
        ring_complexity: ((bridgeheads + 1) as f64).log10() + ((spiro + 1) as f64).log10(),
        macrocycle: if m.rings().iter().any(|r| r.len() > 8) { 2f64.log10() } else { 0.0 },
    })
}

pub fn sas(m: &Molecule, fs: &FragmentScores) -> Result<f64, DruglikenessError> {
    let d = sas_terms(m, fs)?.difficulty();
    Ok((1.0 + 9.0 * d / DIFFICULTY_SPAN).clamp(1.0, 10.0))
}

fn ring_degree(m: &Molecule, i: usize) -> usize {
    m.neighbors(i).iter().filter(|&&(_, b)| m.is_ring_bond(b)).count()
}

/// Spiro atoms and bridgeheads, defined on the ring-bond graph so they do not
/// depend on which smallest ring set was chosen.
///
/// A spiro atom has four ring bonds and separates its ring-bond neighbors into
/// two groups when removed. A bridgehead is any other atom with at least three
/// ring bonds none of whose ring neighbors also has three; atoms at a fusion
/// bond (as in naphthalene) are therefore not bridgeheads.
pub fn spiro_and_bridgeheads(m: &Molecule) -> (usize, usize) {
    let n = m.atom_count();
    let junction: Vec<bool> = (0..n).map(|i| ring_degree(m, i) >= 3).collect();
    let (mut spiro, mut bridge) = (0, 0);
    for i in (0..n).filter(|&i| junction[i]) {
        let ring_nb: Vec<usize> = m
            .neighbors(i)
            .iter()
            .filter(|&&(_, b)| m.is_ring_bond(b))
            .map(|&(v, _)| v)
            .collect();
        if ring_nb.len() == 4 && separates(m, i, &ring_nb) {
            spiro += 1;
        } else if !ring_nb.iter().any(|&v| junction[v]) {
            bridge += 1;
        }
    }
    (spiro, bridge)
}

/// Whether removing `atom` leaves its ring neighbors in more than one
/// ring-bond component.
fn separates(m: &Molecule, atom: usize, ring_nb: &[usize]) -> bool {
    let mut seen = vec![false; m.atom_count()];
    seen[atom] = true;
    seen[ring_nb[0]] = true;
    let mut stack = vec![ring_nb[0]];
    while let Some(u) = stack.pop() {
        for &(v, b) in m.neighbors(u) {
            if m.is_ring_bond(b) && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    ring_nb.iter().any(|&v| !seen[v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn ring_complexity_classes() {
        let count = |s: &str| spiro_and_bridgeheads(&parse_smiles(s).unwrap());
        assert_eq!(count("c1ccc2ccccc2c1"), (0, 0));
        assert_eq!(count("C1CC2CCC1C2"), (0, 2));
        assert_eq!(count("C1CCC2(CC1)CCCC2"), (1, 0));
        assert_eq!(count("C1C2CC3CC1CC(C2)C3"), (0, 4));
        assert_eq!(count("CCO"), (0, 0));
    }

    #[test]
    fn text_round_trip() {
        let mut scores = BTreeMap::new();
        scores.insert(0xabcu64, 0.0);
        scores.insert(7, -3.5);
        let fs = FragmentScores {
            scores,
            corpus_size: 1000,
            provenance: "unit test".into(),
        };
        let text = fs.to_text();
        assert_eq!(FragmentScores::from_text(&text).unwrap(), fs);
        assert!(text.find("0000000000000007").unwrap() < text.find("0000000000000abc").unwrap());
    }

    #[test]
    fn small_corpus_is_rejected() {
        let m = parse_smiles("CCO").unwrap();
        assert!(matches!(
            fit_sas(&vec![m; 999], "x"),
            Err(DruglikenessError::CorpusTooSmall { got: 999, need: 1000 })
        ));
    }
}
