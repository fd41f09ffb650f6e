//! Fingerprint checks over the corpus: byte identity with an independent
//! implementation of the hash layout, and Tanimoto properties.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use screenlab_core::fingerprints::{fingerprint, tanimoto, Fingerprint};
use screenlab_core::molgraph::smi::read_smi;
use screenlab_core::{parse_smiles, Molecule};

const CORPUS: &str = include_str!("fixtures/corpus_1000.smi");
/// Written by `fixtures/fp_oracle.py` from the reference toolkit's graphs.
const ORACLE: &str = include_str!("fixtures/corpus_1000_fp.tsv");

fn corpus() -> Vec<(String, Molecule)> {
    read_smi(CORPUS)
        .into_iter()
        .map(|r| (r.label(), r.parse().unwrap()))
        .collect()
}

fn corpus_fps() -> Vec<Fingerprint> {
    corpus().iter().map(|(_, m)| fingerprint(m, 2, 2048).unwrap()).collect()
}

#[test]
fn hex_matches_independent_oracle() {
    let oracle: Vec<(&str, &str)> = ORACLE.lines().map(|l| l.split_once('\t').unwrap()).collect();
    let mols = corpus();
    assert_eq!(oracle.len(), mols.len());
    let mut bad = Vec::new();
    for ((name, m), (oname, hex)) in mols.iter().zip(&oracle) {
        assert_eq!(name, oname);
        if fingerprint(m, 2, 2048).unwrap().to_hex() != *hex {
            bad.push(name.clone());
        }
    }
    assert!(bad.is_empty(), "{} differ: {:?}", bad.len(), &bad[..bad.len().min(20)]);
}

#[test]
fn self_similarity_symmetry_and_bounds() {
    let fps = corpus_fps();
    for a in &fps {
        assert_eq!(tanimoto(a, a).unwrap(), 1.0);
    }
    for (i, a) in fps.iter().enumerate().step_by(7) {
        for b in fps.iter().skip(i % 13).step_by(11) {
            let (ab, ba) = (tanimoto(a, b).unwrap(), tanimoto(b, a).unwrap());
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
        }
    }
}

#[test]
fn folding_keeps_self_similarity() {
    for (_, m) in corpus().iter().take(200) {
        let wide = fingerprint(m, 2, 4096).unwrap();
        let folded = wide.fold(2048).unwrap();
        assert_eq!(tanimoto(&folded, &folded).unwrap(), 1.0);
        assert_eq!(folded, fingerprint(m, 2, 2048).unwrap());
    }
}

#[test]
fn invariant_under_atom_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (_, m) in corpus().iter().step_by(50) {
        let reference = fingerprint(m, 2, 2048).unwrap();
        let mut perm: Vec<usize> = (0..m.atom_count()).collect();
        for _ in 0..100 {
            perm.shuffle(&mut rng);
            assert_eq!(fingerprint(&m.permuted(&perm), 2, 2048).unwrap(), reference);
        }
    }
}

proptest! {
    #[test]
    fn tanimoto_of_random_bitsets(a in proptest::collection::btree_set(0usize..256, 0..40),
                                  b in proptest::collection::btree_set(0usize..256, 0..40)) {
        let fa = Fingerprint::from_bits(256, 2, a.iter().copied());
        let fb = Fingerprint::from_bits(256, 2, b.iter().copied());
        let t = tanimoto(&fa, &fb).unwrap();
        let inter = a.intersection(&b).count();
        let union = a.union(&b).count();
        let want = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
        prop_assert_eq!(t, want);
        prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
        prop_assert_eq!(fa.popcount(), a.len());
    }
}

#[test]
fn methane_benzene_disjoint() {
    let a = fingerprint(&parse_smiles("C").unwrap(), 2, 2048).unwrap();
    let b = fingerprint(&parse_smiles("c1ccccc1").unwrap(), 2, 2048).unwrap();
    assert_eq!(tanimoto(&a, &b).unwrap(), 0.0);
}
