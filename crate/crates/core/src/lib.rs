//! Ligand screening primitives: SMILES molecular graphs, descriptors,
//! circular fingerprints, druglikeness scores, receptor and docking-pose I/O,
//! polar contacts and the statistics used to summarize a screen.

pub mod contacts;
pub mod data;
pub mod descriptors;
pub mod druglikeness;
pub mod fingerprints;
pub mod geometry;
pub mod molgraph;
pub mod scalar;
pub mod stats;
pub mod structio;

pub use descriptors::{compute_descriptors, DescriptorSet};
pub use molgraph::{parse_smiles, MolError, Molecule};
pub use scalar::Scalar;
