//! Receptor structures, docking poses and ligand partial charges.

mod gasteiger;
mod pdb;
mod pdbqt;

use thiserror::Error;

use crate::data::DataError;

pub use gasteiger::{
    embedded_gasteiger_params, gasteiger_charges, gasteiger_charges_with, hybridization, ChargeAssignment, ChiParams,
    GasteigerParams, Hybridization, CONVERGENCE, HYDROGEN_CATION_CHI, MAX_ITERATIONS,
};
pub use pdb::{one_letter, parse_pdb, residue_label, write_pdb, PdbOptions, ProteinAtom, ProteinStructure, RecordKind, Residue};
pub use pdbqt::{ad_type_element, best_pose, parse_vina_poses, DockedPose, PoseAtom};

#[derive(Debug, Error)]
pub enum StructError {
    #[error("line {line}: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error("no atoms left after filtering")]
    EmptyStructure,
    #[error("model {model} (line {line}) has no energy remark")]
    MissingEnergyRemark { model: usize, line: usize },
    #[error("model {model} is truncated: {reason}")]
    TruncatedModel { model: usize, reason: &'static str },
    #[error("no poses to choose from")]
    EmptyInput,
    #[error("atom {atom} ({element}) has no Gasteiger parameters")]
    UnparameterizedElement { atom: usize, element: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

impl StructError {
    pub(crate) fn malformed(line: usize, msg: impl Into<String>) -> StructError {
        StructError::MalformedRecord { line, msg: msg.into() }
    }
}
