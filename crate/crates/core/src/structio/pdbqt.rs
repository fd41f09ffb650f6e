//! Multi-model docking output in PDBQT layout.
//!
//! Each `MODEL` block carries one pose. Its energy comes from the first
//! `REMARK VINA RESULT` line: the first three numbers after the keyword are
//! the energy (kcal/mol) and the two RMSD bounds, wherever they sit on the
//! line.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::molgraph::Element;
use crate::Scalar;

use super::pdb::{cols, position};
use super::StructError;

const ENERGY_KEYWORD: &str = "VINA RESULT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseAtom<T> {
    pub name: String,
    /// AutoDock atom type, e.g. "A", "OA", "HD".
    pub ad_type: String,
    pub element: Element,
    pub pos: Vec3<T>,
    pub partial_charge: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockedPose<T> {
    pub source_ligand: String,
    /// 1-based block order.
    pub pose_rank: usize,
    /// kcal/mol.
    pub binding_energy: T,
    pub rmsd_lb: T,
    pub rmsd_ub: T,
    pub atoms: Vec<PoseAtom<T>>,
}

/// Element of an AutoDock atom type.
pub fn ad_type_element(ad_type: &str) -> Option<Element> {
    let sym = match ad_type {
        "A" => "C",
        "NA" | "NS" | "N" => "N",
        "OA" | "OS" | "O" => "O",
        "SA" | "S" => "S",
        "HD" | "HS" | "H" => "H",
        "CL" | "Cl" => "Cl",
        "BR" | "Br" => "Br",
        "FE" | "Fe" => "Fe",
        "ZN" | "Zn" => "Zn",
        "MG" | "Mg" => "Mg",
        "MN" | "Mn" => "Mn",
        "CA" | "Ca" => "Ca",
        other => other,
    };
    Element::from_symbol(sym)
}

fn parse_pose_atom<T: Scalar>(line: &str, lineno: usize) -> Result<PoseAtom<T>, StructError> {
    let pos = position(line, lineno)?;
    // Charge and type are the last two fields; spacing varies between tools.
    let tail: Vec<&str> = line[54..].split_whitespace().collect();
    let [.., charge, ad_type] = tail[..] else {
        return Err(StructError::malformed(lineno, "missing partial charge and atom type"));
    };
    let q: f64 = charge
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| StructError::malformed(lineno, format!("partial charge '{charge}' is not a number")))?;
    let element = ad_type_element(ad_type)
        .ok_or_else(|| StructError::malformed(lineno, format!("unknown atom type '{ad_type}'")))?;
    Ok(PoseAtom {
        name: cols(line, 13, 16).to_string(),
        ad_type: ad_type.to_string(),
        element,
        pos,
        partial_charge: T::lit(q),
    })
}

fn parse_energy_remark<T: Scalar>(line: &str, lineno: usize) -> Option<Result<[T; 3], StructError>> {
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.first() != Some(&"REMARK") {
        return None;
    }
    let joined = words[1..].join(" ");
    let rest = joined.strip_prefix(ENERGY_KEYWORD)?;
    let nums: Vec<f64> = rest
        .split(|c: char| c.is_whitespace() || c == ':')
        .filter_map(|w| w.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .take(3)
        .collect();
    Some(match nums[..] {
        [e, lb, ub] => Ok([T::lit(e), T::lit(lb), T::lit(ub)]),
        _ => Err(StructError::malformed(lineno, "energy remark needs three numbers")),
    })
}

struct Block<T> {
    first_line: usize,
    energy: Option<[T; 3]>,
    atoms: Vec<PoseAtom<T>>,
}

impl<T: Scalar> Block<T> {
    fn new(first_line: usize) -> Block<T> {
        Block {
            first_line,
            energy: None,
            atoms: Vec::new(),
        }
    }

    fn finish(self, rank: usize, source: &str) -> Result<DockedPose<T>, StructError> {
        let [e, lb, ub] = self.energy.ok_or(StructError::MissingEnergyRemark {
            model: rank,
            line: self.first_line,
        })?;
        if self.atoms.is_empty() {
            return Err(StructError::TruncatedModel {
                model: rank,
                reason: "no atom records",
            });
        }
        Ok(DockedPose {
            source_ligand: source.to_string(),
            pose_rank: rank,
            binding_energy: e,
            rmsd_lb: lb,
            rmsd_ub: ub,
            atoms: self.atoms,
        })
    }
}

/// One pose per MODEL block, ranked by block order. A file without MODEL
/// records is read as a single pose.
pub fn parse_vina_poses<T: Scalar>(text: &str, source_ligand: &str) -> Result<Vec<DockedPose<T>>, StructError> {
    let mut poses = Vec::new();
    let mut open: Option<Block<T>> = None;
    let mut implicit: Option<Block<T>> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with("MODEL") {
            if open.is_some() {
                return Err(StructError::TruncatedModel {
                    model: poses.len() + 1,
                    reason: "MODEL before ENDMDL",
                });
            }
            open = Some(Block::new(lineno));
        } else if line.starts_with("ENDMDL") {
            let block = open.take().ok_or_else(|| StructError::malformed(lineno, "ENDMDL without MODEL"))?;
            poses.push(block.finish(poses.len() + 1, source_ligand)?);
        } else {
            let is_atom = line.starts_with("ATOM") || line.starts_with("HETATM");
            let is_remark = line.starts_with("REMARK");
            if !is_atom && !is_remark {
                continue;
            }
            let block = match open.as_mut() {
                Some(b) => b,
                None if poses.is_empty() => implicit.get_or_insert_with(|| Block::new(lineno)),
                None => return Err(StructError::malformed(lineno, "record outside a MODEL block")),
            };
            if is_atom {
                if !line.is_ascii() {
                    return Err(StructError::malformed(lineno, "non-ASCII characters in a fixed-column record"));
                }
                block.atoms.push(parse_pose_atom(line, lineno)?);
            } else if block.energy.is_none() {
                if let Some(e) = parse_energy_remark(line, lineno) {
                    block.energy = Some(e?);
                }
            }
        }
    }
    if open.is_some() {
        return Err(StructError::TruncatedModel {
            model: poses.len() + 1,
            reason: "missing ENDMDL",
        });
    }
    if let Some(block) = implicit {
        if !poses.is_empty() {
            return Err(StructError::malformed(block.first_line, "records outside MODEL blocks"));
        }
        poses.push(block.finish(1, source_ligand)?);
    }
    if poses.is_empty() {
        return Err(StructError::TruncatedModel {
            model: 1,
            reason: "no poses",
        });
    }
    Ok(poses)
}

/// Lowest energy; ties go to the lowest rank.
pub fn best_pose<T: Scalar>(poses: &[DockedPose<T>]) -> Result<&DockedPose<T>, StructError> {
    poses
        .iter()
        .min_by(|a, b| {
            a.binding_energy
                .partial_cmp(&b.binding_energy)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.pose_rank.cmp(&b.pose_rank))
        })
        .ok_or(StructError::EmptyInput)
}
