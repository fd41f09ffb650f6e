//! The screening pipeline: similarity to the seed, docking-result intake,
//! affinity filter, druglikeness, contacts and the summary statistics.
//!
//! Per-ligand work runs on the current rayon pool; results are collected in
//! input order and every aggregate is keyed by label, so the report does not
//! depend on scheduling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use screenlab_core::contacts::{contact_frequencies, Contact, PolarGrid};
use screenlab_core::descriptors::{ContributionTable, DescriptorSet};
use screenlab_core::druglikeness::{lipinski, select_leads, Candidate};
use screenlab_core::fingerprints::Fingerprint;
use screenlab_core::molgraph::canonical_smiles;
use screenlab_core::molgraph::smi::{read_smi, SmiRecord};
use screenlab_core::stats::{
    boxplot_summary, compare_groups, mean, median, pearson, percentile, sample_sd, zscore, RankedLigand, GROUP_METRICS,
};
use screenlab_core::structio::{best_pose, parse_pdb, parse_vina_poses, PdbOptions, ProteinStructure};
use screenlab_core::parse_smiles;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::{read_text, write_atomic};
use crate::report::*;
use crate::toolkit::{unique_labels, Toolkit};

pub const SIMILARITY_BINS: usize = 50;
pub const PROPERTY_BINS: usize = 20;
pub const POSE_EXTENSION: &str = "pdbqt";

/// Energy against these in the correlation panel.
pub const CORRELATED: [&str; 5] = ["lp", "mw", "tpsa", "hbd", "hba"];

/// Properties profiled against the seed.
pub const PROFILED: [&str; 7] = ["mw", "lp", "tpsa", "hbd", "hba", "rotatable_bonds", "aromatic_rings"];

pub fn property(d: &DescriptorSet, name: &str) -> f64 {
    match name {
        "mw" => d.mw,
        "lp" => d.lp,
        "tpsa" => d.tpsa,
        "hbd" => d.hbd as f64,
        "hba" => d.hba as f64,
        "aromatic_rings" => d.aromatic_rings as f64,
        "carboxylic_acids" => d.carboxylic_acids as f64,
        "rotatable_bonds" => d.rotatable_bonds as f64,
        "alerts" => d.alerts as f64,
        other => panic!("unknown property {other}"),
    }
}

/// Similarity of every parseable record to the seed, in record order, plus
/// the number of records that failed to parse.
pub fn similarities(tk: &Toolkit, seed: &Fingerprint, records: &[SmiRecord]) -> (Vec<(SmiRecord, f64)>, usize) {
    let sims: Vec<Option<f64>> = records
        .par_iter()
        .map(|r| r.parse().ok().map(|m| tk.similarity(seed, &tk.fingerprint(&m))))
        .collect();
    let skipped = sims.iter().filter(|s| s.is_none()).count();
    let kept = records.iter().cloned().zip(sims).filter_map(|(r, s)| s.map(|s| (r, s))).collect();
    (kept, skipped)
}

pub fn similarity_set(source: &str, sims: &[(SmiRecord, f64)], skipped: usize) -> SimilaritySet {
    let values: Vec<f64> = sims.iter().map(|(_, s)| *s).collect();
    SimilaritySet {
        source: source.to_string(),
        count: values.len(),
        skipped,
        median: median(&values).ok(),
        histogram: Histogram::new(&values, 0.0, 1.0, SIMILARITY_BINS),
    }
}

/// Nearest-rank cutoff and the records at or above it.
pub fn select_above(sims: &[(SmiRecord, f64)], p: f64) -> (Option<f64>, Vec<FinetuneEntry>) {
    let values: Vec<f64> = sims.iter().map(|(_, s)| *s).collect();
    let Ok(cutoff) = percentile(&values, p) else {
        return (None, Vec::new());
    };
    let mut set: Vec<FinetuneEntry> = sims
        .iter()
        .filter(|(_, s)| *s >= cutoff)
        .map(|(r, s)| FinetuneEntry {
            label: r.label(),
            smiles: r.smiles.clone(),
            similarity: *s,
        })
        .collect();
    set.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.label.cmp(&b.label)));
    (Some(cutoff), set)
}

/// Pose files by stem. Every stem must name a ligand record.
fn pose_files(dir: &Path, labels: &BTreeMap<String, usize>) -> Result<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = BTreeMap::new();
    for e in entries {
        let path = e.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().and_then(|x| x.to_str()) != Some(POSE_EXTENSION) || !path.is_file() {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::input(format!("{}: file name is not valid UTF-8", path.display())))?
            .to_string();
        if !labels.contains_key(&stem) {
            return Err(CliError::input(format!(
                "{}: no ligand record is named '{stem}'; pose files join on the .smi name",
                path.display()
            )));
        }
        out.insert(stem, path);
    }
    Ok(out)
}

struct Docked {
    row: DockedRow,
    descriptors: DescriptorSet,
    high: Option<(HighAffinityRow, Vec<Contact<f64>>)>,
}

enum Outcome {
    Docked(Box<Docked>),
    NotDocked,
    Failed(LigandError),
}

struct LigandResult {
    label: String,
    similarity: Option<f64>,
    descriptors: Option<DescriptorSet>,
    outcome: Outcome,
}

struct Context<'a> {
    tk: &'a Toolkit,
    cfg: &'a PipelineConfig,
    seed_fp: &'a Fingerprint,
    grid: &'a PolarGrid<'a, f64>,
    poses: &'a BTreeMap<String, PathBuf>,
}

fn fail(label: &str, stage: &str, message: impl Into<String>) -> Outcome {
    Outcome::Failed(LigandError {
        label: label.to_string(),
        stage: stage.to_string(),
        message: message.into(),
    })
}

fn process(ctx: &Context, rec: &SmiRecord) -> LigandResult {
    let label = rec.label();
    let mut result = LigandResult {
        label: label.clone(),
        similarity: None,
        descriptors: None,
        outcome: Outcome::NotDocked,
    };
    let m = match rec.parse() {
        Ok(m) => m,
        Err(e) => {
            result.outcome = fail(&label, "parse", format!("line {}: {e}", rec.line));
            return result;
        }
    };
    let d = ctx.tk.descriptors(&m);
    let similarity = ctx.tk.similarity(ctx.seed_fp, &ctx.tk.fingerprint(&m));
    result.similarity = Some(similarity);
    result.descriptors = Some(d.clone());
    let Some(path) = ctx.poses.get(&label) else {
        return result;
    };
    let poses = match std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_vina_poses::<f64>(&t, &label).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            result.outcome = fail(&label, "pose", format!("{}: {e}", path.display()));
            return result;
        }
    };
    let best = best_pose(&poses).expect("parser returns at least one pose");
    let row = DockedRow {
        label: label.clone(),
        best_energy: best.binding_energy,
        pose_rank: best.pose_rank,
        poses: poses.len(),
        similarity,
    };
    let mut high = None;
    if best.binding_energy <= ctx.cfg.threshold_kcal {
        let scores = ctx.tk.qed(&d).and_then(|q| ctx.tk.sas(&m).map(|s| (q, s)));
        let (qed, sas) = match scores {
            Ok(v) => v,
            Err(e) => {
                result.outcome = fail(&label, "score", e);
                return result;
            }
        };
        let contacts = ctx.grid.contacts(best, ctx.cfg.contact_angstrom);
        let mut residues: Vec<(i32, String)> = contacts.iter().map(|c| (c.residue_seq, c.residue_label.clone())).collect();
        residues.sort();
        residues.dedup();
        let rules = lipinski(&d);
        high = Some((
            HighAffinityRow {
                label: label.clone(),
                smiles: rec.smiles.clone(),
                energy: best.binding_energy,
                pose_rank: best.pose_rank,
                descriptors: d.clone(),
                lipinski_violations: rules.violations,
                failed_rules: rules.failed().into_iter().map(String::from).collect(),
                qed,
                sas,
                contact_residues: residues.into_iter().map(|(_, l)| l).collect(),
            },
            contacts,
        ));
    }
    result.outcome = Outcome::Docked(Box::new(Docked {
        row,
        descriptors: d,
        high,
    }));
    result
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn seed_profile(tk: &Toolkit, cfg: &PipelineConfig) -> Result<(SeedProfile, Fingerprint)> {
    let m = parse_smiles(&cfg.seed_smiles).map_err(|e| CliError::input(format!("seed SMILES does not parse: {e}")))?;
    let d = tk.descriptors(&m);
    let rules = lipinski(&d);
    let failed: Vec<String> = rules.failed().into_iter().map(String::from).collect();
    let qed = tk.qed(&d).map_err(|e| CliError::input(format!("seed QED: {e}")))?;
    let sas = tk.sas(&m).map_err(|e| CliError::input(format!("seed SAS: {e}")))?;
    let note = format!(
        "{} rule-of-five violation(s){}; lp is the embedded Crippen estimate, so the lp outcome depends on that model",
        rules.violations,
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    let fp = tk.fingerprint(&m);
    Ok((
        SeedProfile {
            name: cfg.seed_name.clone(),
            smiles: cfg.seed_smiles.clone(),
            canonical_smiles: canonical_smiles(&m),
            descriptors: d,
            lipinski: rules,
            failed_rules: failed,
            qed,
            sas,
            note,
        },
        fp,
    ))
}

fn distributions(seed: &DescriptorSet, pop: &[&DescriptorSet]) -> Vec<PropertyDistribution> {
    PROFILED
        .iter()
        .map(|&p| {
            let values: Vec<f64> = pop.iter().map(|d| property(d, p)).collect();
            let seed_value = property(seed, p);
            let lo = values.iter().copied().fold(seed_value, f64::min);
            let hi = values.iter().copied().fold(seed_value, f64::max);
            PropertyDistribution {
                property: p.to_string(),
                count: values.len(),
                mean: mean(&values).ok(),
                sd: sample_sd(&values).ok(),
                seed_value,
                seed_z: zscore(seed_value, &values).ok(),
                histogram: Histogram::new(&values, lo, hi, PROPERTY_BINS),
            }
        })
        .collect()
}

fn score_series(set: &str, rows: Vec<(String, f64)>) -> ScoreSeries {
    let values: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    ScoreSeries {
        set: set.to_string(),
        summary: boxplot_summary(&values).ok(),
        labels: rows.into_iter().map(|(l, _)| l).collect(),
        values,
    }
}

/// QED and SAS of a reference set, by label, plus the number of records
/// that could not be scored.
fn reference_scores(tk: &Toolkit, path: &Path) -> Result<(Vec<(String, f64)>, Vec<(String, f64)>, usize)> {
    let records = read_smi(&read_text(path)?);
    let scored: Vec<Option<(String, f64, f64)>> = records
        .par_iter()
        .map(|r| {
            let m = r.parse().ok()?;
            let d = tk.descriptors(&m);
            Some((r.label(), tk.qed(&d).ok()?, tk.sas(&m).ok()?))
        })
        .collect();
    let skipped = scored.iter().filter(|s| s.is_none()).count();
    let mut ok: Vec<(String, f64, f64)> = scored.into_iter().flatten().collect();
    ok.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((
        ok.iter().map(|(l, q, _)| (l.clone(), *q)).collect(),
        ok.iter().map(|(l, _, s)| (l.clone(), *s)).collect(),
        skipped,
    ))
}

pub fn load_receptor(cfg: &PipelineConfig) -> Result<ProteinStructure<f64>> {
    let text = read_text(&cfg.receptor)?;
    parse_pdb(&text, &PdbOptions::receptor(cfg.receptor_chain))
        .map_err(|e| CliError::input(format!("{}: {e}", cfg.receptor.display())))
}

pub fn run_screen(cfg: &PipelineConfig) -> Result<ScreeningReport> {
    let tk = Toolkit::load(cfg.fp_radius, cfg.fp_bits)?;
    let receptor = load_receptor(cfg)?;
    let grid = PolarGrid::new(&receptor);
    let (seed, seed_fp) = seed_profile(&tk, cfg)?;
    let mut warnings = Vec::new();

    let records = read_smi(&read_text(&cfg.generated)?);
    unique_labels(&records, &cfg.generated.display().to_string())?;
    let labels: BTreeMap<String, usize> = records.iter().map(|r| (r.label(), r.line)).collect();
    let poses = pose_files(&cfg.poses, &labels)?;
    if poses.is_empty() {
        warnings.push(format!("no .{POSE_EXTENSION} files in {}; nothing was docked", cfg.poses.display()));
    }

    let ctx = Context {
        tk: &tk,
        cfg,
        seed_fp: &seed_fp,
        grid: &grid,
        poses: &poses,
    };
    let results: Vec<LigandResult> = records.par_iter().map(|r| process(&ctx, r)).collect();

    // Similarity panels.
    let post_sims: Vec<(SmiRecord, f64)> = records
        .iter()
        .zip(&results)
        .filter_map(|(r, res)| res.similarity.map(|s| (r.clone(), s)))
        .collect();
    let parse_failures = results.iter().filter(|r| r.similarity.is_none()).count();
    let post = similarity_set("post", &post_sims, parse_failures);
    let pre = match &cfg.training_set {
        Some(path) => {
            let recs = read_smi(&read_text(path)?);
            let (sims, skipped) = similarities(&tk, &seed_fp, &recs);
            if skipped > 0 {
                warnings.push(format!("{skipped} training-set record(s) did not parse and were skipped"));
            }
            Some((similarity_set("pre", &sims, skipped), sims))
        }
        None => None,
    };
    let (cutoff_source, (cutoff, finetune_set)) = match &pre {
        Some((_, sims)) => ("pre", select_above(sims, cfg.percentile)),
        None => ("post", select_above(&post_sims, cfg.percentile)),
    };
    let similarity = SimilaritySection {
        pre: pre.map(|(s, _)| s),
        post,
        percentile: cfg.percentile,
        cutoff_source: cutoff_source.to_string(),
        cutoff,
        finetune_set,
    };

    let parsed: Vec<&DescriptorSet> = results.iter().filter_map(|r| r.descriptors.as_ref()).collect();
    let descriptor_distributions = distributions(&seed.descriptors, &parsed);
    for r in &results {
        if let Some(d) = &r.descriptors {
            for t in [ContributionTable::Weights, ContributionTable::Crippen, ContributionTable::Tpsa] {
                if d.flagged(t) {
                    warnings.push(format!("{}: some atoms have no {t:?} parameters and contribute zero", r.label));
                }
            }
        }
    }

    // Docking outcomes.
    let mut docked = Vec::new();
    let mut not_docked = Vec::new();
    let mut errors = Vec::new();
    let mut ranked = Vec::new();
    let mut high_affinity = Vec::new();
    let mut contacts = Vec::new();
    for r in results {
        match r.outcome {
            Outcome::NotDocked => not_docked.push(r.label),
            Outcome::Failed(e) => errors.push(e),
            Outcome::Docked(d) => {
                ranked.push(RankedLigand {
                    label: d.row.label.clone(),
                    energy: d.row.best_energy,
                    metrics: GROUP_METRICS.iter().map(|m| property(&d.descriptors, m)).collect(),
                });
                if let Some((row, c)) = d.high {
                    contacts.push(LigandContacts {
                        label: row.label.clone(),
                        contacts: c,
                    });
                    high_affinity.push(row);
                }
                docked.push(d.row);
            }
        }
    }
    docked.sort_by(|a, b| a.label.cmp(&b.label));
    not_docked.sort();
    errors.sort_by(|a, b| a.label.cmp(&b.label));
    contacts.sort_by(|a, b| a.label.cmp(&b.label));
    high_affinity.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.label.cmp(&b.label)));
    if !docked.is_empty() && high_affinity.is_empty() {
        warnings.push(format!("no docked ligand reaches {} kcal/mol", cfg.threshold_kcal));
    }

    let k = cfg.group_size;
    let group_rows = match compare_groups(&ranked, &GROUP_METRICS, k) {
        Ok(rows) => rows,
        Err(e) => {
            warnings.push(format!("group comparison skipped: {e}"));
            Vec::new()
        }
    };

    let energies: Vec<f64> = high_affinity.iter().map(|h| h.energy).collect();
    let correlations: Vec<Correlation> = CORRELATED
        .iter()
        .map(|&p| {
            let ys: Vec<f64> = high_affinity.iter().map(|h| property(&h.descriptors, p)).collect();
            let r = pearson(&energies, &ys).ok();
            if r.is_none() && !high_affinity.is_empty() {
                warnings.push(format!("correlation of energy with {p} is undefined (too few rows or zero variance)"));
            }
            Correlation {
                x: "energy".to_string(),
                y: p.to_string(),
                n: ys.len(),
                r,
            }
        })
        .collect();

    let per_ligand: Vec<Vec<Contact<f64>>> = contacts.iter().map(|c| c.contacts.clone()).collect();
    let contact_frequencies = contact_frequencies(&per_ligand);

    let candidates: Vec<Candidate> = high_affinity
        .iter()
        .map(|h| Candidate {
            label: h.label.clone(),
            qed: h.qed,
            sas: h.sas,
        })
        .collect();
    let leads = select_leads(&candidates);

    let mut by_label: Vec<&HighAffinityRow> = high_affinity.iter().collect();
    by_label.sort_by(|a, b| a.label.cmp(&b.label));
    let mut qed_series = vec![score_series("high_affinity", by_label.iter().map(|h| (h.label.clone(), h.qed)).collect())];
    let mut sas_series = vec![score_series("high_affinity", by_label.iter().map(|h| (h.label.clone(), h.sas)).collect())];
    let mut reference_skipped = 0;
    if let Some(path) = &cfg.fda_reference {
        let (q, s, skipped) = reference_scores(&tk, path)?;
        qed_series.push(score_series("reference", q));
        sas_series.push(score_series("reference", s));
        reference_skipped = skipped;
        if skipped > 0 {
            warnings.push(format!("{skipped} reference record(s) could not be scored and were skipped"));
        }
    }

    let accounting = Accounting {
        smi_records: records.len(),
        pose_files: poses.len(),
        docked: docked.len(),
        not_docked: not_docked.len(),
        errors: errors.len(),
        high_affinity: high_affinity.len(),
    };

    let report = ScreeningReport {
        schema_version: SCHEMA_VERSION,
        conventions: conventions(),
        config: ReportConfig {
            seed_name: cfg.seed_name.clone(),
            generated: file_name(&cfg.generated),
            training_set: cfg.training_set.as_deref().map(file_name),
            poses: file_name(&cfg.poses),
            receptor: file_name(&cfg.receptor),
            receptor_chain: cfg.receptor_chain,
            fda_reference: cfg.fda_reference.as_deref().map(file_name),
            threshold_kcal: cfg.threshold_kcal,
            percentile: cfg.percentile,
            contact_angstrom: cfg.contact_angstrom,
            fp_radius: cfg.fp_radius,
            fp_bits: cfg.fp_bits,
            group_size: cfg.group_size,
        },
        seed,
        similarity,
        descriptor_distributions,
        docked,
        not_docked,
        high_affinity,
        group_comparison: GroupSection { k, rows: group_rows },
        correlations,
        contacts,
        contact_frequencies,
        score_distributions: ScoreDistributions {
            qed: qed_series,
            sas: sas_series,
            reference_skipped,
        },
        leads,
        errors,
        accounting,
        warnings,
    };
    check_invariants(&report)?;
    Ok(report)
}

/// Properties the report must satisfy whatever the inputs.
pub fn check_invariants(r: &ScreeningReport) -> Result<()> {
    let t = r.config.threshold_kcal;
    if let Some(h) = r.high_affinity.iter().find(|h| !(h.energy <= t)) {
        return Err(CliError::Invariant(format!("{} in the high-affinity table at {} kcal/mol", h.label, h.energy)));
    }
    let docked_high = r.docked.iter().filter(|d| d.best_energy <= t).count();
    if docked_high != r.high_affinity.len() {
        return Err(CliError::Invariant(format!(
            "{docked_high} docked ligands pass the filter but the table has {} rows",
            r.high_affinity.len()
        )));
    }
    if let Some(l) = r.leads.iter().find(|l| !r.high_affinity.iter().any(|h| h.label == l.label)) {
        return Err(CliError::Invariant(format!("lead {} is not in the high-affinity table", l.label)));
    }
    if !r.accounting.balanced() {
        return Err(CliError::Invariant(format!("ligand accounting does not balance: {:?}", r.accounting)));
    }
    Ok(())
}

/// Writes the report and its tables into `out`.
pub fn write_outputs(report: &ScreeningReport, out: &Path) -> Result<()> {
    let files = [
        ("report.json", report.to_json()),
        ("poses.csv", report.poses_csv()),
        ("high_affinity.csv", report.high_affinity_csv()),
        ("contacts.csv", report.contacts_csv()),
        ("contact_frequencies.csv", report.contact_frequencies.to_csv()),
        ("correlations.csv", report.correlations_csv()),
        ("leads.csv", report.leads_csv()),
        ("errors.csv", report.errors_csv()),
        ("finetune.smi", report.finetune_smi()),
    ];
    // Tables first, the report last: a present report.json means a complete run.
    for (name, text) in files.iter().rev() {
        write_atomic(&out.join(name), text.as_bytes())?;
    }
    Ok(())
}
