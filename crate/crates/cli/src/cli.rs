//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use screenlab_core::contacts::{contact_frequencies, PolarGrid};
use screenlab_core::druglikeness::{fit_sas, lipinski};
use screenlab_core::fingerprints::{DEFAULT_RADIUS, DEFAULT_WIDTH};
use screenlab_core::molgraph::canonical_smiles;
use screenlab_core::molgraph::smi::read_smi;
use screenlab_core::parse_smiles;
use screenlab_core::structio::{best_pose, parse_pdb, parse_vina_poses, PdbOptions};

use crate::config::{check_fingerprint, PipelineConfig, Settings, DEFAULT_CONTACT_ANGSTROM, DEFAULT_PERCENTILE};
use crate::error::{CliError, Result, EXIT_OK, EXIT_USAGE};
use crate::io::{csv_field, num, read_text, write_atomic};
use crate::screen::{run_screen, select_above, similarities, similarity_set, write_outputs};
use crate::toolkit::{unique_labels, Toolkit};
use crate::plotdata;

#[derive(Debug, Parser)]
#[command(name = "screenlab", version, about = "Ligand similarity, druglikeness and docking-result screening")]
pub struct Cli {
    /// Worker threads for per-ligand stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FpArgs {
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub fp_radius: u32,
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    pub fp_bits: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a .smi file and print canonical SMILES.
    Parse {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptor, rule-of-five, QED and SAS table for a .smi file.
    Descriptors {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Similarity of a set to a seed and the above-percentile subset.
    Similarity {
        #[arg(long)]
        seed: String,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PERCENTILE)]
        percentile: f64,
        #[command(flatten)]
        fp: FpArgs,
        /// Directory for similarity.csv and finetune.smi.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a fragment contribution table for synthetic accessibility.
    FitSas {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Free-text provenance stored in the table header.
        #[arg(long)]
        provenance: Option<String>,
    },
    /// Run the screening pipeline and write the report.
    Screen(ScreenArgs),
    /// Per-panel CSVs and SVG sketches from a report.
    Plotdata {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Polar contacts of the best pose in each PDBQT file.
    Contacts {
        #[arg(long)]
        receptor: PathBuf,
        #[arg(long)]
        chain: Option<char>,
        /// A PDBQT file or a directory of them.
        #[arg(long)]
        poses: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CONTACT_ANGSTROM)]
        contact_angstrom: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// key = value settings; flags override them.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed_smiles: Option<String>,
    #[arg(long)]
    pub seed_name: Option<String>,
    #[arg(long)]
    pub generated: Option<PathBuf>,
    #[arg(long)]
    pub training_set: Option<PathBuf>,
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[arg(long)]
    pub receptor: Option<PathBuf>,
    #[arg(long)]
    pub receptor_chain: Option<char>,
    #[arg(long)]
    pub fda_reference: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub threshold_kcal: Option<f64>,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[arg(long)]
    pub contact_angstrom: Option<f64>,
    #[arg(long)]
    pub fp_radius: Option<u32>,
    #[arg(long)]
    pub fp_bits: Option<usize>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ScreenArgs {
    pub fn config(&self, jobs: Option<usize>) -> Result<PipelineConfig> {
        let mut s = match &self.config {
            Some(p) => Settings::parse_file(p)?,
            None => Settings::default(),
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags: [(&str, Option<String>); 16] = [
            ("seed_smiles", self.seed_smiles.clone()),
            ("seed_name", self.seed_name.clone()),
            ("generated", path(&self.generated)),
            ("training_set", path(&self.training_set)),
            ("poses", path(&self.poses)),
            ("receptor", path(&self.receptor)),
            ("receptor_chain", self.receptor_chain.map(String::from)),
            ("fda_reference", path(&self.fda_reference)),
            ("threshold_kcal", self.threshold_kcal.map(|v| v.to_string())),
            ("percentile", self.percentile.map(|v| v.to_string())),
            ("contact_angstrom", self.contact_angstrom.map(|v| v.to_string())),
            ("fp_radius", self.fp_radius.map(|v| v.to_string())),
            ("fp_bits", self.fp_bits.map(|v| v.to_string())),
            ("group_size", self.group_size.map(|v| v.to_string())),
            ("jobs", jobs.map(|v| v.to_string())),
            ("out", path(&self.out)),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        s.into_config()
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("screenlab: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = pool.build().map_err(|e| CliError::Invariant(format!("thread pool: {e}")))?;
    let jobs = cli.jobs;
    pool.install(move || dispatch(cli.command, jobs))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn dispatch(cmd: Command, jobs: Option<usize>) -> Result<()> {
    match cmd {
        Command::Parse { input, out } => cmd_parse(&input, out.as_deref()),
        Command::Descriptors { input, out } => cmd_descriptors(&input, out.as_deref()),
        Command::Similarity {
            seed,
            set,
            percentile,
            fp,
            out,
        } => cmd_similarity(&seed, &set, percentile, &fp, out.as_deref()),
        Command::FitSas { corpus, out, provenance } => cmd_fit_sas(&corpus, &out, provenance),
        Command::Screen(args) => {
            let cfg = args.config(jobs)?;
            let report = run_screen(&cfg)?;
            write_outputs(&report, &cfg.out)?;
            let a = &report.accounting;
            eprintln!(
                "screenlab: {} records, {} docked, {} high affinity, {} leads, {} errors, {} not docked; report in {}",
                a.smi_records,
                a.docked,
                a.high_affinity,
                report.leads.len(),
                a.errors,
                a.not_docked,
                cfg.out.display()
            );
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Plotdata { report, out } => {
            let r = plotdata::load_report(&report)?;
            let files = plotdata::write_plotdata(&r, &out)?;
            eprintln!("screenlab: wrote {} files to {}", files.len(), out.display());
            Ok(())
        }
        Command::Contacts {
            receptor,
            chain,
            poses,
            contact_angstrom,
            out,
        } => cmd_contacts(&receptor, chain, &poses, contact_angstrom, out.as_deref()),
    }
}

fn cmd_parse(input: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_smi(&read_text(input)?);
    let parsed: Vec<_> = records.par_iter().map(|r| r.parse().map(|m| canonical_smiles(&m))).collect();
    let mut text = String::new();
    let mut failed = 0;
    for (r, p) in records.iter().zip(parsed) {
        match p {
            Ok(s) => {
                text.push_str(&s);
                if let Some(n) = &r.name {
                    text.push(' ');
                    text.push_str(n);
                }
                text.push('\n');
            }
            Err(e) => {
                failed += 1;
                eprintln!("{}:{}: {e}", input.display(), r.line);
            }
        }
    }
    emit(out, &text)?;
    eprintln!("screenlab: {} parsed, {failed} skipped", records.len() - failed);
    Ok(())
}

fn cmd_descriptors(input: &Path, out: Option<&Path>) -> Result<()> {
    let tk = Toolkit::load(DEFAULT_RADIUS, DEFAULT_WIDTH)?;
    let records = read_smi(&read_text(input)?);
    let rows: Vec<std::result::Result<String, String>> = records
        .par_iter()
        .map(|r| {
            let m = r.parse().map_err(|e| e.to_string())?;
            let d = tk.descriptors(&m);
            let rules = lipinski(&d);
            let qed = tk.qed(&d).ok();
            let sas = tk.sas(&m).ok();
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&r.label()),
                d.mw,
                d.lp,
                d.tpsa,
                d.hbd,
                d.hba,
                d.aromatic_rings,
                d.carboxylic_acids,
                d.rotatable_bonds,
                d.alerts,
                rules.violations,
                rules.failed().join(";"),
                num(qed),
                num(sas)
            ))
        })
        .collect();
    let mut text = String::from(
        "label,mw,lp,tpsa,hbd,hba,aromatic_rings,carboxylic_acids,rotatable_bonds,alerts,lipinski_violations,failed_rules,qed,sas\n",
    );
    let mut failed = 0;
    for (r, row) in records.iter().zip(rows) {
        match row {
            Ok(line) => text.push_str(&line),
            Err(e) => {
                failed += 1;
                eprintln!("{}:{}: {e}", input.display(), r.line);
            }
        }
    }
    emit(out, &text)?;
    eprintln!("screenlab: {} rows, {failed} skipped", records.len() - failed);
    Ok(())
}

fn cmd_similarity(seed: &str, set: &Path, p: f64, fp: &FpArgs, out: Option<&Path>) -> Result<()> {
    if !(0.0..=100.0).contains(&p) {
        return Err(CliError::Usage("--percentile must lie in [0, 100]".into()));
    }
    check_fingerprint(fp.fp_radius, fp.fp_bits)?;
    let tk = Toolkit::load(fp.fp_radius, fp.fp_bits)?;
    let seed_mol = parse_smiles(seed).map_err(|e| CliError::input(format!("seed SMILES does not parse: {e}")))?;
    let seed_fp = tk.fingerprint(&seed_mol);
    let records = read_smi(&read_text(set)?);
    unique_labels(&records, &set.display().to_string())?;
    let (sims, skipped) = similarities(&tk, &seed_fp, &records);
    let summary = similarity_set("set", &sims, skipped);
    let (cutoff, selected) = select_above(&sims, p);
    let json = serde_json::json!({
        "count": summary.count,
        "skipped": skipped,
        "median": summary.median,
        "percentile": p,
        "cutoff": cutoff,
        "selected": selected.len(),
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
    if let Some(dir) = out {
        let mut csv = String::from("label,similarity\n");
        for (r, s) in &sims {
            csv.push_str(&format!("{},{s}\n", csv_field(&r.label())));
        }
        write_atomic(&dir.join("similarity.csv"), csv.as_bytes())?;
        let smi: String = selected.iter().map(|f| format!("{} {}\n", f.smiles, f.label)).collect();
        write_atomic(&dir.join("finetune.smi"), smi.as_bytes())?;
    }
    if skipped > 0 {
        eprintln!("screenlab: {skipped} record(s) did not parse and were skipped");
    }
    Ok(())
}

fn cmd_fit_sas(corpus: &Path, out: &Path, provenance: Option<String>) -> Result<()> {
    let records = read_smi(&read_text(corpus)?);
    let mut mols = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for r in &records {
        match r.parse() {
            Ok(m) => mols.push(m),
            Err(e) => {
                skipped += 1;
                eprintln!("{}:{}: {e}", corpus.display(), r.line);
            }
        }
    }
    let provenance = provenance.unwrap_or_else(|| corpus.display().to_string());
    let table = fit_sas(&mols, &provenance).map_err(|e| CliError::input(e.to_string()))?;
    write_atomic(out, table.to_text().as_bytes())?;
    eprintln!("screenlab: {} fragments from {} molecules ({skipped} skipped)", table.len(), mols.len());
    Ok(())
}

fn cmd_contacts(receptor: &Path, chain: Option<char>, poses: &Path, t: f64, out: Option<&Path>) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(CliError::Usage("--contact-angstrom must be positive".into()));
    }
    let r = parse_pdb::<f64>(&read_text(receptor)?, &PdbOptions::receptor(chain))
        .map_err(|e| CliError::input(format!("{}: {e}", receptor.display())))?;
    let files: Vec<PathBuf> = if poses.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(poses)
            .map_err(|e| CliError::io(poses, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("pdbqt"))
            .collect();
        v.sort();
        v
    } else {
        vec![poses.to_path_buf()]
    };
    let grid = PolarGrid::new(&r);
    let mut per_ligand = Vec::new();
    let mut csv = String::from("ligand_label,pose_rank,energy,residue_label,chain,residue_atom,ligand_atom_index,distance\n");
    for f in &files {
        let label = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let ps = parse_vina_poses::<f64>(&read_text(f)?, &label).map_err(|e| CliError::input(format!("{}: {e}", f.display())))?;
        let best = best_pose(&ps).expect("parser returns at least one pose");
        let c = grid.contacts(best, t);
        for x in &c {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                csv_field(&label),
                best.pose_rank,
                best.binding_energy,
                x.residue_label,
                x.chain,
                x.residue_atom,
                x.ligand_atom_index,
                x.distance
            ));
        }
        per_ligand.push(c);
    }
    let freq = contact_frequencies(&per_ligand);
    match out {
        Some(dir) => {
            write_atomic(&dir.join("contacts.csv"), csv.as_bytes())?;
            write_atomic(&dir.join("contact_frequencies.csv"), freq.to_csv().as_bytes())?;
        }
        None => emit(None, &freq.to_csv())?,
    }
    Ok(())
}
