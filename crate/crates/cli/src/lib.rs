//! Command-line screening pipeline: from a seed drug, a generated ligand set
//! and docking output to a JSON report, per-table CSVs and plot data.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod plotdata;
pub mod report;
pub mod screen;
pub mod svg;
pub mod toolkit;

pub use config::PipelineConfig;
pub use error::CliError;
pub use report::ScreeningReport;
pub use screen::run_screen;
