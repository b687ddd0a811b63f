//! `hybrid-ep`: deterministic CSV/JSON sweeps over the flux-qubit ⊗
//! NV-ensemble model. Exit codes: 0 success, 2 config or I/O error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, EffectiveConfig, Normalization, SectionConfig};
use output::Emitter;

#[derive(Parser)]
#[command(
    name = "hybrid-ep",
    version,
    about = "Exceptional points, non-Hermitian evolution, and cat-state tomography \
             of the flux-qubit / NV-ensemble hybrid model"
)]
struct Cli {
    /// TOML run configuration; omit for working-point defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for CSV + manifest outputs (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps; default: all cores. Results are ordered
    /// deterministically regardless.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Normalization of the evolved state in `evolve` outputs.
    #[arg(long, global = true, value_enum, value_name = "unit|trace")]
    normalization: Option<Normalization>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Eigenvalue sweep over α or γ (analytic + numerical rows).
    Spectrum,
    /// Exceptional-point loci over an α window (optionally × a γ grid).
    EpScan,
    /// Bisect the steady-state ⟨S_z⟩ sign change to the cat locus.
    CatLocus,
    /// Time evolution: P(t) entries, survival, spin moments, squeezing.
    Evolve,
    /// SU(2) Wigner function of the evolved NV reduction on a (θ,φ) grid.
    Wigner,
    /// Holstein–Primakoff boson spectrum vs exact diagonalization.
    HpCompare,
}

impl Cmd {
    fn section_name(self) -> &'static str {
        match self {
            Cmd::Spectrum => "spectrum",
            Cmd::EpScan => "ep-scan",
            Cmd::CatLocus => "cat-locus",
            Cmd::Evolve => "evolve",
            Cmd::Wigner => "wigner",
            Cmd::HpCompare => "hp-compare",
        }
    }
}

pub enum RunError {
    Config(String),
    Io(std::io::Error),
    Lib(hybrid_ep::Error),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Lib(hybrid_ep::Error::Invalid(_)) => 2,
            RunError::Lib(hybrid_ep::Error::Numerical(_)) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            RunError::Config(m) => format!("config error: {m}"),
            RunError::Io(e) => format!("io error: {e}"),
            RunError::Lib(e) => format!("{e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<hybrid_ep::Error> for RunError {
    fn from(e: hybrid_ep::Error) -> Self {
        RunError::Lib(e)
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, RunError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(RunError::Config("--workers must be ≥ 1".into()));
        }
        // Ignore the error if a pool already exists (only possible in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let name = cli.command.section_name();
    let loaded = config::load(cli.config.as_deref(), name)?;

    // Flag beats config; `unit` is the default convention.
    let norm = cli.normalization.or(match &loaded.section {
        SectionConfig::Evolve(s) => s.normalization,
        _ => None,
    });
    let norm = norm.unwrap_or(Normalization::Unit);

    let effective = EffectiveConfig::new(name, &loaded.model, &loaded.section, norm.as_str());
    let mut em = Emitter::new(&cli.out, name, &effective)?;

    match &loaded.section {
        SectionConfig::Spectrum(s) => commands::cmd_spectrum(&loaded.model, s, &mut em)?,
        SectionConfig::EpScan(s) => commands::cmd_ep_scan(&loaded.model, s, &mut em)?,
        SectionConfig::CatLocus(s) => commands::cmd_cat_locus(&loaded.model, s, &mut em)?,
        SectionConfig::Evolve(s) => commands::cmd_evolve(&loaded.model, s, norm, &mut em)?,
        SectionConfig::Wigner(s) => commands::cmd_wigner(&loaded.model, s, &mut em)?,
        SectionConfig::HpCompare(s) => commands::cmd_hp_compare(&loaded.model, s, &mut em)?,
    }
    Ok(em.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hybrid-ep: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
