use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use fracgal_cli::compare::compare_reports;
use fracgal_cli::config::{
    resolve, BackendChoice, ConfigPatch, Experiment, Profile, DEFAULT_SEED,
};
use fracgal_cli::experiments::{run_oracles, run_study};
use fracgal_cli::output::{markdown, oracle_lines, summary_passes, write_reports};

/// Convergence studies for Galerkin time stepping of fractional-order
/// evolution equations on graded meshes.
#[derive(Parser)]
#[command(name = "fracgal", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a convergence experiment and write CSV and Markdown reports.
    Run(RunArgs),
    /// Compare two report CSVs cell by cell at a relative tolerance.
    Compare(CompareArgs),
    /// Run the randomized inequality oracle suite.
    Oracles(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Which study to run.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Fractional order; (0,1) for diffusion, (1,2) for wave experiments.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated grading exponents (default: per experiment).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Comma-separated coarse interval counts, powers of two.
    #[arg(long = "grid-J", value_delimiter = ',')]
    grid_j: Option<Vec<usize>>,
    /// Reference interval count (field experiments).
    #[arg(long = "ref-J")]
    ref_j: Option<usize>,
    /// Reference grading exponent (field experiments).
    #[arg(long = "ref-sigma")]
    ref_sigma: Option<f64>,
    /// Spatial cells (field experiments).
    #[arg(long)]
    cells: Option<usize>,
    /// Field solver backend.
    #[arg(long, value_enum)]
    backend: Option<BackendChoice>,
    /// Resource scale; full requires --yes-full.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the reports (default: out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in the fingerprint (and driving the oracle suite).
    #[arg(long)]
    seed: Option<u64>,
    /// Confirm a full-profile run: hours of compute and, for the wave
    /// reference, about 1.1 GB of trajectory storage.
    #[arg(long = "yes-full")]
    yes_full: bool,
    /// Permit interval counts that are not powers of two.
    #[arg(long)]
    allow_any_grid: bool,
}

impl RunArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            experiment: self.experiment,
            alpha: self.alpha,
            sigmas: self.sigma.clone(),
            grids: self.grid_j.clone(),
            reference_intervals: self.ref_j,
            reference_sigma: self.ref_sigma,
            cells: self.cells,
            backend: self.backend,
            seed: self.seed,
            profile: self.profile,
            // A bare flag cannot express "unset"; only an explicit pass
            // overrides the config file.
            allow_any_grid: self.allow_any_grid.then_some(true),
            out_dir: self.out.clone(),
        }
    }
}

#[derive(Args)]
struct CompareArgs {
    /// First report CSV.
    a: PathBuf,
    /// Second report CSV.
    b: PathBuf,
    /// Largest acceptable relative difference per cell.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Args)]
struct OracleArgs {
    /// Seed of the randomized suite; recorded in every outcome.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory to write the text report into (otherwise stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Oracles(args) => cmd_oracles(args.seed, args.out),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let file = args
        .config
        .as_deref()
        .map(ConfigPatch::from_json_file)
        .transpose()?;
    let cfg = resolve(file, args.patch())?;

    if cfg.experiment == Experiment::Oracles {
        return cmd_oracles(cfg.seed, Some(cfg.out_dir));
    }
    if cfg.profile == Profile::Full && !args.yes_full {
        bail!(
            "the full profile runs for hours (reference grid J* = {}, {} spatial cells); \
             pass --yes-full to confirm, or use --profile ci",
            cfg.reference_intervals,
            cfg.cells
        );
    }

    let outcome = run_study(&cfg)?;
    let (csv_path, md_path) = write_reports(&cfg, &outcome)?;
    print!("{}", markdown(&cfg, &outcome));
    println!();
    println!("wrote {}", csv_path.display());
    println!("wrote {}", md_path.display());
    if summary_passes(&outcome) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("observed orders deviate from the declared asymptotics");
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let diffs = compare_reports(&args.a, &args.b, args.tolerance)?;
    if diffs.is_empty() {
        println!(
            "reports agree within relative tolerance {} in every cell",
            args.tolerance
        );
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!(
        "{} cell(s) differ beyond relative tolerance {}:",
        diffs.len(),
        args.tolerance
    );
    for diff in &diffs {
        eprintln!("  {diff}");
    }
    Ok(ExitCode::FAILURE)
}

fn cmd_oracles(seed: u64, out: Option<PathBuf>) -> Result<ExitCode> {
    let run = run_oracles(seed)?;
    let lines = oracle_lines(&run);
    for line in &lines {
        println!("{line}");
    }
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        let path = dir.join(format!("oracles-seed{seed}.txt"));
        fs::write(&path, lines.join("\n") + "\n")?;
        println!("wrote {}", path.display());
    }
    Ok(if run.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
