//! `darboux`: symbolic verification, spectra, classical runs and figure
//! data for the superintegrable oscillator on the Darboux III space.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails
//! or a computation breaks down, 2 on invalid flags.

mod classical;
mod figures;
mod report;
mod spectrum;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use darboux::algebra::{Corruption, Flavor, TheoremPart};
use darboux::ModelParams;

use report::{CliError, Output};

#[derive(Parser, Debug)]
#[command(name = "darboux", version, about = "Superintegrable oscillator on the Darboux III space")]
struct Cli {
    /// Report format; figures always write CSV curves plus JSON sidecars.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Output file (figures: output directory). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random initial conditions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Omit the generation time so reports are byte-reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the commutation relations of a quantum Hamiltonian symbolically.
    Verify(VerifyArgs),
    /// Compute bound-state energies and compare with the closed form.
    Spectrum(SpectrumArgs),
    /// Integrate a random bounded orbit and check its constants of motion.
    Classical(ClassicalArgs),
    /// Write the curve data behind the five figures.
    Figures(FiguresArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Dimension N.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0.02)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.dim, self.lambda, self.omega, self.hbar).map_err(CliError::from)
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
    dim: u8,
    /// schrodinger, tlb or tpdm.
    #[arg(long, default_value = "tlb")]
    flavor: Flavor,
    /// Comma-separated theorem parts: i, ii, sl2, identities, adjoint.
    #[arg(long, value_delimiter = ',')]
    parts: Vec<TheoremPart>,
    /// Fault injection, e.g. `I11` drops the oscillator term of I_11.
    #[arg(long)]
    corrupt: Option<Corruption>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpectrumFlavor {
    Schrodinger,
    Tlb,
    Tpdm,
    All,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Angular momentum quantum number.
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    levels: u64,
    /// Grid points on the flattened radial line.
    #[arg(long, default_value_t = darboux::spectra::radial::DEFAULT_POINTS)]
    grid: usize,
    /// Box size in the flattened coordinate; chosen from the eigenfunction tails when absent.
    #[arg(long)]
    qmax: Option<f64>,
    /// `all` adds independent discretizations of the three radial operators.
    #[arg(long, value_enum, default_value_t = SpectrumFlavor::Tlb)]
    flavor: SpectrumFlavor,
}

#[derive(Args, Debug)]
pub struct ClassicalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Number of recorded samples.
    #[arg(long, default_value_t = 1001)]
    samples: usize,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    /// Figures to write (1-5); all when absent.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=5))]
    which: Vec<u8>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = Output { format: cli.format, path: cli.out.clone(), seed: cli.seed, timestamp: !cli.no_timestamp };
    let result = match &cli.command {
        Command::Verify(a) => verify::run(a, &output),
        Command::Spectrum(a) => spectrum::run(a, &output),
        Command::Classical(a) => classical::run(a, &output),
        Command::Figures(a) => figures::run(a, &output),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("darboux: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
