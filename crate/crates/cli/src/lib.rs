//! Command-line front end: flux-qubit sweeps, spectra, single distance runs
//! and the reference-case suite, written as CSV or JSON.

pub mod config;
pub mod distance;
pub mod error;
pub mod oracles;
pub mod output;
pub mod spectrum;
pub mod sweep;

use clap::{Parser, Subcommand};

use crate::config::{Flags, Mode, Settings};
pub use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "catsize", version, about = "Many-body cat size of the three-junction flux qubit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cat size, current, charge fluctuation and gap over an (alpha, E_J/E_C) grid
    Sweep(Flags),
    /// Lowest levels against frustration and the ground-state current distribution
    Spectrum(Flags),
    /// Distance distribution between the current states at one point
    Distance(Flags),
    /// Closed-form and hand-built reference checks
    Oracles(Flags),
}

pub fn run(cli: Cli) -> Result<()> {
    let (mode, flags) = match cli.command {
        Command::Sweep(f) => (Mode::Sweep, f),
        Command::Spectrum(f) => (Mode::Spectrum, f),
        Command::Distance(f) => (Mode::Distance, f),
        Command::Oracles(f) => (Mode::Oracles, f),
    };
    let settings = Settings::resolve(mode, flags)?;
    log::debug!("{settings:?}");
    match mode {
        Mode::Sweep => {
            let rows = sweep::run_sweep(&settings)?;
            output::emit(&settings, &sweep::render(&settings, &rows)?)
        }
        Mode::Spectrum => {
            let spectrum = spectrum::run_spectrum(&settings)?;
            output::emit(&settings, &spectrum::render(&settings, &spectrum)?)
        }
        Mode::Distance => {
            let report = distance::run_distance(&settings)?;
            output::emit(&settings, &distance::render(&settings, &report)?)
        }
        Mode::Oracles => {
            let report = oracles::run_oracles();
            output::emit(&settings, &oracles::render(&settings, &report)?)?;
            match report.failures() {
                0 => Ok(()),
                failed => Err(CliError::OracleFailure { failed, total: report.checks.len() }),
            }
        }
    }
}
