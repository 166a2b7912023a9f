//! Flags, the flat TOML config they mirror, and the merged settings.
//!
//! Every flag `--some-key` has a config key `some-key`. A flag given on the
//! command line overrides the file; anything set in neither takes the
//! subcommand's default.

use std::path::{Path, PathBuf};

use catsize::{DistanceOptions, Extraction, FluxQubitParams, OperatorSetKind};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSetChoice {
    #[value(name = "hops_and_numbers")]
    HopsAndNumbers,
    #[value(name = "hops_only")]
    HopsOnly,
}

impl From<OperatorSetChoice> for OperatorSetKind {
    fn from(c: OperatorSetChoice) -> Self {
        match c {
            OperatorSetChoice::HopsAndNumbers => OperatorSetKind::HopsAndNumbers,
            OperatorSetChoice::HopsOnly => OperatorSetKind::HopsOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionChoice {
    #[value(name = "two_level")]
    TwoLevel,
    #[value(name = "filter")]
    Filter,
}

impl From<ExtractionChoice> for Extraction {
    fn from(c: ExtractionChoice) -> Self {
        match c {
            ExtractionChoice::TwoLevel => Extraction::TwoLevel,
            ExtractionChoice::Filter => Extraction::Filter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand; doubles as the config-file schema.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Flat TOML file with the same keys as these flags
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Comma-separated E_J/E_C values
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub ej_over_ec: Option<Vec<f64>>,

    /// Comma-separated small-junction ratios, each in (0, 1]
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub alpha: Option<Vec<f64>>,

    /// Magnetic frustration (flux in units of the flux quantum)
    #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
    pub f: Option<f64>,

    /// Charge cutoff: |n1|, |n2| <= delta-n
    #[arg(long, value_name = "INT")]
    pub delta_n: Option<i64>,

    /// Deepest distance generated
    #[arg(long, value_name = "INT")]
    pub d_max: Option<usize>,

    /// Relative singular-value cutoff for the rank of each new space
    #[arg(long, value_name = "REAL")]
    pub rank_tol: Option<f64>,

    /// Stop once all but this much of the target weight is captured
    #[arg(long, value_name = "REAL")]
    pub weight_tol: Option<f64>,

    #[arg(long, value_enum)]
    pub operator_set: Option<OperatorSetChoice>,

    #[arg(long, value_enum)]
    pub extraction: Option<ExtractionChoice>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Output file; standard output when absent
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Worker threads; all cores when absent
    #[arg(long, value_name = "INT")]
    pub jobs: Option<usize>,

    /// spectrum: number of evenly spaced frustration values on [0, 1]
    #[arg(long, value_name = "INT")]
    pub f_points: Option<usize>,

    /// spectrum: number of lowest levels reported
    #[arg(long, value_name = "INT")]
    pub levels: Option<usize>,
}

fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match OneOrMany::deserialize(de)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

impl Flags {
    fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.to_owned(), source })?;
        toml::from_str(&text).map_err(|source| CliError::ParseConfig { path: path.to_owned(), source })
    }

    /// Values from `self` where set, otherwise from `file`.
    fn over(self, file: Flags) -> Flags {
        Flags {
            config: self.config,
            ej_over_ec: self.ej_over_ec.or(file.ej_over_ec),
            alpha: self.alpha.or(file.alpha),
            f: self.f.or(file.f),
            delta_n: self.delta_n.or(file.delta_n),
            d_max: self.d_max.or(file.d_max),
            rank_tol: self.rank_tol.or(file.rank_tol),
            weight_tol: self.weight_tol.or(file.weight_tol),
            operator_set: self.operator_set.or(file.operator_set),
            extraction: self.extraction.or(file.extraction),
            format: self.format.or(file.format),
            output: self.output.or(file.output),
            jobs: self.jobs.or(file.jobs),
            f_points: self.f_points.or(file.f_points),
            levels: self.levels.or(file.levels),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sweep,
    Spectrum,
    Distance,
    Oracles,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::Spectrum => "spectrum",
            Mode::Distance => "distance",
            Mode::Oracles => "oracles",
        }
    }
}

/// Fully resolved settings. Serializes to the echo written at the top of
/// every output; `output` and `jobs` are left out of the echo since they do
/// not affect results.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Settings {
    pub ej_over_ec: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f: f64,
    pub delta_n: i64,
    pub d_max: usize,
    pub rank_tol: f64,
    pub weight_tol: f64,
    pub operator_set: OperatorSetChoice,
    pub extraction: ExtractionChoice,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn resolve(mode: Mode, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => Flags::read(path)?,
            None => Flags::default(),
        };
        let merged = flags.over(file);
        let defaults = DistanceOptions::default();
        let (ej_default, alpha_default) = match mode {
            Mode::Sweep => (vec![2.0, 5.0, 10.0, 20.0, 50.0], vec![1.0, 0.8]),
            _ => (vec![20.0], vec![1.0]),
        };
        let spectrum = mode == Mode::Spectrum;
        let settings = Settings {
            ej_over_ec: merged.ej_over_ec.unwrap_or(ej_default),
            alpha: merged.alpha.unwrap_or(alpha_default),
            f: merged.f.unwrap_or(0.5),
            delta_n: merged.delta_n.unwrap_or(6),
            d_max: merged.d_max.unwrap_or(defaults.d_max),
            rank_tol: merged.rank_tol.unwrap_or(defaults.rank_tol),
            weight_tol: merged.weight_tol.unwrap_or(defaults.weight_tol),
            operator_set: merged.operator_set.unwrap_or(OperatorSetChoice::HopsAndNumbers),
            extraction: merged.extraction.unwrap_or(ExtractionChoice::TwoLevel),
            format: merged.format.unwrap_or(if mode == Mode::Oracles { Format::Json } else { Format::Csv }),
            f_points: spectrum.then(|| merged.f_points.unwrap_or(41)),
            levels: spectrum.then(|| merged.levels.unwrap_or(6)),
            output: merged.output,
            jobs: merged.jobs,
        };
        settings.validate(mode)?;
        Ok(settings)
    }

    fn validate(&self, mode: Mode) -> Result<()> {
        let bad = |msg: String| Err(CliError::Parameter(msg));
        if self.ej_over_ec.is_empty() || self.alpha.is_empty() {
            return bad("ej-over-ec and alpha lists must be nonempty".into());
        }
        if matches!(mode, Mode::Spectrum | Mode::Distance) && (self.ej_over_ec.len() > 1 || self.alpha.len() > 1) {
            return bad(format!("{} takes a single ej-over-ec and alpha", mode.name()));
        }
        if let Some(r) = self.ej_over_ec.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return bad(format!("ej-over-ec must be positive and finite, got {r}"));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return bad(format!("alpha must lie in (0, 1], got {a}"));
        }
        if !self.f.is_finite() {
            return bad(format!("f must be finite, got {}", self.f));
        }
        if self.delta_n < 1 {
            return bad(format!("delta-n must be at least 1, got {}", self.delta_n));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return bad(format!("rank-tol must lie in (0, 1), got {}", self.rank_tol));
        }
        if !(self.weight_tol >= 0.0 && self.weight_tol < 1.0) {
            return bad(format!("weight-tol must lie in [0, 1), got {}", self.weight_tol));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.f_points.is_some_and(|n| n < 2) {
            return bad("f-points must be at least 2".into());
        }
        if let Some(k) = self.levels {
            let states = (2 * self.delta_n + 1).pow(2) as usize;
            if k < 2 || k > states {
                return bad(format!("levels must lie in [2, {states}], got {k}"));
            }
        }
        Ok(())
    }

    pub fn params(&self, ej_over_ec: f64, alpha: f64) -> Result<FluxQubitParams> {
        Ok(FluxQubitParams::new(ej_over_ec, alpha, self.f, self.delta_n)?)
    }

    pub fn distance_options(&self) -> DistanceOptions {
        DistanceOptions { d_max: self.d_max, rank_tol: self.rank_tol, weight_tol: self.weight_tol }
    }

    /// `# `-prefixed lines naming the command and echoing every setting.
    pub fn echo(&self, mode: Mode) -> String {
        let body = toml::to_string(self).expect("settings always serialize");
        let mut out = format!("# catsize {} {}\n", env!("CARGO_PKG_VERSION"), mode.name());
        for line in body.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
