//! Distance between the two current states at one parameter point, in both
//! directions.

use catsize::{distance, DistanceDistribution, FluxQubit, OperatorSet};
use serde::Serialize;

use crate::config::{Format, Mode, Settings};
use crate::error::Result;
use crate::output::{self, real, CsvDoc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub p: Vec<f64>,
    pub mean_distance: f64,
    pub residual: f64,
    pub chain_dims: Vec<usize>,
    pub exhausted: bool,
}

impl From<DistanceDistribution> for Direction {
    fn from(d: DistanceDistribution) -> Self {
        Self { p: d.weights, mean_distance: d.mean, residual: d.residual, chain_dims: d.dims, exhausted: d.exhausted }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    /// `|+I>` to `|-I>`.
    pub forward: Direction,
    /// `|-I>` to `|+I>`.
    pub reverse: Direction,
    pub current: f64,
    pub excluded_weight: f64,
    pub charge_fluctuation: f64,
    pub gap: f64,
}

pub fn run_distance(settings: &Settings) -> Result<DistanceReport> {
    let qubit = FluxQubit::new(settings.params(settings.ej_over_ec[0], settings.alpha[0])?)?;
    let pair = qubit.current_states(settings.extraction.into(), catsize::measure::FILTER_WEIGHT_FLOOR)?;
    let ops = OperatorSet::single_particle(qubit.basis(), settings.operator_set.into())?;
    let opts = settings.distance_options();
    let forward = distance(&pair.plus, &pair.minus, &ops, &opts)?;
    let reverse = distance(&pair.minus, &pair.plus, &ops, &opts)?;
    Ok(DistanceReport {
        forward: forward.into(),
        reverse: reverse.into(),
        current: pair.current,
        excluded_weight: pair.excluded_weight,
        charge_fluctuation: qubit.charge_fluctuation(),
        gap: qubit.gap(),
    })
}

pub fn render(settings: &Settings, report: &DistanceReport) -> Result<Vec<u8>> {
    match settings.format {
        Format::Csv => {
            let mut doc = CsvDoc::new(settings, Mode::Distance);
            doc.comment("table: distribution");
            let (fw, rv) = (&report.forward, &report.reverse);
            let depth = fw.p.len().max(rv.p.len());
            let cell = |v: &[f64], d: usize| real(v.get(d).copied().unwrap_or(0.0));
            let dim = |v: &[usize], d: usize| v.get(d).map(usize::to_string).unwrap_or_default();
            doc.table(
                &["d", "p_forward", "p_reverse", "dim_forward", "dim_reverse"].map(String::from),
                (0..depth).map(|d| {
                    vec![d.to_string(), cell(&fw.p, d), cell(&rv.p, d), dim(&fw.chain_dims, d), dim(&rv.chain_dims, d)]
                }),
            )?;
            doc.comment("table: summary");
            let summary = [
                ("mean_distance_forward", real(fw.mean_distance)),
                ("mean_distance_reverse", real(rv.mean_distance)),
                ("residual_forward", real(fw.residual)),
                ("residual_reverse", real(rv.residual)),
                ("exhausted_forward", fw.exhausted.to_string()),
                ("exhausted_reverse", rv.exhausted.to_string()),
                ("current", real(report.current)),
                ("excluded_weight", real(report.excluded_weight)),
                ("charge_fluctuation", real(report.charge_fluctuation)),
                ("gap", real(report.gap)),
            ];
            doc.table(
                &["quantity", "value"].map(String::from),
                summary.into_iter().map(|(k, v)| vec![k.to_string(), v]),
            )?;
            Ok(doc.into_bytes())
        }
        Format::Json => output::json(settings, Mode::Distance, report),
    }
}
