//! One row per `(alpha, E_J/E_C)` grid point: the cat size between the two
//! current states plus ground-state diagnostics.

use catsize::{distance, FluxQubit, OperatorSet};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Mode, Settings};
use crate::error::{CliError, Result};
use crate::output::{self, maybe_real, real, CsvDoc};

/// Tolerance on a drop in mean distance before a row is flagged.
const NONMONOTONIC_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub ej_over_ec: f64,
    pub alpha: f64,
    pub mean_distance: Option<f64>,
    /// `P(D = d)` for `d = 0 ..= d_max`, zero beyond the depth reached.
    pub p: Vec<f64>,
    pub residual: Option<f64>,
    pub current: Option<f64>,
    pub charge_fluctuation: Option<f64>,
    pub gap: Option<f64>,
    pub excluded_weight: Option<f64>,
    pub chain_dims: Vec<usize>,
    pub exhausted: Option<bool>,
    /// Mean distance fell relative to the previous E_J/E_C at the same alpha.
    pub nonmonotonic: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(ej_over_ec: f64, alpha: f64) -> Self {
        Self {
            ej_over_ec,
            alpha,
            mean_distance: None,
            p: Vec::new(),
            residual: None,
            current: None,
            charge_fluctuation: None,
            gap: None,
            excluded_weight: None,
            chain_dims: Vec::new(),
            exhausted: None,
            nonmonotonic: false,
            error: None,
        }
    }
}

/// Grid points in output order: alpha outer, E_J/E_C inner.
pub fn grid(settings: &Settings) -> Vec<(f64, f64)> {
    settings
        .alpha
        .iter()
        .flat_map(|&a| settings.ej_over_ec.iter().map(move |&r| (r, a)))
        .collect()
}

/// Evaluates one point; failures land in `error` with whatever was computed
/// before them.
pub fn evaluate(settings: &Settings, ej_over_ec: f64, alpha: f64) -> SweepRow {
    let mut row = SweepRow::empty(ej_over_ec, alpha);
    if let Err(e) = fill(settings, &mut row) {
        log::warn!("E_J/E_C = {ej_over_ec}, alpha = {alpha}: {e}");
        row.error = Some(e.to_string());
    }
    row
}

fn fill(settings: &Settings, row: &mut SweepRow) -> Result<()> {
    let qubit = FluxQubit::new(settings.params(row.ej_over_ec, row.alpha)?)?;
    row.gap = Some(qubit.gap());
    row.charge_fluctuation = Some(qubit.charge_fluctuation());
    let pair = qubit.current_states(settings.extraction.into(), catsize::measure::FILTER_WEIGHT_FLOOR)?;
    row.current = Some(pair.current);
    row.excluded_weight = Some(pair.excluded_weight);
    let ops = OperatorSet::single_particle(qubit.basis(), settings.operator_set.into())?;
    let dist = distance(&pair.plus, &pair.minus, &ops, &settings.distance_options())?;
    row.p = (0..=settings.d_max).map(|d| dist.p(d)).collect();
    row.mean_distance = Some(dist.mean);
    row.residual = Some(dist.residual);
    row.chain_dims = dist.dims;
    row.exhausted = Some(dist.exhausted);
    log::info!(
        "E_J/E_C = {}, alpha = {}: mean distance {:.6}",
        row.ej_over_ec,
        row.alpha,
        dist.mean
    );
    Ok(())
}

fn flag_nonmonotonic(rows: &mut [SweepRow]) {
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        if prev.alpha != cur.alpha {
            continue;
        }
        if let (Some(a), Some(b)) = (prev.mean_distance, cur.mean_distance) {
            rows[k].nonmonotonic = b < a - NONMONOTONIC_TOL;
        }
    }
}

pub fn pool(settings: &Settings) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Parameter(format!("cannot start {:?} workers: {e}", settings.jobs)))
}

pub fn run_sweep(settings: &Settings) -> Result<Vec<SweepRow>> {
    let points = grid(settings);
    let mut rows: Vec<SweepRow> =
        pool(settings)?.install(|| points.par_iter().map(|&(r, a)| evaluate(settings, r, a)).collect());
    flag_nonmonotonic(&mut rows);
    Ok(rows)
}

pub fn header(d_max: usize) -> Vec<String> {
    let mut h: Vec<String> = ["ej_over_ec", "alpha", "mean_distance"].map(String::from).to_vec();
    h.extend((0..=d_max).map(|d| format!("p{d}")));
    h.extend(
        [
            "residual",
            "current",
            "charge_fluctuation",
            "gap",
            "excluded_weight",
            "chain_dims",
            "exhausted",
            "nonmonotonic",
            "error",
        ]
        .map(String::from),
    );
    h
}

fn record(row: &SweepRow, d_max: usize) -> Vec<String> {
    let mut rec = vec![real(row.ej_over_ec), real(row.alpha), maybe_real(row.mean_distance)];
    rec.extend((0..=d_max).map(|d| if row.p.is_empty() { String::new() } else { real(row.p[d]) }));
    rec.extend([
        maybe_real(row.residual),
        maybe_real(row.current),
        maybe_real(row.charge_fluctuation),
        maybe_real(row.gap),
        maybe_real(row.excluded_weight),
        row.chain_dims.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
        row.exhausted.map(|e| e.to_string()).unwrap_or_default(),
        row.nonmonotonic.to_string(),
        row.error.clone().unwrap_or_default(),
    ]);
    rec
}

pub fn render(settings: &Settings, rows: &[SweepRow]) -> Result<Vec<u8>> {
    match settings.format {
        Format::Csv => {
            let mut doc = CsvDoc::new(settings, Mode::Sweep);
            doc.table(&header(settings.d_max), rows.iter().map(|r| record(r, settings.d_max)))?;
            Ok(doc.into_bytes())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [SweepRow],
            }
            output::json(settings, Mode::Sweep, Body { rows })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Flags;

    fn settings(flags: Flags) -> Settings {
        Settings::resolve(Mode::Sweep, flags).unwrap()
    }

    #[test]
    fn grid_is_alpha_major() {
        let s = settings(Flags {
            ej_over_ec: Some(vec![5.0, 20.0]),
            alpha: Some(vec![1.0, 0.8]),
            ..Default::default()
        });
        assert_eq!(grid(&s), vec![(5.0, 1.0), (20.0, 1.0), (5.0, 0.8), (20.0, 0.8)]);
    }

    #[test]
    fn rows_complete_or_carry_an_error() {
        let s = settings(Flags {
            extraction: Some(crate::config::ExtractionChoice::Filter),
            delta_n: Some(2),
            ..Default::default()
        });
        let row = evaluate(&s, 20.0, 1.0);
        assert!(row.error.is_none(), "{:?}", row.error);
        assert_eq!(row.p.len(), s.d_max + 1);

        let s = settings(Flags { delta_n: Some(2), d_max: Some(1), weight_tol: Some(0.0), ..Default::default() });
        let row = evaluate(&s, 20.0, 1.0);
        assert!(row.error.is_none());
        assert!(row.residual.unwrap() > 0.0);

        let mut bad = s.clone();
        bad.alpha = vec![0.0];
        let row = evaluate(&bad, 20.0, 0.0);
        assert!(row.error.is_some());
        assert!(row.gap.is_none());
        let rec = record(&row, bad.d_max);
        assert_eq!(rec.len(), header(bad.d_max).len());
        assert!(rec[2].is_empty() && !rec.last().unwrap().is_empty());
    }

    #[test]
    fn nonmonotonic_flag_within_alpha_only() {
        let mut rows: Vec<SweepRow> = [(1.0, 2.0), (1.0, 1.5), (0.8, 1.0), (0.8, 1.2)]
            .iter()
            .map(|&(a, m)| SweepRow { mean_distance: Some(m), ..SweepRow::empty(1.0, a) })
            .collect();
        flag_nonmonotonic(&mut rows);
        assert_eq!(rows.iter().map(|r| r.nonmonotonic).collect::<Vec<_>>(), [false, true, false, false]);
    }
}
