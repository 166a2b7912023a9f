//! Lowest levels against frustration, and the ground-state current
//! distribution at the configured frustration.

use catsize::spectra::{current_distribution, spectrum_vs_frustration};
use catsize::FluxQubit;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Mode, Settings};
use crate::error::Result;
use crate::output::{self, real, CsvDoc};
use crate::sweep::pool;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRow {
    pub f: f64,
    pub energies: Vec<f64>,
    /// `max_k |E_k(f) - E_k(1 - f)|`.
    pub reflection_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrentWeight {
    pub current: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub levels: Vec<LevelRow>,
    pub current_distribution: Vec<CurrentWeight>,
}

pub fn f_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

pub fn run_spectrum(settings: &Settings) -> Result<Spectrum> {
    let params = settings.params(settings.ej_over_ec[0], settings.alpha[0])?;
    let grid = f_grid(settings.f_points.unwrap_or(41));
    let k = settings.levels.unwrap_or(6);
    let levels = pool(settings)?.install(|| {
        grid.par_iter()
            .map(|&f| {
                let at = spectrum_vs_frustration(&params, &[f, 1.0 - f], k)?;
                let deviation = at[0].1.iter().zip(&at[1].1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                Ok(LevelRow { f, energies: at[0].1.clone(), reflection_deviation: deviation })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let qubit = FluxQubit::new(params)?;
    let current_distribution = current_distribution(qubit.ground(), qubit.current_operator())?
        .into_iter()
        .map(|(current, weight)| CurrentWeight { current, weight })
        .collect();
    Ok(Spectrum { levels, current_distribution })
}

pub fn render(settings: &Settings, spectrum: &Spectrum) -> Result<Vec<u8>> {
    match settings.format {
        Format::Csv => {
            let k = settings.levels.unwrap_or(6);
            let mut doc = CsvDoc::new(settings, Mode::Spectrum);
            doc.comment("table: levels");
            let mut header = vec!["f".to_string()];
            header.extend((0..k).map(|l| format!("e{l}")));
            header.push("reflection_deviation".into());
            doc.table(
                &header,
                spectrum.levels.iter().map(|row| {
                    let mut rec = vec![real(row.f)];
                    rec.extend(row.energies.iter().copied().map(real));
                    rec.push(real(row.reflection_deviation));
                    rec
                }),
            )?;
            doc.comment(&format!("table: ground-state current distribution at f = {}", settings.f));
            doc.table(
                &["current".to_string(), "weight".to_string()],
                spectrum.current_distribution.iter().map(|c| vec![real(c.current), real(c.weight)]),
            )?;
            Ok(doc.into_bytes())
        }
        Format::Json => output::json(settings, Mode::Spectrum, spectrum),
    }
}
