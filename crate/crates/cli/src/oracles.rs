//! The reference-case suite as a pass/fail report.

use catsize::oracles::{verification_suite, OracleCheck};
use serde::Serialize;

use crate::config::{Format, Mode, Settings};
use crate::error::Result;
use crate::output::{self, real, CsvDoc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

impl OracleReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

pub fn run_oracles() -> OracleReport {
    let checks: Vec<CheckEntry> = verification_suite()
        .into_iter()
        .map(|OracleCheck { name, passed, deviation, tolerance }| CheckEntry { name, passed, deviation, tolerance })
        .collect();
    OracleReport { passed: checks.iter().all(|c| c.passed), checks }
}

pub fn render(settings: &Settings, report: &OracleReport) -> Result<Vec<u8>> {
    match settings.format {
        Format::Json => output::json(settings, Mode::Oracles, report),
        Format::Csv => {
            let mut doc = CsvDoc::new(settings, Mode::Oracles);
            doc.table(
                &["name", "passed", "deviation", "tolerance"].map(String::from),
                report
                    .checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.passed.to_string(), real(c.deviation), real(c.tolerance)]),
            )?;
            Ok(doc.into_bytes())
        }
    }
}
