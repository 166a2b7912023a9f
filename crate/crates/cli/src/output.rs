//! CSV and JSON rendering. Numbers in CSV use 17 significant digits so they
//! round-trip exactly; missing values are empty cells.

use std::io::Write;

use serde::Serialize;

use crate::config::{Mode, Settings};
use crate::error::{CliError, Result};

pub fn real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn maybe_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Accumulates one or more CSV tables below the config echo.
pub struct CsvDoc {
    buf: Vec<u8>,
}

impl CsvDoc {
    pub fn new(settings: &Settings, mode: Mode) -> Self {
        Self { buf: settings.echo(mode).into_bytes() }
    }

    pub fn comment(&mut self, text: &str) {
        for line in text.lines() {
            self.buf.extend_from_slice(b"# ");
            self.buf.extend_from_slice(line.as_bytes());
            self.buf.push(b'\n');
        }
    }

    pub fn table<R, I>(&mut self, header: &[String], rows: R) -> Result<()>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(header).map_err(csv_error)?;
        for row in rows {
            w.write_record(row).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
        self.buf.extend_from_slice(&bytes);
        Ok(())
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Write { target: "CSV buffer".into(), source: std::io::Error::other(e) }
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    command: &'static str,
    version: &'static str,
    config: &'a Settings,
    #[serde(flatten)]
    body: T,
}

pub fn json<T: Serialize>(settings: &Settings, mode: Mode, body: T) -> Result<Vec<u8>> {
    let doc = JsonDoc { command: mode.name(), version: env!("CARGO_PKG_VERSION"), config: settings, body };
    let mut out = serde_json::to_vec_pretty(&doc)
        .map_err(|e| CliError::Write { target: "JSON buffer".into(), source: e.into() })?;
    out.push(b'\n');
    Ok(out)
}

pub fn emit(settings: &Settings, bytes: &[u8]) -> Result<()> {
    match &settings.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|source| CliError::Write { target: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write { target: "standard output".into(), source })
        }
    }
}
