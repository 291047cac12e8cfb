//! CSV files with lossless float formatting and their JSON sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// One column: name, unit and meaning, echoed into the sidecar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    pub description: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str, description: &'static str) -> Column {
    Column {
        name,
        unit,
        description,
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    file: &'a str,
    units: Units,
    columns: &'a [Column],
    rows: usize,
    config: &'a RunConfig,
    summary: serde_json::Value,
}

#[derive(Serialize)]
struct Units {
    energy: &'static str,
    time: &'static str,
    hbar_ev_ns: f64,
    energy_reference: &'static str,
}

/// A CSV table being written; [`CsvTable::finish`] flushes it and writes the
/// sidecar next to it.
pub struct CsvTable {
    path: PathBuf,
    columns: &'static [Column],
    writer: csv::Writer<BufWriter<File>>,
    rows: usize,
}

impl CsvTable {
    pub fn create(dir: &Path, file: &str, columns: &'static [Column]) -> Result<Self, CliError> {
        let path = dir.join(file);
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(f));
        writer
            .write_record(columns.iter().map(|c| c.name))
            .map_err(|e| CliError::io(&path, e))?;
        Ok(CsvTable {
            path,
            columns,
            writer,
            rows: 0,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::io(&self.path, e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        config: &RunConfig,
        summary: serde_json::Value,
    ) -> Result<PathBuf, CliError> {
        let CsvTable {
            path,
            columns,
            writer,
            rows,
        } = self;
        let mut inner = writer
            .into_inner()
            .map_err(|e| CliError::io(&path, e.into_error()))?;
        inner.flush().map_err(|e| CliError::io(&path, e))?;
        let file = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let sidecar = Sidecar {
            tool: "rabishift",
            version: env!("CARGO_PKG_VERSION"),
            command,
            file,
            units: Units {
                energy: "eV",
                time: "ns",
                hbar_ev_ns: rabishift::HBAR_EV_NS,
                energy_reference: "lowest exciton level ε₀ (one photon) or 2ħω (two photons); see column descriptions",
            },
            columns,
            rows,
            config,
            summary,
        };
        let side = path.with_extension("json");
        let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        text.push('\n');
        std::fs::write(&side, text).map_err(|e| CliError::io(&side, e))?;
        Ok(path)
    }
}
