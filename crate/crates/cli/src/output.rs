//! Result tables: `runs.csv` plus a JSON sidecar holding the full config.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::RunRecord;
use crate::CliError;

pub const RUNS_FILE: &str = "runs.csv";
pub const SIDECAR_FILE: &str = "runs.json";

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    config: &'a ExperimentConfig,
    records: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_runs<W: Write>(records: &[RunRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| CliError::Data(e.into()))?;
    }
    w.flush().map_err(|e| CliError::Data(e.into()))?;
    Ok(())
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<Result<Vec<RunRecord>, _>>()
        .map_err(|e| CliError::Data(e.into()))
}

/// Writes `runs.csv` and `runs.json` into `dir`; returns the CSV path.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    records: &[RunRecord],
) -> Result<PathBuf, CliError> {
    let csv_path = dir.join(RUNS_FILE);
    write_runs(records, create(&csv_path)?)?;
    let sidecar_path = dir.join(SIDECAR_FILE);
    let mut out = create(&sidecar_path)?;
    let sidecar = Sidecar {
        command,
        config: cfg,
        records: records.len(),
    };
    serde_json::to_writer_pretty(&mut out, &sidecar).map_err(|e| CliError::Data(e.into()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&sidecar_path, e))?;
    Ok(csv_path)
}
