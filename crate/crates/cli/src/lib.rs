//! Config-driven runner around `cfdim-core`.
//!
//! A run reads one JSON [`RunConfig`], checks it against its budgets, calls
//! the library, and emits a [`RunReport`]. Budget and hypothesis gates are
//! not errors: they produce a report with `status = "refused"` naming the gate.

pub mod config;
mod commands;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use cfdim_core::Gate;
use serde::{Deserialize, Serialize};

pub use config::{Budgets, CommandName, Format, Output, Request, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cfdim_core::Error),
    #[error("i/o on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    /// 1 bad config or parameters, 2 refused by a gate, 3 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Core(e) if e.gate().is_some() => 2,
            RunError::Core(_) => 1,
            RunError::Io { .. } => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Refused,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub gate: Gate,
    pub detail: String,
}

/// Bumped whenever a CSV column set changes. Series are `n,value` (or
/// `s,value` / `alpha,value` when the abscissa is not an index), dimension
/// tables `depth,root,bracket_lo,bracket_hi`, checks
/// `instance_id,check,hypothesis,conclusion,margin`.
pub const CSV_SCHEMA: u32 = 1;

/// Everything but `wall_time_s` is a function of the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub csv_schema: u32,
    pub command: CommandName,
    pub seed: u64,
    pub config: RunConfig,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal: Option<Refusal>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Refused => 2,
        }
    }
}

/// What a command produced: the JSON result and its CSV table.
pub struct Outcome {
    pub result: serde_json::Value,
    pub csv: String,
}

/// Run a config. Gate refusals come back as a refused report; parameter
/// errors and I/O failures as `Err`.
pub fn run(cfg: &RunConfig) -> Result<(RunReport, Option<String>), RunError> {
    if cfg.output.format == Format::Csv && cfg.output.path.is_none() {
        return Err(RunError::Config("format csv needs output.path".into()));
    }
    let start = Instant::now();
    let outcome = commands::dispatch(cfg);
    let mut report = RunReport {
        tool: "cfdim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        csv_schema: CSV_SCHEMA,
        command: cfg.request.name(),
        seed: cfg.seed,
        config: cfg.clone(),
        status: Status::Ok,
        result: None,
        refusal: None,
        wall_time_s: 0.0,
    };
    let csv = match outcome {
        Ok(o) => {
            report.result = Some(o.result);
            Some(o.csv)
        }
        Err(RunError::Core(e)) if e.gate().is_some() => {
            report.status = Status::Refused;
            report.refusal = Some(Refusal { gate: e.gate().unwrap(), detail: e.to_string() });
            None
        }
        Err(e) => return Err(e),
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((report, csv))
}

/// Run and write the outputs. With `csv` the table goes to `output.path` and
/// the report to `stdout`; with `json` the report goes to `output.path`, or
/// to `stdout` when no path is set. Returns the process exit code.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, RunError> {
    let (report, csv) = run(cfg)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match (&cfg.output.path, cfg.output.format) {
        (Some(path), Format::Csv) => {
            if let Some(table) = csv {
                write_atomic(path, table.as_bytes())?;
            }
            emit(stdout, &json)?;
        }
        (Some(path), Format::Json) => write_atomic(path, json.as_bytes())?,
        (None, _) => emit(stdout, &json)?,
    }
    Ok(report.exit_code())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), RunError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| RunError::Io { path: "<stdout>".into(), source })
}

/// Write through a temporary file in the target directory, then rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let io = |source| RunError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| RunError::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("cfdim-atomic-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"second");
        let leftovers = std::fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config("x".into()).exit_code(), 1);
        assert_eq!(RunError::Core(cfdim_core::Error::InvalidInput("x".into())).exit_code(), 1);
        let refused = cfdim_core::Error::Refused { gate: Gate::WordBudget, detail: "x".into() };
        assert_eq!(RunError::Core(refused).exit_code(), 2);
    }
}
