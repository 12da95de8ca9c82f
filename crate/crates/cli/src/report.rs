//! Versioned report envelope and output plumbing.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::Format;

pub const SCHEMA: &str = "darboux-report/1";

#[derive(Debug)]
pub enum CliError {
    /// Rejected input: exit code 2.
    Usage(String),
    /// Computation or I/O failure: exit code 1.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Run(m) => f.write_str(m),
        }
    }
}

impl From<darboux::Error> for CliError {
    fn from(e: darboux::Error) -> Self {
        use darboux::Error as E;
        match e {
            E::InvalidParams(_) | E::UnknownFlavor(_) | E::Parse { .. } | E::Domain(_) => CliError::Usage(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub seed: u64,
    pub status: Status,
    pub report: &'a T,
}

pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub seed: u64,
    pub timestamp: bool,
}

impl Output {
    pub fn generated_unix(&self) -> Option<u64> {
        self.timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    }

    pub fn envelope<'a, T: Serialize>(&self, command: &'a str, ok: bool, report: &'a T) -> Envelope<'a, T> {
        Envelope {
            schema: SCHEMA,
            command,
            generated_unix: self.generated_unix(),
            seed: self.seed,
            status: Status::from_bool(ok),
            report,
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Run(format!("{}: {e}", p.display())))?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    /// Writes the JSON envelope, or the CSV table produced by `csv`.
    pub fn emit<T: Serialize>(
        &self,
        command: &str,
        ok: bool,
        report: &T,
        csv: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let mut w = self.sink()?;
        match self.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.envelope(command, ok, report))?;
                writeln!(w)?;
            }
            Format::Csv => csv(&mut w)?,
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
