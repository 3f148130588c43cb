use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

/// Destination of a command's table, echoing the effective config first.
pub struct Sink<'a> {
    command: &'a str,
    config: &'a RunConfig,
}

impl<'a> Sink<'a> {
    pub fn new(command: &'a str, config: &'a RunConfig) -> Self {
        Sink { command, config }
    }

    fn open(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.config.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|source| CliError::Write { path: path.clone(), source })?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    /// `# key=value` lines, then whatever `body` writes.
    pub fn csv(&self, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
        let mut out = self.open()?;
        writeln!(out, "# command={}", self.command)?;
        for (k, v) in self.config.echo() {
            writeln!(out, "# {k}={v}")?;
        }
        body(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// `{"command", "config", "data"}`.
    pub fn json<T: Serialize>(&self, data: &T) -> CliResult<()> {
        let mut out = self.open()?;
        let doc = serde_json::json!({
            "command": self.command,
            "config": self.config,
            "data": data,
        });
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    /// CSV or JSON according to `--format`.
    pub fn emit<T: Serialize>(&self, data: &T, csv: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
        match self.config.format() {
            Format::Csv => self.csv(csv),
            Format::Json => self.json(data),
        }
    }
}
