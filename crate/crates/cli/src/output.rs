use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format [default: from the --output extension, else csv (json for simulate)]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

pub struct Sink {
    pub format: Format,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(args: &OutputArgs, default: Format) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match &args.output {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::Usage(format!("cannot create {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let inferred =
            args.output
                .as_ref()
                .and_then(|p| match p.extension().and_then(|e| e.to_str()) {
                    Some("json") => Some(Format::Json),
                    Some("csv") => Some(Format::Csv),
                    _ => None,
                });
        Ok(Sink {
            format: args.format.or(inferred).unwrap_or(default),
            out,
        })
    }

    pub fn csv<T: Serialize>(&mut self, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, value: &T) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)?;
        Ok(())
    }

    /// Rows as CSV, or as a JSON array.
    pub fn table<T: Serialize>(&mut self, rows: &[T]) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.csv(rows),
            Format::Json => self.json(rows),
        }
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush()?;
        Ok(())
    }
}
