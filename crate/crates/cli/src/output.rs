use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where a table goes: a file when `--out` is given, stdout otherwise.
pub struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    pub fn new(path: Option<PathBuf>, format: Format) -> Self {
        Self { path, format }
    }

    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    pub fn rows<T: Serialize>(&self, rows: &[T], header: &[&str]) -> Result<()> {
        let out = self.open()?;
        match self.format {
            Format::Csv => write_csv(out, rows, header).with_context(|| self.describe()),
            Format::Json => write_json(out, rows).with_context(|| self.describe()),
        }
    }

    pub fn text(&self, text: &str) -> Result<()> {
        let mut out = self.open()?;
        out.write_all(text.as_bytes()).and_then(|_| out.flush()).with_context(|| self.describe())
    }

    fn describe(&self) -> String {
        match &self.path {
            Some(p) => format!("writing {}", p.display()),
            None => "writing to stdout".to_string(),
        }
    }
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

/// Header is written explicitly so an empty table still carries it.
pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(mut out: impl Write, rows: &[T]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
