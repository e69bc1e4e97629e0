use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use dlscape::FieldExport;

use crate::Failure;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Stdout or a file.
pub struct Sink<'a> {
    path: Option<&'a Path>,
}

impl<'a> Sink<'a> {
    pub fn new(path: Option<&'a Path>) -> Self {
        Sink { path }
    }

    fn writer(&self) -> Result<Box<dyn Write + 'a>, Failure> {
        Ok(match self.path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    pub fn json<T: Serialize + ?Sized>(&self, value: &T) -> Result<(), Failure> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(io_failure)
    }

    /// One row per zone vertex: coordinates, value and convergence data.
    pub fn field_csv(&self, export: &FieldExport) -> Result<(), Failure> {
        let mut out = csv::Writer::from_writer(self.writer()?);
        out.write_record(["id", "x", "y", "value", "stable", "last_change", "oscillation"])
            .map_err(csv_failure)?;
        for row in &export.vertices {
            out.write_record([
                row.id.to_string(),
                row.coords.0.to_string(),
                row.coords.1.to_string(),
                row.value.to_string(),
                row.stable.to_string(),
                row.last_change.to_string(),
                row.oscillation.to_string(),
            ])
            .map_err(csv_failure)?;
        }
        out.flush().map_err(io_failure)
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Usage(format!("write failed: {e}"))
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Usage(format!("write failed: {e}"))
}
