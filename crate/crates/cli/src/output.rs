use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ctherm::io::CsvRow;
use serde::Serialize;

use crate::failure::Failure;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Input(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_failed(e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("write failed: {e}"))
}

pub fn write_csv<R: CsvRow>(out: Box<dyn Write>, rows: &[R]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::COLUMNS).map_err(write_failed)?;
    for row in rows {
        w.write_record(row.cells()).map_err(write_failed)?;
    }
    w.flush().map_err(write_failed)
}

pub fn write_json<T: Serialize + ?Sized>(
    mut out: Box<dyn Write>,
    value: &T,
) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut out, value).map_err(write_failed)?;
    writeln!(out).map_err(write_failed)?;
    out.flush().map_err(write_failed)
}
