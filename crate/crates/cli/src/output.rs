use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub result: T,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(command: &str, result: T, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        result,
    };
    serde_json::to_writer_pretty(&mut w, &env)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// CSV with a header row; `schema_version` is prepended to every row.
pub fn write_csv(header: &[&str], rows: &[Vec<String>], path: Option<&Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(path)?);
    let mut head = vec!["schema_version"];
    head.extend_from_slice(header);
    w.write_record(&head)?;
    let version = SCHEMA_VERSION.to_string();
    for row in rows {
        w.write_record(std::iter::once(&version).chain(row.iter()))?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any binary64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::SQRT_2, 1e-300, 12345.678] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
