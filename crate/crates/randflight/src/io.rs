//! CSV tables and their JSON sidecars.
//!
//! Floats are written with 17 significant digits so every binary64 value
//! round-trips exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use randflight_core::flight::SampleBatch;
use serde::Serialize;

use crate::{Error, Result};

pub const TOOL: &str = "randflight";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// `k,x1..xd` (plus `events` for `U3`).
pub fn write_positions(w: &mut dyn Write, batch: &SampleBatch) -> std::io::Result<()> {
    let d = batch.dim();
    let mut header = String::from("k");
    for j in 1..=d {
        header.push_str(&format!(",x{j}"));
    }
    if batch.events.is_some() {
        header.push_str(",events");
    }
    writeln!(w, "{header}")?;
    for (i, row) in batch.rows().enumerate() {
        write!(w, "{}", batch.k_values[i])?;
        for x in row {
            write!(w, ",{}", fmt17(*x))?;
        }
        if let Some(ev) = &batch.events {
            write!(w, ",{}", ev[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Rows of a fixed-`k` batch, `k,x1..xd`.
pub fn write_conditional_positions(w: &mut dyn Write, k: usize, rows: &[f64], d: usize) -> std::io::Result<()> {
    let header: Vec<String> = std::iter::once("k".to_string())
        .chain((1..=d).map(|j| format!("x{j}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for row in rows.chunks_exact(d) {
        write!(w, "{k}")?;
        for x in row {
            write!(w, ",{}", fmt17(*x))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// A header row and float rows.
pub fn write_table(w: &mut dyn Write, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub seed: Option<u64>,
    pub output: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar<C: Serialize>(out: &Path, sidecar: &Sidecar<'_, C>) -> Result<PathBuf> {
    let path = sidecar_path(out);
    let text = serde_json::to_string_pretty(sidecar)?;
    write_file(&path, |w| writeln!(w, "{text}"))?;
    Ok(path)
}

/// Parses a CSV written by this module back into a header and numeric rows.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Config(format!("bad CSV cell {c:?}: {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use randflight_core::flight::{simulate_batch, FlightParams, Model};
    use randflight_core::SeriesControl;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn positions_round_trip() {
        let p = FlightParams::new(Model::U3, 3, 1.0, 1.0, 1.0).unwrap();
        let b = simulate_batch(&p, 50, 3, &SeriesControl::default()).unwrap();
        let mut buf = Vec::new();
        write_positions(&mut buf, &b).unwrap();
        let (header, rows) = read_table(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(header, ["k", "x1", "x2", "x3", "events"]);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[0] as usize, b.k_values[i]);
            assert_eq!(&row[1..4], b.row(i));
            assert_eq!(row[4] as usize, b.events.as_ref().unwrap()[i]);
        }
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/pos.csv")), PathBuf::from("out/pos.csv.json"));
    }
}
