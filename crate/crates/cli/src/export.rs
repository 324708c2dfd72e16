use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::{ExperimentConfig, Format};
use crate::{CliError, BUILD};

pub const SCHEMA_VERSION: u32 = 1;

/// First line of every exported file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub config_hash: String,
    pub build: String,
    pub seed: u64,
    pub schema_version: u32,
}

impl Header {
    pub fn for_config(config: &ExperimentConfig) -> Self {
        Header { config_hash: config.hash(), build: BUILD.to_string(), seed: config.seed, schema_version: SCHEMA_VERSION }
    }
}

/// Rows that can be written as CSV with a fixed column order.
pub trait Tabular {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

/// 17 significant digits; non-finite values become `null`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub(crate) fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).filter(|s| s != "null").unwrap_or_default()
}

pub(crate) fn sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format_f64(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub(crate) fn sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_json_lines<W: Write, T: Serialize>(mut w: W, header: &Header, rows: &[T]) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// CSV with a `# {header json}` comment line before the column names.
pub fn write_csv<W: Write, T: Tabular>(mut w: W, header: &Header, rows: &[T]) -> std::io::Result<()> {
    writeln!(w, "# {}", serde_json::to_string(header)?)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(T::COLUMNS)?;
    for row in rows {
        out.write_record(row.cells())?;
    }
    out.flush()
}

pub fn write<W: Write, T: Serialize + Tabular>(w: W, format: Format, header: &Header, rows: &[T]) -> std::io::Result<()> {
    match format {
        Format::JsonLines => write_json_lines(w, header, rows),
        Format::Csv => write_csv(w, header, rows),
    }
}

pub fn export<T: Serialize + Tabular>(path: &Path, format: Format, header: &Header, rows: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write(BufWriter::new(file), format, header, rows).map_err(|e| io_err(path, e))
}

fn read_header(line: Option<std::io::Result<String>>, path: &Path) -> Result<Header, CliError> {
    let line = line.ok_or_else(|| io_err(path, "empty file"))?.map_err(|e| io_err(path, e))?;
    let json = line.strip_prefix("# ").unwrap_or(&line);
    serde_json::from_str(json).map_err(|e| io_err(path, format!("bad header: {e}")))
}

pub fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<(Header, Vec<T>), CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = read_header(lines.next(), path)?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        rows.push(serde_json::from_str(&line).map_err(|e| io_err(path, format!("line {}: {e}", i + 2)))?);
    }
    Ok((header, rows))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(Header, Vec<T>), CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| io_err(path, e))?;
    let header = read_header(Some(Ok(first.trim_end().to_string())), path)?;
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        rows.push(row.map_err(|e| io_err(path, e))?);
    }
    Ok((header, rows))
}

/// Reads either format, deciding by the first byte (`#` for CSV).
pub fn read<T: DeserializeOwned>(path: &Path) -> Result<(Header, Vec<T>), CliError> {
    let text = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if text.first() == Some(&b'#') {
        read_csv(path)
    } else {
        read_json_lines(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e300, -5e-324, 0.0, 123456.0] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(format_f64(f64::NAN), "null");
    }
}
