//! CSV artifacts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `%.9g`-style rendering: 9 significant digits, trailing zeros dropped.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// A CSV file being written; remembers its path for error messages.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvSink {
    pub fn create(path: PathBuf, header: &[&str]) -> Result<Self, CliError> {
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut sink = Self {
            writer: csv::WriterBuilder::new().from_writer(file),
            path,
        };
        sink.row(header)?;
        Ok(sink)
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        let path = &self.path;
        self.writer.write_record(fields).map_err(|e| csv_io(path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
struct OutputFile {
    file: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    master_seed: u64,
    seeds: u64,
    started_unix_s: u64,
    config: &'a C,
    outputs: Vec<OutputFile>,
}

/// Write `manifest.json` next to `outputs`: the resolved config, seeds and
/// a SHA-256 of every output file.
pub fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    config: &C,
    master_seed: u64,
    seeds: u64,
    started: SystemTime,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let outputs = outputs
        .iter()
        .map(|p| {
            Ok(OutputFile {
                file: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_hex(p)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        master_seed,
        seeds,
        started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config,
        outputs,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(0.115), "0.115");
        assert_eq!(fmt_float(7.0 / 61.0), "0.114754098");
        assert_eq!(fmt_float(5.835), "5.835");
        assert_eq!(fmt_float(-2.5), "-2.5");
        assert_eq!(fmt_float(123_456_789.4), "123456789");
        assert_eq!(fmt_float(1_234_567_890.0), "1.23456789e9");
        assert_eq!(fmt_float(0.000_012_345_678_91), "1.23456789e-5");
        assert_eq!(fmt_float(0.000_123), "0.000123");
        assert_eq!(fmt_float(9.999_999_999_9), "10");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333");
    }
}
