//! File plumbing: dataset CSVs, 17-significant-digit number formatting, and
//! atomic writes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::distributions::BivariateSample;
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits, which round-trips every `f64`.
pub fn sig17(value: f64) -> String {
    format!("{value:.16e}")
}

/// Float that serializes as a 17-significant-digit JSON number, or `null`
/// when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sig17(self.0))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::NAN)))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// CSV text of a dataset: header `x,y`, one pair per row.
pub fn dataset_to_csv(sample: &BivariateSample) -> String {
    let mut out = String::from("x,y\n");
    for &(x, y) in sample.pairs() {
        out.push_str(&format!("{},{}\n", sig17(x), sig17(y)));
    }
    out
}

/// Parses dataset text. Unparseable and non-positive rows are all reported
/// together by 1-based data-row number.
pub fn parse_dataset(text: &str) -> Result<BivariateSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Dataset {
        rows: vec![],
        message: format!("unreadable header: {e}"),
    })?;
    if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
        return Err(Error::Dataset {
            rows: vec![],
            message: "header must be exactly `x,y`".into(),
        });
    }
    let mut pairs = Vec::new();
    let mut unparsable = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let parsed = record.ok().and_then(|r| {
            if r.len() != 2 {
                return None;
            }
            Some((r[0].parse::<f64>().ok()?, r[1].parse::<f64>().ok()?))
        });
        match parsed {
            Some(p) => pairs.push(p),
            None => {
                unparsable.push(i + 1);
                pairs.push((f64::NAN, f64::NAN));
            }
        }
    }
    if !unparsable.is_empty() {
        return Err(Error::Dataset {
            rows: unparsable,
            message: "rows are not two decimal numbers".into(),
        });
    }
    BivariateSample::new(pairs)
}

pub fn read_dataset(path: &Path) -> Result<BivariateSample> {
    parse_dataset(&fs::read_to_string(path)?)
}
