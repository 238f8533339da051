//! Count records from disk: JSON files, directories of them, and CSV.
//!
//! CSV layout, one row per setting, with a header row:
//!
//! ```text
//! hwp1,qwp1,hwp2,qwp2,c0,c1,c2,c3,total_trials,seed
//! 0,0,,,4930,5070,,,10000,1
//! 0,0,22.5,45,2100,2300,2800,2800,10000,1
//! ```
//!
//! Angles are in degrees. `hwp2`/`qwp2` and `c2`/`c3` stay empty for
//! single-photon rows. Coincidence outcomes are ordered `00, 01, 10, 11`,
//! first digit for arm 1.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use qrng_core::optics::{AnalyzerSetting, CountRecord, MeasurementSetting};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::format::{self, CountRecordJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    hwp1: f64,
    qwp1: f64,
    hwp2: Option<f64>,
    qwp2: Option<f64>,
    c0: u64,
    c1: u64,
    c2: Option<u64>,
    c3: Option<u64>,
    total_trials: u64,
    seed: u64,
}

impl CsvRow {
    fn from_record(r: &CountRecord) -> Self {
        let arm2 = r.setting.arm2;
        let c = |k: usize| r.counts.get(k).copied();
        Self {
            hwp1: r.setting.arm1.hwp(),
            qwp1: r.setting.arm1.qwp(),
            hwp2: arm2.map(|a| a.hwp()),
            qwp2: arm2.map(|a| a.qwp()),
            c0: r.counts[0],
            c1: r.counts[1],
            c2: c(2),
            c3: c(3),
            total_trials: r.total_trials,
            seed: r.seed,
        }
    }

    fn into_record(self) -> Result<CountRecord> {
        let arm1 = AnalyzerSetting::new(self.hwp1, self.qwp1)?;
        let (setting, counts) = match (self.hwp2, self.qwp2, self.c2, self.c3) {
            (None, None, None, None) => (MeasurementSetting::single(arm1), vec![self.c0, self.c1]),
            (Some(h), Some(q), Some(c2), Some(c3)) => (
                MeasurementSetting::coincidence(arm1, AnalyzerSetting::new(h, q)?),
                vec![self.c0, self.c1, c2, c3],
            ),
            _ => {
                return Err(AppError::validation(
                    "hwp2, qwp2, c2 and c3 must be all set (coincidence) or all empty (single)",
                ))
            }
        };
        Ok(CountRecord::new(
            setting,
            counts,
            self.total_trials,
            self.seed,
        )?)
    }
}

pub fn read_csv(reader: impl Read) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    rdr.deserialize::<CsvRow>()
        .enumerate()
        .map(|(i, row)| {
            // header is line 1
            let line = i + 2;
            row.map_err(AppError::from)
                .and_then(CsvRow::into_record)
                .map_err(|e| e.context(format_args!("line {line}")))
        })
        .collect()
}

pub fn write_csv(writer: impl Write, records: &[CountRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(CsvRow::from_record(r))?;
    }
    w.flush().map_err(|e| AppError::Unexpected(e.to_string()))
}

/// A record file may hold one record or an array of them.
#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(CountRecordJson),
    Many(Vec<CountRecordJson>),
}

fn read_json_records(path: &Path) -> Result<Vec<CountRecord>> {
    let parsed: OneOrMany = format::read_json(path)?;
    let list = match parsed {
        OneOrMany::One(r) => vec![r],
        OneOrMany::Many(v) => v,
    };
    list.iter()
        .map(|r| CountRecord::try_from(r).map_err(|e| e.context(path.display())))
        .collect()
}

/// Record files in a directory: those listed by `manifest.json` when
/// present, otherwise every `*.json` except the manifest, by name.
fn record_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest = dir.join(crate::manifest::FILE_NAME);
    if manifest.exists() {
        let m: crate::manifest::Manifest = format::read_json(&manifest)?;
        return Ok(m
            .outputs
            .iter()
            .filter(|o| o.path.ends_with(".json") || o.path.ends_with(".csv"))
            .map(|o| dir.join(&o.path))
            .collect());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| AppError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json" || x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads records from a JSON file, a CSV file, or a directory of either.
pub fn load_records(path: &Path) -> Result<Vec<CountRecord>> {
    if path.is_dir() {
        let mut all = Vec::new();
        for file in record_files(path)? {
            all.extend(load_records(&file)?);
        }
        if all.is_empty() {
            return Err(AppError::validation(format!(
                "{}: no count records found",
                path.display()
            )));
        }
        return Ok(all);
    }
    if path.extension().is_some_and(|x| x == "csv") {
        let file = fs::File::open(path).map_err(|e| AppError::io(path, e))?;
        return read_csv(file).map_err(|e| e.context(path.display()));
    }
    read_json_records(path)
}
