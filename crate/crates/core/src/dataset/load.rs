//! CSV ingestion into [`ComfortRecord`]s.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use log::{debug, warn};

use crate::dataset::mapping::ColumnMapping;
use crate::dataset::record::{ClimateZone, ComfortRecord, Gender, Ventilation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DropReason {
    MissingVote,
    MissingField(&'static str),
    Unparseable { field: &'static str, cell: String },
    OutOfRange { field: &'static str, value: f64 },
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::MissingVote => write!(f, "missing raw_vote"),
            DropReason::MissingField(field) => write!(f, "missing {field}"),
            DropReason::Unparseable { field, cell } => write!(f, "unparseable {field} `{cell}`"),
            DropReason::OutOfRange { field, value } => write!(f, "{field}={value} out of range"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedRow {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub rows_read: usize,
    pub dropped: Vec<DroppedRow>,
}

impl LoadReport {
    pub fn dropped_count(&self) -> usize {
        self.dropped.len()
    }

    pub fn kept(&self) -> usize {
        self.rows_read - self.dropped.len()
    }

    pub fn count_where(&self, pred: impl Fn(&DropReason) -> bool) -> usize {
        self.dropped.iter().filter(|d| pred(&d.reason)).count()
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub records: Vec<ComfortRecord>,
    pub report: LoadReport,
}

/// Read one survey CSV. Rows lacking a vote, a required indoor field, or
/// violating the range envelope are dropped and reported.
pub fn load_dataset(csv_path: &Path, mapping: &ColumnMapping, dataset_id: &str) -> Result<Loaded> {
    if !csv_path.exists() {
        return Err(Error::MissingFile(csv_path.to_path_buf()));
    }
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    load_from_reader(file, csv_path, mapping, dataset_id)
}

pub fn load_from_reader<R: Read>(
    reader: R,
    label: &Path,
    mapping: &ColumnMapping,
    dataset_id: &str,
) -> Result<Loaded> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::MalformedHeader(format!("{}: empty header", label.display())));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim_start_matches('\u{feff}').trim();
        if h.is_empty() {
            return Err(Error::MalformedHeader(format!(
                "{}: blank column name at position {}",
                label.display(),
                i + 1
            )));
        }
        if index.insert(h, i).is_some() {
            return Err(Error::MalformedHeader(format!(
                "{}: duplicate column `{h}`",
                label.display()
            )));
        }
    }
    let mut columns: HashMap<&str, usize> = HashMap::new();
    for (field, column) in &mapping.columns {
        let i = index
            .get(column.as_str())
            .copied()
            .ok_or_else(|| Error::MappingColumnAbsent {
                column: column.clone(),
                path: label.to_path_buf(),
            })?;
        columns.insert(field.as_str(), i);
    }

    let mut records = Vec::new();
    let mut report = LoadReport::default();
    for (row_idx, row) in rdr.records().enumerate() {
        let row = row?;
        report.rows_read += 1;
        let row_no = row_idx + 1;
        match parse_row(&row, &columns, mapping, dataset_id) {
            Ok(rec) => records.push(rec),
            Err(reason) => {
                debug!("{}: dropping row {row_no}: {reason}", label.display());
                report.dropped.push(DroppedRow { row: row_no, reason });
            }
        }
    }
    if report.dropped_count() > 0 {
        warn!(
            "{}: dropped {} of {} rows",
            label.display(),
            report.dropped_count(),
            report.rows_read
        );
    }
    Ok(Loaded { records, report })
}

fn parse_row(
    row: &csv::StringRecord,
    columns: &HashMap<&str, usize>,
    mapping: &ColumnMapping,
    dataset_id: &str,
) -> std::result::Result<ComfortRecord, DropReason> {
    let cell = |field: &str| -> Option<&str> {
        columns
            .get(field)
            .and_then(|&i| row.get(i))
            .filter(|c| !mapping.is_missing(c))
            .map(str::trim)
    };
    let number = |field: &'static str| -> std::result::Result<Option<f64>, DropReason> {
        match cell(field) {
            None => Ok(None),
            Some(c) => {
                let v: f64 = c.parse().map_err(|_| DropReason::Unparseable {
                    field,
                    cell: c.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(DropReason::Unparseable {
                        field,
                        cell: c.to_string(),
                    });
                }
                Ok(Some(match mapping.units.get(field) {
                    Some(h) => h.to_canonical(v),
                    None => v,
                }))
            }
        }
    };
    let required = |field: &'static str| -> std::result::Result<f64, DropReason> {
        number(field)?.ok_or(DropReason::MissingField(field))
    };

    let raw_vote = match number("raw_vote") {
        Ok(Some(v)) => v,
        Ok(None) | Err(_) => return Err(DropReason::MissingVote),
    };
    let gender = cell("gender").map_or(Gender::Unknown, |c| mapping.decode_gender(c));
    let ventilation = match cell("ventilation") {
        Some(c) => mapping.decode_ventilation(c),
        None if columns.contains_key("ventilation") => Ventilation::Unknown,
        None => mapping.default_ventilation,
    };
    let city = cell("city")
        .map(str::to_string)
        .or_else(|| mapping.default_city.clone())
        .unwrap_or_default();
    let climate_zone = cell("climate_zone").and_then(|c| c.parse::<ClimateZone>().ok());

    let rec = ComfortRecord {
        indoor_at: required("indoor_at")?,
        indoor_rh: required("indoor_rh")?,
        indoor_av: required("indoor_av")?,
        indoor_mrt: required("indoor_mrt")?,
        outdoor_at: number("outdoor_at")?,
        outdoor_rh: number("outdoor_rh")?,
        clo: number("clo")?,
        met: number("met")?,
        age: number("age")?,
        gender,
        raw_vote,
        city,
        climate_zone,
        ventilation,
        dataset_id: dataset_id.to_string(),
    };
    if let Some((field, value)) = rec.range_violation() {
        return Err(DropReason::OutOfRange { field, value });
    }
    Ok(rec)
}

pub const CANONICAL_HEADER: [&str; 15] = [
    "indoor_at",
    "indoor_rh",
    "indoor_av",
    "indoor_mrt",
    "outdoor_at",
    "outdoor_rh",
    "clo",
    "met",
    "age",
    "gender",
    "raw_vote",
    "city",
    "climate_zone",
    "ventilation",
    "dataset_id",
];

/// Write records in the canonical layout (readable back with
/// [`ColumnMapping::canonical`]). Floats use the shortest round-trip
/// representation.
pub fn write_canonical_csv<W: std::io::Write>(records: &[ComfortRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CANONICAL_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.indoor_at.to_string(),
            r.indoor_rh.to_string(),
            r.indoor_av.to_string(),
            r.indoor_mrt.to_string(),
            opt(r.outdoor_at),
            opt(r.outdoor_rh),
            opt(r.clo),
            opt(r.met),
            opt(r.age),
            r.gender.as_str().to_string(),
            r.raw_vote.to_string(),
            r.city.clone(),
            r.climate_zone.map(|z| z.to_string()).unwrap_or_default(),
            r.ventilation.as_str().to_string(),
            r.dataset_id.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
