//! Thermocouple records, mean-normalized profiles, CSV ingestion and the
//! validity / part-load filter.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default part-load threshold on turbine speed, percent of rated.
pub const DEFAULT_TNH_MIN: f64 = 95.0;
/// Plausible exhaust temperature band in °F; readings outside are bad data.
pub const TEMP_RANGE_F: (f64, f64) = (-100.0, 2500.0);

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("empty profile")]
    EmptyProfile,
    #[error("invalid reading at index {0}")]
    InvalidReading(usize),
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("no thermocouple columns with prefix {0:?}")]
    NoThermocouples(String),
    #[error("record has {found} thermocouples, dataset has {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Event,
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Event => "event",
            Label::Unlabeled => "unlabeled",
        }
    }

    /// Binary class for supervised use: event = 1, normal = 0.
    pub fn class(self) -> Option<u8> {
        match self {
            Label::Normal => Some(0),
            Label::Event => Some(1),
            Label::Unlabeled => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "normal" => Ok(Label::Normal),
            "event" => Ok(Label::Event),
            "unlabeled" => Ok(Label::Unlabeled),
            _ => Err(()),
        }
    }
}

/// One timestamped sample of the exhaust thermocouple ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    /// Exhaust temperatures in °F, one per thermocouple.
    pub tc_temps: Vec<f64>,
    /// Turbine load, MW.
    pub dwatt: f64,
    /// Turbine speed, percent of rated.
    pub tnh: f64,
    pub label: Label,
}

impl TcRecord {
    /// True when every field is finite and every temperature is inside
    /// [`TEMP_RANGE_F`].
    pub fn is_valid(&self) -> bool {
        let (lo, hi) = TEMP_RANGE_F;
        self.dwatt.is_finite()
            && self.tnh.is_finite()
            && !self.tc_temps.is_empty()
            && self
                .tc_temps
                .iter()
                .all(|t| t.is_finite() && *t >= lo && *t <= hi)
    }
}

/// Mean-normalized temperature profile (°F deviation from the sample mean).
#[derive(Debug, Clone, PartialEq)]
pub struct TcProfile {
    values: Vec<f64>,
}

impl TcProfile {
    /// Wrap values that are already mean-normalized. No check is made.
    pub fn from_normalized(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Subtract the profile's own mean from every reading.
///
/// The mean is taken relative to the first reading and then corrected by
/// one residual pass, so a constant profile maps to exact zeros.
pub fn mean_normalize(temps: &[f64]) -> Result<TcProfile, ProfileError> {
    if temps.is_empty() {
        return Err(ProfileError::EmptyProfile);
    }
    if let Some(i) = temps.iter().position(|t| !t.is_finite()) {
        return Err(ProfileError::InvalidReading(i));
    }
    let n = temps.len() as f64;
    let shift = temps[0];
    let mut mean = shift + temps.iter().map(|t| t - shift).sum::<f64>() / n;
    mean += temps.iter().map(|t| t - mean).sum::<f64>() / n;
    Ok(TcProfile {
        values: temps.iter().map(|t| t - mean).collect(),
    })
}

/// Keep valid records at or above the part-load threshold, preserving order.
pub fn filter_records(records: &[TcRecord], tnh_min: f64) -> Vec<TcRecord> {
    records
        .iter()
        .filter(|r| r.tnh >= tnh_min && r.is_valid())
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<TcRecord>,
    pub n_tc: usize,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        records: Vec<TcRecord>,
        n_tc: usize,
        provenance: impl Into<String>,
    ) -> Result<Self, ProfileError> {
        if let Some(r) = records.iter().find(|r| r.tc_temps.len() != n_tc) {
            return Err(ProfileError::WidthMismatch {
                expected: n_tc,
                found: r.tc_temps.len(),
            });
        }
        Ok(Self {
            records,
            n_tc,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }
}

/// Column names of the thermocouple CSV.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub timestamp: String,
    pub dwatt: String,
    pub tnh: String,
    pub label: String,
    /// Thermocouple columns are `<prefix>01`, `<prefix>02`, ...
    pub tc_prefix: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            dwatt: "dwatt".into(),
            tnh: "tnh".into(),
            label: "label".into(),
            tc_prefix: "tc_".into(),
        }
    }
}

impl CsvSchema {
    fn tc_column(&self, i: usize) -> String {
        format!("{}{:02}", self.tc_prefix, i + 1)
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset, ProfileError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut ds = read_csv(file, schema)?;
    ds.provenance = path.display().to_string();
    Ok(ds)
}

/// Parse the thermocouple CSV. Row numbers in errors are 1-based data rows
/// (the header is row 0).
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset, ProfileError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ProfileError::MissingColumn(name.to_string()))
    };
    let ts_col = find(&schema.timestamp)?;
    let dwatt_col = find(&schema.dwatt)?;
    let tnh_col = find(&schema.tnh)?;
    let label_col = find(&schema.label)?;
    let n_tc = header
        .iter()
        .filter(|h| h.trim().starts_with(&schema.tc_prefix))
        .count();
    if n_tc == 0 {
        return Err(ProfileError::NoThermocouples(schema.tc_prefix.clone()));
    }
    let tc_cols = (0..n_tc)
        .map(|i| find(&schema.tc_column(i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        if row.len() != header.len() {
            return Err(ProfileError::RowLength {
                row: row_no,
                expected: header.len(),
                found: row.len(),
            });
        }
        let cell = |col: usize| row.get(col).unwrap_or("").trim();
        let bad = |col: usize| ProfileError::BadCell {
            row: row_no,
            column: header.get(col).unwrap_or("?").to_string(),
            value: cell(col).to_string(),
        };
        let num = |col: usize| cell(col).parse::<f64>().map_err(|_| bad(col));
        let timestamp = cell(ts_col).parse::<i64>().map_err(|_| bad(ts_col))?;
        let label = cell(label_col)
            .parse::<Label>()
            .map_err(|_| bad(label_col))?;
        let tc_temps = tc_cols.iter().map(|&c| num(c)).collect::<Result<_, _>>()?;
        records.push(TcRecord {
            timestamp,
            tc_temps,
            dwatt: num(dwatt_col)?,
            tnh: num(tnh_col)?,
            label,
        });
    }
    Dataset::new(records, n_tc, "")
}

/// Write the dataset in the canonical column order with shortest
/// round-trip float formatting.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<(), ProfileError> {
    let schema = CsvSchema::default();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec![
        schema.timestamp.clone(),
        schema.dwatt.clone(),
        schema.tnh.clone(),
        schema.label.clone(),
    ];
    header.extend((0..ds.n_tc).map(|i| schema.tc_column(i)));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for r in &ds.records {
        row.clear();
        row.push(r.timestamp.to_string());
        row.push(r.dwatt.to_string());
        row.push(r.tnh.to_string());
        row.push(r.label.as_str().to_string());
        row.extend(r.tc_temps.iter().map(|t| t.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| ProfileError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn to_csv_bytes(ds: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf).expect("writing to memory cannot fail");
    buf
}
