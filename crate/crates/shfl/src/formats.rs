//! On-disk formats.
//!
//! * Datasets: plain text, one sample per line as `label,f1,f2,...` with
//!   the label `1` or `-1`. Blank lines and lines starting with `#` are
//!   skipped.
//! * Instances and schedules: JSON mirroring the core types, plus a
//!   `schema_version` field.
//! * Metrics: CSV with the columns of [`MetricsRow`], and JSON
//!   `{"schema_version": .., "rows": [..]}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use shfl_core::model::{LocalDataset, Sample};
use shfl_core::scheduler::{Schedule, SchedulingInstance};
use shfl_core::sim::{MetricsLog, MetricsRow};

use crate::error::{Error, Result};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;
pub const SCHEDULE_SCHEMA_VERSION: u32 = 1;
pub const METRICS_SCHEMA_VERSION: u32 = 1;

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: crate::error::strip_location(&e),
    })
}

pub fn dataset_to_string(data: &LocalDataset) -> String {
    let mut out = String::from("# label,features...\n");
    for s in data.samples() {
        write!(out, "{}", s.label as i64).unwrap();
        for x in &s.features {
            write!(out, ",{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str, origin: &Path) -> Result<LocalDataset> {
    let err = |line: usize, msg: String| Error::Dataset { path: origin.to_path_buf(), line, msg };
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let label: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| err(i + 1, "missing or malformed label".into()))?;
        let features = fields
            .map(|f| f.parse::<f64>().map_err(|_| err(i + 1, format!("malformed feature `{f}`"))))
            .collect::<Result<Vec<_>>>()?;
        samples.push(Sample { features, label });
    }
    LocalDataset::new(samples).map_err(|e| err(0, e.to_string()))
}

pub fn read_dataset(path: &Path) -> Result<LocalDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub instance: SchedulingInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub schedule: Schedule,
}

pub fn instance_to_json(inst: &SchedulingInstance) -> String {
    let file = InstanceFile { schema_version: INSTANCE_SCHEMA_VERSION, instance: inst.clone() };
    serde_json::to_string_pretty(&file).expect("instance serializes") + "\n"
}

/// Reads and validates an instance file.
pub fn read_instance(path: &Path) -> Result<SchedulingInstance> {
    let file: InstanceFile = read_json(path)?;
    if file.schema_version != INSTANCE_SCHEMA_VERSION {
        return Err(Error::invalid("schema_version", format!("unsupported version {}", file.schema_version)));
    }
    file.instance.validate()?;
    Ok(file.instance)
}

pub fn schedule_to_json(s: &Schedule) -> String {
    let file = ScheduleFile { schema_version: SCHEDULE_SCHEMA_VERSION, schedule: s.clone() };
    serde_json::to_string_pretty(&file).expect("schedule serializes") + "\n"
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    let file: ScheduleFile = read_json(path)?;
    Ok(file.schedule)
}

pub fn metrics_to_csv(log: &MetricsLog) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &log.rows {
        w.serialize(row)?;
    }
    if log.rows.is_empty() {
        w.write_record(METRICS_COLUMNS)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub const METRICS_COLUMNS: [&str; 8] = [
    "round",
    "wall_clock_s",
    "policy",
    "selected_count",
    "sum_sigma",
    "max_latency_s",
    "test_acc",
    "test_loss",
];

pub fn metrics_from_csv(text: &str) -> Result<MetricsLog> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r.deserialize::<MetricsRow>().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(MetricsLog { rows })
}

#[derive(Serialize, Deserialize)]
struct MetricsJson {
    schema_version: u32,
    rows: Vec<MetricsRow>,
}

pub fn metrics_to_json(log: &MetricsLog) -> String {
    let doc = MetricsJson { schema_version: METRICS_SCHEMA_VERSION, rows: log.rows.clone() };
    serde_json::to_string_pretty(&doc).expect("metrics serialize") + "\n"
}

pub fn metrics_from_json(text: &str) -> Result<MetricsLog> {
    let doc: MetricsJson = serde_json::from_str(text)?;
    Ok(MetricsLog { rows: doc.rows })
}
