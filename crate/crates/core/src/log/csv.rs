use std::collections::HashMap;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::EventLog;
use crate::activity::{Activity, Trace};
use crate::error::{Error, Result};

/// Column mapping for CSV event logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvMapping {
    pub case_col: String,
    pub activity_col: String,
    #[serde(default)]
    pub timestamp_col: Option<String>,
    /// `chrono` format string; without it RFC 3339 and a few common layouts
    /// are tried.
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl Default for CsvMapping {
    fn default() -> Self {
        CsvMapping {
            case_col: "case:concept:name".into(),
            activity_col: "concept:name".into(),
            timestamp_col: Some("time:timestamp".into()),
            format: None,
            delimiter: ',',
        }
    }
}

impl CsvMapping {
    pub fn new(case_col: impl Into<String>, activity_col: impl Into<String>) -> Self {
        CsvMapping {
            case_col: case_col.into(),
            activity_col: activity_col.into(),
            timestamp_col: None,
            format: None,
            delimiter: ',',
        }
    }

    pub fn with_timestamp(mut self, col: impl Into<String>, format: Option<String>) -> Self {
        self.timestamp_col = Some(col.into());
        self.format = format;
        self
    }
}

const FALLBACK_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y/%m/%d %H:%M:%S%.f",
    "%d-%m-%Y %H:%M:%S%.f",
    "%d.%m.%Y %H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%d-%m-%Y %H:%M",
];

fn parse_timestamp(value: &str, format: Option<&str>) -> Option<i64> {
    let value = value.trim();
    if let Some(fmt) = format {
        if let Ok(dt) = DateTime::parse_from_str(value, fmt) {
            return dt.timestamp_nanos_opt();
        }
        if let Ok(dt) = NaiveDateTime::parse_from_str(value, fmt) {
            return dt.and_utc().timestamp_nanos_opt();
        }
        return NaiveDate::parse_from_str(value, fmt)
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .and_then(|dt| dt.and_utc().timestamp_nanos_opt());
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return dt.timestamp_nanos_opt();
    }
    for fmt in FALLBACK_FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(value, fmt) {
            return dt.and_utc().timestamp_nanos_opt();
        }
    }
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .and_then(|dt| dt.and_utc().timestamp_nanos_opt())
}

/// Parses a delimited event table with a header row. Rows are grouped by case
/// id and ordered by timestamp (stable) when a timestamp column is mapped,
/// otherwise by file order.
pub fn parse_csv(bytes: &[u8], mapping: &CsvMapping) -> Result<EventLog> {
    let delimiter = u8::try_from(mapping.delimiter)
        .map_err(|_| Error::InvalidConfig("CSV delimiter must be ASCII".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let case_idx = column(&mapping.case_col)?;
    let act_idx = column(&mapping.activity_col)?;
    let ts_idx = match &mapping.timestamp_col {
        Some(c) => Some(column(c)?),
        None => None,
    };

    let mut case_order: Vec<String> = Vec::new();
    let mut cases: HashMap<String, Vec<(i64, Activity)>> = HashMap::new();
    let mut interned: HashMap<String, Activity> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        let case = field(case_idx).to_string();
        let act = interned
            .entry(field(act_idx).to_string())
            .or_insert_with_key(|k| Activity::observed(k))
            .clone();
        let ts = match ts_idx {
            Some(i) => {
                let raw = field(i);
                parse_timestamp(raw, mapping.format.as_deref()).ok_or_else(|| {
                    Error::CsvTimestamp {
                        line,
                        value: raw.to_string(),
                    }
                })?
            }
            None => 0,
        };
        cases
            .entry(case)
            .or_insert_with_key(|k| {
                case_order.push(k.clone());
                Vec::new()
            })
            .push((ts, act));
    }

    let mut log = EventLog::new();
    for case in case_order {
        let mut events = cases.remove(&case).unwrap_or_default();
        events.sort_by_key(|(ts, _)| *ts);
        log.add(events.into_iter().map(|(_, a)| a).collect::<Trace>(), 1);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_case_in_file_order() {
        let csv = "case,act\n1,a\n1,b\n1,c\n";
        let log = parse_csv(csv.as_bytes(), &CsvMapping::new("case", "act")).unwrap();
        assert_eq!(log.count(&Trace::from_names(["a", "b", "c"])), 1);
        assert_eq!(log.num_traces(), 1);
    }

    #[test]
    fn identical_cases_share_a_variant() {
        let csv = "case,act\n1,a\n2,a\n1,b\n2,b\n";
        let log = parse_csv(csv.as_bytes(), &CsvMapping::new("case", "act")).unwrap();
        assert_eq!(log.num_variants(), 1);
        assert_eq!(log.count(&Trace::from_names(["a", "b"])), 2);
    }

    #[test]
    fn typo_in_column_names_the_column() {
        let csv = "case,act\n1,a\n";
        let err = parse_csv(csv.as_bytes(), &CsvMapping::new("case", "activty")).unwrap_err();
        assert!(matches!(&err, Error::MissingColumn(c) if c == "activty"));
        assert!(err.to_string().contains("activty"));
    }

    #[test]
    fn timestamps_reorder_rows() {
        let csv = "case;act;ts\n1;b;2021-03-01 10:00:00\n1;a;2021-03-01 09:00:00\n1;c;2021-03-01 10:00:00\n";
        let mut m = CsvMapping::new("case", "act").with_timestamp("ts", None);
        m.delimiter = ';';
        let log = parse_csv(csv.as_bytes(), &m).unwrap();
        assert_eq!(log.count(&Trace::from_names(["a", "b", "c"])), 1);
    }

    #[test]
    fn explicit_format() {
        let csv = "case,act,ts\n1,b,02/01/2021\n1,a,01/01/2021\n";
        let m = CsvMapping::new("case", "act").with_timestamp("ts", Some("%d/%m/%Y".into()));
        let log = parse_csv(csv.as_bytes(), &m).unwrap();
        assert_eq!(log.count(&Trace::from_names(["a", "b"])), 1);
    }

    #[test]
    fn bad_timestamp_reports_line() {
        let csv = "case,act,ts\n1,a,2021-01-01T00:00:00Z\n1,b,yesterday\n";
        let m = CsvMapping::new("case", "act").with_timestamp("ts", None);
        match parse_csv(csv.as_bytes(), &m) {
            Err(Error::CsvTimestamp { line: 3, value }) => assert_eq!(value, "yesterday"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
