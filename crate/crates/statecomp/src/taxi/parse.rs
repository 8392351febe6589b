use std::io::Read;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One trip: pickup/dropoff coordinates in degrees plus the pickup timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub pickup_lat: f64,
    pub pickup_lon: f64,
    pub dropoff_lat: f64,
    pub dropoff_lon: f64,
    pub pickup_time: NaiveDateTime,
}

/// Column names and the timestamp format of the input CSV. Defaults match
/// the 2016 yellow-cab schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub pickup_lat: String,
    pub pickup_lon: String,
    pub dropoff_lat: String,
    pub dropoff_lon: String,
    pub pickup_time: String,
    pub time_format: String,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            pickup_lat: "pickup_latitude".into(),
            pickup_lon: "pickup_longitude".into(),
            dropoff_lat: "dropoff_latitude".into(),
            dropoff_lon: "dropoff_longitude".into(),
            pickup_time: "tpep_pickup_datetime".into(),
            time_format: "%Y-%m-%d %H:%M:%S".into(),
        }
    }
}

/// Parsed trips plus the count of rows dropped for unparseable fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<TripRecord>,
    pub dropped: usize,
}

impl ParseOutcome {
    /// Rows seen = rows kept + rows dropped.
    pub fn rows_seen(&self) -> usize {
        self.records.len() + self.dropped
    }
}

/// Streams a trip CSV, keeping rows whose coordinates and timestamp parse and
/// counting the rest. Missing required columns are a schema error.
pub fn parse_trips<R: Read>(reader: R, schema: &SchemaConfig) -> Result<ParseOutcome> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing required column '{name}'")))
    };
    let col_plat = find(&schema.pickup_lat)?;
    let col_plon = find(&schema.pickup_lon)?;
    let col_dlat = find(&schema.dropoff_lat)?;
    let col_dlon = find(&schema.dropoff_lon)?;
    let col_time = find(&schema.pickup_time)?;

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for row in csv_reader.records() {
        let row = row?;
        let coord = |idx: usize| -> Option<f64> {
            row.get(idx).and_then(|t| t.trim().parse::<f64>().ok()).filter(|x| x.is_finite())
        };
        let time = row
            .get(col_time)
            .and_then(|t| NaiveDateTime::parse_from_str(t.trim(), &schema.time_format).ok());
        match (coord(col_plat), coord(col_plon), coord(col_dlat), coord(col_dlon), time) {
            (Some(plat), Some(plon), Some(dlat), Some(dlon), Some(pickup_time)) => {
                records.push(TripRecord {
                    pickup_lat: plat,
                    pickup_lon: plon,
                    dropoff_lat: dlat,
                    dropoff_lon: dlon,
                    pickup_time,
                });
            }
            _ => dropped += 1,
        }
    }
    Ok(ParseOutcome { records, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "tpep_pickup_datetime,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude,extra\n";

    #[test]
    fn valid_rows_all_parse() {
        let csv = format!(
            "{HEADER}2016-01-01 06:30:00,-73.98,40.75,-73.97,40.76,1\n\
             2016-01-01 12:00:00,-73.95,40.78,-73.99,40.74,2\n\
             2016-01-02 19:45:10,-73.96,40.77,-73.96,40.77,3\n"
        );
        let out = parse_trips(csv.as_bytes(), &SchemaConfig::default()).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.dropped, 0);
        assert_eq!(out.records[0].pickup_lat, 40.75);
    }

    #[test]
    fn bad_fields_are_dropped_and_counted() {
        let csv = format!(
            "{HEADER}2016-01-01 06:30:00,-73.98,40.75,,40.76,1\n\
             not-a-time,-73.95,40.78,-73.99,40.74,2\n\
             2016-01-01 07:00:00,-73.95,40.78,-73.99,40.74,3\n"
        );
        let out = parse_trips(csv.as_bytes(), &SchemaConfig::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.dropped, 2);
        assert_eq!(out.rows_seen(), 3);
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let csv = "pickup_longitude,pickup_latitude\n-73.9,40.7\n";
        let err = parse_trips(csv.as_bytes(), &SchemaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }
}
