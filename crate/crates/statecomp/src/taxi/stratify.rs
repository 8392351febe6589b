use chrono::NaiveTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxi::TripRecord;

/// A named clock interval, inclusive at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSegment {
    pub name: String,
    pub start: NaiveTime,
    pub end: NaiveTime,
}

impl TimeSegment {
    pub fn new(name: &str, start: NaiveTime, end: NaiveTime) -> Self {
        Self { name: name.to_string(), start, end }
    }

    fn contains(&self, t: NaiveTime) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Morning 06:00:00-11:59:59, afternoon 12:00:00-17:59:59, evening
/// 18:00:00-23:59:59. Trips before 06:00 fall outside all three.
pub fn default_segments() -> Vec<TimeSegment> {
    let t = |h, m, s| NaiveTime::from_hms_opt(h, m, s).unwrap();
    vec![
        TimeSegment::new("morning", t(6, 0, 0), t(11, 59, 59)),
        TimeSegment::new("afternoon", t(12, 0, 0), t(17, 59, 59)),
        TimeSegment::new("evening", t(18, 0, 0), t(23, 59, 59)),
    ]
}

/// Trips bucketed per segment (same order as the segment list) plus the
/// count of trips outside every segment.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifyOutcome {
    pub buckets: Vec<Vec<TripRecord>>,
    pub dropped: usize,
}

/// Shifts every pickup timestamp by a fixed number of minutes, for inputs
/// whose clocks are not already local time.
pub fn apply_time_offset(trips: &mut [TripRecord], offset_minutes: i64) {
    if offset_minutes == 0 {
        return;
    }
    let delta = chrono::Duration::minutes(offset_minutes);
    for trip in trips {
        trip.pickup_time += delta;
    }
}

/// Buckets trips by the local clock time of their pickup. Segments must not
/// overlap; pickup timestamps are treated as already-local clock time (see
/// [`apply_time_offset`] otherwise).
pub fn stratify_time(trips: &[TripRecord], segments: &[TimeSegment]) -> Result<StratifyOutcome> {
    if segments.is_empty() {
        return Err(Error::InvalidParameter("at least one time segment is required".into()));
    }
    let mut sorted: Vec<&TimeSegment> = segments.iter().collect();
    sorted.sort_by_key(|s| s.start);
    for seg in &sorted {
        if seg.end < seg.start {
            return Err(Error::InvalidParameter(format!(
                "segment '{}' ends before it starts",
                seg.name
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::InvalidParameter(format!(
                "segments '{}' and '{}' overlap",
                pair[0].name, pair[1].name
            )));
        }
    }

    let mut buckets = vec![Vec::new(); segments.len()];
    let mut dropped = 0usize;
    for trip in trips {
        let clock = trip.pickup_time.time();
        match segments.iter().position(|s| s.contains(clock)) {
            Some(idx) => buckets[idx].push(trip.clone()),
            None => dropped += 1,
        }
    }
    Ok(StratifyOutcome { buckets, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn trip_at(h: u32, m: u32, s: u32) -> TripRecord {
        TripRecord {
            pickup_lat: 40.75,
            pickup_lon: -73.98,
            dropoff_lat: 40.76,
            dropoff_lon: -73.97,
            pickup_time: NaiveDate::from_ymd_opt(2016, 1, 1)
                .unwrap()
                .and_hms_opt(h, m, s)
                .unwrap(),
        }
    }

    #[test]
    fn boundary_assignments_match_the_segment_edges() {
        let segments = default_segments();
        let trips = vec![
            trip_at(6, 0, 0),   // first second of morning
            trip_at(5, 59, 59), // just before morning: dropped
            trip_at(11, 59, 59),
            trip_at(12, 0, 0), // first second of afternoon
            trip_at(18, 0, 0), // first second of evening
            trip_at(23, 59, 59),
            trip_at(0, 30, 0), // night: dropped
        ];
        let out = stratify_time(&trips, &segments).unwrap();
        assert_eq!(out.buckets[0].len(), 2);
        assert_eq!(out.buckets[1].len(), 1);
        assert_eq!(out.buckets[2].len(), 2);
        assert_eq!(out.dropped, 2);
    }

    #[test]
    fn time_offset_moves_trips_across_segment_boundaries() {
        let mut trips = vec![trip_at(5, 30, 0)];
        apply_time_offset(&mut trips, 60);
        let out = stratify_time(&trips, &default_segments()).unwrap();
        assert_eq!(out.buckets[0].len(), 1);

        let mut back = trips;
        apply_time_offset(&mut back, -60);
        let out = stratify_time(&back, &default_segments()).unwrap();
        assert_eq!(out.dropped, 1);
    }

    #[test]
    fn overlapping_segments_are_a_config_error() {
        let t = |h, m, s| NaiveTime::from_hms_opt(h, m, s).unwrap();
        let segments = vec![
            TimeSegment::new("a", t(6, 0, 0), t(12, 0, 0)),
            TimeSegment::new("b", t(12, 0, 0), t(18, 0, 0)),
        ];
        assert!(stratify_time(&[], &segments).is_err());
    }
}
