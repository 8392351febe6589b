use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxi::TripRecord;

/// A rectangular grid over a bounding box. Cells are half-open
/// `[lo, hi)` intervals in both axes, so a point on an interior boundary
/// belongs to the higher-index cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub cell_lat: f64,
    pub cell_lon: f64,
}

impl GridSpec {
    /// Manhattan-ish defaults: a 0.18 x 0.12 degree box at 0.0018 x 0.0022
    /// degree cells, roughly 5500 cells.
    pub fn manhattan_default() -> Self {
        Self {
            lat_min: 40.70,
            lat_max: 40.88,
            lon_min: -74.03,
            lon_max: -73.91,
            cell_lat: 0.0018,
            cell_lon: 0.0022,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lat_min < self.lat_max && self.lon_min < self.lon_max) {
            return Err(Error::InvalidParameter("bounding box is empty".into()));
        }
        if !(self.cell_lat > 0.0 && self.cell_lon > 0.0) {
            return Err(Error::InvalidParameter("cell sizes must be positive".into()));
        }
        Ok(())
    }

    /// Cell columns along the longitude axis.
    pub fn lon_cells(&self) -> u64 {
        ((self.lon_max - self.lon_min) / self.cell_lon).ceil() as u64
    }

    /// Cell rows along the latitude axis.
    pub fn lat_cells(&self) -> u64 {
        ((self.lat_max - self.lat_min) / self.cell_lat).ceil() as u64
    }

    /// Linear cell index of a point, or `None` when it falls outside the box.
    pub fn locate(&self, lat: f64, lon: f64) -> Option<CellId> {
        if !(lat >= self.lat_min && lat < self.lat_max && lon >= self.lon_min && lon < self.lon_max)
        {
            return None;
        }
        let lat_idx = ((lat - self.lat_min) / self.cell_lat).floor() as u64;
        let lon_idx = ((lon - self.lon_min) / self.cell_lon).floor() as u64;
        Some(CellId(lat_idx * self.lon_cells() + lon_idx))
    }

    /// `(lat_index, lon_index)` of a linear cell id.
    pub fn cell_indices(&self, cell: CellId) -> (u64, u64) {
        (cell.0 / self.lon_cells(), cell.0 % self.lon_cells())
    }

    /// Center point of a cell.
    pub fn cell_centroid(&self, cell: CellId) -> (f64, f64) {
        let (lat_idx, lon_idx) = self.cell_indices(cell);
        (
            self.lat_min + (lat_idx as f64 + 0.5) * self.cell_lat,
            self.lon_min + (lon_idx as f64 + 0.5) * self.cell_lon,
        )
    }

    /// `[lat_lo, lat_hi, lon_lo, lon_hi]` bounds of a cell.
    pub fn cell_bounds(&self, cell: CellId) -> [f64; 4] {
        let (lat_idx, lon_idx) = self.cell_indices(cell);
        [
            self.lat_min + lat_idx as f64 * self.cell_lat,
            self.lat_min + (lat_idx + 1) as f64 * self.cell_lat,
            self.lon_min + lon_idx as f64 * self.cell_lon,
            self.lon_min + (lon_idx + 1) as f64 * self.cell_lon,
        ]
    }
}

/// Linear grid-cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub u64);

/// Raw cell-to-cell transitions plus the out-of-box drop count.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizeOutcome {
    pub pairs: Vec<(CellId, CellId)>,
    pub dropped: usize,
}

/// Maps each trip to a `(pickup cell, dropoff cell)` pair, dropping trips
/// with either endpoint outside the box.
pub fn discretize(trips: &[TripRecord], grid: &GridSpec) -> Result<DiscretizeOutcome> {
    grid.validate()?;
    let mut pairs = Vec::with_capacity(trips.len());
    let mut dropped = 0usize;
    for trip in trips {
        match (
            grid.locate(trip.pickup_lat, trip.pickup_lon),
            grid.locate(trip.dropoff_lat, trip.dropoff_lon),
        ) {
            (Some(from), Some(to)) => pairs.push((from, to)),
            _ => dropped += 1,
        }
    }
    Ok(DiscretizeOutcome { pairs, dropped })
}

/// Bijection between retained grid cells and dense state indices, with visit
/// counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMap {
    cells: Vec<CellId>,
    index: BTreeMap<CellId, usize>,
    visits: Vec<usize>,
}

impl StateMap {
    /// Number of retained states `p`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Grid cell of a dense state index.
    pub fn cell(&self, state: usize) -> CellId {
        self.cells[state]
    }

    /// Dense state index of a grid cell, when retained.
    pub fn state(&self, cell: CellId) -> Option<usize> {
        self.index.get(&cell).copied()
    }

    /// Total visits (as source plus as destination) of a retained state.
    pub fn visits(&self, state: usize) -> usize {
        self.visits[state]
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }
}

/// Pairs re-indexed to dense states plus the dropped-pair count.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub state_map: StateMap,
    pub pairs: Vec<(usize, usize)>,
    pub dropped: usize,
}

/// Removes cells with fewer than `min_visits` total visits (a pair counts one
/// visit at each endpoint) and drops pairs touching removed cells. Retained
/// cells are densely re-indexed in cell order.
pub fn filter_states(pairs: &[(CellId, CellId)], min_visits: usize) -> Result<FilterOutcome> {
    if min_visits < 1 {
        return Err(Error::InvalidParameter("min_visits must be >= 1".into()));
    }
    let mut counts: BTreeMap<CellId, usize> = BTreeMap::new();
    for &(from, to) in pairs {
        *counts.entry(from).or_insert(0) += 1;
        *counts.entry(to).or_insert(0) += 1;
    }
    let retained: Vec<CellId> =
        counts.iter().filter(|(_, &c)| c >= min_visits).map(|(&cell, _)| cell).collect();
    if retained.is_empty() {
        return Err(Error::EmptyStateSpace(format!(
            "no cell reaches {min_visits} visits"
        )));
    }
    let index: BTreeMap<CellId, usize> =
        retained.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let visits: Vec<usize> = retained.iter().map(|c| counts[c]).collect();
    let state_map = StateMap { cells: retained, index, visits };

    let mut kept = Vec::with_capacity(pairs.len());
    let mut dropped = 0usize;
    for &(from, to) in pairs {
        match (state_map.state(from), state_map.state(to)) {
            (Some(a), Some(b)) => kept.push((a, b)),
            _ => dropped += 1,
        }
    }
    Ok(FilterOutcome { state_map, pairs: kept, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn trip(plat: f64, plon: f64, dlat: f64, dlon: f64) -> TripRecord {
        TripRecord {
            pickup_lat: plat,
            pickup_lon: plon,
            dropoff_lat: dlat,
            dropoff_lon: dlon,
            pickup_time: NaiveDate::from_ymd_opt(2016, 1, 1)
                .unwrap()
                .and_hms_opt(12, 0, 0)
                .unwrap(),
        }
    }

    fn unit_grid() -> GridSpec {
        GridSpec { lat_min: 0.0, lat_max: 1.0, lon_min: 0.0, lon_max: 1.0, cell_lat: 0.25, cell_lon: 0.25 }
    }

    #[test]
    fn trip_inside_one_cell_maps_to_a_self_pair() {
        let grid = unit_grid();
        let out = discretize(&[trip(0.1, 0.1, 0.2, 0.2)], &grid).unwrap();
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].0, out.pairs[0].1);
        assert_eq!(out.dropped, 0);
    }

    #[test]
    fn boundary_points_go_to_the_higher_cell() {
        let grid = unit_grid();
        // 0.25 is the boundary between lat rows 0 and 1: cell row 1 wins.
        let cell = grid.locate(0.25, 0.1).unwrap();
        assert_eq!(grid.cell_indices(cell).0, 1);
        // The box itself is half-open: the top edge is outside.
        assert!(grid.locate(1.0, 0.5).is_none());
        assert!(grid.locate(0.0, 0.0).is_some());
    }

    #[test]
    fn out_of_box_trips_are_dropped() {
        let grid = unit_grid();
        let out =
            discretize(&[trip(0.5, 0.5, 2.0, 0.5), trip(0.5, 0.5, 0.6, 0.6)], &grid).unwrap();
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.dropped, 1);
    }

    #[test]
    fn hand_mapped_fixture_produces_the_expected_pairs() {
        let grid = unit_grid();
        let trips = vec![
            trip(0.1, 0.1, 0.1, 0.3),  // (0,0) -> (0,1): cells 0 -> 1
            trip(0.3, 0.1, 0.85, 0.9), // (1,0) -> (3,3): cells 4 -> 15
        ];
        let out = discretize(&trips, &grid).unwrap();
        assert_eq!(out.pairs, vec![(CellId(0), CellId(1)), (CellId(4), CellId(15))]);
    }

    #[test]
    fn threshold_one_keeps_everything() {
        let pairs = vec![(CellId(3), CellId(9)), (CellId(9), CellId(3))];
        let out = filter_states(&pairs, 1).unwrap();
        assert_eq!(out.state_map.len(), 2);
        assert_eq!(out.dropped, 0);
        assert_eq!(out.pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn visits_count_both_endpoints_and_threshold_is_strict() {
        // Cell 5 appears 199 times in total; threshold 200 removes it.
        let mut pairs = Vec::new();
        for _ in 0..99 {
            pairs.push((CellId(5), CellId(7)));
        }
        pairs.push((CellId(7), CellId(5)));
        // cell 5: 99 as source + 1 as destination = 100... double it
        for _ in 0..99 {
            pairs.push((CellId(6), CellId(5)));
        }
        // visits: cell5 = 99 + 1 + 99 = 199, cell7 = 100, cell6 = 99.
        let out = filter_states(&pairs, 200);
        assert!(matches!(out, Err(Error::EmptyStateSpace(_))));
        let out = filter_states(&pairs, 100).unwrap();
        assert_eq!(out.state_map.len(), 2); // cells 5 and 7
        assert!(out.state_map.state(CellId(6)).is_none());
        assert_eq!(out.state_map.visits(out.state_map.state(CellId(5)).unwrap()), 199);
    }

    #[test]
    fn twelve_cell_fixture_drops_to_five_states_at_threshold_four() {
        // Oracle: count by hand. Cells 0..5 form a busy core; cells 6..11
        // are touched once or twice each.
        let mut pairs = Vec::new();
        for _ in 0..2 {
            for a in 0..5u64 {
                for b in 0..5u64 {
                    if a != b && (a + b) % 2 == 1 {
                        pairs.push((CellId(a), CellId(b)));
                    }
                }
            }
        }
        // Light traffic touching cells 5..11.
        pairs.push((CellId(5), CellId(6)));
        pairs.push((CellId(7), CellId(8)));
        pairs.push((CellId(9), CellId(10)));
        pairs.push((CellId(11), CellId(0)));
        let distinct: std::collections::BTreeSet<CellId> =
            pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        assert_eq!(distinct.len(), 12);

        let out = filter_states(&pairs, 4).unwrap();
        assert_eq!(out.state_map.len(), 5);
        let kept: Vec<u64> = out.state_map.cells().iter().map(|c| c.0).collect();
        assert_eq!(kept, vec![0, 1, 2, 3, 4]);
        // Conservation: every input pair is kept or dropped.
        assert_eq!(out.pairs.len() + out.dropped, pairs.len());
    }
}
