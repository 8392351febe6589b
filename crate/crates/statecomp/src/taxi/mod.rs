//! Trip-record ingestion: CSV parsing with a configurable schema, grid
//! discretization of pickup/dropoff coordinates, minimum-visit state
//! filtering, clock-time stratification, transition counting, and partition
//! export. Every step counts what it drops, and the whole pipeline is
//! deterministic for a fixed input and configuration.

mod counts;
mod export;
mod grid;
mod parse;
mod stratify;

pub use counts::{build_counts, TransitionCounts};
pub use export::{export_partition_csv, export_partition_geojson};
pub use grid::{discretize, filter_states, CellId, DiscretizeOutcome, FilterOutcome, GridSpec, StateMap};
pub use parse::{parse_trips, ParseOutcome, SchemaConfig, TripRecord};
pub use stratify::{apply_time_offset, default_segments, stratify_time, StratifyOutcome, TimeSegment};
