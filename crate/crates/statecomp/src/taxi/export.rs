use serde_json::json;

use crate::error::{Error, Result};
use crate::spectral::PartitionLabels;
use crate::taxi::{GridSpec, StateMap};

fn check_lengths(state_map: &StateMap, labels: &PartitionLabels) -> Result<()> {
    if labels.len() != state_map.len() {
        return Err(Error::LengthMismatch(format!(
            "partition covers {} states but the map holds {}",
            labels.len(),
            state_map.len()
        )));
    }
    Ok(())
}

/// CSV rows `cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block`,
/// one per retained state.
pub fn export_partition_csv(
    state_map: &StateMap,
    grid: &GridSpec,
    labels: &PartitionLabels,
) -> Result<String> {
    check_lengths(state_map, labels)?;
    let mut out = String::from("cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block\n");
    for state in 0..state_map.len() {
        let cell = state_map.cell(state);
        let (lat_idx, lon_idx) = grid.cell_indices(cell);
        let (clat, clon) = grid.cell_centroid(cell);
        out.push_str(&format!(
            "{lat_idx},{lon_idx},{clat},{clon},{}\n",
            labels.labels()[state]
        ));
    }
    Ok(out)
}

/// GeoJSON `FeatureCollection` of cell polygons carrying `state`, `block`,
/// and `visits` properties.
pub fn export_partition_geojson(
    state_map: &StateMap,
    grid: &GridSpec,
    labels: &PartitionLabels,
) -> Result<String> {
    check_lengths(state_map, labels)?;
    let features: Vec<serde_json::Value> = (0..state_map.len())
        .map(|state| {
            let cell = state_map.cell(state);
            let [lat_lo, lat_hi, lon_lo, lon_hi] = grid.cell_bounds(cell);
            // GeoJSON positions are [lon, lat]; the ring closes on itself.
            let ring = vec![
                vec![lon_lo, lat_lo],
                vec![lon_hi, lat_lo],
                vec![lon_hi, lat_hi],
                vec![lon_lo, lat_hi],
                vec![lon_lo, lat_lo],
            ];
            json!({
                "type": "Feature",
                "geometry": { "type": "Polygon", "coordinates": [ring] },
                "properties": {
                    "state": state,
                    "block": labels.labels()[state],
                    "visits": state_map.visits(state),
                },
            })
        })
        .collect();
    let collection = json!({ "type": "FeatureCollection", "features": features });
    Ok(serde_json::to_string_pretty(&collection)?)
}
