use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use statecomp::chain::{
    empirical_frequency, empirical_transition, simulate_trajectory, stationary_distribution,
    validate_transition, ChainDiagnostics, StartState, Trajectory,
};
use statecomp::io::{
    frequency_envelope, read_partition_csv, read_trajectory, read_transition_auto,
    transition_envelope, write_matrix_csv, write_partition_csv, write_trajectory, MatrixEnvelope,
};
use statecomp::metrics::misclassification_rate;
use statecomp::spectral::{
    estimate_low_rank_from_matrix, leading_subspaces, lumpable_from_frequency,
    aggregation_from_transition, KMeansConfig, PartitionLabels,
};
use statecomp::sweep::{run_sweep, write_figure_summaries, SweepConfig};
use statecomp::taxi::{
    build_counts, default_segments, discretize, export_partition_csv, export_partition_geojson,
    filter_states, parse_trips, stratify_time, GridSpec, SchemaConfig, TripRecord,
};

pub fn simulate(input: &Path, n: usize, seed: u64, initial: &str, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let matrix = read_transition_auto(&text)?;
    let start = if initial == "stationary" {
        let pi = stationary_distribution(&matrix)?;
        StartState::Draw(pi.probs().to_vec())
    } else {
        let idx: usize = initial
            .parse()
            .with_context(|| format!("initial state '{initial}' is not an index or 'stationary'"))?;
        StartState::Fixed(idx)
    };
    let traj = simulate_trajectory(&matrix, start, n, seed)?;
    fs::write(output, write_trajectory(&traj))?;
    eprintln!("wrote {} states to {}", traj.states().len(), output.display());
    Ok(())
}

fn load_trajectory(input: &Path, p: Option<usize>) -> Result<Trajectory> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    Ok(read_trajectory(&text, p)?)
}

pub fn estimate(input: &Path, p: Option<usize>, r: usize, with_empirical: bool, output: &Path) -> Result<()> {
    let traj = load_trajectory(input, p)?;
    let f_tilde = empirical_frequency(&traj)?;
    let estimate = estimate_low_rank_from_matrix(&f_tilde, r)?;

    let diagnostics = ChainDiagnostics::from_transition(&estimate.p_hat, r).ok();
    let mut doc = json!({
        "p": traj.num_states(),
        "r": r,
        "n": traj.transitions(),
        "f_hat": frequency_envelope(&estimate.f_hat),
        "p_hat": transition_envelope(&estimate.p_hat),
        "f0": MatrixEnvelope::from_matrix(&estimate.f0, "rank_r_core"),
        "diagnostics": diagnostics,
    });
    if with_empirical {
        let p_tilde = empirical_transition(&traj)?;
        doc["empirical"] = json!({
            "f_tilde": frequency_envelope(&f_tilde),
            "p_tilde": transition_envelope(&p_tilde),
        });
    }
    fs::write(output, serde_json::to_string_pretty(&doc)?)?;
    eprintln!("wrote estimate to {}", output.display());
    Ok(())
}

pub fn subspaces(input: &Path, p: Option<usize>, r: usize, output: &Path) -> Result<()> {
    let traj = load_trajectory(input, p)?;
    let spaces = leading_subspaces(&traj, r)?;
    let doc = json!({
        "p": traj.num_states(),
        "r": r,
        "u_f": MatrixEnvelope::from_matrix(spaces.u_f.matrix(), "basis"),
        "v_f": MatrixEnvelope::from_matrix(spaces.v_f.matrix(), "basis"),
        "u_p": MatrixEnvelope::from_matrix(spaces.u_p.matrix(), "basis"),
        "v_p": MatrixEnvelope::from_matrix(spaces.v_p.matrix(), "basis"),
    });
    fs::write(output, serde_json::to_string_pretty(&doc)?)?;
    eprintln!("wrote subspaces to {}", output.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMethod {
    Aggregate,
    Lump,
}

#[allow(clippy::too_many_arguments)]
pub fn partition(
    method: PartitionMethod,
    input: &Path,
    p: Option<usize>,
    r: usize,
    seed: u64,
    restarts: usize,
    truth: Option<&Path>,
    output: &Path,
) -> Result<()> {
    let traj = load_trajectory(input, p)?;
    let config = KMeansConfig { restarts, seed, ..KMeansConfig::default() };
    let labels = match method {
        PartitionMethod::Aggregate => {
            let p_tilde = empirical_transition(&traj)?;
            aggregation_from_transition(&p_tilde, r, &config)?
        }
        PartitionMethod::Lump => {
            let f_tilde = empirical_frequency(&traj)?;
            lumpable_from_frequency(&f_tilde, r, &config)?
        }
    };
    fs::write(output, write_partition_csv(&labels))?;
    if let Some(truth_path) = truth {
        let text = fs::read_to_string(truth_path)
            .with_context(|| format!("reading {}", truth_path.display()))?;
        let truth_labels = read_partition_csv(&text)?;
        if truth_labels.len() != labels.len() {
            bail!(statecomp::Error::LengthMismatch(format!(
                "truth covers {} states but the trajectory has {}",
                truth_labels.len(),
                labels.len()
            )));
        }
        let rate = misclassification_rate(&truth_labels, &labels)?;
        println!("misclassification: {rate}");
    }
    eprintln!("wrote partition to {}", output.display());
    Ok(())
}

pub fn bench(config_path: &Path, out_dir: &Path) -> Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config: SweepConfig =
        serde_json::from_str(&text).context("parsing sweep configuration")?;
    let result = run_sweep(&config)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("sweep.csv"), result.to_long_csv())?;
    let written = write_figure_summaries(&result, out_dir)?;
    if result.is_degraded() {
        eprintln!("warning: degraded cells {:?}", result.degraded_cells);
    }
    eprintln!(
        "wrote sweep.csv and {} summaries to {} ({} records, {} failures)",
        written.len(),
        out_dir.display(),
        result.records.len(),
        result.failures.len()
    );
    Ok(())
}

pub struct TaxiArgs {
    pub input: PathBuf,
    pub r: usize,
    pub method: String,
    pub seed: u64,
    pub restarts: usize,
    pub min_visits: usize,
    pub grid_cell_lat: f64,
    pub grid_cell_lon: f64,
    pub bbox: String,
    pub segments: bool,
    pub time_offset_minutes: i64,
    pub format: String,
    pub col_pickup_lat: String,
    pub col_pickup_lon: String,
    pub col_dropoff_lat: String,
    pub col_dropoff_lon: String,
    pub col_pickup_time: String,
    pub time_format: String,
    pub out_dir: PathBuf,
}

pub fn taxi(args: &TaxiArgs) -> Result<()> {
    let parts: Vec<f64> = args
        .bbox
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .context("parsing --bbox (expected lat_min,lat_max,lon_min,lon_max)")?;
    if parts.len() != 4 {
        bail!("--bbox needs four comma-separated values");
    }
    let grid = GridSpec {
        lat_min: parts[0],
        lat_max: parts[1],
        lon_min: parts[2],
        lon_max: parts[3],
        cell_lat: args.grid_cell_lat,
        cell_lon: args.grid_cell_lon,
    };
    grid.validate()?;

    let schema = SchemaConfig {
        pickup_lat: args.col_pickup_lat.clone(),
        pickup_lon: args.col_pickup_lon.clone(),
        dropoff_lat: args.col_dropoff_lat.clone(),
        dropoff_lon: args.col_dropoff_lon.clone(),
        pickup_time: args.col_pickup_time.clone(),
        time_format: args.time_format.clone(),
    };
    let file = fs::File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let mut parsed = parse_trips(file, &schema)?;
    if parsed.records.is_empty() {
        bail!(statecomp::Error::EmptyInput(format!(
            "no parseable trips in {} ({} rows dropped)",
            args.input.display(),
            parsed.dropped
        )));
    }
    statecomp::taxi::apply_time_offset(&mut parsed.records, args.time_offset_minutes);

    fs::create_dir_all(&args.out_dir)?;
    if args.segments {
        let segments = default_segments();
        let strat = stratify_time(&parsed.records, &segments)?;
        for (segment, bucket) in segments.iter().zip(&strat.buckets) {
            let sub = args.out_dir.join(&segment.name);
            run_segment(args, &grid, bucket, &sub, parsed.rows_seen(), parsed.dropped, Some(strat.dropped))?;
        }
        eprintln!(
            "stratified into {} segments ({} trips outside all segments)",
            segments.len(),
            strat.dropped
        );
    } else {
        run_segment(args, &grid, &parsed.records, &args.out_dir.clone(), parsed.rows_seen(), parsed.dropped, None)?;
    }
    Ok(())
}

fn run_segment(
    args: &TaxiArgs,
    grid: &GridSpec,
    trips: &[TripRecord],
    out_dir: &Path,
    rows_seen: usize,
    dropped_parse: usize,
    dropped_segments: Option<usize>,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    if trips.is_empty() {
        bail!(statecomp::Error::EmptyInput(format!(
            "no trips for segment output {}",
            out_dir.display()
        )));
    }
    let disc = discretize(trips, grid)?;
    let filt = filter_states(&disc.pairs, args.min_visits)?;
    let counts = build_counts(&filt.pairs, filt.state_map.len())?;

    let config = KMeansConfig { restarts: args.restarts, seed: args.seed, ..KMeansConfig::default() };
    let labels: PartitionLabels = match args.method.as_str() {
        "aggregate" => aggregation_from_transition(&counts.p_tilde, args.r, &config)?,
        "lump" => lumpable_from_frequency(&counts.f_tilde, args.r, &config)?,
        other => bail!("unknown method '{other}'"),
    };

    fs::write(out_dir.join("counts.csv"), write_matrix_csv(&counts.counts))?;
    fs::write(
        out_dir.join("f_tilde.json"),
        serde_json::to_string_pretty(&frequency_envelope(&counts.f_tilde))?,
    )?;
    fs::write(
        out_dir.join("p_tilde.json"),
        serde_json::to_string_pretty(&transition_envelope(&counts.p_tilde))?,
    )?;
    fs::write(out_dir.join("partition.csv"), export_partition_csv(&filt.state_map, grid, &labels)?)?;
    if args.format == "geojson" {
        fs::write(
            out_dir.join("partition.geojson"),
            export_partition_geojson(&filt.state_map, grid, &labels)?,
        )?;
    }

    // Conservation accounting: every row and pair is kept or counted dropped.
    let stats = json!({
        "rows_seen": rows_seen,
        "dropped_parse": dropped_parse,
        "parsed": rows_seen - dropped_parse,
        "dropped_outside_segments": dropped_segments,
        "trips_in_segment": trips.len(),
        "dropped_out_of_box": disc.dropped,
        "pairs_discretized": disc.pairs.len(),
        "dropped_below_min_visits": filt.dropped,
        "pairs_counted": counts.total,
        "states": filt.state_map.len(),
        "min_visits": args.min_visits,
        "grid": {
            "lat_min": grid.lat_min, "lat_max": grid.lat_max,
            "lon_min": grid.lon_min, "lon_max": grid.lon_max,
            "cell_lat": grid.cell_lat, "cell_lon": grid.cell_lon,
            "note": "grid defaults are artifact choices; the source data does not fix them",
        },
        "method": args.method,
        "r": args.r,
        "seed": args.seed,
    });
    fs::write(out_dir.join("stats.json"), serde_json::to_string_pretty(&stats)?)?;
    let check = validate_transition(counts.p_tilde.as_matrix())?;
    eprintln!(
        "{}: {} states, {} transitions, row-stochastic: {}",
        out_dir.display(),
        filt.state_map.len(),
        counts.total,
        check.is_stochastic
    );
    Ok(())
}
