//! `statecomp`: estimation and state compression of finite-state Markov
//! chains from trajectories.
//!
//! Exit codes: 0 on success, 2 on input/validation errors, 3 on numerical
//! failures. Every subcommand is deterministic under fixed flags and seed.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "statecomp", version, about = "Markov chain estimation and state compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory from a transition matrix file.
    Simulate {
        /// Transition matrix: dense CSV (dims header) or JSON envelope.
        #[arg(long)]
        input: PathBuf,
        /// Number of transitions to draw.
        #[arg(short)]
        n: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial state index, or "stationary" to draw from the stationary
        /// distribution.
        #[arg(long, default_value = "0")]
        initial: String,
        /// Output trajectory file (one state per line).
        #[arg(long)]
        output: PathBuf,
    },
    /// Estimate low-rank frequency/transition matrices from a trajectory.
    Estimate {
        /// Trajectory file (one state per line).
        #[arg(long)]
        input: PathBuf,
        /// State-space size; inferred from the trajectory when omitted.
        #[arg(short)]
        p: Option<usize>,
        /// Target rank.
        #[arg(short)]
        r: usize,
        /// Also emit the raw empirical matrices for comparison.
        #[arg(long)]
        with_empirical: bool,
        /// Output JSON file.
        #[arg(long)]
        output: PathBuf,
    },
    /// Estimate the four leading feature subspaces from a trajectory.
    Subspaces {
        #[arg(long)]
        input: PathBuf,
        #[arg(short)]
        p: Option<usize>,
        #[arg(short)]
        r: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Partition states by clustering left transition features.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(short)]
        p: Option<usize>,
        /// Number of blocks.
        #[arg(short)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// k-means restarts.
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Ground-truth partition CSV; prints the misclassification rate.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Output partition CSV (state,block).
        #[arg(long)]
        output: PathBuf,
    },
    /// Partition states by clustering right frequency features.
    Lump {
        #[arg(long)]
        input: PathBuf,
        #[arg(short)]
        p: Option<usize>,
        #[arg(short)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a Monte-Carlo sweep from a JSON config.
    Bench {
        /// Sweep configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Directory for the CSV and figure summaries.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Ingest trip records and run state compression per time segment.
    Taxi {
        /// Trip CSV.
        #[arg(long)]
        input: PathBuf,
        /// Number of blocks for the partition step.
        #[arg(short)]
        r: usize,
        /// Partition method.
        #[arg(long, default_value = "aggregate", value_parser = ["aggregate", "lump"])]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Minimum total visits (pickups plus dropoffs) for a cell to count
        /// as a state.
        #[arg(long, default_value_t = 200)]
        min_visits: usize,
        /// Grid cell height in degrees latitude.
        #[arg(long, default_value_t = 0.0018)]
        grid_cell_lat: f64,
        /// Grid cell width in degrees longitude.
        #[arg(long, default_value_t = 0.0022)]
        grid_cell_lon: f64,
        /// Bounding box "lat_min,lat_max,lon_min,lon_max".
        #[arg(long, default_value = "40.70,40.88,-74.03,-73.91")]
        bbox: String,
        /// Stratify into morning/afternoon/evening output directories.
        #[arg(long)]
        segments: bool,
        /// Minutes to add to every pickup timestamp before stratifying, for
        /// inputs whose clocks are not local time.
        #[arg(long, default_value_t = 0)]
        time_offset_minutes: i64,
        /// Partition export format.
        #[arg(long, default_value = "csv", value_parser = ["csv", "geojson"])]
        format: String,
        /// Column holding the pickup latitude.
        #[arg(long, default_value = "pickup_latitude")]
        col_pickup_lat: String,
        /// Column holding the pickup longitude.
        #[arg(long, default_value = "pickup_longitude")]
        col_pickup_lon: String,
        /// Column holding the dropoff latitude.
        #[arg(long, default_value = "dropoff_latitude")]
        col_dropoff_lat: String,
        /// Column holding the dropoff longitude.
        #[arg(long, default_value = "dropoff_longitude")]
        col_dropoff_lon: String,
        /// Column holding the pickup timestamp.
        #[arg(long, default_value = "tpep_pickup_datetime")]
        col_pickup_time: String,
        /// Timestamp format of the pickup column.
        #[arg(long, default_value = "%Y-%m-%d %H:%M:%S")]
        time_format: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { input, n, seed, initial, output } => {
            commands::simulate(&input, n, seed, &initial, &output)
        }
        Command::Estimate { input, p, r, with_empirical, output } => {
            commands::estimate(&input, p, r, with_empirical, &output)
        }
        Command::Subspaces { input, p, r, output } => commands::subspaces(&input, p, r, &output),
        Command::Aggregate { input, p, r, seed, restarts, truth, output } => commands::partition(
            commands::PartitionMethod::Aggregate,
            &input,
            p,
            r,
            seed,
            restarts,
            truth.as_deref(),
            &output,
        ),
        Command::Lump { input, p, r, seed, restarts, truth, output } => commands::partition(
            commands::PartitionMethod::Lump,
            &input,
            p,
            r,
            seed,
            restarts,
            truth.as_deref(),
            &output,
        ),
        Command::Bench { config, out_dir } => commands::bench(&config, &out_dir),
        Command::Taxi {
            input,
            r,
            method,
            seed,
            restarts,
            min_visits,
            grid_cell_lat,
            grid_cell_lon,
            bbox,
            segments,
            time_offset_minutes,
            format,
            col_pickup_lat,
            col_pickup_lon,
            col_dropoff_lat,
            col_dropoff_lon,
            col_pickup_time,
            time_format,
            out_dir,
        } => commands::taxi(&commands::TaxiArgs {
            input,
            r,
            method,
            seed,
            restarts,
            min_visits,
            grid_cell_lat,
            grid_cell_lon,
            bbox,
            segments,
            time_offset_minutes,
            format,
            col_pickup_lat,
            col_pickup_lon,
            col_dropoff_lat,
            col_dropoff_lon,
            col_pickup_time,
            time_format,
            out_dir,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err
                .downcast_ref::<statecomp::Error>()
                .map(statecomp::Error::is_numerical)
                .unwrap_or(false);
            if numerical {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
