//! `mmframe`: design measurement frames, factor them into beamformers and
//! run the channel-estimation sweeps.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration,
//! 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmframe::experiment::{
    aspect_sweep, coherence_profile, nmse_sweep, parse_pairs, profile_to_csv, records_to_jsonl, rows_to_csv,
    run_pipeline,
};
use mmframe::io::{read_json, read_matrix, write_json, write_matrix, write_string};
use mmframe::{kron, Error, ExperimentConfig, Frame, KronDims, Result};

#[derive(Parser)]
#[command(name = "mmframe", version, about = "Low-coherence measurement frames for mmWave channel estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design, tighten and normalize a measurement matrix.
    DesignFrame {
        #[arg(long)]
        config: PathBuf,
        /// Measurement matrix in the JSON matrix format.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON with stage diagnostics, beamformers and convergence.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Factor a measurement matrix into transmit and receive beamformers.
    Factor {
        #[arg(long = "in")]
        input: PathBuf,
        /// `T,R,MT,MR`.
        #[arg(long)]
        dims: KronDims,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram and empirical CDF of the pairwise column correlations.
    CoherenceProfile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean NMSE per solver and SNR point.
    NmseSweep {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// NMSE sweeps over several `(M_T, M_R)` splits at fixed `T R`.
    AspectSweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value = "4x4,2x8,8x2")]
        pairs: String,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses one per core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Optional JSON-lines file with one record per trial and SNR point.
    #[arg(long)]
    records: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = read_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DesignFrame { config, out, report } => {
            let cfg = load_config(&config)?;
            let pipeline = run_pipeline(&cfg)?;
            write_matrix(&out, &pipeline.measurement.matrix)?;
            if let Some(path) = report {
                write_json(&path, &pipeline)?;
            }
        }
        Command::Factor { input, dims, out } => {
            let pair = kron::factor(&read_matrix(&input)?, dims)?;
            write_json(&out, &pair)?;
        }
        Command::CoherenceProfile { input, bins, out } => {
            let frame = Frame::new(read_matrix(&input)?)?;
            write_string(&out, &profile_to_csv(&coherence_profile(&frame, bins)?))?;
        }
        Command::NmseSweep { sweep } => {
            let cfg = load_config(&sweep.config)?;
            let result = nmse_sweep(&cfg, sweep.workers)?;
            write_string(&sweep.out, &rows_to_csv(&result.rows))?;
            if let Some(path) = sweep.records {
                write_string(&path, &records_to_jsonl(&result.records)?)?;
            }
        }
        Command::AspectSweep { sweep, pairs } => {
            let cfg = load_config(&sweep.config)?;
            let result = aspect_sweep(&cfg, &parse_pairs(&pairs)?, sweep.workers)?;
            write_string(&sweep.out, &rows_to_csv(&result.rows))?;
            if let Some(path) = sweep.records {
                write_string(&path, &records_to_jsonl(&result.records)?)?;
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 1,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
