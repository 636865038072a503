//! Batch runner: presets and config-driven control computations.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use wavecontrol::{
    assemble_a_obs, assemble_m, factorize, load_config, observability_constant, rates_from_report,
    run_config, run_preset, DofMap, Overrides, PresetId, SpaceTimeMesh, WeightMode,
};

#[derive(Parser)]
#[command(name = "wavectl", about = "Boundary null controls for the 1D wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for ladder runs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named preset (table1, smooth, gaussian, h1xl2, discontinuous,
    /// varcoef) or a configuration file through the full pipeline.
    Run {
        /// Preset name or path to a config file.
        target: String,
        /// Override the mesh (collapses a preset ladder to one run).
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        /// Carleman magnitude s.
        #[arg(long)]
        s: Option<f64>,
        /// Carleman exponent scale lambda.
        #[arg(long)]
        lambda: Option<f64>,
        /// Cutoff width of the boundary ramp.
        #[arg(long)]
        delta: Option<f64>,
        /// Output directory for report.csv and per-mesh files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit convergence rates from a previously written report directory.
    Rates { report_dir: PathBuf },
    /// Compute the discrete observability constant for a config file.
    ObsConstant { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> wavecontrol::Result<()> {
    match command {
        Command::Run {
            target,
            nx,
            nt,
            s,
            lambda,
            delta,
            out,
        } => {
            let mesh = match (nx, nt) {
                (Some(nx), Some(nt)) => Some((nx, nt)),
                (Some(nx), None) => Some((nx, nx)),
                (None, Some(_)) => {
                    return Err(wavecontrol::Error::InvalidParameter(
                        "--nt requires --nx".into(),
                    ))
                }
                (None, None) => None,
            };
            let overrides = Overrides {
                mesh,
                s,
                lambda,
                delta,
            };
            let report = if let Ok(id) = target.parse::<PresetId>() {
                run_preset(id, &overrides, out.as_deref())?
            } else {
                run_config(std::path::Path::new(&target), out.as_deref())?
            };
            println!(
                "{:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}",
                "T", "nx", "nt", "C0h", "|p|_P", "|v|_L2", "|y(T)|", "|yt(T)|-1", "ms"
            );
            for row in &report.rows {
                println!(
                    "{:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}",
                    row.t_horizon,
                    row.nx,
                    row.nt,
                    fmt(row.c0h),
                    fmt(row.norm_p),
                    fmt(row.norm_v),
                    fmt(row.norm_y_final),
                    fmt(row.norm_yt_final),
                    row.wall_ms
                );
            }
            if let Some(p) = report.p_rate {
                println!("rate |p - p_h|_P   : {p:.3}");
            }
            if let Some(v) = report.v_rate {
                println!("rate |v - v_h|_L2 : {v:.3}");
            }
            Ok(())
        }
        Command::Rates { report_dir } => {
            for (name, rate) in rates_from_report(&report_dir)? {
                println!("rate({name}) = {rate:.4}");
            }
            Ok(())
        }
        Command::ObsConstant { config } => {
            let cfg = load_config(&config)?;
            let mesh = SpaceTimeMesh::new(cfg.nx, cfg.nt, cfg.weights.t_final)?;
            let dofs = Arc::new(DofMap::new(mesh));
            let m = assemble_m(&dofs, &cfg, WeightMode::Interpolated)?;
            let factor = factorize(&m)?;
            let a = assemble_a_obs(&dofs);
            let est = observability_constant(&a, &m, &factor)?;
            println!(
                "C0h = {:.6e}  ({} power iterations, order {})",
                est.value, est.iterations, m.n
            );
            Ok(())
        }
    }
}

fn fmt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4e}"),
        None => "-".into(),
    }
}
