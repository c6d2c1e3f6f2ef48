//! `semisep` batch runner: reads a flat key-value config, sweeps the listed
//! parameters and writes one CSV row per point.

mod config;
mod run;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "semisep", version, about = "Fredholm determinants of semi-separable kernels")]
struct Args {
    /// Run configuration (flat `key = value` text).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Overrides `grid_n` from the config.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Overrides the route tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Adds the dense Nystrom column.
    #[arg(long)]
    oracle: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEMISEP_LOG", "warn")).init();
    let args = Args::parse();
    let mut cfg = match RunConfig::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    if let Some(n) = args.grid_n {
        cfg.grid_n = n;
    }
    if let Some(t) = args.tolerance {
        if !(t > 0.0) {
            eprintln!("error: --tolerance must be positive");
            return ExitCode::from(1);
        }
        cfg.route_tol = t;
    }
    cfg.oracle |= args.oracle;
    if args.output.is_some() {
        cfg.output = args.output;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match pool.install(|| run::run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let written = match &cfg.output {
        Some(p) => File::create(p).map_err(csv::Error::from).and_then(|f| run::write_csv(&rows, BufWriter::new(f))),
        None => run::write_csv(&rows, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: writing CSV: {e}");
        return ExitCode::from(1);
    }
    if rows.iter().any(|r| r.flagged) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
