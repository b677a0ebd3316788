use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ehyp_cli::{run, Command, RunConfig, DEFAULT_SAMPLES};

/// Construct and numerically verify Einstein hypersurfaces in SU(3)/SO(3),
/// SL(3)/SO(3) and their solvmanifold models.
///
/// The worker thread count can be set with EHYP_THREADS.
#[derive(Parser, Debug)]
#[command(name = "ehyp", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Seed for the sampling shift and random choices; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    let v = list(s)?;
    v.try_into().map_err(|_| format!("expected two comma-separated numbers, got '{s}'"))
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"))).collect()
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Restricted root system of sl3, sl4 or su3.
    Roots {
        #[arg(long, default_value = "sl3")]
        model: String,
    },
    /// Iwasawa solvable algebra and its Einstein certificate.
    Iwasawa {
        #[arg(long, default_value = "sl3")]
        model: String,
        /// Unit normal in a, orthogonal to the mean curvature vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Model residuals of a surface chart over a grid.
    SurfaceCheck {
        /// JSON surface spec.
        #[arg(long, conflicts_with = "surface", required_unless_present = "surface")]
        spec: Option<String>,
        /// Built-in surface name.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Per-point residual CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample a hypersurface and check the Einstein structure.
    Verify {
        /// su3so3, sl3so3, solv:sl3 or solv:sl4 (default: from the surface model).
        #[arg(long)]
        space: Option<String>,
        /// Built-in name or JSON spec file.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Einstein tolerance (default 1e-5 analytic, 1e-3 finite-difference).
        #[arg(long)]
        tol: Option<f64>,
        /// Use finite-difference second derivatives with this step.
        #[arg(long)]
        fd_step: Option<f64>,
        /// CSV with one row per accepted sample.
        #[arg(long)]
        grid_dump: Option<PathBuf>,
    },
    /// Scan a leaf for rank drops of the hypersurface chart.
    SingularProbe {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        surface: String,
        /// Surface parameter of the leaf (default: domain centre).
        #[arg(long, value_parser = pair)]
        u: Option<[f64; 2]>,
        #[arg(long, value_parser = pair, default_value = "-5,5", allow_hyphen_values = true)]
        theta: [f64; 2],
        #[arg(long, value_parser = pair, default_value = "-1,1", allow_hyphen_values = true)]
        t1: [f64; 2],
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("EHYP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let command = match cli.command {
        Cmd::Roots { model } => Command::Roots { model },
        Cmd::Iwasawa { model, xi, tol } => Command::Iwasawa { model, xi, tol },
        Cmd::SurfaceCheck { spec, surface, grid, tol, csv } => Command::SurfaceCheck { surface: spec.or(surface).expect("clap enforces one"), grid, tol, csv },
        Cmd::Verify { space, surface, samples, tol, fd_step, grid_dump } => Command::Verify { space, surface, samples, tol, fd_step, grid_dump },
        Cmd::SingularProbe { space, surface, u, theta, t1, points, threshold } => Command::SingularProbe { space, surface, u, theta, t1, points, threshold },
    };
    let cfg = RunConfig { command, seed: cli.seed, report: cli.report };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
