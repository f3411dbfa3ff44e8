use clap::{Args, Parser, Subcommand};
use regionkit::system::State;
use regionkit_cli::config::{Overrides, RunConfig};
use regionkit_cli::formats::parse_grid_axis;
use regionkit_cli::{commands, exit_code, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CODE_HELP: &str = "\
Exit codes:
   0  success
   1  generic failure
   2  invalid parameters (alpha > 0 and 0 < nu < e < d <= 2e required)
   3  no tangency root on (-e, -nu)
   4  corner E abscissa outside (-e, -nu]
   5  corner E below the separatrix loop (or not below the axis)
   6  an orbit piece never reached its target curve within t-max
   7  assembled boundary is self-intersecting or misses the origin
   8  limit-cycle search did not converge
   9  verification found violations
  10  unreadable or unwritable input/output file
  11  construction inapplicable (auxiliary spiral too sheared for this tuple)";

#[derive(Parser)]
#[command(
    name = "regionkit",
    version,
    about = "Positively invariant regions and limit cycles for the modified Van der Pol heart-action system",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Damping strength (alpha > 0)
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Damping root (0 < nu < e)
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Saddle abscissa magnitude (nu < e < d)
    #[arg(long, global = true)]
    e: Option<f64>,
    /// Stable-point abscissa magnitude (e < d <= 2e)
    #[arg(long, global = true)]
    d: Option<f64>,
    /// Relative integration tolerance
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
    /// Absolute integration tolerance
    #[arg(long = "abs-tol", global = true)]
    abs_tol: Option<f64>,
    /// Time budget per orbit piece
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
    /// Polyline samples per boundary piece
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML config file (flags override file values)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Limit-cycle seed abscissa
    #[arg(long = "seed-x1", global = true)]
    seed_x1: Option<f64>,
    /// Limit-cycle seed ordinate
    #[arg(long = "seed-x2", global = true)]
    seed_x2: Option<f64>,
    /// Simulation / containment horizon
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the invariant region; writes region.json and region.csv
    Build,
    /// Re-verify a stored region; writes verify.json
    Verify {
        /// Path to region.json (defaults to <out>/region.json)
        region: Option<PathBuf>,
    },
    /// Integrate orbits of the full system; writes orbit_<k>.csv per orbit
    Simulate {
        /// Initial point as "x1,x2" (repeatable)
        #[arg(long = "point", value_parser = parse_point)]
        points: Vec<State>,
        /// Additionally start this many orbits just inside the boundary
        #[arg(long = "boundary-points")]
        boundary_points: Option<usize>,
    },
    /// Locate the periodic orbit; writes cycle.json
    LimitCycle,
    /// Evaluate a parameter grid; writes scan.csv
    /// (REGIONKIT_THREADS caps parallelism; 0 or unset runs sequentially)
    Scan {
        /// Grid axis as var=lo:hi:n with var one of alpha|nu|e|d (repeatable)
        #[arg(long = "grid")]
        grid: Vec<String>,
    },
    /// Render an SVG phase portrait; writes plot.svg
    Plot {
        /// Path to region.json
        region: PathBuf,
        /// Trajectory CSV to overlay (repeatable)
        #[arg(long = "traj")]
        trajectories: Vec<PathBuf>,
    },
}

fn parse_point(raw: &str) -> Result<State, String> {
    let (a, b) = raw
        .split_once(',')
        .ok_or_else(|| format!("expected x1,x2 but got {raw:?}"))?;
    let x1: f64 = a.trim().parse().map_err(|e| format!("x1: {e}"))?;
    let x2: f64 = b.trim().parse().map_err(|e| format!("x2: {e}"))?;
    Ok(State::new(x1, x2))
}

fn overrides(c: &CommonArgs) -> Overrides {
    Overrides {
        alpha: c.alpha,
        nu: c.nu,
        e: c.e,
        d: c.d,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        t_max: c.t_max,
        samples: c.samples,
        out: c.out.clone(),
        config: c.config.clone(),
        seed_x1: c.seed_x1,
        seed_x2: c.seed_x2,
        horizon: c.horizon,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&overrides(&cli.common))?;
    match cli.command {
        Command::Build => commands::cmd_build(&cfg),
        Command::Verify { region } => {
            let path = region.unwrap_or_else(|| cfg.output_dir.join("region.json"));
            commands::cmd_verify(&cfg, &path)
        }
        Command::Simulate {
            points,
            boundary_points,
        } => commands::cmd_simulate(&cfg, &points, boundary_points),
        Command::LimitCycle => commands::cmd_limit_cycle(&cfg),
        Command::Scan { grid } => {
            let axes = grid
                .iter()
                .map(|g| parse_grid_axis(g).map_err(|e| CliError::new(exit_code::GENERIC, e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            commands::cmd_scan(&cfg, &axes)
        }
        Command::Plot {
            region,
            trajectories,
        } => commands::cmd_plot(&cfg, &region, &trajectories),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
