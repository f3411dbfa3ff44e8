//! Subcommand implementations. Each returns `Ok(())` for exit 0 or a
//! [`CliError`] carrying the documented exit code.

use crate::config::RunConfig;
use crate::formats::{
    self, parse_region_json, parse_trajectory_csv, GridAxis, GridVar, ScanRow,
};
use crate::{exit_code, svg, CliError};
use regionkit::integrator::{integrate, MainField};
use regionkit::region::{build_region, InvariantRegion};
use regionkit::system::State;
use regionkit::verify::{
    check_containment_by_simulation, check_crossing_direction, check_inward_flow,
    find_limit_cycle, LimitCycleError,
};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Fixed-point tolerance and return budget for the cycle search.
const CYCLE_TOL: f64 = 1e-9;
const CYCLE_MAX_RETURNS: usize = 500;
/// Orbits started from the boundary when verifying containment.
const VERIFY_BOUNDARY_ORBITS: usize = 6;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn load_region(path: &Path) -> Result<InvariantRegion, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    parse_region_json(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// `build`: construct the region and write `region.json` + `region.csv`.
pub fn cmd_build(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.parameters()?;
    let region = build_region(&p, &cfg.sampling())?;
    let json_path = write_file(&cfg.output_dir, "region.json", &formats::region_to_json(&region))?;
    let mut closed = region.polygon.clone();
    closed.push(region.polygon[0]);
    let csv_path = write_file(&cfg.output_dir, "region.csv", &formats::polygon_to_csv(&closed))?;
    println!(
        "built {} boundary ({} pieces, {} case); wrote {} and {}",
        if region.case_eight_pieces { "eight-piece" } else { "seven-piece" },
        region.pieces.len(),
        if region.case_eight_pieces { "B1" } else { "direct BC" },
        json_path.display(),
        csv_path.display()
    );
    Ok(())
}

/// `verify`: run all certificates against a stored region.
pub fn cmd_verify(cfg: &RunConfig, region_path: &Path) -> Result<(), CliError> {
    let region = load_region(region_path)?;
    let p = region.params;

    let inward = check_inward_flow(&region, &p, cfg.samples_per_piece);
    let crossings: Vec<_> = region
        .pieces
        .iter()
        .map(|piece| check_crossing_direction(piece, &p, cfg.samples_per_piece))
        .collect();
    let starts = region.boundary_points(VERIFY_BOUNDARY_ORBITS);
    let containment =
        check_containment_by_simulation(&region, &p, &starts, cfg.horizon, &cfg.tolerances());

    let json = formats::verify_to_json(&inward, &crossings, &containment);
    let path = write_file(&cfg.output_dir, "verify.json", &json)?;

    let crossing_violations: usize = crossings.iter().map(|c| c.violations.len()).sum();
    println!(
        "inward-flow violations: {}; crossing violations: {}; escapes: {}; report: {}",
        inward.violations.len(),
        crossing_violations,
        containment.escapes.len(),
        path.display()
    );
    let ok = inward.ok() && crossings.iter().all(|c| c.ok()) && containment.ok();
    if ok {
        Ok(())
    } else {
        Err(CliError::new(
            exit_code::VERIFICATION_FAILED,
            "verification found violations",
        ))
    }
}

/// `simulate`: integrate orbits and write one `orbit_<k>.csv` each.
///
/// Per-orbit integration failures are reported without aborting the batch.
pub fn cmd_simulate(
    cfg: &RunConfig,
    explicit_points: &[State],
    boundary_points: Option<usize>,
) -> Result<(), CliError> {
    let p = cfg.parameters()?;
    let mut points = explicit_points.to_vec();
    if let Some(k) = boundary_points {
        let region = build_region(&p, &cfg.sampling())?;
        let prepared = region.prepared();
        for start in region.boundary_points(k) {
            let n = prepared.inward_normal_at(start);
            points.push(State::new(start.x1 + 1e-6 * n.x1, start.x2 + 1e-6 * n.x2));
        }
    }
    if points.iter().any(|s| !s.is_finite()) {
        return Err(CliError::new(
            exit_code::INVALID_PARAMETERS,
            "initial points must be finite",
        ));
    }

    let field = MainField(p);
    let tol = cfg.tolerances();
    let mut failures = 0usize;
    for (k, s0) in points.iter().enumerate() {
        match integrate(&field, *s0, (0.0, cfg.horizon), &tol) {
            Ok(traj) => {
                let path = write_file(
                    &cfg.output_dir,
                    &format!("orbit_{k}.csv"),
                    &formats::trajectory_to_csv(&traj.samples),
                )?;
                println!("orbit {k}: {} steps -> {}", traj.samples.len(), path.display());
            }
            Err(e) => {
                failures += 1;
                eprintln!("orbit {k}: integration failed: {e}");
            }
        }
    }
    if points.is_empty() {
        println!("no initial points given; nothing to simulate");
    }
    if failures == points.len() && !points.is_empty() {
        return Err(CliError::new(exit_code::GENERIC, "every orbit failed"));
    }
    Ok(())
}

/// `limit-cycle`: locate the periodic orbit and write `cycle.json`.
pub fn cmd_limit_cycle(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.parameters()?;
    let orbit = find_limit_cycle(&p, cfg.seed, CYCLE_TOL, CYCLE_MAX_RETURNS, &cfg.tolerances())
        .map_err(|e| match e {
            LimitCycleError::NoConvergence { .. } | LimitCycleError::SectionNeverHit => {
                CliError::new(exit_code::NO_CONVERGENCE, e.to_string())
            }
            LimitCycleError::Integration(err) => CliError::new(exit_code::GENERIC, err.to_string()),
        })?;
    let path = write_file(&cfg.output_dir, "cycle.json", &formats::cycle_to_json(&orbit))?;
    println!(
        "cycle: period {:.9}, section x1 {:.12}, {} returns -> {}",
        orbit.period,
        orbit.section_point.x1,
        orbit.returns_used,
        path.display()
    );
    Ok(())
}

fn scan_outcome(cfg: &RunConfig, alpha: f64, nu: f64, e: f64, d: f64) -> ScanRow {
    let mut row = ScanRow {
        alpha,
        nu,
        e,
        d,
        outcome: String::new(),
        cycle_max_x1: None,
    };
    let p = match regionkit::system::Parameters::new(alpha, nu, e, d) {
        Ok(p) => p,
        Err(_) => {
            row.outcome = "invalid_parameters".into();
            return row;
        }
    };
    use regionkit::region::BuildError as B;
    match build_region(&p, &cfg.sampling()) {
        Ok(_region) => {
            match find_limit_cycle(&p, cfg.seed, CYCLE_TOL, CYCLE_MAX_RETURNS, &cfg.tolerances()) {
                Ok(orbit) => {
                    row.outcome = "ok".into();
                    row.cycle_max_x1 = Some(orbit.section_point.x1);
                }
                Err(_) => row.outcome = "no_convergence".into(),
            }
        }
        Err(e) => {
            row.outcome = match e {
                B::TangencyRootNotFound => "tangency_root_not_found".into(),
                B::EventNotReached { .. } => "event_not_reached".into(),
                B::ConditionE1Violated { .. } => "condition_e1_violated".into(),
                B::ConditionE2Violated { .. } => "condition_e2_violated".into(),
                B::SpiralArcDegenerate { .. } => "spiral_arc_degenerate".into(),
                B::SelfIntersectingBoundary => "self_intersecting_boundary".into(),
                B::OriginNotInterior => "origin_not_interior".into(),
                B::Integration { .. } => "integration_error".into(),
            };
        }
    }
    row
}

/// `scan`: evaluate every grid tuple independently and write `scan.csv`.
/// Rows never abort the scan; failures become outcome labels.
///
/// `REGIONKIT_THREADS` caps parallelism (0 or unset runs sequentially).
pub fn cmd_scan(cfg: &RunConfig, axes: &[GridAxis]) -> Result<(), CliError> {
    let mut tuples = vec![(cfg.alpha, cfg.nu, cfg.e, cfg.d)];
    for axis in axes {
        let values = axis.values();
        let mut next = Vec::with_capacity(tuples.len() * values.len());
        for &(a, n, e, d) in &tuples {
            for &v in &values {
                next.push(match axis.var {
                    GridVar::Alpha => (v, n, e, d),
                    GridVar::Nu => (a, v, e, d),
                    GridVar::E => (a, n, v, d),
                    GridVar::D => (a, n, e, v),
                });
            }
        }
        tuples = next;
    }

    let threads = std::env::var("REGIONKIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let rows: Vec<ScanRow> = if threads <= 1 {
        tuples
            .iter()
            .map(|&(a, n, e, d)| scan_outcome(cfg, a, n, e, d))
            .collect()
    } else {
        // Work-stealing over an atomic row index; results keyed by index so
        // the CSV order stays deterministic.
        let slots: Mutex<Vec<Option<ScanRow>>> = Mutex::new(vec![None; tuples.len()]);
        let next: AtomicUsize = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..threads.min(tuples.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tuples.len() {
                        break;
                    }
                    let (a, n, e, d) = tuples[i];
                    let row = scan_outcome(cfg, a, n, e, d);
                    slots.lock().unwrap()[i] = Some(row);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every row computed"))
            .collect()
    };

    let path = write_file(&cfg.output_dir, "scan.csv", &formats::scan_to_csv(&rows))?;
    let ok = rows.iter().filter(|r| r.outcome == "ok").count();
    println!("{} rows ({} ok) -> {}", rows.len(), ok, path.display());
    Ok(())
}

/// `plot`: render the phase portrait of a stored region plus trajectories.
pub fn cmd_plot(
    cfg: &RunConfig,
    region_path: &Path,
    trajectory_paths: &[PathBuf],
) -> Result<(), CliError> {
    let region = load_region(region_path)?;
    let mut trajectories = Vec::with_capacity(trajectory_paths.len());
    for path in trajectory_paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
        let samples = parse_trajectory_csv(&text)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        trajectories.push(samples);
    }
    let path = write_file(&cfg.output_dir, "plot.svg", &svg::render(&region, &trajectories))?;
    println!("wrote {}", path.display());
    Ok(())
}
