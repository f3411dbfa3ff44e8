//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantity once its assertions hold.
//!
//! Tolerances are pinned here, in code; the reference configuration is
//! `alpha = 1.5, nu = 0.1, e = 3.5, d = 4.0` with integration tolerances
//! `rel = 1e-13`, `abs = 1e-12`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use regionkit::geometry::{separatrix_rhs, tangency_residual};
use regionkit::integrator::{integrate, ConservativeField, MainField, ToleranceSettings};
use regionkit::region::{
    build_region, ring_is_simple, Containment, InvariantRegion, PieceKind, SamplingConfig,
};
use regionkit::system::{energy, equilibria, jacobian_main, vector_field_main, Parameters, State};
use regionkit::verify::{
    check_containment_by_simulation, check_crossing_direction, check_inward_flow,
    find_limit_cycle,
};
use std::time::Instant;

fn reference() -> Parameters {
    Parameters::new(1.5, 0.1, 3.5, 4.0).unwrap()
}

fn build_reference() -> InvariantRegion {
    build_region(&reference(), &SamplingConfig::default()).unwrap()
}

fn random_admissible(rng: &mut StdRng) -> Parameters {
    loop {
        let alpha: f64 = rng.gen_range(0.1..4.0);
        let e: f64 = rng.gen_range(1.0..5.0);
        let nu = e * rng.gen_range(0.02..0.9);
        let d = (e * rng.gen_range(1.01..2.0f64)).min(2.0 * e);
        if let Ok(p) = Parameters::new(alpha, nu, e, d) {
            return p;
        }
    }
}

/// Criterion 1: the reference configuration builds a closed, simple curve
/// with the origin strictly interior, within 10 s.
#[test]
fn criterion_1_reference_build() {
    let t0 = Instant::now();
    let region = build_reference();
    let elapsed = t0.elapsed();

    let gap = region.max_junction_gap();
    assert!(gap <= 1e-8, "junction gap {gap}");
    assert!(ring_is_simple(&region.polygon), "boundary must be simple");
    assert_eq!(
        region.contains(State::new(0.0, 0.0)),
        Containment::Inside,
        "origin must be strictly interior"
    );
    assert!(
        elapsed.as_secs_f64() <= 10.0,
        "build took {:.2} s",
        elapsed.as_secs_f64()
    );
    println!(
        "criterion 1: PASS (closure gap {gap:.2e}, simple boundary, origin interior, {:.2} s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: the inward-flow certificate holds at 1e4 boundary samples
/// and is unchanged at 1e5, within 30 s.
#[test]
fn criterion_2_inward_flow_certificate() {
    let region = build_reference();
    let p = region.params;
    let t0 = Instant::now();

    // 8 pieces x 1250 = 1e4 samples, then 8 x 12500 = 1e5.
    let coarse = check_inward_flow(&region, &p, 1250);
    let fine = check_inward_flow(&region, &p, 12500);
    let elapsed = t0.elapsed();

    assert!(coarse.samples_checked >= 10_000 - 8);
    assert!(fine.samples_checked >= 100_000 - 8);
    assert!(
        coarse.ok(),
        "violations at 1e4 samples: {:?}",
        &coarse.violations[..coarse.violations.len().min(3)]
    );
    assert!(
        fine.ok(),
        "violations at 1e5 samples: {:?}",
        &fine.violations[..fine.violations.len().min(3)]
    );
    assert_eq!(coarse.violations.len(), fine.violations.len());
    assert!(
        elapsed.as_secs_f64() <= 30.0,
        "certificate took {:.2} s",
        elapsed.as_secs_f64()
    );
    println!(
        "criterion 2: PASS (max outward {:.2e} at 1e4, {:.2e} at 1e5 samples, {:.2} s)",
        coarse.max_outward_component,
        fine.max_outward_component,
        elapsed.as_secs_f64()
    );
}

/// Criterion 3: six orbits started 1e-6 inside the boundary stay inside
/// over horizon 200 and all converge to the same limit cycle.
#[test]
fn criterion_3_boundary_orbits_converge() {
    let region = build_reference();
    let p = region.params;
    let tol = ToleranceSettings::default();
    let starts = region.boundary_points(6);

    let report = check_containment_by_simulation(&region, &p, &starts, 200.0, &tol);
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    assert!(report.escapes.is_empty(), "escapes: {:?}", report.escapes);

    let cycle = find_limit_cycle(&p, State::new(0.1, 0.0), 1e-9, 500, &tol).unwrap();
    let prepared = region.prepared();
    let mut worst = 0.0f64;
    for &start in &starts {
        let n = prepared.inward_normal_at(start);
        let seed = State::new(start.x1 + 1e-6 * n.x1, start.x2 + 1e-6 * n.x2);
        let settled = find_limit_cycle(&p, seed, 1e-9, 500, &tol).unwrap();
        let dist = settled.section_point.distance(cycle.section_point);
        worst = worst.max(dist);
        assert!(
            dist <= 1e-4,
            "orbit from {start:?} settled at {:?}, cycle at {:?}",
            settled.section_point,
            cycle.section_point
        );
    }
    println!(
        "criterion 3: PASS (0 escapes over horizon 200; settled section points within {worst:.2e} of the cycle)"
    );
}

/// Criterion 4: the return map converges from both seeds to the same cycle,
/// with one-period closure and the cycle polyline inside the region.
#[test]
fn criterion_4_limit_cycle() {
    let region = build_reference();
    let p = region.params;
    let tol = ToleranceSettings::default();

    let near = find_limit_cycle(&p, State::new(0.1, 0.0), 1e-9, 500, &tol).unwrap();
    let far = find_limit_cycle(&p, State::new(2.0, 0.0), 1e-9, 500, &tol).unwrap();
    let seed_gap = (near.section_point.x1 - far.section_point.x1).abs();
    assert!(seed_gap <= 1e-6, "section points differ by {seed_gap}");

    let traj = integrate(&MainField(p), near.section_point, (0.0, near.period), &tol).unwrap();
    let closure = traj.final_state().distance(near.section_point);
    assert!(closure <= 1e-7, "one-period closure error {closure}");

    let prepared = region.prepared();
    for pt in &near.polyline {
        assert_eq!(
            prepared.contains(*pt),
            Containment::Inside,
            "cycle point {pt:?} not inside the region"
        );
    }
    assert_eq!(near.winding_number(), 1);
    println!(
        "criterion 4: PASS (section x1 = {:.9}, period = {:.6}, seeds agree within {seed_gap:.2e}, closure {closure:.2e})",
        near.section_point.x1, near.period
    );
}

/// Criterion 5: equilibrium signatures and Jacobians across 100 random
/// admissible tuples.
#[test]
fn criterion_5_equilibrium_classification() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let p = random_admissible(&mut rng);
        let eq = equilibria(&p);
        assert!(eq[1].determinant < 0.0, "saddle det at {p:?}");
        assert!(
            eq[0].determinant > 0.0 && eq[0].trace > 0.0,
            "origin signature at {p:?}"
        );
        assert!(
            eq[2].determinant > 0.0 && eq[2].trace < 0.0,
            "stable point signature at {p:?}"
        );

        for _ in 0..5 {
            let s = State::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let j = jacobian_main(&p, s);
            let h = 1e-6;
            let fp = vector_field_main(&p, State::new(s.x1 + h, s.x2));
            let fm = vector_field_main(&p, State::new(s.x1 - h, s.x2));
            let gp = vector_field_main(&p, State::new(s.x1, s.x2 + h));
            let gm = vector_field_main(&p, State::new(s.x1, s.x2 - h));
            let fd = [
                [(fp.x1 - fm.x1) / (2.0 * h), (gp.x1 - gm.x1) / (2.0 * h)],
                [(fp.x2 - fm.x2) / (2.0 * h), (gp.x2 - gm.x2) / (2.0 * h)],
            ];
            for r in 0..2 {
                for c in 0..2 {
                    let scale = j[r][c].abs().max(1.0);
                    assert!(
                        (j[r][c] - fd[r][c]).abs() <= 1e-6 * scale,
                        "Jacobian mismatch at {p:?}, {s:?}"
                    );
                }
            }
        }
    }
    println!("criterion 5: PASS (100 tuples: saddle/unstable/stable signatures and Jacobian agreement)");
}

/// Criterion 6: energy conservation along undamped orbits from 20 random
/// points inside the separatrix loop, horizon 50.
#[test]
fn criterion_6_energy_conservation() {
    let p = reference();
    let tol = ToleranceSettings::default();
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (x1, x2) = loop {
            let x1 = rng.gen_range(-3.4..1.2);
            let rhs = separatrix_rhs(&p, x1);
            if rhs > 0.05 {
                break (x1, rng.gen_range(-0.95..0.95) * rhs.sqrt());
            }
        };
        let s0 = State::new(x1, x2);
        let e0 = energy(&p, s0);
        let traj = integrate(&ConservativeField(p), s0, (0.0, 50.0), &tol).unwrap();
        let drift = traj
            .samples
            .iter()
            .map(|(_, s)| (energy(&p, *s) - e0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(drift);
        assert!(drift <= 1e-8, "drift {drift} from {s0:?}");
    }
    println!("criterion 6: PASS (worst energy drift {worst:.2e} over 20 orbits, horizon 50)");
}

/// Criterion 7: the tangency solver agrees with an independent grid-scan
/// oracle and the residual has the stated signs at the interval ends.
#[test]
fn criterion_7_tangency_oracle() {
    let p = reference();

    // Independent oracle: rightmost sign-change bracket of a 1e5-point
    // uniform scan, then plain bisection on the residual.
    let (e, nu) = (p.e(), p.nu());
    let n = 100_000usize;
    let x_at = |i: usize| -e + (e - nu) * (i as f64 + 0.5) / n as f64;
    let res = |x: f64| tangency_residual(&p, x).unwrap();
    let mut bracket = None;
    for i in 1..n {
        let (xa, xb) = (x_at(i - 1), x_at(i));
        if res(xa) * res(xb) < 0.0 {
            bracket = Some((xa, xb));
        }
    }
    let (mut a, mut b) = bracket.expect("oracle found no sign change");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if res(a) * res(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let oracle_root = 0.5 * (a + b);

    let x10 = regionkit::geometry::find_tangency_abscissa(&p).unwrap();
    assert!(
        (x10 - oracle_root).abs() <= 1e-9,
        "solver {x10} vs oracle {oracle_root}"
    );
    let xi = x10 * x10 - nu * nu;
    let scale = ((p.alpha() * p.ed()).powi(2) * xi.powi(3)).abs().max(1.0);
    assert!(res(x10).abs() <= 1e-10 * scale);
    assert!(res(-e + 1e-9) > 0.0, "residual must be positive near -e");
    assert!(res(-nu - 1e-9) < 0.0, "residual must be negative near -nu");
    println!("criterion 7: PASS (x10 = {x10:.12} matches the grid oracle; end signs correct)");
}

/// Criterion 8: the separatrix piece is a level set of the energy at the
/// saddle value (e^2/6)(1 - e/(2d)).
#[test]
fn criterion_8_separatrix_level_set() {
    let region = build_reference();
    let p = region.params;
    let level = (p.e() * p.e() / 6.0) * (1.0 - p.e() / (2.0 * p.d()));
    assert_eq!(level, 1.1484375);
    assert!(separatrix_rhs(&p, -p.e()).abs() <= 1e-12);

    let arc = region
        .pieces
        .iter()
        .find(|q| q.kind == PieceKind::SeparatrixArc)
        .unwrap();
    let mut worst = 0.0f64;
    for pt in &arc.polyline {
        let err = (energy(&p, *pt) - level).abs();
        worst = worst.max(err);
        assert!(
            err <= 1e-10 * level.max(1.0),
            "energy off level at {pt:?}: {err}"
        );
    }
    println!("criterion 8: PASS (worst level-set error {worst:.2e} along the separatrix piece)");
}

/// Criterion 9: an 80%-scaled copy of the boundary fails both the
/// inward-flow certificate and the containment simulation.
#[test]
fn criterion_9_negative_control() {
    let region = build_reference();
    let p = region.params;
    let shrunk = region.scaled(0.8);

    let report = check_inward_flow(&shrunk, &p, 1250);
    assert!(
        !report.violations.is_empty(),
        "shrunk polygon must show outward flow"
    );

    let starts = shrunk.boundary_points(6);
    let sim = check_containment_by_simulation(&shrunk, &p, &starts, 200.0, &ToleranceSettings::default());
    assert!(
        !sim.escapes.is_empty(),
        "orbits must escape the shrunk polygon"
    );
    println!(
        "criterion 9: PASS ({} inward-flow violations, {} escapes on the 80% control)",
        report.violations.len(),
        sim.escapes.len()
    );
}

/// Criterion 10: a documented grid around the reference tuple exercises the
/// eight-piece case and its horizontal shim passes the top-to-bottom check.
#[test]
fn criterion_10_eight_piece_case_coverage() {
    // The documented grid: alpha and e varied +-10% around the reference
    // tuple, 5 x 5 points.
    let mut eight_piece_ok = 0usize;
    let mut built = 0usize;
    for i in 0..5 {
        for j in 0..5 {
            let alpha = 1.35 + 0.075 * i as f64;
            let e = 3.15 + 0.175 * j as f64;
            let Ok(p) = Parameters::new(alpha, 0.1, e, 4.0) else {
                continue;
            };
            let Ok(region) = build_region(&p, &SamplingConfig::default()) else {
                continue;
            };
            built += 1;
            if !region.case_eight_pieces {
                continue;
            }
            let shim = region
                .pieces
                .iter()
                .find(|q| q.kind == PieceKind::HorizontalSegment)
                .expect("eight-piece case has the shim");
            let report = check_crossing_direction(shim, &p, 200);
            if report.ok() {
                eight_piece_ok += 1;
            }
        }
    }
    assert!(built > 0, "grid produced no successful builds");
    assert!(
        eight_piece_ok > 0,
        "grid produced no eight-piece configuration passing the shim check"
    );
    println!(
        "criterion 10: PASS ({built} grid builds, {eight_piece_ok} eight-piece configurations with a passing shim check)"
    );
}
