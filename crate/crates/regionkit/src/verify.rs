//! Numerical certificates for the built region: inward-flow checks along
//! the boundary, per-piece crossing-direction checks, containment of
//! simulated orbits, and the Poincaré return-map search for the periodic
//! orbit the region traps.

use crate::integrator::{
    integrate_with_events, EventDirection, EventSpec, IntegrateError, MainField,
    ToleranceSettings,
};
use crate::region::{
    resample_polyline, signed_area2, Containment, Crossing, CurvePiece, InvariantRegion,
    PieceKind, PreparedPolygon,
};
use crate::system::{vector_field_aux1, vector_field_main, Parameters, State};
use serde::Serialize;
use thiserror::Error;

/// Radius around the saddle and the tangency corner inside which boundary
/// samples are exempt from the sign checks (the field vanishes or is
/// tangent there), and the half-width of the `x1 = 0` exemption on the
/// upper spiral arc.
pub const EXEMPT_RADIUS: f64 = 1e-6;
/// Allowed outward component, scaled by `max(1, |f|)` at the sample.
pub const INWARD_TOL: f64 = 1e-9;

/// Outcome of the boundary inward-flow certificate.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub samples_checked: usize,
    /// Largest `f . n_out` over non-exempt samples (negative means inward).
    pub max_outward_component: f64,
    /// Non-exempt samples with `f . n_out` above tolerance.
    pub violations: Vec<(State, f64)>,
    pub exempt_points: Vec<State>,
}

impl InvarianceReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Outcome of a per-piece crossing-direction check.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub piece_kind: &'static str,
    pub expected: &'static str,
    pub samples_checked: usize,
    pub violations: Vec<(State, f64)>,
    pub exempt_points: Vec<State>,
}

impl CrossingReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// First escape of a simulated orbit from the region, if any.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Escape {
    pub orbit_index: usize,
    pub t: f64,
    pub state: State,
}

/// Outcome of the containment-by-simulation check.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub orbits: usize,
    pub escapes: Vec<Escape>,
    /// Per-orbit integration failures (index, message), reported as data.
    pub failures: Vec<(usize, String)>,
}

impl ContainmentReport {
    pub fn ok(&self) -> bool {
        self.escapes.is_empty() && self.failures.is_empty()
    }
}

/// A closed trajectory located by the return map.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    pub period: f64,
    /// Fixed point of the return map on the section {x2 = 0, x1 > 0}.
    pub section_point: State,
    /// One period of the orbit, closed (last point repeats the first).
    pub polyline: Vec<State>,
    pub returns_used: usize,
}

impl PeriodicOrbit {
    /// Turns of the closed polyline around the origin (unsigned; the flow
    /// runs clockwise, so the signed winding is negative).
    pub fn winding_number(&self) -> i32 {
        let ring = &self.polyline[..self.polyline.len() - 1];
        PreparedPolygon::new(ring).winding_number(State::new(0.0, 0.0)).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitCycleError {
    #[error("return map did not settle within {max_returns} returns (last delta {last_delta})")]
    NoConvergence { max_returns: usize, last_delta: f64 },
    #[error("orbit never crossed the section {{x2 = 0, x1 > 0}}")]
    SectionNeverHit,
    #[error("integration failed during the return map: {0}")]
    Integration(#[from] IntegrateError),
}

fn exempt(piece: &CurvePiece, saddle: State, tangency: State, q: State) -> bool {
    q.distance(saddle) <= EXEMPT_RADIUS
        || q.distance(tangency) <= EXEMPT_RADIUS
        || (piece.is_upper_spiral_arc() && q.x1.abs() <= EXEMPT_RADIUS)
}

/// Tangent direction of a piece at a boundary sample, from the piece's own
/// generator rather than the sampled polyline: the auxiliary fields for the
/// orbit arcs (exact at any point, both fields are linear), the closed-form
/// slopes for the nullcline and separatrix graphs, and the chord for
/// straight segments. Polyline chords are only second-order accurate and
/// would drown the tiny true margins near the tangential corners.
fn piece_tangent(piece: &CurvePiece, p: &Parameters, q: State, chord: State) -> State {
    let t = match piece.kind {
        PieceKind::Aux1Orbit => vector_field_aux1(p, q),
        PieceKind::CircleArc => State::new(q.x2, -q.x1),
        PieceKind::NullclineArc => nullcline_slope(p, q.x1)
            .map(|m| State::new(1.0, m))
            .unwrap_or(chord),
        PieceKind::SeparatrixArc => separatrix_slope(p, q.x1)
            .map(|m| State::new(1.0, m))
            .unwrap_or(chord),
        PieceKind::HorizontalSegment | PieceKind::VerticalSegment => chord,
    };
    // Align with the traversal direction.
    if t.x1 * chord.x1 + t.x2 * chord.x2 < 0.0 {
        State::new(-t.x1, -t.x2)
    } else {
        t
    }
}

/// d/dx1 of the nullcline height, where defined.
fn nullcline_slope(p: &Parameters, x1: f64) -> Option<f64> {
    let xi = x1 * x1 - p.nu() * p.nu();
    if xi.abs() < 1e-12 {
        return None;
    }
    let (e, d) = (p.e(), p.d());
    let cubic = x1 * (x1 + d) * (x1 + e);
    let cubic_d = 3.0 * x1 * x1 + 2.0 * (e + d) * x1 + p.ed();
    Some((-cubic_d * xi + 2.0 * x1 * cubic) / (p.alpha() * p.ed() * xi * xi))
}

/// d/dx1 of the lower separatrix branch, where the loop is real.
fn separatrix_slope(p: &Parameters, x1: f64) -> Option<f64> {
    let rhs = crate::geometry::separatrix_rhs(p, x1);
    if rhs <= 0.0 {
        return None;
    }
    let (e, d) = (p.e(), p.d());
    let rhs_d = -2.0 * x1 * (1.0 + (2.0 / 3.0) * (1.0 / e + 1.0 / d) * x1 + x1 * x1 / (2.0 * p.ed()))
        - x1 * x1 * ((2.0 / 3.0) * (1.0 / e + 1.0 / d) + x1 / p.ed());
    let lower = -rhs.sqrt();
    Some(rhs_d / (2.0 * lower))
}

/// Certify inward flow: sample every piece, compute the outward normal from
/// the polygon orientation, and flag samples where the field has an outward
/// component above `INWARD_TOL * max(1, |f|)`.
pub fn check_inward_flow(
    region: &InvariantRegion,
    p: &Parameters,
    samples_per_piece: usize,
) -> InvarianceReport {
    let ccw = signed_area2(&region.polygon) > 0.0;
    let saddle = region.vertices.p2;
    let tangency = region.vertices.a;

    let mut report = InvarianceReport {
        samples_checked: 0,
        max_outward_component: f64::NEG_INFINITY,
        violations: Vec::new(),
        exempt_points: Vec::new(),
    };

    for piece in &region.pieces {
        let pts = resample_polyline(&piece.polyline, samples_per_piece.max(1));
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let q = State::new(0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2));
            let chord = State::new(b.x1 - a.x1, b.x2 - a.x2);
            report.samples_checked += 1;
            if exempt(piece, saddle, tangency, q) {
                report.exempt_points.push(q);
                continue;
            }
            let t = piece_tangent(piece, p, q, chord);
            let len = t.norm().max(f64::MIN_POSITIVE);
            // Interior lies left of travel on a counterclockwise ring.
            let n_out = if ccw {
                State::new(t.x2 / len, -t.x1 / len)
            } else {
                State::new(-t.x2 / len, t.x1 / len)
            };
            let f = vector_field_main(p, q);
            let outward = f.x1 * n_out.x1 + f.x2 * n_out.x2;
            report.max_outward_component = report.max_outward_component.max(outward);
            if outward > INWARD_TOL * f.norm().max(1.0) {
                report.violations.push((q, outward));
            }
        }
    }
    report
}

/// Check that the sign of the crossing component of the full field matches
/// the piece's expected traversal direction at every non-exempt sample.
///
/// Left/right crossings test the `x1` component, top-to-bottom the `x2`
/// component. The exemptions are those of [`check_inward_flow`]; the saddle
/// and tangency corners are recognized from the piece's own endpoints.
pub fn check_crossing_direction(
    piece: &CurvePiece,
    p: &Parameters,
    samples: usize,
) -> CrossingReport {
    let saddle = State::new(-p.e(), 0.0);
    // The tangency corner bounds the nullcline arc (end) and the upper
    // spiral arc (start); other pieces never approach it.
    let tangency = match piece.kind {
        PieceKind::NullclineArc => piece.end,
        _ if piece.is_upper_spiral_arc() => piece.start,
        _ => State::new(f64::INFINITY, f64::INFINITY),
    };

    let mut report = CrossingReport {
        piece_kind: piece.kind.as_str(),
        expected: piece.expected_crossing.as_str(),
        samples_checked: 0,
        violations: Vec::new(),
        exempt_points: Vec::new(),
    };

    let pts = resample_polyline(&piece.polyline, samples.max(1));
    for w in pts.windows(2) {
        let q = State::new(0.5 * (w[0].x1 + w[1].x1), 0.5 * (w[0].x2 + w[1].x2));
        report.samples_checked += 1;
        if exempt(piece, saddle, tangency, q) {
            report.exempt_points.push(q);
            continue;
        }
        let f = vector_field_main(p, q);
        let (component, want_positive) = match piece.expected_crossing {
            Crossing::LeftToRight => (f.x1, true),
            Crossing::RightToLeft => (f.x1, false),
            Crossing::TopToBottom => (f.x2, false),
        };
        let ok = if want_positive {
            component > 0.0
        } else {
            component < 0.0
        };
        if !ok {
            report.violations.push((q, component));
        }
    }
    report
}

/// Integrate each initial point with the full field for `horizon` and check
/// containment at every accepted step. Points on (or outside within a hair
/// of) the boundary are first nudged `1e-6` along the inward normal.
/// Escapes and per-orbit integration failures are data, not errors.
pub fn check_containment_by_simulation(
    region: &InvariantRegion,
    p: &Parameters,
    initial_points: &[State],
    horizon: f64,
    tol: &ToleranceSettings,
) -> ContainmentReport {
    let prepared = region.prepared();
    let field = MainField(*p);
    let mut report = ContainmentReport {
        orbits: initial_points.len(),
        escapes: Vec::new(),
        failures: Vec::new(),
    };

    for (idx, &start) in initial_points.iter().enumerate() {
        let s0 = match prepared.contains(start) {
            Containment::Inside => start,
            _ => {
                let n = prepared.inward_normal_at(start);
                State::new(start.x1 + 1e-6 * n.x1, start.x2 + 1e-6 * n.x2)
            }
        };
        // No event guard; step the trajectory and test each accepted state.
        let traj = match crate::integrator::integrate(&field, s0, (0.0, horizon), tol) {
            Ok(t) => t,
            Err(e) => {
                report.failures.push((idx, e.to_string()));
                continue;
            }
        };
        for &(t, s) in &traj.samples {
            if prepared.contains(s) == Containment::Outside {
                report.escapes.push(Escape {
                    orbit_index: idx,
                    t,
                    state: s,
                });
                break;
            }
        }
    }
    report
}

/// Successive crossings of the section {x2 = 0, x1 > 0} in the falling
/// direction, starting from `seed`, up to `max_hits`.
fn section_crossings(
    p: &Parameters,
    seed: State,
    t_budget: f64,
    max_hits: usize,
    tol: &ToleranceSettings,
) -> Result<Vec<(f64, State)>, IntegrateError> {
    let field = MainField(*p);
    let ev = EventSpec {
        guard: |s: State| s.x2,
        direction: EventDirection::Falling,
        terminal: false,
    };
    let (_, hits) = integrate_with_events(&field, seed, &ev, (0.0, t_budget), tol, false)?;
    Ok(hits
        .into_iter()
        .filter(|(_, s)| s.x1 > 0.0)
        .take(max_hits)
        .collect())
}

/// Locate the periodic orbit via the Poincaré return map on the positive
/// `x1`-axis, iterating until successive section abscissas differ by at
/// most `tol_fixed_point`.
pub fn find_limit_cycle(
    p: &Parameters,
    seed: State,
    tol_fixed_point: f64,
    max_returns: usize,
    tol: &ToleranceSettings,
) -> Result<PeriodicOrbit, LimitCycleError> {
    if vector_field_main(p, seed).norm() < 1e-12 {
        // An equilibrium seed never leaves the point, let alone reaches the
        // section.
        return Err(LimitCycleError::SectionNeverHit);
    }

    const T_PER_RETURN: f64 = 100.0;
    let mut s = seed;
    let mut prev_abscissa: Option<f64> = None;
    let mut returns_used = 0usize;
    let mut last_delta = f64::INFINITY;

    while returns_used < max_returns {
        let budget = T_PER_RETURN;
        let hits = section_crossings(p, s, budget, 1, tol)?;
        let Some(&(_, hit)) = hits.first() else {
            return Err(LimitCycleError::SectionNeverHit);
        };
        returns_used += 1;
        if let Some(prev) = prev_abscissa {
            last_delta = (hit.x1 - prev).abs();
            if last_delta <= tol_fixed_point {
                return close_orbit(p, hit, returns_used, tol);
            }
        }
        prev_abscissa = Some(hit.x1);
        s = hit;
    }
    Err(LimitCycleError::NoConvergence {
        max_returns,
        last_delta,
    })
}

/// Integrate one full return from the fixed point, recording the orbit.
fn close_orbit(
    p: &Parameters,
    section_point: State,
    returns_used: usize,
    tol: &ToleranceSettings,
) -> Result<PeriodicOrbit, LimitCycleError> {
    let field = MainField(*p);
    let start = State::new(section_point.x1, 0.0);
    let ev = EventSpec {
        guard: |s: State| s.x2,
        direction: EventDirection::Falling,
        terminal: false,
    };
    let (traj, hits) =
        integrate_with_events(&field, start, &ev, (0.0, 100.0), tol, false)?;
    let (period, _) = hits
        .iter()
        .find(|(_, s)| s.x1 > 0.0)
        .ok_or(LimitCycleError::SectionNeverHit)?;

    // Resample one period densely and close the polyline.
    let n = 2000usize;
    let mut polyline: Vec<State> = (0..n)
        .map(|k| traj.state_at(period * k as f64 / n as f64))
        .collect();
    polyline.push(polyline[0]);
    Ok(PeriodicOrbit {
        period: *period,
        section_point: start,
        polyline,
        returns_used,
    })
}

/// All falling section crossings of one orbit over a horizon; used to track
/// where a trajectory settles.
pub fn section_crossings_over(
    p: &Parameters,
    seed: State,
    horizon: f64,
    tol: &ToleranceSettings,
) -> Result<Vec<(f64, State)>, IntegrateError> {
    section_crossings(p, seed, horizon, usize::MAX, tol)
}
