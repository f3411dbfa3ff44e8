//! Piece-by-piece assembly of the closed boundary curve and the positively
//! invariant region it encloses.
//!
//! The boundary runs clockwise from the saddle: a nullcline arc up to the
//! tangency point, an auxiliary-spiral orbit over the top, (in the
//! eight-piece case a short horizontal shim), a circle arc down to the
//! positive axis, a vertical drop to the oblique asymptote, a second spiral
//! orbit around the bottom to the line `x1 = -nu`, a vertical drop onto the
//! separatrix loop, and the loop itself back to the saddle.

mod polygon;

pub use polygon::{
    resample_polyline, ring_is_simple, signed_area2, Containment, PreparedPolygon, BOUNDARY_TOL,
};

use crate::geometry::{
    find_tangency_abscissa, nullcline_x2, oblique_asymptote_x2, separatrix_lower_x2,
    GeometryError,
};
use crate::integrator::{
    integrate_until_event, Aux1Field, EventDirection, EventSpec, IntegrateError,
    ToleranceSettings,
};
use crate::system::{Parameters, State};
use thiserror::Error;

/// Junction gap allowed when chaining pieces into the closed curve.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Slack on the inclusive ends of the two conditions on the corner `E`.
const CONDITION_TOL: f64 = 1e-10;

/// Which generator produced a boundary piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    NullclineArc,
    Aux1Orbit,
    HorizontalSegment,
    CircleArc,
    VerticalSegment,
    SeparatrixArc,
}

impl PieceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PieceKind::NullclineArc => "nullcline_arc",
            PieceKind::Aux1Orbit => "aux1_orbit",
            PieceKind::HorizontalSegment => "horizontal_segment",
            PieceKind::CircleArc => "circle_arc",
            PieceKind::VerticalSegment => "vertical_segment",
            PieceKind::SeparatrixArc => "separatrix_arc",
        }
    }
}

/// The side-to-side sense in which full-system orbits traverse a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    LeftToRight,
    RightToLeft,
    TopToBottom,
}

impl Crossing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Crossing::LeftToRight => "left_to_right",
            Crossing::RightToLeft => "right_to_left",
            Crossing::TopToBottom => "top_to_bottom",
        }
    }
}

/// One typed segment of the boundary with its sampled polyline.
#[derive(Debug, Clone)]
pub struct CurvePiece {
    pub kind: PieceKind,
    pub start: State,
    pub end: State,
    pub polyline: Vec<State>,
    pub expected_crossing: Crossing,
}

impl CurvePiece {
    fn new(kind: PieceKind, polyline: Vec<State>, expected_crossing: Crossing) -> Self {
        debug_assert!(polyline.len() >= 2);
        Self {
            kind,
            start: polyline[0],
            end: *polyline.last().unwrap(),
            polyline,
            expected_crossing,
        }
    }

    /// The orbit arc from the tangency point is the only left-to-right
    /// spiral piece; it gets the `x1 = 0` verification exemption.
    pub fn is_upper_spiral_arc(&self) -> bool {
        self.kind == PieceKind::Aux1Orbit && self.expected_crossing == Crossing::LeftToRight
    }
}

/// The named corner points of the boundary.
#[derive(Debug, Clone, Copy)]
pub struct RegionVertices {
    /// The saddle `(-e, 0)`.
    pub p2: State,
    /// Tangency point of the auxiliary spiral with the nullcline.
    pub a: State,
    /// Where the upper spiral arc meets the line `-x1 + alpha nu^2 x2 = 0`.
    pub b: State,
    /// Present in the eight-piece case: `(nu, b.x2)`.
    pub b1: Option<State>,
    /// Where the circle arc reaches the positive `x1`-axis.
    pub c: State,
    /// Foot of the vertical drop on the oblique asymptote.
    pub d: State,
    /// Where the lower spiral arc reaches the line `x1 = -nu`.
    pub e: State,
    /// The point of the separatrix loop directly below `E`.
    pub f: State,
}

/// The assembled region: parameters, named vertices, ordered pieces and the
/// closed polygonal approximation of the boundary.
#[derive(Debug, Clone)]
pub struct InvariantRegion {
    pub params: Parameters,
    pub vertices: RegionVertices,
    pub pieces: Vec<CurvePiece>,
    /// Boundary ring (closing edge implied, no repeated last vertex).
    pub polygon: Vec<State>,
    /// True iff `B.x1 < nu`, in which case the horizontal shim exists.
    pub case_eight_pieces: bool,
}

/// Polyline density and integration settings for the build.
#[derive(Debug, Clone, Copy)]
pub struct SamplingConfig {
    /// Edges per sampled curve piece (segments stay two-point).
    pub samples_per_piece: usize,
    /// Time budget for each orbit piece before the build gives up.
    pub t_max_piece: f64,
    pub tolerances: ToleranceSettings,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples_per_piece: 2000,
            t_max_piece: 100.0,
            tolerances: ToleranceSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("no tangency root on (-e, -nu)")]
    TangencyRootNotFound,
    #[error("orbit piece {piece} never reached its target within t_max")]
    EventNotReached { piece: &'static str },
    #[error(
        "corner E = ({x1}, {x2}) has abscissa outside (-e, -nu]"
    )]
    ConditionE1Violated { x1: f64, x2: f64 },
    #[error(
        "corner E = ({x1}, {x2}) violates the loop bound: need {loop_bound} <= x2 < 0"
    )]
    ConditionE2Violated { x1: f64, x2: f64, loop_bound: f64 },
    #[error(
        "orbit piece {piece} left its usable branch at ({x1}, {x2}); the auxiliary spiral is too sheared for this tuple"
    )]
    SpiralArcDegenerate {
        piece: &'static str,
        x1: f64,
        x2: f64,
    },
    #[error("assembled boundary intersects itself")]
    SelfIntersectingBoundary,
    #[error("assembled boundary does not enclose the origin")]
    OriginNotInterior,
    #[error("integration failed while tracing piece {piece}: {source}")]
    Integration {
        piece: &'static str,
        source: IntegrateError,
    },
}

impl From<GeometryError> for BuildError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::TangencyRootNotFound => BuildError::TangencyRootNotFound,
            // Only reachable through internal misuse; surface as the nearest
            // construction failure.
            other => panic!("unexpected geometry error during build: {other}"),
        }
    }
}

/// Execute the eight construction steps and assemble the region.
pub fn build_region(p: &Parameters, cfg: &SamplingConfig) -> Result<InvariantRegion, BuildError> {
    let n = cfg.samples_per_piece.max(8);
    let tol = cfg.tolerances;
    let saddle = State::new(-p.e(), 0.0);

    // Step 1: tangency abscissa and the corner A on the nullcline. For
    // near-degenerate tuples (nu within rounding of e) the root can fall
    // inside the asymptote band; treat that as having no usable root.
    let x10 = find_tangency_abscissa(p)?;
    let a = State::new(
        x10,
        nullcline_x2(p, x10).map_err(|_| BuildError::TangencyRootNotFound)?,
    );

    // Step 2: nullcline arc from the saddle to A, a graph over x1.
    let mut nullcline_pts = Vec::with_capacity(n + 1);
    nullcline_pts.push(saddle);
    for k in 1..n {
        let x1 = -p.e() + (x10 + p.e()) * k as f64 / n as f64;
        nullcline_pts.push(State::new(
            x1,
            nullcline_x2(p, x1).expect("interior of (-e, x10)"),
        ));
    }
    nullcline_pts.push(a);
    let piece_p2a = CurvePiece::new(PieceKind::NullclineArc, nullcline_pts, Crossing::LeftToRight);

    // Step 3: upper spiral arc from A to the line -x1 + alpha nu^2 x2 = 0.
    // A sits on the nullcline of the full system, not on this guard line.
    let spiral_line = {
        let c = p.alpha_nu2();
        move |s: State| -s.x1 + c * s.x2
    };
    assert!(
        spiral_line(a) > 0.0,
        "tangency corner must start strictly off the guard line"
    );
    let field = Aux1Field(*p);
    let ev = EventSpec::terminal(spiral_line, EventDirection::Falling);
    let hit_b = integrate_until_event(&field, a, &ev, cfg.t_max_piece, &tol).map_err(|e| match e {
        IntegrateError::EventNotReached { .. } => BuildError::EventNotReached { piece: "AB" },
        other => BuildError::Integration {
            piece: "AB",
            source: other,
        },
    })?;
    let b = hit_b.hit;
    // A falling crossing of the guard has x2 >= 0 (on the line, dg/dt equals
    // -x2 exactly); a nonpositive ordinate means the sheared spiral grazed
    // the line near the origin and the circle-arc step has nothing to work
    // with.
    if b.x2 <= 0.0 {
        return Err(BuildError::SpiralArcDegenerate {
            piece: "AB",
            x1: b.x1,
            x2: b.x2,
        });
    }
    let ab_pts: Vec<State> = hit_b.trajectory.resample(n).into_iter().map(|(_, s)| s).collect();
    let piece_ab = CurvePiece::new(PieceKind::Aux1Orbit, ab_pts, Crossing::LeftToRight);

    // Step 4: circle arc to the positive x1-axis, preceded by the
    // horizontal shim when B lies inside the strip |x1| < nu.
    let case_eight_pieces = b.x1 < p.nu();
    let (b1, mut pieces_mid) = if case_eight_pieces {
        let b1 = State::new(p.nu(), b.x2);
        let shim = CurvePiece::new(
            PieceKind::HorizontalSegment,
            vec![b, b1],
            Crossing::TopToBottom,
        );
        (Some(b1), vec![shim])
    } else {
        (None, Vec::new())
    };
    let circle_start = b1.unwrap_or(b);
    let piece_circle = circle_arc_to_axis(circle_start, n);
    let c = piece_circle.end;
    pieces_mid.push(piece_circle);

    // Step 5: vertical drop from C to the oblique asymptote.
    let d = State::new(c.x1, oblique_asymptote_x2(p, c.x1));
    let piece_cd = CurvePiece::new(PieceKind::VerticalSegment, vec![c, d], Crossing::RightToLeft);

    // Step 6: lower spiral arc from D to the first crossing of x1 = -nu
    // with x2 < 0. D sits strictly right of that line.
    assert!(d.x1 + p.nu() > 0.0, "asymptote corner must start right of x1 = -nu");
    let nu = p.nu();
    let ev = EventSpec::terminal(move |s: State| s.x1 + nu, EventDirection::Falling);
    let hit_e = integrate_until_event(&field, d, &ev, cfg.t_max_piece, &tol).map_err(|e| match e {
        IntegrateError::EventNotReached { .. } => BuildError::EventNotReached { piece: "DE" },
        other => BuildError::Integration {
            piece: "DE",
            source: other,
        },
    })?;
    let corner_e = hit_e.hit;
    if corner_e.x2 >= 0.0 {
        // A crossing above the axis has no loop point below it; report it
        // as a loop-bound failure so parameter scans can map the feasible
        // set.
        return Err(BuildError::ConditionE2Violated {
            x1: corner_e.x1,
            x2: corner_e.x2,
            loop_bound: 0.0,
        });
    }
    if !(-p.e() < corner_e.x1 && corner_e.x1 <= -p.nu() + CONDITION_TOL) {
        return Err(BuildError::ConditionE1Violated {
            x1: corner_e.x1,
            x2: corner_e.x2,
        });
    }
    let loop_bound = match separatrix_lower_x2(p, corner_e.x1) {
        Ok(v) => v,
        Err(_) => {
            return Err(BuildError::ConditionE2Violated {
                x1: corner_e.x1,
                x2: corner_e.x2,
                loop_bound: f64::NAN,
            })
        }
    };
    if corner_e.x2 < loop_bound - CONDITION_TOL {
        return Err(BuildError::ConditionE2Violated {
            x1: corner_e.x1,
            x2: corner_e.x2,
            loop_bound,
        });
    }
    let de_pts: Vec<State> = hit_e.trajectory.resample(n).into_iter().map(|(_, s)| s).collect();
    let piece_de = CurvePiece::new(PieceKind::Aux1Orbit, de_pts, Crossing::RightToLeft);

    // Step 8 (chain order): vertical drop from E onto the separatrix loop.
    let f = State::new(corner_e.x1, loop_bound);
    let piece_ef = CurvePiece::new(PieceKind::VerticalSegment, vec![corner_e, f], Crossing::RightToLeft);

    // Step 7: the separatrix arc from F back to the saddle.
    let mut sep_pts = Vec::with_capacity(n + 1);
    sep_pts.push(f);
    for k in 1..n {
        let x1 = f.x1 + (-p.e() - f.x1) * k as f64 / n as f64;
        let x2 = separatrix_lower_x2(p, x1).expect("loop is real on [-e, E.x1]");
        sep_pts.push(State::new(x1, x2));
    }
    sep_pts.push(saddle);
    let piece_fp2 = CurvePiece::new(PieceKind::SeparatrixArc, sep_pts, Crossing::RightToLeft);

    let mut pieces = vec![piece_p2a, piece_ab];
    pieces.extend(pieces_mid);
    pieces.extend([piece_cd, piece_de, piece_ef, piece_fp2]);

    let region = InvariantRegion {
        params: *p,
        vertices: RegionVertices {
            p2: saddle,
            a,
            b,
            b1,
            c,
            d,
            e: corner_e,
            f,
        },
        polygon: assemble_ring(&pieces),
        pieces,
        case_eight_pieces,
    };

    debug_assert!(region.max_junction_gap() <= CLOSURE_TOL);
    if !ring_is_simple(&region.polygon) {
        return Err(BuildError::SelfIntersectingBoundary);
    }
    if region.contains(State::new(0.0, 0.0)) != Containment::Inside {
        return Err(BuildError::OriginNotInterior);
    }
    Ok(region)
}

/// Exact clockwise circle arc of the rotation field from `start` down to the
/// positive `x1`-axis. The orbit is an exact circle, so the arc is written
/// in closed form instead of integrated.
fn circle_arc_to_axis(start: State, n: usize) -> CurvePiece {
    let r = start.norm();
    let theta0 = start.x2.atan2(start.x1);
    debug_assert!(theta0 > 0.0, "circle arc starts above the axis");
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(start);
    for k in 1..n {
        let theta = theta0 * (1.0 - k as f64 / n as f64);
        pts.push(State::new(r * theta.cos(), r * theta.sin()));
    }
    pts.push(State::new(r, 0.0));
    CurvePiece::new(PieceKind::CircleArc, pts, Crossing::LeftToRight)
}

/// Concatenate piece polylines into a ring, dropping duplicated junctions.
fn assemble_ring(pieces: &[CurvePiece]) -> Vec<State> {
    let mut ring: Vec<State> = Vec::new();
    for piece in pieces {
        for &pt in &piece.polyline[..piece.polyline.len() - 1] {
            if ring.last().is_none_or(|last| last.distance(pt) > 0.0) {
                ring.push(pt);
            }
        }
    }
    // The final piece ends at the first piece's start.
    if ring.last() == ring.first() && ring.len() > 1 {
        ring.pop();
    }
    ring
}

impl InvariantRegion {
    /// Reassemble a region from stored parts (deserialization path). The
    /// polygon is rebuilt from the pieces; geometric validity is the
    /// caller's concern.
    pub fn from_parts(
        params: Parameters,
        vertices: RegionVertices,
        pieces: Vec<CurvePiece>,
        case_eight_pieces: bool,
    ) -> Self {
        let polygon = assemble_ring(&pieces);
        Self {
            params,
            vertices,
            pieces,
            polygon,
            case_eight_pieces,
        }
    }

    /// Largest gap between consecutive pieces, including the closing gap.
    pub fn max_junction_gap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.pieces.windows(2) {
            worst = worst.max(w[0].end.distance(w[1].start));
        }
        if let (Some(last), Some(first)) = (self.pieces.last(), self.pieces.first()) {
            worst = worst.max(last.end.distance(first.start));
        }
        worst
    }

    /// One-off containment query; build a [`PreparedPolygon`] for hot loops.
    pub fn contains(&self, s: State) -> Containment {
        self.prepared().contains(s)
    }

    pub fn prepared(&self) -> PreparedPolygon {
        PreparedPolygon::new(&self.polygon)
    }

    /// Closed polyline (last vertex repeats the first) with every edge at
    /// most `max_edge_length` long: each piece is resampled by arc length to
    /// the fewest edges meeting the bound, so a huge bound keeps exactly the
    /// piece endpoints. Piece endpoints, and hence all named vertices, are
    /// preserved exactly.
    pub fn polygon_of(&self, max_edge_length: f64) -> Vec<State> {
        assert!(max_edge_length > 0.0);
        let mut out: Vec<State> = Vec::new();
        for piece in &self.pieces {
            let len: f64 = piece
                .polyline
                .windows(2)
                .map(|w| w[0].distance(w[1]))
                .sum();
            let n_edges = ((len / max_edge_length).ceil() as usize).max(1);
            let pts = resample_polyline(&piece.polyline, n_edges);
            out.extend_from_slice(&pts[..pts.len() - 1]);
        }
        out.push(self.pieces[0].polyline[0]);
        out
    }

    /// `k` points spread uniformly (by arc length) along the boundary ring,
    /// offset half a slot so none lands on the saddle.
    pub fn boundary_points(&self, k: usize) -> Vec<State> {
        let ring = &self.polygon;
        let mut cum = Vec::with_capacity(ring.len() + 1);
        cum.push(0.0);
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            cum.push(cum.last().unwrap() + a.distance(b));
        }
        let total = *cum.last().unwrap();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let target = total * (i as f64 + 0.5) / k as f64;
            let seg = cum.partition_point(|&c| c < target).saturating_sub(1);
            let span = (cum[seg + 1] - cum[seg]).max(f64::MIN_POSITIVE);
            let t = (target - cum[seg]) / span;
            let a = ring[seg];
            let b = ring[(seg + 1) % ring.len()];
            out.push(State::new(a.x1 + t * (b.x1 - a.x1), a.x2 + t * (b.x2 - a.x2)));
        }
        out
    }

    /// A copy with every coordinate scaled about the origin.
    ///
    /// The result is generally *not* invariant; it exists as a negative
    /// control for the verification suite.
    pub fn scaled(&self, factor: f64) -> InvariantRegion {
        let scale = |s: &State| State::new(s.x1 * factor, s.x2 * factor);
        let mut out = self.clone();
        for piece in &mut out.pieces {
            for pt in &mut piece.polyline {
                *pt = scale(pt);
            }
            piece.start = scale(&piece.start);
            piece.end = scale(&piece.end);
        }
        for pt in &mut out.polygon {
            *pt = scale(pt);
        }
        let v = &mut out.vertices;
        v.p2 = scale(&v.p2);
        v.a = scale(&v.a);
        v.b = scale(&v.b);
        v.b1 = v.b1.map(|s| scale(&s));
        v.c = scale(&v.c);
        v.d = scale(&v.d);
        v.e = scale(&v.e);
        v.f = scale(&v.f);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::separatrix_rhs;
    use crate::system::energy;

    fn build_reference() -> InvariantRegion {
        build_region(&Parameters::reference(), &SamplingConfig::default()).unwrap()
    }

    #[test]
    fn reference_tuple_builds_the_eight_piece_curve() {
        let region = build_reference();
        assert!(region.case_eight_pieces);
        assert_eq!(region.pieces.len(), 8);
        assert!(region.vertices.b1.is_some());
        assert!(region.max_junction_gap() <= CLOSURE_TOL);

        // Corner positions frozen from an independent construction at the
        // same tolerances.
        let v = &region.vertices;
        assert!((v.a.x1 - (-0.9620959515548827)).abs() < 1e-10);
        assert!((v.a.x2 - 0.3857704739004569).abs() < 1e-10);
        assert!(v.b.distance(State::new(0.01572926181740461, 1.0486174544936444)) < 1e-8);
        assert!(v.c.distance(State::new(1.0533748458496293, 0.0)) < 1e-8);
        assert!(v.d.distance(State::new(1.0533748458496293, -0.40730356408807755)) < 1e-8);
        assert!(v.e.distance(State::new(-0.1, -1.1395386141330557)) < 1e-8);
        assert!(v.f.distance(State::new(-0.1, -1.5123586120456256)) < 1e-8);
    }

    #[test]
    fn vertex_relations_hold() {
        let region = build_reference();
        let p = region.params;
        let v = &region.vertices;

        assert!(-p.e() < v.a.x1 && v.a.x1 < -p.nu());
        // B on the spiral's horizontal-tangency line.
        assert!((-v.b.x1 + p.alpha_nu2() * v.b.x2).abs() <= 1e-10);
        assert!(v.c.x1 > 0.0 && v.c.x2 == 0.0);
        // D exactly on the oblique asymptote.
        let resid = v.d.x1 + p.alpha() * p.ed() * v.d.x2 + p.e() + p.d();
        assert!(resid.abs() <= 1e-12 * (p.e() + p.d()));
        // E sits on the line x1 = -nu up to the event-refinement tolerance,
        // strictly right of the saddle abscissa.
        assert!(-p.e() < v.e.x1);
        assert!((v.e.x1 + p.nu()).abs() <= 1e-10);
        assert!(v.e.x2 < 0.0 && v.e.x2 >= v.f.x2 - 1e-10);
        assert_eq!(v.f.x1, v.e.x1);
    }

    #[test]
    fn origin_inside_stable_node_outside() {
        let region = build_reference();
        assert_eq!(region.contains(State::new(0.0, 0.0)), Containment::Inside);
        assert_eq!(region.contains(State::new(-4.0, 0.0)), Containment::Outside);
        assert_eq!(region.contains(State::new(100.0, 100.0)), Containment::Outside);
        // Midpoint of the CD segment lies on the boundary by construction.
        let v = &region.vertices;
        let mid = State::new(v.c.x1, 0.5 * (v.c.x2 + v.d.x2));
        assert_eq!(region.contains(mid), Containment::OnBoundary);
    }

    #[test]
    fn circle_arc_radius_is_constant() {
        let region = build_reference();
        let arc = region
            .pieces
            .iter()
            .find(|p| p.kind == PieceKind::CircleArc)
            .unwrap();
        let r = arc.start.norm();
        for pt in &arc.polyline {
            assert!((pt.norm() - r).abs() <= 1e-9, "radius drift at {pt:?}");
        }
    }

    #[test]
    fn separatrix_piece_stays_on_the_energy_level() {
        let region = build_reference();
        let p = region.params;
        let level = energy(&p, State::new(-p.e(), 0.0));
        let arc = region
            .pieces
            .iter()
            .find(|q| q.kind == PieceKind::SeparatrixArc)
            .unwrap();
        for pt in &arc.polyline {
            let e = energy(&p, *pt);
            assert!(
                (e - level).abs() <= 1e-10 * level.max(1.0),
                "energy {e} vs {level} at {pt:?}"
            );
        }
    }

    #[test]
    fn eight_piece_flag_matches_the_shim() {
        let region = build_reference();
        assert_eq!(region.case_eight_pieces, region.vertices.b.x1 < region.params.nu());
        assert_eq!(
            region.case_eight_pieces,
            region
                .pieces
                .iter()
                .any(|p| p.kind == PieceKind::HorizontalSegment)
        );
    }

    #[test]
    fn seven_piece_assembly_from_a_synthetic_corner() {
        // Force the B.x1 >= nu branch directly: a circle arc from a start
        // with abscissa above nu must reach the axis with no shim.
        let start = State::new(0.5, 2.0);
        let arc = circle_arc_to_axis(start, 512);
        assert_eq!(arc.start, start);
        assert_eq!(arc.end.x2, 0.0);
        assert!((arc.end.x1 - start.norm()).abs() < 1e-12);
        let r = start.norm();
        for pt in &arc.polyline {
            assert!((pt.norm() - r).abs() < 1e-12);
            assert!(pt.x2 >= 0.0);
        }
    }

    #[test]
    fn polygon_of_respects_edge_bound_and_vertices() {
        let region = build_reference();
        let fine = region.polygon_of(0.01);
        for w in fine.windows(2) {
            assert!(w[0].distance(w[1]) <= 0.01 + 1e-12);
        }
        assert_eq!(fine.first(), fine.last());
        let v = &region.vertices;
        for named in [v.p2, v.a, v.b, v.c, v.d, v.e, v.f] {
            assert!(
                fine.iter().any(|pt| pt.distance(named) < 1e-12),
                "named vertex {named:?} missing"
            );
        }

        // A huge bound keeps exactly the piece endpoints.
        let coarse = region.polygon_of(1e6);
        assert_eq!(coarse.len(), region.pieces.len() + 1);
        for (piece, pt) in region.pieces.iter().zip(&coarse) {
            assert_eq!(piece.start, *pt);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected_before_building() {
        assert!(Parameters::new(1.5, 0.1, 3.5, 8.0).is_err());
    }

    #[test]
    fn scaled_copy_keeps_shape_but_shrinks() {
        let region = build_reference();
        let small = region.scaled(0.8);
        assert_eq!(small.polygon.len(), region.polygon.len());
        assert!((small.vertices.p2.x1 - 0.8 * region.vertices.p2.x1).abs() < 1e-15);
        assert_eq!(small.contains(State::new(0.0, 0.0)), Containment::Inside);
    }

    #[test]
    fn condition_violations_carry_the_corner_coordinates() {
        let err = BuildError::ConditionE2Violated {
            x1: -0.1,
            x2: -2.0,
            loop_bound: -1.5,
        };
        let msg = err.to_string();
        assert!(msg.contains("-0.1") && msg.contains("-2") && msg.contains("-1.5"));
    }

    #[test]
    fn separatrix_rhs_nonnegative_along_the_arc_span() {
        let region = build_reference();
        let p = region.params;
        for k in 0..=1000 {
            let x1 = -p.e() + (region.vertices.e.x1 + p.e()) * k as f64 / 1000.0;
            assert!(separatrix_rhs(&p, x1) >= -1e-14);
        }
    }

    #[test]
    fn build_never_panics_across_random_tuples() {
        // Every admissible tuple must produce either a region or a named
        // build error; outcome statistics are incidental.
        let mut rng_state = 0x51d9f3au64;
        let mut next = move || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let cfg = SamplingConfig {
            samples_per_piece: 64,
            ..SamplingConfig::default()
        };
        let mut built = 0usize;
        for _ in 0..200 {
            let e = 1.0 + 4.0 * next();
            let nu = e * (0.02 + 0.96 * next());
            let d = (e * (1.0 + next())).min(2.0 * e).max(e * 1.0000001);
            let alpha = 0.05 + 4.0 * next();
            let Ok(p) = Parameters::new(alpha, nu, e, d) else {
                continue;
            };
            if build_region(&p, &cfg).is_ok() {
                built += 1;
            }
        }
        assert!(built > 0, "the sweep should build at least one region");
    }
}
