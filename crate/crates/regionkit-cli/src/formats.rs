//! On-disk formats: the region JSON schema, trajectory/polygon/scan CSV,
//! the verification and cycle reports, and the scan grid axis syntax.
//!
//! All float columns are written with 17 significant digits so a written
//! file round-trips bit-exactly through `f64`.

use regionkit::region::{
    Crossing, CurvePiece, InvariantRegion, PieceKind, RegionVertices, CLOSURE_TOL,
};
use regionkit::system::{Parameters, State};
use regionkit::verify::{ContainmentReport, CrossingReport, InvarianceReport, PeriodicOrbit};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("piece {index} ({kind}) is malformed: {reason}")]
    BadPiece {
        index: usize,
        kind: String,
        reason: String,
    },
    #[error("unknown piece kind {0:?}")]
    UnknownKind(String),
    #[error("unknown crossing direction {0:?}")]
    UnknownCrossing(String),
    #[error("region has no pieces")]
    NoPieces,
    #[error("pieces do not chain into a closed curve (gap {gap} at junction {junction})")]
    ChainBroken { junction: usize, gap: f64 },
    #[error("non-finite coordinate in {context}")]
    NonFinite { context: &'static str },
    #[error("CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("grid axis {0:?}: expected var=lo:hi:n with var one of alpha|nu|e|d")]
    BadGridAxis(String),
}

fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// region.json

#[derive(Debug, Serialize, Deserialize)]
struct VerticesFile {
    p2: State,
    a: State,
    b: State,
    b1: Option<State>,
    c: State,
    d: State,
    e: State,
    f: State,
}

#[derive(Debug, Serialize, Deserialize)]
struct PieceFile {
    kind: String,
    expected_crossing: String,
    start: State,
    end: State,
    polyline: Vec<State>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RegionFile {
    parameters: Parameters,
    case_eight_pieces: bool,
    vertices: VerticesFile,
    pieces: Vec<PieceFile>,
}

fn kind_from_str(s: &str) -> Result<PieceKind, FormatError> {
    Ok(match s {
        "nullcline_arc" => PieceKind::NullclineArc,
        "aux1_orbit" => PieceKind::Aux1Orbit,
        "horizontal_segment" => PieceKind::HorizontalSegment,
        "circle_arc" => PieceKind::CircleArc,
        "vertical_segment" => PieceKind::VerticalSegment,
        "separatrix_arc" => PieceKind::SeparatrixArc,
        other => return Err(FormatError::UnknownKind(other.to_owned())),
    })
}

fn crossing_from_str(s: &str) -> Result<Crossing, FormatError> {
    Ok(match s {
        "left_to_right" => Crossing::LeftToRight,
        "right_to_left" => Crossing::RightToLeft,
        "top_to_bottom" => Crossing::TopToBottom,
        other => return Err(FormatError::UnknownCrossing(other.to_owned())),
    })
}

/// Serialize a region to the `region.json` document.
pub fn region_to_json(region: &InvariantRegion) -> String {
    let v = &region.vertices;
    let file = RegionFile {
        parameters: region.params,
        case_eight_pieces: region.case_eight_pieces,
        vertices: VerticesFile {
            p2: v.p2,
            a: v.a,
            b: v.b,
            b1: v.b1,
            c: v.c,
            d: v.d,
            e: v.e,
            f: v.f,
        },
        pieces: region
            .pieces
            .iter()
            .map(|p| PieceFile {
                kind: p.kind.as_str().to_owned(),
                expected_crossing: p.expected_crossing.as_str().to_owned(),
                start: p.start,
                end: p.end,
                polyline: p.polyline.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("region serialization cannot fail")
}

/// Parse and validate a `region.json` document.
///
/// Validation covers structure only (finite coordinates, two-point minimum,
/// endpoint consistency, chain closure within the build tolerance);
/// geometric soundness is the verifier's job.
pub fn parse_region_json(text: &str) -> Result<InvariantRegion, FormatError> {
    let file: RegionFile = serde_json::from_str(text)?;
    if file.pieces.is_empty() {
        return Err(FormatError::NoPieces);
    }

    let mut pieces = Vec::with_capacity(file.pieces.len());
    for (index, pf) in file.pieces.iter().enumerate() {
        let kind = kind_from_str(&pf.kind)?;
        let expected_crossing = crossing_from_str(&pf.expected_crossing)?;
        if pf.polyline.len() < 2 {
            return Err(FormatError::BadPiece {
                index,
                kind: pf.kind.clone(),
                reason: "polyline has fewer than 2 points".into(),
            });
        }
        if pf.polyline.iter().any(|s| !s.is_finite()) {
            return Err(FormatError::NonFinite { context: "piece polyline" });
        }
        let first = pf.polyline[0];
        let last = *pf.polyline.last().unwrap();
        if first.distance(pf.start) > CLOSURE_TOL || last.distance(pf.end) > CLOSURE_TOL {
            return Err(FormatError::BadPiece {
                index,
                kind: pf.kind.clone(),
                reason: "start/end do not match the polyline endpoints".into(),
            });
        }
        pieces.push(CurvePiece {
            kind,
            start: first,
            end: last,
            polyline: pf.polyline.clone(),
            expected_crossing,
        });
    }

    for i in 0..pieces.len() {
        let next = (i + 1) % pieces.len();
        let gap = pieces[i].end.distance(pieces[next].start);
        if gap > CLOSURE_TOL {
            return Err(FormatError::ChainBroken { junction: i, gap });
        }
    }

    let v = file.vertices;
    for s in [v.p2, v.a, v.b, v.c, v.d, v.e, v.f] {
        if !s.is_finite() {
            return Err(FormatError::NonFinite { context: "vertices" });
        }
    }
    let vertices = RegionVertices {
        p2: v.p2,
        a: v.a,
        b: v.b,
        b1: v.b1,
        c: v.c,
        d: v.d,
        e: v.e,
        f: v.f,
    };
    Ok(InvariantRegion::from_parts(
        file.parameters,
        vertices,
        pieces,
        file.case_eight_pieces,
    ))
}

// ---------------------------------------------------------------------------
// CSV

/// The closed boundary polygon as `x1,x2` rows (last row repeats the first).
pub fn polygon_to_csv(closed_polyline: &[State]) -> String {
    let mut out = String::from("x1,x2\n");
    for s in closed_polyline {
        out.push_str(&format_f64(s.x1));
        out.push(',');
        out.push_str(&format_f64(s.x2));
        out.push('\n');
    }
    out
}

/// One trajectory as `t,x1,x2` rows.
pub fn trajectory_to_csv(samples: &[(f64, State)]) -> String {
    let mut out = String::from("t,x1,x2\n");
    for (t, s) in samples {
        out.push_str(&format_f64(*t));
        out.push(',');
        out.push_str(&format_f64(s.x1));
        out.push(',');
        out.push_str(&format_f64(s.x2));
        out.push('\n');
    }
    out
}

/// Parse a `t,x1,x2` trajectory CSV (header required).
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<(f64, State)>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t,x1,x2" => {}
        _ => {
            return Err(FormatError::Csv {
                line: 1,
                reason: "missing t,x1,x2 header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut field = |name: &str| -> Result<f64, FormatError> {
            let raw = cols.next().ok_or_else(|| FormatError::Csv {
                line: i + 1,
                reason: format!("missing column {name}"),
            })?;
            let v: f64 = raw.trim().parse().map_err(|e| FormatError::Csv {
                line: i + 1,
                reason: format!("column {name}: {e}"),
            })?;
            if !v.is_finite() {
                return Err(FormatError::Csv {
                    line: i + 1,
                    reason: format!("column {name} is not finite"),
                });
            }
            Ok(v)
        };
        let t = field("t")?;
        let x1 = field("x1")?;
        let x2 = field("x2")?;
        if cols.next().is_some() {
            return Err(FormatError::Csv {
                line: i + 1,
                reason: "too many columns".into(),
            });
        }
        out.push((t, State::new(x1, x2)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// verify.json / cycle.json

#[derive(Debug, Serialize)]
pub struct VerifyFile<'a> {
    pub ok: bool,
    pub inward_flow: &'a InvarianceReport,
    pub crossing_checks: &'a [CrossingReport],
    pub containment: &'a ContainmentReport,
}

pub fn verify_to_json(
    inward: &InvarianceReport,
    crossings: &[CrossingReport],
    containment: &ContainmentReport,
) -> String {
    let ok = inward.ok() && crossings.iter().all(|c| c.ok()) && containment.ok();
    let file = VerifyFile {
        ok,
        inward_flow: inward,
        crossing_checks: crossings,
        containment,
    };
    serde_json::to_string_pretty(&file).expect("report serialization cannot fail")
}

#[derive(Debug, Serialize)]
struct CycleFile<'a> {
    period: f64,
    section_point: State,
    /// Turns around the origin (unsigned; the flow runs clockwise).
    winding_number: i32,
    returns_used: usize,
    polyline: &'a [State],
}

pub fn cycle_to_json(orbit: &PeriodicOrbit) -> String {
    let file = CycleFile {
        period: orbit.period,
        section_point: orbit.section_point,
        winding_number: orbit.winding_number(),
        returns_used: orbit.returns_used,
        polyline: &orbit.polyline,
    };
    serde_json::to_string_pretty(&file).expect("cycle serialization cannot fail")
}

// ---------------------------------------------------------------------------
// scan grid

/// Which parameter a grid axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridVar {
    Alpha,
    Nu,
    E,
    D,
}

impl GridVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridVar::Alpha => "alpha",
            GridVar::Nu => "nu",
            GridVar::E => "e",
            GridVar::D => "d",
        }
    }
}

/// One swept axis, `var=lo:hi:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub var: GridVar,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

/// Parse `var=lo:hi:n`, e.g. `alpha=1.35:1.65:5`.
pub fn parse_grid_axis(spec: &str) -> Result<GridAxis, FormatError> {
    let bad = || FormatError::BadGridAxis(spec.to_owned());
    let (var, rest) = spec.split_once('=').ok_or_else(bad)?;
    let var = match var.trim() {
        "alpha" => GridVar::Alpha,
        "nu" => GridVar::Nu,
        "e" => GridVar::E,
        "d" => GridVar::D,
        _ => return Err(bad()),
    };
    let mut parts = rest.split(':');
    let lo: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let n: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    if parts.next().is_some() || !lo.is_finite() || !hi.is_finite() || n == 0 || hi < lo {
        return Err(bad());
    }
    Ok(GridAxis { var, lo, hi, n })
}

/// One result row of a parameter scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub alpha: f64,
    pub nu: f64,
    pub e: f64,
    pub d: f64,
    pub outcome: String,
    pub cycle_max_x1: Option<f64>,
}

pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("alpha,nu,e,d,outcome,cycle_max_x1\n");
    for r in rows {
        out.push_str(&format_f64(r.alpha));
        out.push(',');
        out.push_str(&format_f64(r.nu));
        out.push(',');
        out.push_str(&format_f64(r.e));
        out.push(',');
        out.push_str(&format_f64(r.d));
        out.push(',');
        out.push_str(&r.outcome);
        out.push(',');
        if let Some(v) = r.cycle_max_x1 {
            out.push_str(&format_f64(v));
        }
        out.push('\n');
    }
    out
}
