//! The modified Van der Pol system, its auxiliary comparison systems,
//! equilibria and the conserved energy of the undamped subsystem.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Control parameters of the system, validated at construction.
///
/// Admissible tuples satisfy `alpha > 0` and `0 < nu < e < d <= 2e`.
/// The upper bound `d <= 2e` keeps the constant term of the separatrix-loop
/// equation nonnegative, so the loop through the saddle is real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parameters {
    alpha: f64,
    nu: f64,
    e: f64,
    d: f64,
}

/// A rejected parameter tuple, naming the violated inequality.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParameterError {
    #[error("alpha must be positive and finite, got {alpha}")]
    AlphaNotPositive { alpha: f64 },
    #[error("nu must be positive and finite, got {nu}")]
    NuNotPositive { nu: f64 },
    #[error("nu < e violated: nu = {nu}, e = {e}")]
    NuNotBelowE { nu: f64, e: f64 },
    #[error("e < d violated: e = {e}, d = {d}")]
    ENotBelowD { e: f64, d: f64 },
    #[error("d <= 2e violated: d = {d}, 2e = {two_e}")]
    DAboveTwiceE { d: f64, two_e: f64 },
}

impl Parameters {
    pub fn new(alpha: f64, nu: f64, e: f64, d: f64) -> Result<Self, ParameterError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(ParameterError::AlphaNotPositive { alpha });
        }
        if !nu.is_finite() || nu <= 0.0 {
            return Err(ParameterError::NuNotPositive { nu });
        }
        if !e.is_finite() || nu >= e {
            return Err(ParameterError::NuNotBelowE { nu, e });
        }
        if !d.is_finite() || e >= d {
            return Err(ParameterError::ENotBelowD { e, d });
        }
        if d > 2.0 * e {
            return Err(ParameterError::DAboveTwiceE { d, two_e: 2.0 * e });
        }
        Ok(Self { alpha, nu, e, d })
    }

    /// The configuration demonstrated in the reference experiments:
    /// `alpha = 1.5, nu = 0.1, e = 3.5, d = 4.0`.
    pub fn reference() -> Self {
        Self::new(1.5, 0.1, 3.5, 4.0).expect("reference tuple is admissible")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn e(&self) -> f64 {
        self.e
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Product `e * d`, the denominator of the cubic restoring term.
    pub fn ed(&self) -> f64 {
        self.e * self.d
    }

    /// `alpha * nu^2`, the slope coefficient of the auxiliary spiral's
    /// horizontal-tangency line `-x1 + alpha nu^2 x2 = 0`.
    pub fn alpha_nu2(&self) -> f64 {
        self.alpha * self.nu * self.nu
    }
}

impl<'de> Deserialize<'de> for Parameters {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            nu: f64,
            e: f64,
            d: f64,
        }
        let raw = Raw::deserialize(de)?;
        Parameters::new(raw.alpha, raw.nu, raw.e, raw.d).map_err(D::Error::custom)
    }
}

/// A point of the phase plane: position `x1` and velocity `x2 = dx1/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
}

impl State {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn distance(&self, other: State) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }
}

// Serialized as a bare `[x1, x2]` pair so polylines stay compact.
impl Serialize for State {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        (self.x1, self.x2).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (x1, x2) = <(f64, f64)>::deserialize(de)?;
        Ok(State { x1, x2 })
    }
}

/// The full vector field: `(x2, -alpha (x1^2 - nu^2) x2 - x1 (x1+d)(x1+e) / (ed))`.
pub fn vector_field_main(p: &Parameters, s: State) -> State {
    let State { x1, x2 } = s;
    State {
        x1: x2,
        x2: -p.alpha * (x1 * x1 - p.nu * p.nu) * x2 - x1 * (x1 + p.d) * (x1 + p.e) / p.ed(),
    }
}

/// The auxiliary spiral source: `(x2, -x1 + alpha nu^2 x2)`.
///
/// Its orbits are slowly expanding clockwise spirals about the origin; two
/// boundary pieces of the invariant region follow them.
pub fn vector_field_aux1(p: &Parameters, s: State) -> State {
    State {
        x1: s.x2,
        x2: -s.x1 + p.alpha_nu2() * s.x2,
    }
}

/// The rotation field `(x2, -x1)`: exact clockwise circles about the origin.
pub fn vector_field_aux2(s: State) -> State {
    State {
        x1: s.x2,
        x2: -s.x1,
    }
}

/// The undamped (conservative) subsystem: `(x2, -x1 (x1+d)(x1+e) / (ed))`.
pub fn vector_field_conservative(p: &Parameters, s: State) -> State {
    let State { x1, x2 } = s;
    State {
        x1: x2,
        x2: -x1 * (x1 + p.d) * (x1 + p.e) / p.ed(),
    }
}

/// The conserved energy of the undamped subsystem:
/// `E = x2^2/2 + x1^2 (1/2 + (1/e + 1/d) x1 / 3 + x1^2 / (4ed))`.
pub fn energy(p: &Parameters, s: State) -> f64 {
    let State { x1, x2 } = s;
    0.5 * x2 * x2
        + x1 * x1
            * (0.5 + (1.0 / p.e + 1.0 / p.d) * x1 / 3.0 + x1 * x1 / (4.0 * p.ed()))
}

/// Jacobian of [`vector_field_main`], rows `(0, 1)` and
/// `(-2 alpha x1 x2 - (3x1^2 + 2(e+d)x1 + ed)/(ed), -alpha (x1^2 - nu^2))`.
pub fn jacobian_main(p: &Parameters, s: State) -> [[f64; 2]; 2] {
    let State { x1, x2 } = s;
    let ed = p.ed();
    let j21 = -2.0 * p.alpha * x1 * x2 - (3.0 * x1 * x1 + 2.0 * (p.e + p.d) * x1 + ed) / ed;
    let j22 = -p.alpha * (x1 * x1 - p.nu * p.nu);
    [[0.0, 1.0], [j21, j22]]
}

/// Linearized stability class of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    UnstableFocus,
    UnstableNode,
    Saddle,
    StableFocus,
    StableNode,
}

/// An equilibrium point with its Jacobian trace/determinant and class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub location: State,
    pub kind: EquilibriumKind,
    pub trace: f64,
    pub determinant: f64,
}

/// Classify from trace and determinant of the linearization.
///
/// A vanishing discriminant classifies as a node (measure-zero boundary
/// case). Callers guarantee `det != 0`, and `trace != 0` when `det > 0`;
/// both hold at the three equilibria for every admissible tuple.
fn classify(trace: f64, det: f64) -> EquilibriumKind {
    if det < 0.0 {
        return EquilibriumKind::Saddle;
    }
    let focus = trace * trace < 4.0 * det;
    match (trace > 0.0, focus) {
        (true, true) => EquilibriumKind::UnstableFocus,
        (true, false) => EquilibriumKind::UnstableNode,
        (false, true) => EquilibriumKind::StableFocus,
        (false, false) => EquilibriumKind::StableNode,
    }
}

/// The three equilibria `(0,0)`, `(-e,0)`, `(-d,0)` with classifications.
///
/// For every admissible tuple the origin is unstable (`det = 1`,
/// `trace = alpha nu^2 > 0`), `(-e, 0)` is a saddle and `(-d, 0)` is
/// asymptotically stable.
pub fn equilibria(p: &Parameters) -> [Equilibrium; 3] {
    let at = |x1: f64| {
        let s = State::new(x1, 0.0);
        let j = jacobian_main(p, s);
        let trace = j[1][1];
        let det = -j[1][0];
        Equilibrium {
            location: s,
            kind: classify(trace, det),
            trace,
            determinant: det,
        }
    };
    [at(0.0), at(-p.e), at(-p.d)]
}
