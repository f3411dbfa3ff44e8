//! Adaptive Dormand–Prince 5(4) integration with fourth-order dense output
//! and guard-crossing (event) detection.
//!
//! The error test is the mixed per-component test
//! `|err_i| <= abs + rel * max(|y_i|, |y_new_i|)`; the step controller is the
//! classical `0.9 * err^(-1/5)` with scale limits. Events are localized by
//! sign-change bracketing on the dense output followed by bisection down to
//! the guard-root tolerance.

use crate::system::{Parameters, State};
use thiserror::Error;

/// Error-control and event-refinement settings.
///
/// Defaults mirror the reference experiments: relative tolerance `1e-13`,
/// absolute tolerance `1e-12`.
#[derive(Debug, Clone, Copy)]
pub struct ToleranceSettings {
    pub relative: f64,
    pub absolute: f64,
    pub max_step: f64,
    /// Guard-root tolerance for event localization.
    pub event_refine: f64,
}

impl Default for ToleranceSettings {
    fn default() -> Self {
        Self {
            relative: 1e-13,
            absolute: 1e-12,
            max_step: f64::INFINITY,
            event_refine: 1e-12,
        }
    }
}

impl ToleranceSettings {
    fn validate(&self) -> Result<(), IntegrateError> {
        let ok = self.relative >= 10.0 * f64::EPSILON
            && self.absolute > 0.0
            && self.max_step > 0.0
            && self.event_refine > 0.0;
        if ok {
            Ok(())
        } else {
            Err(IntegrateError::InvalidTolerances)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("step size underflow at t = {t} (stiffness or blow-up)")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("event not reached before t_max = {t_max}")]
    EventNotReached { t_max: f64 },
    #[error("tolerances must be positive with relative >= 10 * machine epsilon")]
    InvalidTolerances,
}

/// A planar autonomous vector field.
pub trait VectorField {
    fn eval(&self, s: State) -> State;
    fn id(&self) -> &str {
        "custom"
    }
}

impl<F: Fn(State) -> State> VectorField for F {
    fn eval(&self, s: State) -> State {
        self(s)
    }
}

/// The full system as an integrable field.
pub struct MainField(pub Parameters);
impl VectorField for MainField {
    fn eval(&self, s: State) -> State {
        crate::system::vector_field_main(&self.0, s)
    }
    fn id(&self) -> &str {
        "main"
    }
}

/// The auxiliary spiral as an integrable field.
pub struct Aux1Field(pub Parameters);
impl VectorField for Aux1Field {
    fn eval(&self, s: State) -> State {
        crate::system::vector_field_aux1(&self.0, s)
    }
    fn id(&self) -> &str {
        "aux1"
    }
}

/// The rotation field as an integrable field.
pub struct Aux2Field;
impl VectorField for Aux2Field {
    fn eval(&self, s: State) -> State {
        crate::system::vector_field_aux2(s)
    }
    fn id(&self) -> &str {
        "aux2"
    }
}

/// The undamped subsystem as an integrable field.
pub struct ConservativeField(pub Parameters);
impl VectorField for ConservativeField {
    fn eval(&self, s: State) -> State {
        crate::system::vector_field_conservative(&self.0, s)
    }
    fn id(&self) -> &str {
        "conservative"
    }
}

/// Direction of the guard sign change that counts as an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventDirection {
    Rising,
    Falling,
    Either,
}

/// A guard function with a crossing direction.
///
/// The guard must be continuous along trajectories (caller contract).
/// `terminal` events stop the integration at the crossing; non-terminal
/// events are recorded and integration continues.
pub struct EventSpec<G: Fn(State) -> f64> {
    pub guard: G,
    pub direction: EventDirection,
    pub terminal: bool,
}

impl<G: Fn(State) -> f64> EventSpec<G> {
    pub fn terminal(guard: G, direction: EventDirection) -> Self {
        Self {
            guard,
            direction,
            terminal: true,
        }
    }

    fn matches(&self, ga: f64, gb: f64) -> bool {
        match self.direction {
            EventDirection::Rising => ga < 0.0 && gb >= 0.0,
            EventDirection::Falling => ga > 0.0 && gb <= 0.0,
            EventDirection::Either => (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0),
        }
    }
}

/// One accepted step's dense-output polynomial (Hairer's DOPRI5 form).
#[derive(Debug, Clone, Copy)]
struct DenseSegment {
    t0: f64,
    h: f64,
    cont: [[f64; 5]; 2],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> State {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let comp = |c: &[f64; 5]| {
            c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])))
        };
        State::new(comp(&self.cont[0]), comp(&self.cont[1]))
    }
}

/// An integrated trajectory: accepted-step samples plus the dense-output
/// polynomials that interpolate between them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub field_id: String,
    dense: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.samples.first().expect("trajectory has samples").0
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().expect("trajectory has samples").0
    }

    pub fn final_state(&self) -> State {
        self.samples.last().expect("trajectory has samples").1
    }

    /// Dense-output interpolation at any time inside the integrated span.
    pub fn state_at(&self, t: f64) -> State {
        debug_assert!(t >= self.start_time() - 1e-12 && t <= self.final_time() + 1e-12);
        if self.dense.is_empty() {
            return self.samples[0].1;
        }
        let idx = self
            .dense
            .partition_point(|seg| seg.t0 + seg.h < t)
            .min(self.dense.len() - 1);
        self.dense[idx].eval(t)
    }

    /// `n + 1` states at uniform times over the full span, endpoints exact.
    pub fn resample(&self, n: usize) -> Vec<(f64, State)> {
        let (t0, tf) = (self.start_time(), self.final_time());
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.samples[0]);
        for k in 1..n {
            let t = t0 + (tf - t0) * k as f64 / n as f64;
            out.push((t, self.state_at(t)));
        }
        out.push(*self.samples.last().expect("trajectory has samples"));
        out
    }
}

/// Outcome of an event-terminated integration.
#[derive(Debug, Clone)]
pub struct EventHit {
    /// Trajectory truncated at the event time (last sample is the hit).
    pub trajectory: Trajectory,
    pub hit: State,
    pub t_hit: f64,
}

// Dormand-Prince 5(4) tableau. The fields are autonomous, so the stage
// times are never needed.
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights equal A[5] (FSAL); these are the error coefficients
// b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients (Hairer, Norsett & Wanner DOPRI5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 10.0;
/// Subsamples per accepted step when scanning a guard for sign changes.
const EVENT_SCAN: usize = 8;

struct Stepper<'a, F: VectorField> {
    field: &'a F,
    tol: ToleranceSettings,
    t: f64,
    y: State,
    f: State, // f(t, y), carried across steps (FSAL)
    h: f64,
}

struct StepResult {
    t_new: f64,
    y_new: State,
    dense: DenseSegment,
}

impl<'a, F: VectorField> Stepper<'a, F> {
    fn new(field: &'a F, s0: State, t0: f64, t_end: f64, tol: ToleranceSettings) -> Result<Self, IntegrateError> {
        tol.validate()?;
        if !s0.is_finite() {
            return Err(IntegrateError::NonFiniteState { t: t0 });
        }
        let f0 = field.eval(s0);
        if !f0.is_finite() {
            return Err(IntegrateError::NonFiniteState { t: t0 });
        }
        let h = initial_step(field, s0, f0, t_end - t0, &tol);
        Ok(Self {
            field,
            tol,
            t: t0,
            y: s0,
            f: f0,
            h,
        })
    }

    /// Advance by one accepted step, not beyond `t_end`.
    fn step(&mut self, t_end: f64) -> Result<StepResult, IntegrateError> {
        loop {
            let h = self.h.min(self.tol.max_step).min(t_end - self.t);
            if h < 4.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(IntegrateError::StepSizeUnderflow { t: self.t });
            }

            let mut k = [State::default(); 7];
            k[0] = self.f;
            for i in 1..6 {
                let mut y = self.y;
                for (j, kj) in k.iter().enumerate().take(i) {
                    let a = A[i - 1][j] * h;
                    y.x1 += a * kj.x1;
                    y.x2 += a * kj.x2;
                }
                k[i] = self.field.eval(y);
            }
            let mut y_new = self.y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let a = A[5][j] * h;
                y_new.x1 += a * kj.x1;
                y_new.x2 += a * kj.x2;
            }
            if !y_new.is_finite() {
                return Err(IntegrateError::NonFiniteState { t: self.t });
            }
            k[6] = self.field.eval(y_new);

            // Mixed per-component error test.
            let mut err = [0.0f64; 2];
            for (j, kj) in k.iter().enumerate() {
                err[0] += E[j] * kj.x1;
                err[1] += E[j] * kj.x2;
            }
            let tol1 = self.tol.absolute + self.tol.relative * self.y.x1.abs().max(y_new.x1.abs());
            let tol2 = self.tol.absolute + self.tol.relative * self.y.x2.abs().max(y_new.x2.abs());
            let err_norm = ((err[0] * h / tol1).abs()).max((err[1] * h / tol2).abs());

            let scale = if err_norm > 0.0 {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
            } else {
                MAX_SCALE
            };

            if err_norm <= 1.0 {
                let dense = self.dense_segment(h, &k, y_new);
                let t_new = self.t + h;
                self.t = t_new;
                self.y = y_new;
                self.f = k[6];
                self.h = h * scale;
                return Ok(StepResult { t_new, y_new, dense });
            }
            self.h = h * scale.min(1.0);
        }
    }

    fn dense_segment(&self, h: f64, k: &[State; 7], y_new: State) -> DenseSegment {
        let comp = |old: f64, new: f64, kc: [f64; 7]| -> [f64; 5] {
            let ydiff = new - old;
            let bspl = h * kc[0] - ydiff;
            let mut d_term = 0.0;
            for (j, kj) in kc.iter().enumerate() {
                d_term += D[j] * kj;
            }
            [old, ydiff, bspl, -h * kc[1 + 5] + ydiff - bspl, h * d_term]
        };
        let kx1 = [k[0].x1, k[1].x1, k[2].x1, k[3].x1, k[4].x1, k[5].x1, k[6].x1];
        let kx2 = [k[0].x2, k[1].x2, k[2].x2, k[3].x2, k[4].x2, k[5].x2, k[6].x2];
        DenseSegment {
            t0: self.t,
            h,
            cont: [comp(self.y.x1, y_new.x1, kx1), comp(self.y.x2, y_new.x2, kx2)],
        }
    }
}

/// Hairer's two-evaluation initial step heuristic.
fn initial_step<F: VectorField>(field: &F, y0: State, f0: State, span: f64, tol: &ToleranceSettings) -> f64 {
    let sc1 = tol.absolute + tol.relative * y0.x1.abs();
    let sc2 = tol.absolute + tol.relative * y0.x2.abs();
    let d0 = ((y0.x1 / sc1).powi(2) + (y0.x2 / sc2).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((f0.x1 / sc1).powi(2) + (f0.x2 / sc2).powi(2)).sqrt() / 2f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span.abs());
    let y1 = State::new(y0.x1 + h0 * f0.x1, y0.x2 + h0 * f0.x2);
    let f1 = field.eval(y1);
    let d2 = (((f1.x1 - f0.x1) / sc1).powi(2) + ((f1.x2 - f0.x2) / sc2).powi(2)).sqrt()
        / 2f64.sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span.abs()).min(tol.max_step)
}

/// Integrate over an increasing time span, sampling at accepted steps.
pub fn integrate<F: VectorField>(
    field: &F,
    s0: State,
    t_span: (f64, f64),
    tol: &ToleranceSettings,
) -> Result<Trajectory, IntegrateError> {
    assert!(t_span.1 > t_span.0, "t_span must be increasing");
    let mut stepper = Stepper::new(field, s0, t_span.0, t_span.1, *tol)?;
    let mut traj = Trajectory {
        samples: vec![(t_span.0, s0)],
        field_id: field.id().to_owned(),
        dense: Vec::new(),
    };
    let margin = 4.0 * f64::EPSILON * t_span.1.abs().max(1.0);
    while t_span.1 - stepper.t > margin {
        let step = stepper.step(t_span.1)?;
        traj.samples.push((step.t_new, step.y_new));
        traj.dense.push(step.dense);
    }
    Ok(traj)
}

/// Integrate until the first matching guard crossing.
///
/// If the guard is zero at `s0`, detection is armed only once the trajectory
/// leaves the zero set, so pieces may start exactly on their target curve.
pub fn integrate_until_event<F: VectorField, G: Fn(State) -> f64>(
    field: &F,
    s0: State,
    event: &EventSpec<G>,
    t_max: f64,
    tol: &ToleranceSettings,
) -> Result<EventHit, IntegrateError> {
    let (traj, hits) = integrate_with_events(field, s0, event, (0.0, t_max), tol, true)?;
    match hits.into_iter().next() {
        Some((t_hit, hit)) => Ok(EventHit {
            trajectory: traj,
            hit,
            t_hit,
        }),
        None => Err(IntegrateError::EventNotReached { t_max }),
    }
}

/// Integrate over a span, recording every matching guard crossing.
///
/// With a terminal event the trajectory is truncated at the first crossing;
/// otherwise all crossings over the span are returned in order.
pub fn integrate_with_events<F: VectorField, G: Fn(State) -> f64>(
    field: &F,
    s0: State,
    event: &EventSpec<G>,
    t_span: (f64, f64),
    tol: &ToleranceSettings,
    stop_at_first: bool,
) -> Result<(Trajectory, Vec<(f64, State)>), IntegrateError> {
    assert!(t_span.1 > t_span.0, "t_span must be increasing");
    let mut stepper = Stepper::new(field, s0, t_span.0, t_span.1, *tol)?;
    let mut traj = Trajectory {
        samples: vec![(t_span.0, s0)],
        field_id: field.id().to_owned(),
        dense: Vec::new(),
    };
    let mut hits = Vec::new();
    let mut g_prev = (event.guard)(s0);
    // Degenerate start: arm once the guard has a definite sign.
    let mut armed = g_prev != 0.0;
    let stop = stop_at_first || event.terminal;
    let margin = 4.0 * f64::EPSILON * t_span.1.abs().max(1.0);

    while t_span.1 - stepper.t > margin {
        let step = stepper.step(t_span.1)?;
        let seg = step.dense;
        let (t0, t1) = (seg.t0, step.t_new);

        let mut ta = t0;
        let mut ga = g_prev;
        let mut stopped: Option<(f64, State)> = None;
        for i in 1..=EVENT_SCAN {
            let tb = if i == EVENT_SCAN {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / EVENT_SCAN as f64
            };
            let sb = if i == EVENT_SCAN { step.y_new } else { seg.eval(tb) };
            let gb = (event.guard)(sb);
            if !armed {
                if gb != 0.0 {
                    armed = true;
                }
            } else if event.matches(ga, gb) {
                let (t_hit, hit) = refine_event(&seg, &event.guard, ta, tb, tol.event_refine);
                hits.push((t_hit, hit));
                if stop {
                    stopped = Some((t_hit, hit));
                    break;
                }
            }
            ta = tb;
            ga = gb;
        }
        g_prev = (event.guard)(step.y_new);

        if let Some((t_hit, hit)) = stopped {
            traj.samples.push((t_hit, hit));
            // The segment's polynomial stays valid on its whole original
            // step; only the sample list is truncated at the hit.
            traj.dense.push(seg);
            return Ok((traj, hits));
        }
        traj.samples.push((step.t_new, step.y_new));
        traj.dense.push(seg);
    }
    Ok((traj, hits))
}

/// Bisection on the dense output down to the guard-root tolerance.
fn refine_event<G: Fn(State) -> f64>(
    seg: &DenseSegment,
    guard: &G,
    mut ta: f64,
    mut tb: f64,
    event_refine: f64,
) -> (f64, State) {
    let mut ga = guard(seg.eval(ta));
    for _ in 0..128 {
        let tm = 0.5 * (ta + tb);
        if tm == ta || tm == tb {
            break;
        }
        let gm = guard(seg.eval(tm));
        if gm == 0.0 {
            return (tm, seg.eval(tm));
        }
        if (ga > 0.0) == (gm > 0.0) {
            ta = tm;
            ga = gm;
        } else {
            tb = tm;
        }
        if tb - ta <= event_refine * 1e-3 * tb.abs().max(1.0) {
            break;
        }
    }
    let t_hit = tb; // the post-crossing side, so the direction is committed
    (t_hit, seg.eval(t_hit))
}
