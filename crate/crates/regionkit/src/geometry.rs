//! Closed-form curves and root finding for the boundary construction: the
//! horizontal-flow nullcline, its oblique asymptote, the tangency abscissa
//! of the auxiliary spiral with the nullcline, and the separatrix loop of
//! the undamped subsystem.

use crate::system::Parameters;
use thiserror::Error;

/// Abscissas within this distance of `|x1| = nu` count as asymptotic.
const ASYMPTOTE_TOL: f64 = 1e-14;
/// Uniform scan points when bracketing tangency roots.
const ROOT_SCAN_POINTS: usize = 100_000;
/// Negative separatrix values above this are rounding noise and clamp to 0.
const LOOP_CLAMP: f64 = -1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("nullcline is vertical at |x1| = nu (x1 = {x1})")]
    AsymptoteAbscissa { x1: f64 },
    #[error("tangency residual is defined on (-e, -nu), got x1 = {x1}")]
    TangencyDomain { x1: f64 },
    #[error("no sign change of the tangency residual on (-e, -nu)")]
    TangencyRootNotFound,
    #[error("point outside the separatrix loop: rhs({x1}) = {rhs} < 0")]
    OutsideLoop { x1: f64, rhs: f64 },
}

/// The factors of the tangency residual: `eta = (x1+e)(x1+d)` and
/// `xi = x1^2 - nu^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyTerms {
    pub eta: f64,
    pub xi: f64,
}

impl TangencyTerms {
    pub fn at(p: &Parameters, x1: f64) -> Self {
        Self {
            eta: (x1 + p.e()) * (x1 + p.d()),
            xi: x1 * x1 - p.nu() * p.nu(),
        }
    }
}

/// Height of the horizontal-flow nullcline:
/// `x2 = -x1 (x1+d)(x1+e) / (alpha e d (x1^2 - nu^2))`.
///
/// Vertical asymptotes at `x1 = +-nu` are rejected.
pub fn nullcline_x2(p: &Parameters, x1: f64) -> Result<f64, GeometryError> {
    if (x1.abs() - p.nu()).abs() <= ASYMPTOTE_TOL {
        return Err(GeometryError::AsymptoteAbscissa { x1 });
    }
    let xi = x1 * x1 - p.nu() * p.nu();
    Ok(-x1 * (x1 + p.d()) * (x1 + p.e()) / (p.alpha() * p.ed() * xi))
}

/// The oblique asymptote of the nullcline's unbounded branch:
/// the solution of `x1 + alpha e d x2 + e + d = 0`.
pub fn oblique_asymptote_x2(p: &Parameters, x1: f64) -> f64 {
    -(x1 + p.e() + p.d()) / (p.alpha() * p.ed())
}

/// The tangency polynomial whose roots in `(-e, -nu)` mark where an orbit
/// of the auxiliary spiral touches the nullcline branch:
/// `-2 x1^2 eta^2 + alpha e d xi (alpha nu^2 xi - 1) eta
/// + (3 x1^2 + 2(e+d) x1) xi eta + alpha^2 e^2 d^2 xi^3`.
pub fn tangency_residual(p: &Parameters, x1: f64) -> Result<f64, GeometryError> {
    if !(-p.e() < x1 && x1 < -p.nu()) {
        return Err(GeometryError::TangencyDomain { x1 });
    }
    Ok(tangency_residual_unchecked(p, x1))
}

fn tangency_residual_unchecked(p: &Parameters, x1: f64) -> f64 {
    let TangencyTerms { eta, xi } = TangencyTerms::at(p, x1);
    let aed = p.alpha() * p.ed();
    -2.0 * x1 * x1 * eta * eta
        + aed * xi * (p.alpha_nu2() * xi - 1.0) * eta
        + (3.0 * x1 * x1 + 2.0 * (p.e() + p.d()) * x1) * xi * eta
        + aed * aed * xi * xi * xi
}

/// Residual scale used for the "root is a root" acceptance band.
fn tangency_scale(p: &Parameters, x1: f64) -> f64 {
    let TangencyTerms { xi, .. } = TangencyTerms::at(p, x1);
    let aed = p.alpha() * p.ed();
    (aed * aed * xi * xi * xi).abs().max(1.0)
}

/// The tangency abscissa: among all sign-change brackets of
/// [`tangency_residual`] on a uniform scan of `(-e, -nu)`, the root of the
/// rightmost bracket (the solution nearest `-nu`).
pub fn find_tangency_abscissa(p: &Parameters) -> Result<f64, GeometryError> {
    let delta = 1e-9 * (p.e() - p.nu());
    let lo = -p.e() + delta;
    let hi = -p.nu() - delta;
    let n = ROOT_SCAN_POINTS;
    let x_at = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;

    let mut bracket = None;
    let mut prev = tangency_residual_unchecked(p, x_at(0));
    for i in 1..n {
        let x = x_at(i);
        let v = tangency_residual_unchecked(p, x);
        if prev == 0.0 {
            bracket = Some((x_at(i - 1), x_at(i - 1)));
        } else if prev * v < 0.0 {
            bracket = Some((x_at(i - 1), x));
        }
        prev = v;
    }
    let (mut a, mut b) = bracket.ok_or(GeometryError::TangencyRootNotFound)?;
    if a == b {
        return Ok(a);
    }

    let mut fa = tangency_residual_unchecked(p, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = tangency_residual_unchecked(p, m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let root = 0.5 * (a + b);
    debug_assert!(
        tangency_residual_unchecked(p, root).abs() <= 1e-10 * tangency_scale(p, root),
        "bisection left a large residual at {root}"
    );
    Ok(root)
}

/// The squared-height of the separatrix loop through the saddle:
/// `x2^2 = (e^2/3)(1 - e/(2d)) - x1^2 (1 + (2/3)(1/e + 1/d) x1 + x1^2/(2ed))`.
pub fn separatrix_rhs(p: &Parameters, x1: f64) -> f64 {
    let (e, d) = (p.e(), p.d());
    (e * e / 3.0) * (1.0 - e / (2.0 * d))
        - x1 * x1 * (1.0 + (2.0 / 3.0) * (1.0 / e + 1.0 / d) * x1 + x1 * x1 / (2.0 * p.ed()))
}

/// The `x2 <= 0` branch of the separatrix loop.
///
/// Values of [`separatrix_rhs`] in `(-1e-14, 0)` are rounding noise at the
/// loop endpoints and clamp to zero.
pub fn separatrix_lower_x2(p: &Parameters, x1: f64) -> Result<f64, GeometryError> {
    let rhs = separatrix_rhs(p, x1);
    if rhs < LOOP_CLAMP {
        return Err(GeometryError::OutsideLoop { x1, rhs });
    }
    Ok(-rhs.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{energy, vector_field_main, State};

    fn reference() -> Parameters {
        Parameters::reference()
    }

    #[test]
    fn nullcline_values() {
        let p = reference();
        assert!(nullcline_x2(&p, -3.5).unwrap().abs() < 1e-15);
        // -(-1)(3)(2.5) / (1.5 * 14 * 0.99) = 7.5 / 20.79
        let v = nullcline_x2(&p, -1.0).unwrap();
        assert!((v - 7.5 / 20.79).abs() < 1e-14, "v = {v}");
        assert!(matches!(
            nullcline_x2(&p, 0.1),
            Err(GeometryError::AsymptoteAbscissa { .. })
        ));
        assert!(matches!(
            nullcline_x2(&p, -0.1),
            Err(GeometryError::AsymptoteAbscissa { .. })
        ));
    }

    #[test]
    fn nullcline_points_satisfy_the_defining_equation() {
        // Substituting (x1, nullcline_x2) back into the horizontal-flow
        // equation must leave a tiny residual: the x2 component of the full
        // field vanishes there.
        let p = reference();
        for i in 0..10_000 {
            let x1 = -3.4999 + 3.3998 * i as f64 / 9999.0;
            let x2 = nullcline_x2(&p, x1).unwrap();
            assert!(x2 > 0.0, "branch must be positive at {x1}");
            let f = vector_field_main(&p, State::new(x1, x2));
            let scale = (x1 * (x1 + 4.0) * (x1 + 3.5) / 14.0).abs().max(1.0);
            assert!(f.x2.abs() <= 1e-12 * scale, "residual {} at {x1}", f.x2);
        }
    }

    #[test]
    fn oblique_asymptote_values() {
        let p = reference();
        assert_eq!(oblique_asymptote_x2(&p, -7.5), 0.0);
        assert!((oblique_asymptote_x2(&p, 0.0) - (-7.5 / 21.0)).abs() < 1e-15);
        assert!((oblique_asymptote_x2(&p, 13.5) - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn oblique_asymptote_is_affine() {
        let p = reference();
        for (a, h) in [(-5.0, 0.7), (0.0, 1.3), (2.0, 10.0)] {
            let second_diff = oblique_asymptote_x2(&p, a) - 2.0 * oblique_asymptote_x2(&p, a + h)
                + oblique_asymptote_x2(&p, a + 2.0 * h);
            assert!(second_diff.abs() < 1e-15);
        }
    }

    #[test]
    fn tangency_residual_signs_at_the_interval_ends() {
        let p = reference();
        // Near -e the eta factor vanishes and the xi^3 term dominates.
        assert!(tangency_residual(&p, -3.5 + 1e-9).unwrap() > 0.0);
        assert!(tangency_residual(&p, -0.1 - 1e-9).unwrap() < 0.0);
        assert!(matches!(
            tangency_residual(&p, -3.6),
            Err(GeometryError::TangencyDomain { .. })
        ));
        assert!(matches!(
            tangency_residual(&p, 0.0),
            Err(GeometryError::TangencyDomain { .. })
        ));
    }

    #[test]
    fn tangency_abscissa_reference_tuple() {
        // Frozen from an independent 2e6-point grid scan plus bisection.
        let p = reference();
        let x10 = find_tangency_abscissa(&p).unwrap();
        assert!((x10 - (-0.9620959515548827)).abs() < 1e-11, "x10 = {x10}");
        let scale = (p.alpha() * p.ed()).powi(2)
            * (x10 * x10 - 0.01).powi(3).abs();
        assert!(tangency_residual(&p, x10).unwrap().abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn tangency_root_is_the_rightmost() {
        let p = reference();
        let x10 = find_tangency_abscissa(&p).unwrap();
        // No sign change to the right of the root on a fine grid.
        let mut prev = tangency_residual(&p, x10 + 1e-7).unwrap();
        let hi = -p.nu() - 1e-9;
        for i in 1..=20_000 {
            let x = (x10 + 1e-7) + (hi - x10 - 1e-7) * i as f64 / 20_000.0;
            let v = tangency_residual(&p, x).unwrap();
            assert!(prev * v > 0.0, "sign change right of the root at {x}");
            prev = v;
        }
    }

    #[test]
    fn tangency_root_for_a_second_tuple() {
        let p = Parameters::new(1.5, 0.1, 3.0, 4.0).unwrap();
        let x10 = find_tangency_abscissa(&p).unwrap();
        assert!(-3.0 < x10 && x10 < -0.1);
        let scale = (p.alpha() * p.ed()).powi(2)
            * (x10 * x10 - 0.01).powi(3).abs();
        assert!(tangency_residual(&p, x10).unwrap().abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn separatrix_rhs_values() {
        let p = reference();
        // The loop passes through the saddle: rhs(-e) = 0 (verified
        // symbolically; the constant term equals 2 E(-e, 0)).
        assert!(separatrix_rhs(&p, -3.5).abs() < 1e-12);
        assert_eq!(separatrix_rhs(&p, 0.0), 2.296875);
        assert!((separatrix_rhs(&p, 0.0) - 2.0 * energy(&p, State::new(-3.5, 0.0))).abs() < 1e-15);
        assert!(separatrix_rhs(&p, -10.0) < 0.0);
    }

    #[test]
    fn separatrix_lower_branch() {
        let p = reference();
        assert!(separatrix_lower_x2(&p, -3.5).unwrap().abs() < 1e-6);
        let v = separatrix_lower_x2(&p, 0.0).unwrap();
        assert!((v - (-1.5155444566227676)).abs() < 1e-12, "v = {v}");
        assert!(matches!(
            separatrix_lower_x2(&p, -10.0),
            Err(GeometryError::OutsideLoop { .. })
        ));
    }

    #[test]
    fn separatrix_is_a_level_set_of_the_energy() {
        let p = reference();
        let level = energy(&p, State::new(-3.5, 0.0));
        for i in 0..2000 {
            let x1 = -3.5 + (3.5 - 0.1) * i as f64 / 1999.0;
            if separatrix_rhs(&p, x1) < 0.0 {
                continue;
            }
            let x2 = separatrix_lower_x2(&p, x1).unwrap();
            let e = energy(&p, State::new(x1, x2));
            assert!(
                (e - level).abs() <= 1e-12 * level.max(1.0),
                "energy off the level set at {x1}: {e} vs {level}"
            );
        }
    }
}
