//! Construction, verification and exploration of positively invariant regions
//! for the modified Van der Pol heart-action system
//!
//! ```text
//! x1' = x2
//! x2' = -alpha (x1^2 - nu^2) x2 - x1 (x1 + d)(x1 + e) / (e d)
//! ```
//!
//! with positive control parameters `alpha` and `0 < nu < e < d <= 2e`.
//!
//! The library assembles a closed boundary curve around the origin out of a
//! nullcline arc, two auxiliary-spiral orbit arcs, a circle arc, line
//! segments and an arc of the separatrix loop of the undamped subsystem,
//! certifies that the flow crosses every piece inward, and locates the
//! periodic orbit the region traps via a Poincaré return map.
//!
//! - [`system`]: the vector fields, Jacobian, equilibria and conserved energy
//! - [`integrator`]: adaptive Dormand–Prince 5(4) with dense output and
//!   guard-crossing (event) detection
//! - [`geometry`]: nullcline, oblique asymptote, tangency abscissa and
//!   separatrix-loop solvers
//! - [`region`]: the piece-by-piece boundary construction
//! - [`verify`]: inward-flow certificates, containment simulations and the
//!   return-map limit-cycle search

pub mod geometry;
pub mod integrator;
pub mod region;
pub mod system;
pub mod verify;

pub use system::{Parameters, State};
