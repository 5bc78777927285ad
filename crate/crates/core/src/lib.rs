//! Multi-bubble isoperimetric configurations on the real line with density |x|.
//!
//! The library answers one question in several independent ways: what is the
//! least total weighted perimeter enclosing n prescribed masses on the line,
//! where an interval's mass is the integral of |x| over it and its perimeter
//! is the sum of |x| at its endpoints (shared endpoints counted once)?
//!
//! * [`solver`] builds the closed-form optimal configuration (a theorem for
//!   n <= 4, a flagged conjecture beyond).
//! * [`moves`] implements each discrete perimeter-reducing rearrangement as
//!   an executable transformation with a mass-preservation guarantee.
//! * [`flow`] integrates the underlying endpoint dynamics (every endpoint
//!   moving at speed 1/|x|) to cross-validate the closed forms.
//! * [`oracle`] certifies optimality by exhaustive enumeration over
//!   combinatorial layouts and split-fraction optimization.

pub mod config;
pub mod density;
pub mod error;
pub mod flow;
pub mod json;
pub mod layout;
pub mod moves;
pub mod oracle;
pub mod render;
pub mod solver;

pub use config::{Configuration, Interval, OriginPosition, RegionId};
pub use density::Density;
pub use error::Error;
pub use layout::{Layout, MassVector, SplitSpec};
pub use moves::{MoveKind, MoveReport, PatternKind};
pub use solver::{Provenance, Solution};

/// Relative tolerance for mass preservation across reconfigurations.
pub const MASS_REL_TOL: f64 = 1e-12;

/// Relative tolerance for endpoint round-trips through the mass antiderivative.
pub const ENDPOINT_REL_TOL: f64 = 1e-10;

/// Relative tolerance for optimality comparisons between candidate layouts.
pub const OPT_REL_TOL: f64 = 1e-9;

/// Breakpoints within this distance of 0 are snapped to exactly 0, so the
/// zero-weight rule for the origin never depends on float noise.
pub const EPS_ORIGIN: f64 = 1e-12;

/// Largest admissible region mass; keeps every sqrt in the endpoint
/// construction well-conditioned.
pub const MASS_CAP: f64 = 1e12;

/// An interval shorter than this counts as vanished in flow integration.
pub const VANISH_LEN: f64 = 1e-9;
