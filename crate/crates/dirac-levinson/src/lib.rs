//! A numerical laboratory for the one-dimensional Dirac equation in
//! symmetric finite-range potential wells.
//!
//! The crate computes scattering phase shifts on both continuum branches,
//! bound states in the mass gap, and the spectral flow of levels as the
//! coupling is switched on, then verifies the threshold identities that tie
//! the unwrapped phases at E = +m and E = -m to the integer counts of states
//! exchanged with the two continua (the strong and weak Levinson theorems),
//! including the half-bound (critical) variants and the supercritical
//! regime where levels dive into the negative continuum.
//!
//! Everything works in natural units hbar = c = 1 with defaults m = a = 1;
//! see [`defaults`] for the full table.
//!
//! The usual entry points:
//!
//! * [`model::PotentialSpec`] declares a well (square, sampled table or
//!   piecewise-constant) and validates it.
//! * [`dirac`] holds the solver: [`dirac::phase_shift`],
//!   [`dirac::phase_curve`], [`dirac::bound_states`],
//!   [`dirac::threshold_fit`].
//! * [`flow::sweep_coupling`] tracks levels over the coupling and counts the
//!   edge crossings.
//! * [`levinson::run_full_audit`] runs every identity check and returns a
//!   [`levinson::LevinsonReport`].
//! * [`box_spectrum::quantized_levels`] realizes the periodic-box counting.
//! * [`squarewell::SquareWell`] is the closed-form reference for the square
//!   family, against which the solver is validated.
//!
//! Runnable walkthroughs of each capability live under `examples/`.

pub mod box_spectrum;
pub mod defaults;
pub mod dirac;
pub mod error;
pub mod flow;
pub mod integrate;
pub mod levinson;
pub mod model;
pub mod report;
pub mod squarewell;

pub use dirac::{BoundState, BranchSign, Edge, Parity, PhaseCurve, PhaseShiftSample, Regime};
pub use error::{Error, Result};
pub use flow::{CrossingEvent, FlowCounts, FlowTrace};
pub use integrate::IntegratorKind;
pub use levinson::{AuditOptions, LevinsonReport};
pub use model::{ModelParams, PotentialSpec};
