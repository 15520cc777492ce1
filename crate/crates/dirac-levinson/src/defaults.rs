//! Central table of physics defaults and tolerances.
//!
//! Everything is expressed in natural units (hbar = c = 1) with energies in
//! units of the mass m and lengths in units of the well range a.
//!
//! | constant                  | value   | used by                              |
//! |---------------------------|---------|--------------------------------------|
//! | `MASS`                    | 1.0     | `ModelParams::default`               |
//! | `RANGE`                   | 1.0     | `ModelParams::default`               |
//! | `ODE_LOCAL_TOL`           | 1e-12   | adaptive integrator step control     |
//! | `ODE_ABS_FLOOR`           | 1e-300  | underflow guard in error scaling     |
//! | `BOUND_SCAN_POINTS`       | 2000    | bound-state sign-change scan         |
//! | `BOUND_BISECT_TOL`        | 1e-12   | bound-state bisection width          |
//! | `XI_MIN` / `XI_FIT_MAX`   | 1e-4 / 1e-2 | threshold sampling window        |
//! | `THRESHOLD_FIT_POINTS`    | 12      | log-log slope fit sample count       |
//! | `LAMBDA_STEPS`            | 200     | coupling sweep grid                  |
//! | `CROSSING_TOL`            | 1e-9    | crossing refinement width            |
//! | `EDGE_WINDOW`             | 1e-4    | "level is at the edge" test in sweeps|
//! | `CURVE_POINTS_PER_DECADE` | 600     | standard momentum grid density       |
//! | `ENERGY_MAX_OVER_M`       | 100.0   | top of the standard phase curves     |
//! | `BOX_L_OVER_A`            | 200.0   | box half-length for level counting   |
//! | `BOX_RESIDUAL_TOL`        | 1e-6    | quantization residual bound          |
//! | `IDENTITY_TOL`            | 1e-3    | strong/weak theorem residual bound   |
//! | `SIN2_TOL`                | 1e-6    | sin^2 relation check                 |
//! | `SLOPE_ODD_TOL`           | 0.05    | accepted distance to an odd exponent |
//! | `MONOTONICITY_SLACK`      | 1e-8    | phase-vs-coupling sign slack         |

/// Particle mass in natural units.
pub const MASS: f64 = 1.0;
/// Well range in natural units.
pub const RANGE: f64 = 1.0;

/// Local truncation tolerance for the adaptive integrator.
pub const ODE_LOCAL_TOL: f64 = 1e-12;
/// Absolute floor in the integrator error scaling, guards underflow only.
pub const ODE_ABS_FLOOR: f64 = 1e-300;

/// Number of scan points for the bound-state search on (-m, m).
pub const BOUND_SCAN_POINTS: usize = 2000;
/// Bisection width for bound-state energies.
pub const BOUND_BISECT_TOL: f64 = 1e-12;
/// Offset from the gap edges for the bound-state scan interval.
pub const BOUND_SCAN_EDGE_OFFSET: f64 = 1e-9;

/// Smallest dimensionless momentum xi = k a sampled near a threshold.
pub const XI_MIN: f64 = 1e-4;
/// Largest xi used in threshold fits and extrapolations.
pub const XI_FIT_MAX: f64 = 1e-2;
/// Sample count for the threshold exponent fit.
pub const THRESHOLD_FIT_POINTS: usize = 12;

/// Default number of coupling steps in a spectral-flow sweep.
pub const LAMBDA_STEPS: usize = 200;
/// Minimum admissible number of coupling steps.
pub const LAMBDA_STEPS_MIN: usize = 100;
/// Width to which edge crossings are refined in lambda.
pub const CROSSING_TOL: f64 = 1e-9;
/// A tracked level this close to a gap edge (units of m) counts as "at the edge".
pub const EDGE_WINDOW: f64 = 1e-4;

/// Geometric density of the standard momentum grids.
pub const CURVE_POINTS_PER_DECADE: usize = 600;
/// Top energy of the standard phase curves, in units of m.
pub const ENERGY_MAX_OVER_M: f64 = 100.0;

/// Default box half-length in units of the well range.
pub const BOX_L_OVER_A: f64 = 200.0;
/// Bound on the box quantization residual |k L + Delta - n pi|.
pub const BOX_RESIDUAL_TOL: f64 = 1e-6;

/// Tolerance on every strong/weak theorem identity residual.
pub const IDENTITY_TOL: f64 = 1e-3;
/// Tolerance on the sin^2 threshold relation.
pub const SIN2_TOL: f64 = 1e-6;
/// Accepted distance between a fitted threshold exponent and a signed odd integer.
pub const SLOPE_ODD_TOL: f64 = 0.05;
/// Slack allowed when checking the sign of d(Delta)/d(lambda).
pub const MONOTONICITY_SLACK: f64 = 1e-8;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DIRAC_LEVINSON_THREADS";
