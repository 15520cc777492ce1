//! Propagation of the two-component spinor across the right half of the well.
//!
//! The first-order system on [0, a] is
//!
//! ```text
//! f' = -(E - V(x) + m) g
//! g' =  (E - V(x) - m) f
//! ```
//!
//! Constant-potential bands admit a closed-form propagator: with
//! alpha = E - V + m, beta = E - V - m and q^2 = alpha*beta the matrix
//! exponential over a step h is
//!
//! ```text
//! | C(h)            -alpha S(h) |        C = cos(qh),  S = sin(qh)/q    (q^2 > 0)
//! | beta S(h)        C(h)       |        C = cosh(sh), S = sinh(sh)/s   (q^2 = -s^2 < 0)
//! ```
//!
//! Smooth profiles go through an adaptive Dormand-Prince 5(4) stepper with
//! relative tolerance 1e-12 per step.

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{Family, PotentialSpec};

/// Which propagation backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    /// Exact band propagator for constant-by-parts wells, adaptive
    /// Runge-Kutta otherwise.
    Auto,
    /// Force the adaptive Runge-Kutta path regardless of family.
    AdaptiveRk,
    /// Exact band propagator; only valid for constant-by-parts wells.
    SegmentExact,
}

/// Resolved right-half profile of V(x; lambda) on [0, a].
pub(crate) enum Profile {
    /// Bands (x_end, value), covering [0, a] with x_end strictly increasing.
    Bands(Vec<(f64, f64)>),
    /// Piecewise-linear knots (x, value) on [0, a].
    Linear(Vec<(f64, f64)>),
}

impl Profile {
    pub(crate) fn from_spec(spec: &PotentialSpec) -> Profile {
        let lam = spec.lambda;
        match &spec.family {
            Family::Square { v0, a } => Profile::Bands(vec![(*a, -lam * v0)]),
            Family::PiecewiseConstant { segments } => {
                let mut bands = Vec::with_capacity(segments.len());
                let mut edge = 0.0;
                for &(w, d) in segments {
                    edge += w;
                    bands.push((edge, -lam * d));
                }
                Profile::Bands(bands)
            }
            Family::SmoothTable { samples } => {
                let mut knots: Vec<(f64, f64)> = samples
                    .iter()
                    .filter(|&&(x, _)| x >= 0.0)
                    .map(|&(x, v)| (x, lam * v))
                    .collect();
                if knots.first().map(|&(x, _)| x > 0.0).unwrap_or(true) {
                    knots.insert(0, (0.0, lam * spec.bare(0.0)));
                }
                Profile::Linear(knots)
            }
        }
    }

    fn range(&self) -> f64 {
        match self {
            Profile::Bands(b) => b.last().map(|&(x, _)| x).unwrap_or(0.0),
            Profile::Linear(k) => k.last().map(|&(x, _)| x).unwrap_or(0.0),
        }
    }

    fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Bands(bands) => {
                for &(edge, v) in bands {
                    if x <= edge {
                        return v;
                    }
                }
                0.0
            }
            Profile::Linear(knots) => {
                let n = knots.len();
                if x <= knots[0].0 {
                    return knots[0].1;
                }
                if x >= knots[n - 1].0 {
                    return knots[n - 1].1;
                }
                let idx = knots.partition_point(|&(xs, _)| xs <= x);
                let (x0, v0) = knots[idx - 1];
                let (x1, v1) = knots[idx];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Breakpoints where the profile may lose smoothness.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Bands(bands) => bands.iter().map(|&(x, _)| x).collect(),
            Profile::Linear(knots) => knots.iter().skip(1).map(|&(x, _)| x).collect(),
        }
    }
}

/// cos-like and sin(q h)/q-like entries of the band propagator, smooth in
/// q^2 across the oscillatory/evanescent boundary.
fn band_entries(q2: f64, h: f64) -> (f64, f64) {
    let z = q2 * h * h;
    if z > 1e-6 {
        let q = q2.sqrt();
        (f64::cos(q * h), f64::sin(q * h) / q)
    } else if z < -1e-6 {
        let s = (-q2).sqrt();
        (f64::cosh(s * h), f64::sinh(s * h) / s)
    } else {
        // series in z = q^2 h^2; |next term| < 1e-20 at the branch cut
        let c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = h * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
        (c, s)
    }
}

/// Advance (f, g) across a constant band of width h.
fn band_step(f: f64, g: f64, e: f64, v: f64, m: f64, h: f64) -> (f64, f64) {
    let alpha = e - v + m;
    let beta = e - v - m;
    let (c, s) = band_entries(alpha * beta, h);
    (c * f - alpha * s * g, beta * s * f + c * g)
}

const RK_MAX_STEPS: usize = 2_000_000;

/// One Dormand-Prince 5(4) attempt; returns (y_new, error_estimate).
fn dp54_step(
    profile: &Profile,
    e: f64,
    m: f64,
    x: f64,
    y: [f64; 2],
    h: f64,
) -> ([f64; 2], [f64; 2]) {
    let deriv = |x: f64, y: [f64; 2]| -> [f64; 2] {
        let v = profile.value(x);
        [-(e - v + m) * y[1], (e - v - m) * y[0]]
    };
    let k1 = deriv(x, y);
    let k2 = deriv(x + h / 5.0, [y[0] + h * k1[0] / 5.0, y[1] + h * k1[1] / 5.0]);
    let k3 = deriv(
        x + 3.0 * h / 10.0,
        [
            y[0] + h * (3.0 / 40.0 * k1[0] + 9.0 / 40.0 * k2[0]),
            y[1] + h * (3.0 / 40.0 * k1[1] + 9.0 / 40.0 * k2[1]),
        ],
    );
    let k4 = deriv(
        x + 4.0 * h / 5.0,
        [
            y[0] + h * (44.0 / 45.0 * k1[0] - 56.0 / 15.0 * k2[0] + 32.0 / 9.0 * k3[0]),
            y[1] + h * (44.0 / 45.0 * k1[1] - 56.0 / 15.0 * k2[1] + 32.0 / 9.0 * k3[1]),
        ],
    );
    let k5 = deriv(
        x + 8.0 * h / 9.0,
        [
            y[0]
                + h * (19372.0 / 6561.0 * k1[0] - 25360.0 / 2187.0 * k2[0]
                    + 64448.0 / 6561.0 * k3[0]
                    - 212.0 / 729.0 * k4[0]),
            y[1]
                + h * (19372.0 / 6561.0 * k1[1] - 25360.0 / 2187.0 * k2[1]
                    + 64448.0 / 6561.0 * k3[1]
                    - 212.0 / 729.0 * k4[1]),
        ],
    );
    let k6 = deriv(
        x + h,
        [
            y[0]
                + h * (9017.0 / 3168.0 * k1[0] - 355.0 / 33.0 * k2[0]
                    + 46732.0 / 5247.0 * k3[0]
                    + 49.0 / 176.0 * k4[0]
                    - 5103.0 / 18656.0 * k5[0]),
            y[1]
                + h * (9017.0 / 3168.0 * k1[1] - 355.0 / 33.0 * k2[1]
                    + 46732.0 / 5247.0 * k3[1]
                    + 49.0 / 176.0 * k4[1]
                    - 5103.0 / 18656.0 * k5[1]),
        ],
    );
    let mut y5 = [0.0; 2];
    for i in 0..2 {
        y5[i] = y[i]
            + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] + 125.0 / 192.0 * k4[i]
                - 2187.0 / 6784.0 * k5[i]
                + 11.0 / 84.0 * k6[i]);
    }
    let k7 = deriv(x + h, y5);
    let mut err = [0.0; 2];
    // difference of the 5th and embedded 4th order weights
    const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
    const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
    const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Adaptive integration over one smooth piece [x0, x1].
fn rk_piece(
    profile: &Profile,
    e: f64,
    m: f64,
    x0: f64,
    x1: f64,
    mut y: [f64; 2],
) -> Result<[f64; 2]> {
    if x1 <= x0 {
        return Ok(y);
    }
    let rtol = defaults::ODE_LOCAL_TOL;
    let atol = defaults::ODE_ABS_FLOOR;
    let mut x = x0;
    let mut h = (x1 - x0) / 16.0;
    let mut steps = 0usize;
    while x < x1 {
        if steps > RK_MAX_STEPS {
            return Err(Error::IntegrationFailure { abscissa: x });
        }
        steps += 1;
        if h > x1 - x {
            h = x1 - x;
        }
        let (y_new, err) = dp54_step(profile, e, m, x, y, h);
        if !y_new[0].is_finite() || !y_new[1].is_finite() {
            return Err(Error::IntegrationFailure { abscissa: x });
        }
        let mut norm: f64 = 0.0;
        for i in 0..2 {
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            norm = norm.max((err[i] / sc).abs());
        }
        if norm <= 1.0 {
            x += h;
            y = y_new;
            let grow = if norm > 0.0 {
                (0.9 * norm.powf(-0.2)).min(5.0)
            } else {
                5.0
            };
            h *= grow;
        } else {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
            if h < 1e-15 * (x1 - x0) {
                return Err(Error::IntegrationFailure { abscissa: x });
            }
        }
    }
    Ok(y)
}

fn initial_data(parity: crate::dirac::Parity) -> [f64; 2] {
    match parity {
        crate::dirac::Parity::Even => [1.0, 0.0],
        crate::dirac::Parity::Odd => [0.0, 1.0],
    }
}

fn resolve_kind(profile: &Profile, kind: IntegratorKind) -> IntegratorKind {
    match (kind, profile) {
        (IntegratorKind::Auto, Profile::Bands(_)) => IntegratorKind::SegmentExact,
        (IntegratorKind::Auto, Profile::Linear(_)) => IntegratorKind::AdaptiveRk,
        (k, _) => k,
    }
}

/// Propagate the parity solution from 0 to the requested abscissas, which
/// must be increasing and lie in [0, a]. Returns (f, g) at each.
pub(crate) fn propagate_to(
    spec: &PotentialSpec,
    m: f64,
    e: f64,
    parity: crate::dirac::Parity,
    kind: IntegratorKind,
    targets: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let profile = Profile::from_spec(spec);
    let kind = resolve_kind(&profile, kind);
    let a = profile.range();
    let mut y = initial_data(parity);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(targets.len());
    let breaks = profile.breakpoints();
    for &t in targets {
        debug_assert!(t >= x && t <= a * (1.0 + 1e-12));
        let t = t.min(a);
        match kind {
            IntegratorKind::SegmentExact => {
                let Profile::Bands(bands) = &profile else {
                    return Err(Error::InvalidParams(
                        "exact band propagation requires a constant-by-parts well".into(),
                    ));
                };
                for &(edge, v) in bands {
                    if x >= t {
                        break;
                    }
                    if edge <= x {
                        continue;
                    }
                    let step_end = edge.min(t);
                    let (f, g) = band_step(y[0], y[1], e, v, m, step_end - x);
                    y = [f, g];
                    x = step_end;
                }
            }
            IntegratorKind::AdaptiveRk | IntegratorKind::Auto => {
                for &b in &breaks {
                    if b <= x {
                        continue;
                    }
                    if b >= t {
                        break;
                    }
                    y = rk_piece(&profile, e, m, x, b, y)?;
                    x = b;
                }
                y = rk_piece(&profile, e, m, x, t, y)?;
                x = t;
            }
        }
        if !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::IntegrationFailure { abscissa: x });
        }
        out.push((y[0], y[1]));
    }
    Ok(out)
}

/// Boundary values (f_a, g_a) at x = a.
pub(crate) fn boundary_values(
    spec: &PotentialSpec,
    m: f64,
    e: f64,
    parity: crate::dirac::Parity,
    kind: IntegratorKind,
) -> Result<(f64, f64)> {
    let a = spec.range();
    Ok(propagate_to(spec, m, e, parity, kind, &[a])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::Parity;
    use approx::assert_relative_eq;

    #[test]
    fn free_even_solution_is_trigonometric() {
        // V = 0, E = 1.5: f = cos(kx), g = k/(E+m) sin(kx)
        let spec = PotentialSpec::square(1.0, 1.0, 0.0);
        let (m, e): (f64, f64) = (1.0, 1.5);
        let k = (e * e - m * m).sqrt();
        for kind in [IntegratorKind::SegmentExact, IntegratorKind::AdaptiveRk] {
            let (f, g) = boundary_values(&spec, m, e, Parity::Even, kind).unwrap();
            assert_relative_eq!(f, (k * 1.0).cos(), max_relative = 1e-10);
            assert_relative_eq!(g, k / (e + m) * (k * 1.0).sin(), max_relative = 1e-10);
        }
    }

    #[test]
    fn free_odd_solution_ratio() {
        let spec = PotentialSpec::square(1.0, 1.0, 0.0);
        let (m, e): (f64, f64) = (1.0, 1.5);
        let k = (e * e - m * m).sqrt();
        let (f, g) = boundary_values(&spec, m, e, Parity::Odd, IntegratorKind::Auto).unwrap();
        assert_relative_eq!(f / g, -(e + m) / k * (k * 1.0).tan(), max_relative = 1e-12);
    }

    #[test]
    fn rk_agrees_with_exact_band_propagator() {
        let spec = PotentialSpec::square(1.0, 1.0, 1.0);
        let (m, e): (f64, f64) = (1.0, 1.5);
        for parity in [Parity::Even, Parity::Odd] {
            let (f1, g1) =
                boundary_values(&spec, m, e, parity, IntegratorKind::SegmentExact).unwrap();
            let (f2, g2) =
                boundary_values(&spec, m, e, parity, IntegratorKind::AdaptiveRk).unwrap();
            assert_relative_eq!(f1, f2, max_relative = 1e-10);
            assert_relative_eq!(g1, g2, max_relative = 1e-10);
        }
    }

    #[test]
    fn exact_interior_closed_form_square_well() {
        // inside the well alpha = E + W + m, even: f = cos(qx), g = beta sin(qx)/q
        let spec = PotentialSpec::square(1.0, 1.0, 1.0);
        let (m, e, w): (f64, f64, f64) = (1.0, 1.5, 1.0);
        let q = ((e + w) * (e + w) - m * m).sqrt();
        let beta = e + w - m;
        let (f, g) = boundary_values(&spec, m, e, Parity::Even, IntegratorKind::Auto).unwrap();
        assert_relative_eq!(f, q.cos(), max_relative = 1e-12);
        assert_relative_eq!(g, beta * q.sin() / q, max_relative = 1e-12);
    }

    #[test]
    fn multiband_propagation_continuous_with_rk() {
        let spec = PotentialSpec::piecewise(vec![(0.5, 1.0), (0.5, 3.0)], 0.8);
        let (m, e): (f64, f64) = (1.0, 2.3);
        for parity in [Parity::Even, Parity::Odd] {
            let (f1, g1) =
                boundary_values(&spec, m, e, parity, IntegratorKind::SegmentExact).unwrap();
            let (f2, g2) =
                boundary_values(&spec, m, e, parity, IntegratorKind::AdaptiveRk).unwrap();
            assert_relative_eq!(f1, f2, max_relative = 1e-9);
            assert_relative_eq!(g1, g2, max_relative = 1e-9);
        }
    }

    #[test]
    fn band_entries_smooth_across_zero() {
        let h = 0.37;
        let (c1, s1) = band_entries(1e-7, h);
        let (c2, s2) = band_entries(-1e-7, h);
        assert_relative_eq!(c1, c2, epsilon = 1e-12);
        assert_relative_eq!(s1, s2, epsilon = 1e-12);
    }

    #[test]
    fn wronskian_constant_along_x() {
        // two independent solutions at the same E keep f1 g2 - f2 g1 fixed
        let spec = PotentialSpec::table(
            vec![(-1.0, 0.0), (-0.5, -1.7), (0.0, -2.1), (0.5, -1.7), (1.0, 0.0)],
            0.9,
        );
        let (m, e): (f64, f64) = (1.0, 1.8);
        let xs: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let even = propagate_to(&spec, m, e, Parity::Even, IntegratorKind::Auto, &xs).unwrap();
        let odd = propagate_to(&spec, m, e, Parity::Odd, IntegratorKind::Auto, &xs).unwrap();
        for ((f1, g1), (f2, g2)) in even.iter().zip(odd.iter()) {
            let w = f1 * g2 - f2 * g1;
            assert!((w - 1.0).abs() < 1e-10, "wronskian drifted to {w}");
        }
    }
}
