//! Closed-form reference solutions for the square well.
//!
//! With W = lambda V0 the interior of the well is a single constant band, so
//! the boundary spinor, the phase shifts, the bound-state condition and the
//! critical couplings all have explicit forms. They are used as the
//! independent reference the numerical solver is tested against.
//!
//! Interior boundary values at x = a, parity data at the origin:
//!
//! ```text
//! even:  f_a = cos(q a)             g_a = (E + W - m) sin(q a)/q
//! odd:   f_a = -(E + W + m) sin(q a)/q   g_a = cos(q a)
//! ```
//!
//! with q^2 = (E + W)^2 - m^2; trig turns hyperbolic for q^2 < 0 via
//! sin(qa)/q -> sinh(sa)/s, keeping everything real.

use std::f64::consts::PI;

use crate::dirac::{momentum, BranchSign, Edge, Parity};
use crate::error::{Error, Result};

/// Square-well geometry; the coupling is passed per call so sweeps can share
/// one instance.
#[derive(Debug, Clone, Copy)]
pub struct SquareWell {
    pub v0: f64,
    pub a: f64,
    pub m: f64,
}

/// cos(qa) and sin(qa)/q continued smoothly through q^2 = 0.
fn trig_pair(q2: f64, a: f64) -> (f64, f64) {
    let z = q2 * a * a;
    if z > 1e-6 {
        let q = q2.sqrt();
        ((q * a).cos(), (q * a).sin() / q)
    } else if z < -1e-6 {
        let s = (-q2).sqrt();
        ((s * a).cosh(), (s * a).sinh() / s)
    } else {
        let c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = a * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
        (c, s)
    }
}

impl SquareWell {
    pub fn new(v0: f64, a: f64, m: f64) -> Self {
        Self { v0, a, m }
    }

    /// Interior boundary values (f_a, g_a) from the closed form.
    pub fn boundary(&self, lambda: f64, e: f64, parity: Parity) -> (f64, f64) {
        let w = lambda * self.v0;
        let q2 = (e + w) * (e + w) - self.m * self.m;
        let (c, s) = trig_pair(q2, self.a);
        match parity {
            Parity::Even => (c, (e + w - self.m) * s),
            Parity::Odd => (-(e + w + self.m) * s, c),
        }
    }

    /// Phase shift reduced to [0, pi).
    pub fn phase_shift_mod_pi(&self, lambda: f64, e: f64, parity: Parity) -> f64 {
        let m = self.m;
        debug_assert!(e.abs() > m);
        let k = momentum(e, m);
        let (f_a, g_a) = self.boundary(lambda, e, parity);
        let theta = match parity {
            Parity::Even => f64::atan2((e + m) * g_a, k * f_a),
            Parity::Odd => f64::atan2(-k * f_a, (e + m) * g_a),
        };
        let d = (theta - k * self.a).rem_euclid(PI);
        if d >= PI {
            d - PI
        } else {
            d
        }
    }

    /// Continuously tracked phase on one branch, anchored at the largest |E|
    /// of the requested grid to the half-line asymptote -(1/2) Int V dx
    /// (its mirror image on the negative branch), then continued downward on
    /// an internal grid fine enough to keep every step below pi/2.
    pub fn phase_curve_unwrapped(
        &self,
        lambda: f64,
        parity: Parity,
        branch: BranchSign,
        energies: &[f64],
    ) -> Vec<f64> {
        if energies.is_empty() {
            return Vec::new();
        }
        let m = self.m;
        let integral = -2.0 * self.a * lambda * self.v0;
        let anchor = match branch {
            BranchSign::Positive => -0.5 * integral,
            BranchSign::Negative => 0.5 * integral,
        };
        // internal momentum grid: geometric, dense, spanning the request
        let k_top = energies
            .iter()
            .map(|&e| momentum(e, m))
            .fold(0.0_f64, f64::max);
        let k_bot = energies
            .iter()
            .map(|&e| momentum(e, m))
            .fold(f64::INFINITY, f64::min)
            .min(1e-6 / self.a);
        let steps = 20_000usize;
        let ratio = (k_top / k_bot).powf(1.0 / steps as f64);
        let mut k = k_top;
        let mut delta = {
            let e = signed(k_top, branch, m);
            let raw = self.phase_shift_mod_pi(lambda, e, parity);
            raw + ((anchor - raw) / PI).round() * PI
        };
        let mut want: Vec<(usize, f64)> = energies
            .iter()
            .enumerate()
            .map(|(i, &e)| (i, momentum(e, m)))
            .collect();
        want.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
        let mut out = vec![0.0; energies.len()];
        let mut next = 0usize;
        for _ in 0..=steps {
            while next < want.len() && k <= want[next].1 * (1.0 + 1e-12) {
                let (idx, kw) = want[next];
                let e = signed(kw, branch, m);
                let raw = self.phase_shift_mod_pi(lambda, e, parity);
                out[idx] = raw + ((delta - raw) / PI).round() * PI;
                next += 1;
            }
            k /= ratio;
            let e = signed(k, branch, m);
            let raw = self.phase_shift_mod_pi(lambda, e, parity);
            delta = raw + ((delta - raw) / PI).round() * PI;
        }
        while next < want.len() {
            let (idx, kw) = want[next];
            let e = signed(kw, branch, m);
            let raw = self.phase_shift_mod_pi(lambda, e, parity);
            out[idx] = raw + ((delta - raw) / PI).round() * PI;
            next += 1;
        }
        out
    }

    /// Bound-state matching value h(E); roots on (-m, m) are bound energies.
    /// Written in the pole-free product form, like the solver but from the
    /// closed-form boundary values.
    fn bound_condition(&self, lambda: f64, e: f64, parity: Parity) -> f64 {
        let m = self.m;
        let kappa = ((m - e) * (m + e)).max(0.0).sqrt();
        let (f_a, g_a) = self.boundary(lambda, e, parity);
        (e + m) * g_a - kappa * f_a
    }

    /// Bound energies of one parity, by bracketed bisection on the intervals
    /// between the poles of the interior tangent (where cos(qa) = 0 the
    /// product form stays finite, so a plain fine scan brackets every root).
    pub fn bound_energies_parity(&self, lambda: f64, parity: Parity) -> Vec<f64> {
        let m = self.m;
        let lo = -m + 1e-12 * m;
        let hi = m - 1e-12 * m;
        let n = 20_000usize;
        let mut roots = Vec::new();
        let mut prev_e = lo;
        let mut prev = self.bound_condition(lambda, prev_e, parity);
        for i in 1..=n {
            let e = lo + (hi - lo) * i as f64 / n as f64;
            let cur = self.bound_condition(lambda, e, parity);
            if prev == 0.0 {
                roots.push(prev_e);
            } else if prev * cur < 0.0 {
                let (mut x0, mut x1, mut f0) = (prev_e, e, prev);
                for _ in 0..120 {
                    if x1 - x0 <= 1e-13 {
                        break;
                    }
                    let xm = 0.5 * (x0 + x1);
                    let fm = self.bound_condition(lambda, xm, parity);
                    if fm == 0.0 {
                        x0 = xm;
                        x1 = xm;
                        break;
                    }
                    if f0 * fm < 0.0 {
                        x1 = xm;
                    } else {
                        x0 = xm;
                        f0 = fm;
                    }
                }
                roots.push(0.5 * (x0 + x1));
            }
            prev_e = e;
            prev = cur;
        }
        roots
    }

    /// All bound energies, both parities, ordered by energy descending.
    pub fn bound_energies(&self, lambda: f64) -> Vec<(f64, Parity)> {
        let mut all: Vec<(f64, Parity)> = self
            .bound_energies_parity(lambda, Parity::Even)
            .into_iter()
            .map(|e| (e, Parity::Even))
            .chain(
                self.bound_energies_parity(lambda, Parity::Odd)
                    .into_iter()
                    .map(|e| (e, Parity::Odd)),
            )
            .collect();
        all.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        all
    }

    /// Couplings at which a new state sits exactly at the given edge.
    ///
    /// At E = +m the decay constant vanishes and the matching collapses to
    /// g_a = 0; at E = -m it collapses to f_a = 0. For the square well these
    /// are conditions on q a at the edge:
    ///
    /// ```text
    /// +m even: q(+m) a = n pi            => W = -m + sqrt(m^2 + (n pi/a)^2)
    /// +m odd:  q(+m) a = (n + 1/2) pi    => W = -m + sqrt(m^2 + ((n+1/2) pi/a)^2)
    /// -m even: q(-m) a = (n + 1/2) pi    => W =  m + sqrt(m^2 + ((n+1/2) pi/a)^2)
    /// -m odd:  q(-m) a = n pi            => W =  m + sqrt(m^2 + (n pi/a)^2)
    /// ```
    ///
    /// The even state that binds immediately at lambda -> 0+ is not listed;
    /// the returned values are the nonzero critical couplings with
    /// lambda <= 1, at most `count` of them.
    pub fn critical_couplings(&self, parity: Parity, edge: Edge, count: usize) -> Vec<f64> {
        let m = self.m;
        let a = self.a;
        let mut out = Vec::new();
        let mut n: u32 = match (parity, edge) {
            (Parity::Even, Edge::PlusM) => 1,
            (Parity::Odd, Edge::PlusM) => 0,
            (Parity::Even, Edge::MinusM) => 0,
            (Parity::Odd, Edge::MinusM) => 1,
        };
        while out.len() < count {
            let phase = match (parity, edge) {
                (Parity::Even, Edge::PlusM) | (Parity::Odd, Edge::MinusM) => n as f64 * PI,
                _ => (n as f64 + 0.5) * PI,
            };
            let root = (m * m + (phase / a).powi(2)).sqrt();
            let w = match edge {
                Edge::PlusM => -m + root,
                Edge::MinusM => m + root,
            };
            let lambda = w / self.v0;
            if lambda > 1.0 {
                break;
            }
            if lambda > 0.0 {
                out.push(lambda);
            }
            n += 1;
        }
        out
    }

    /// Golden-value fixture document for this geometry at one coupling.
    pub fn fixture_json(&self, lambda: f64) -> Result<String> {
        use crate::report::JsonDoc;
        if !(lambda >= 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParams(format!("lambda = {lambda}")));
        }
        let mut doc = JsonDoc::new();
        doc.begin_object();
        doc.key("case");
        doc.string("square-well-reference");
        doc.key("inputs");
        doc.begin_object();
        doc.key("v0");
        doc.number(self.v0);
        doc.key("a");
        doc.number(self.a);
        doc.key("m");
        doc.number(self.m);
        doc.key("lambda");
        doc.number(lambda);
        doc.end_object();
        doc.key("expected");
        doc.begin_object();
        doc.key("bound_states");
        doc.begin_array();
        for (e, parity) in self.bound_energies(lambda) {
            doc.begin_object();
            doc.key("energy");
            doc.number(e);
            doc.key("parity");
            doc.string(parity.label());
            doc.end_object();
        }
        doc.end_array();
        doc.key("phase_shifts");
        doc.begin_array();
        for branch in [BranchSign::Positive, BranchSign::Negative] {
            for parity in [Parity::Even, Parity::Odd] {
                for i in 0..50 {
                    let k = 0.05 * (20.0_f64 / 0.05).powf(i as f64 / 49.0);
                    let e = signed(k, branch, self.m);
                    doc.begin_object();
                    doc.key("energy");
                    doc.number(e);
                    doc.key("parity");
                    doc.string(parity.label());
                    doc.key("delta_mod_pi");
                    doc.number(self.phase_shift_mod_pi(lambda, e, parity));
                    doc.end_object();
                }
            }
        }
        doc.end_array();
        doc.key("critical_couplings");
        doc.begin_object();
        for (parity, edge, key) in [
            (Parity::Even, Edge::PlusM, "even_plus_m"),
            (Parity::Odd, Edge::PlusM, "odd_plus_m"),
            (Parity::Even, Edge::MinusM, "even_minus_m"),
            (Parity::Odd, Edge::MinusM, "odd_minus_m"),
        ] {
            doc.key(key);
            doc.begin_array();
            for l in self.critical_couplings(parity, edge, 8) {
                doc.plain_number(l);
            }
            doc.end_array();
        }
        doc.end_object();
        doc.end_object();
        doc.end_object();
        Ok(doc.finish())
    }
}

fn signed(k: f64, branch: BranchSign, m: f64) -> f64 {
    let e = (m * m + k * k).sqrt();
    match branch {
        BranchSign::Positive => e,
        BranchSign::Negative => -e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::mod_pi_distance;
    use approx::assert_relative_eq;

    #[test]
    fn zero_coupling_means_zero_phase() {
        let well = SquareWell::new(2.0, 1.0, 1.0);
        for &e in &[1.1, 2.0, -1.5, -40.0] {
            for parity in [Parity::Even, Parity::Odd] {
                assert!(mod_pi_distance(well.phase_shift_mod_pi(0.0, e, parity), 0.0) < 1e-12);
            }
        }
    }

    #[test]
    fn quarter_wave_forces_half_pi_offset() {
        // qa = pi/2: interior tangent diverges, so Delta_e = pi/2 - ka (mod pi)
        let well = SquareWell::new(0.5, 1.0, 1.0);
        let e = (1.0 + (PI / 2.0) * (PI / 2.0)).sqrt() - 0.5;
        let d = well.phase_shift_mod_pi(1.0, e, Parity::Even);
        let expected = (PI / 2.0 - momentum(e, 1.0)).rem_euclid(PI);
        assert!(mod_pi_distance(d, expected) < 1e-10);
    }

    #[test]
    fn golden_phase_shift_at_e_1_2() {
        // frozen from a 50-digit evaluation of the closed form
        let well = SquareWell::new(0.5, 1.0, 1.0);
        let de = well.phase_shift_mod_pi(1.0, 1.2, Parity::Even);
        let do_ = well.phase_shift_mod_pi(1.0, 1.2, Parity::Odd);
        assert_relative_eq!(de, 0.790_422_222_485_539_3, epsilon = 1e-13);
        assert_relative_eq!(do_, 0.583_916_203_343_201_7, epsilon = 1e-13);
    }

    #[test]
    fn golden_bound_energies_v0_2() {
        // frozen from 50-digit bisection of the matching condition
        let well = SquareWell::new(2.0, 1.0, 1.0);
        let roots = well.bound_energies(1.0);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].1, Parity::Odd);
        assert_relative_eq!(roots[0].0, 0.501_214_016_197_369_7, epsilon = 1e-11);
        assert_eq!(roots[1].1, Parity::Even);
        assert_relative_eq!(roots[1].0, -0.390_514_439_701_629_3, epsilon = 1e-11);
    }

    #[test]
    fn no_roots_without_coupling() {
        let well = SquareWell::new(2.0, 1.0, 1.0);
        assert!(well.bound_energies(0.0).is_empty());
    }

    #[test]
    fn shallow_coupling_binds_one_even_state() {
        let well = SquareWell::new(2.0, 1.0, 1.0);
        let roots = well.bound_energies(0.005);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].1, Parity::Even);
        assert!(roots[0].0 < 1.0 && roots[0].0 > 0.999);
    }

    #[test]
    fn golden_critical_couplings_v0_4() {
        // closed forms checked against a 50-digit evaluation
        let well = SquareWell::new(4.0, 1.0, 1.0);
        let even_plus = well.critical_couplings(Parity::Even, Edge::PlusM, 4);
        assert_relative_eq!(even_plus[0], 0.574_227_077_368_903_8, epsilon = 1e-14);
        assert_eq!(even_plus.len(), 1); // the n=2 value exceeds lambda = 1

        let odd_plus = well.critical_couplings(Parity::Odd, Edge::PlusM, 4);
        assert_relative_eq!(odd_plus[0], 0.215_523_972_279_646_66, epsilon = 1e-14);
        assert_relative_eq!(odd_plus[1], 0.954_330_983_950_504_8, epsilon = 1e-14);

        let even_minus = well.critical_couplings(Parity::Even, Edge::MinusM, 4);
        assert_relative_eq!(even_minus[0], 0.715_523_972_279_646_7, epsilon = 1e-14);

        let odd_minus = well.critical_couplings(Parity::Odd, Edge::MinusM, 4);
        assert!(odd_minus.is_empty()); // first value 1.074 exceeds lambda = 1

        let wider = SquareWell::new(5.0, 1.0, 1.0);
        let odd_minus = wider.critical_couplings(Parity::Odd, Edge::MinusM, 2);
        assert_relative_eq!(odd_minus[0], 0.859_381_661_895_123, epsilon = 1e-14);
    }

    #[test]
    fn critical_couplings_interlace_at_plus_m() {
        // even and odd states appear alternately as the well deepens
        let well = SquareWell::new(12.0, 1.0, 1.0);
        let even = well.critical_couplings(Parity::Even, Edge::PlusM, 3);
        let odd = well.critical_couplings(Parity::Odd, Edge::PlusM, 3);
        assert!(odd[0] < even[0]);
        assert!(even[0] < odd[1]);
        assert!(odd[1] < even[1]);
    }

    #[test]
    fn curve_tracking_is_continuous_under_refinement() {
        let well = SquareWell::new(1.5, 1.0, 1.0);
        let coarse: Vec<f64> = (0..40)
            .map(|i| 1.001 * (50.0_f64 / 1.001).powf(i as f64 / 39.0))
            .collect();
        let fine: Vec<f64> = (0..400)
            .map(|i| 1.001 * (50.0_f64 / 1.001).powf(i as f64 / 399.0))
            .collect();
        let dc = well.phase_curve_unwrapped(1.0, Parity::Even, BranchSign::Positive, &coarse);
        let df = well.phase_curve_unwrapped(1.0, Parity::Even, BranchSign::Positive, &fine);
        for (i, &e) in coarse.iter().enumerate() {
            let j = fine
                .iter()
                .position(|&x| (x - e).abs() < 1e-9)
                .or_else(|| {
                    fine.iter()
                        .enumerate()
                        .min_by(|a, b| {
                            (a.1 - e).abs().partial_cmp(&(b.1 - e).abs()).unwrap()
                        })
                        .map(|p| p.0)
                })
                .unwrap();
            assert!((dc[i] - df[j]).abs() < 1e-2, "branch mismatch at E = {e}");
        }
    }
}
