//! Finite-box counting: periodic boundary conditions on (-L, L) discretize
//! the continuum into levels k_n L + Delta(k_n) = n pi, and the lowest
//! admitted label n counts the states the well has captured from the
//! continuum.
//!
//! The free particle admits n = 0, 1, 2, ... with k_n = n pi / L (k = n = 0
//! included). An interacting well shifts the threshold phase to
//! (mu+ - 1/2) pi for even states, which pushes the labels n < mu+ out of
//! the continuum: exactly mu+ low labels go missing, and the same for nu+
//! in the odd channel.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::defaults;
use crate::dirac::{
    energy_from_momentum, phase_shift, standard_energy_grid, BranchSign, Parity, PhaseCurve,
};
use crate::error::{Error, Result};
use crate::flow::FlowCounts;
use crate::model::{check_inputs, ModelParams, PotentialSpec};
use crate::report::{fmt_f64, CsvDoc};

/// One discrete box level.
#[derive(Debug, Clone, Copy)]
pub struct BoxLevel {
    pub n: usize,
    pub k: f64,
    pub energy: f64,
    pub parity: Parity,
    pub branch: BranchSign,
    /// |k L + Delta(k) - n pi| at the solved root.
    pub residual: f64,
}

/// The admitted levels of one (parity, branch) channel, plus the missing
/// low labels.
#[derive(Debug, Clone)]
pub struct BoxLevels {
    pub parity: Parity,
    pub branch: BranchSign,
    pub box_half_length: f64,
    pub levels: Vec<BoxLevel>,
    pub missing: Vec<usize>,
}

/// Unwrapped phase evaluated on demand during root finding, memoized on the
/// momentum rounded to 1e-12.
struct PhaseTable<'t> {
    spec: &'t PotentialSpec,
    params: &'t ModelParams,
    parity: Parity,
    branch: BranchSign,
    curve: PhaseCurve,
    memo: Mutex<HashMap<i64, f64>>,
}

impl<'t> PhaseTable<'t> {
    fn new(
        spec: &'t PotentialSpec,
        params: &'t ModelParams,
        parity: Parity,
        branch: BranchSign,
        curve: PhaseCurve,
    ) -> Self {
        Self {
            spec,
            params,
            parity,
            branch,
            curve,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn lower_bound_k(&self) -> f64 {
        self.curve.samples[0].k
    }

    /// Unwrapped phase at momentum k: the exact mod-pi value lifted to the
    /// branch of the reference curve.
    fn delta(&self, k: f64) -> Result<f64> {
        let key = (k / 1e-12).round() as i64;
        if let Some(&hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit);
        }
        let e = energy_from_momentum(k, self.branch, self.params.m);
        let raw = phase_shift(self.spec, self.params, e, self.parity)?.delta_mod_pi;
        let reference = self
            .curve
            .interpolate(e)
            .ok_or_else(|| Error::InvalidParams(format!("momentum {k} outside the curve")))?;
        let lifted =
            raw + ((reference - raw) / std::f64::consts::PI).round() * std::f64::consts::PI;
        self.memo.lock().unwrap().insert(key, lifted);
        Ok(lifted)
    }
}

/// Solve the lowest `count` levels with k > 0 of one channel; for the free
/// particle the k = 0 level is admitted as n = 0.
pub fn quantized_levels(
    spec: &PotentialSpec,
    params: &ModelParams,
    lambda: f64,
    box_half_length: f64,
    parity: Parity,
    branch: BranchSign,
    count: usize,
) -> Result<BoxLevels> {
    check_inputs(spec, params)?;
    let a = spec.range();
    if box_half_length < 50.0 * a {
        return Err(Error::InvalidParams(format!(
            "box half-length {box_half_length} must be at least 50 a = {}",
            50.0 * a
        )));
    }
    let sp = spec.with_lambda(lambda);
    let pi = std::f64::consts::PI;
    let l = box_half_length;
    let m = params.m;
    let free = sp.integral() == 0.0;

    let grid = standard_energy_grid(
        &sp,
        params,
        branch,
        defaults::CURVE_POINTS_PER_DECADE,
        defaults::ENERGY_MAX_OVER_M,
    );
    let curve = crate::dirac::phase_curve(&sp, params, parity, branch, &grid)?;
    let table = PhaseTable::new(&sp, params, parity, branch, curve);

    let mut levels = Vec::new();
    let mut missing = Vec::new();
    let k_floor = table.lower_bound_k();
    let mut n = 0usize;
    if free {
        // the periodic free box admits the constant k = 0 solution
        levels.push(BoxLevel {
            n: 0,
            k: 0.0,
            energy: match branch {
                BranchSign::Positive => m,
                BranchSign::Negative => -m,
            },
            parity,
            branch,
            residual: 0.0,
        });
        n = 1;
    }
    let mut k_lo = k_floor;
    while levels.len() < count {
        let target = n as f64 * pi;
        let g = |k: f64| -> Result<f64> { Ok(k * l + table.delta(k)? - target) };
        if g(k_lo)? > 0.0 {
            // the whole channel sits above this label: the level left the
            // continuum, record the gap and move on
            missing.push(n);
            n += 1;
            continue;
        }
        // g grows essentially like k L; march until it brackets
        let mut hi = k_lo + pi / (2.0 * l);
        let mut g_hi = g(hi)?;
        let mut guard = 0;
        while g_hi < 0.0 {
            hi += pi / (2.0 * l);
            g_hi = g(hi)?;
            guard += 1;
            if guard > 10_000 {
                return Err(Error::InternalInconsistency(format!(
                    "no quantization root found for n = {n}"
                )));
            }
        }
        let mut lo = (hi - pi / (2.0 * l)).max(k_lo);
        let mut g_lo = g(lo)?;
        if g_lo > 0.0 {
            return Err(Error::InternalInconsistency(format!(
                "lost the bracket for n = {n}"
            )));
        }
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let g_mid = g(mid)?;
            if g_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g_lo * g_mid < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                g_lo = g_mid;
            }
        }
        let k_root = 0.5 * (lo + hi);
        let residual = g(k_root)?.abs();
        levels.push(BoxLevel {
            n,
            k: k_root,
            energy: energy_from_momentum(k_root, branch, m),
            parity,
            branch,
            residual,
        });
        k_lo = k_root;
        n += 1;
    }
    Ok(BoxLevels {
        parity,
        branch,
        box_half_length,
        levels,
        missing,
    })
}

/// Result of comparing a free and an interacting level table.
#[derive(Debug, Clone, Copy)]
pub struct LevelShiftVerdict {
    pub parity: Parity,
    pub expected: usize,
    pub lowest_admitted: usize,
    pub missing_low_labels: usize,
}

/// The lowest admitted label and the number of missing low labels must both
/// equal the number of states this channel lost to the well.
pub fn audit_level_shift(
    free: &BoxLevels,
    interacting: &BoxLevels,
    counts: &FlowCounts,
    parity: Parity,
) -> Result<LevelShiftVerdict> {
    let expected = match parity {
        Parity::Even => counts.mu_plus,
        Parity::Odd => counts.nu_plus,
    };
    let free_lowest = free.levels.first().map(|l| l.n).unwrap_or(0);
    if free_lowest != 0 {
        return Err(Error::CountingViolation {
            expected: 0,
            found: free_lowest,
        });
    }
    let lowest = interacting
        .levels
        .iter()
        .find(|l| l.k > 0.0)
        .map(|l| l.n)
        .unwrap_or(usize::MAX);
    if lowest != expected {
        return Err(Error::CountingViolation {
            expected,
            found: lowest,
        });
    }
    let missing = interacting.missing.len();
    if missing != expected {
        return Err(Error::CountingViolation {
            expected,
            found: missing,
        });
    }
    Ok(LevelShiftVerdict {
        parity,
        expected,
        lowest_admitted: lowest,
        missing_low_labels: missing,
    })
}

/// Level table serialization: n, k, E, parity, branch, residual.
pub fn levels_csv(tables: &[&BoxLevels]) -> String {
    let mut csv = CsvDoc::new(&["n", "k", "E", "parity", "branch", "residual"]);
    for t in tables {
        for l in &t.levels {
            csv.row(&[
                l.n.to_string(),
                fmt_f64(l.k),
                fmt_f64(l.energy),
                l.parity.label().to_string(),
                l.branch.label().to_string(),
                fmt_f64(l.residual),
            ]);
        }
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_levels_are_equally_spaced() {
        let spec = PotentialSpec::square(1.0, 1.0, 0.0);
        let params = ModelParams::for_spec(&spec);
        let table = quantized_levels(
            &spec,
            &params,
            0.0,
            200.0,
            Parity::Even,
            BranchSign::Positive,
            20,
        )
        .unwrap();
        assert_eq!(table.levels.len(), 20);
        assert_eq!(table.levels[0].n, 0);
        assert_eq!(table.levels[0].k, 0.0);
        for level in &table.levels[1..] {
            let expected = level.n as f64 * std::f64::consts::PI / 200.0;
            assert!(
                (level.k - expected).abs() < 1e-9,
                "free level n = {} at k = {}, expected {}",
                level.n,
                level.k,
                expected
            );
            assert!(level.residual <= 1e-8);
        }
        assert!(table.missing.is_empty());
    }

    #[test]
    fn weak_well_shifts_even_levels_by_half_a_slot() {
        // one even capture: k_n = (pi/L)(n - 1/2) near threshold
        let spec = PotentialSpec::square(0.5, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let table = quantized_levels(
            &spec,
            &params,
            1.0,
            200.0,
            Parity::Even,
            BranchSign::Positive,
            5,
        )
        .unwrap();
        assert_eq!(table.missing, vec![0]);
        let first = &table.levels[0];
        assert_eq!(first.n, 1);
        let slot = std::f64::consts::PI / 200.0;
        assert!(
            (first.k - slot * 0.5).abs() < 0.1 * slot,
            "first even level at k = {}, expected about {}",
            first.k,
            0.5 * slot
        );
    }

    #[test]
    fn box_residuals_meet_tolerance() {
        let spec = PotentialSpec::square(0.5, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        for parity in [Parity::Even, Parity::Odd] {
            let table = quantized_levels(
                &spec,
                &params,
                1.0,
                200.0,
                parity,
                BranchSign::Positive,
                20,
            )
            .unwrap();
            for level in &table.levels {
                assert!(
                    level.residual <= defaults::BOX_RESIDUAL_TOL,
                    "residual {} at n = {}",
                    level.residual,
                    level.n
                );
            }
        }
    }

    #[test]
    fn small_box_rejected() {
        let spec = PotentialSpec::square(0.5, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let err = quantized_levels(
            &spec,
            &params,
            1.0,
            10.0,
            Parity::Even,
            BranchSign::Positive,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn level_spacing_tends_to_free_value() {
        let spec = PotentialSpec::square(0.5, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let table = quantized_levels(
            &spec,
            &params,
            1.0,
            200.0,
            Parity::Even,
            BranchSign::Positive,
            21,
        )
        .unwrap();
        let slot = std::f64::consts::PI / 200.0;
        let tail: Vec<f64> = table
            .levels
            .windows(2)
            .map(|w| w[1].k - w[0].k)
            .collect();
        let last = *tail.last().unwrap();
        assert!(
            (last - slot).abs() < 0.01 * slot,
            "tail spacing {last} vs free slot {slot}"
        );
    }
}
