//! Physical parameters and the family of admissible potential wells.
//!
//! A well is V(x; lambda) = lambda * V0(x) with V0 <= 0, V0(x) = V0(-x) and
//! V0 = 0 outside [-a, a]. Depths are stored positive; the sign is applied at
//! evaluation so a sign error cannot silently flip a well into a barrier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass and well range in natural units (hbar = c = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub a: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            m: crate::defaults::MASS,
            a: crate::defaults::RANGE,
        }
    }
}

impl ModelParams {
    pub fn new(m: f64, a: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParams(format!("range must be positive, got {a}")));
        }
        Ok(Self { m, a })
    }

    /// Parameters matching a given potential's range, unit mass.
    pub fn for_spec(spec: &PotentialSpec) -> Self {
        Self {
            m: crate::defaults::MASS,
            a: spec.range(),
        }
    }
}

/// Shape of the bare profile V0. Depths and table values describe V0 itself,
/// before the coupling lambda is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    /// Constant depth v0 > 0 on [-a, a].
    #[serde(rename = "square")]
    Square { v0: f64, a: f64 },
    /// Sampled symmetric profile on [-a, a]; values are V0(x) <= 0.
    /// Evaluated as the piecewise-linear interpolant of the samples.
    #[serde(rename = "smooth-table")]
    SmoothTable { samples: Vec<(f64, f64)> },
    /// Per-side list of (width, depth) bands, mirrored about the origin.
    #[serde(rename = "piecewise-constant")]
    PiecewiseConstant { segments: Vec<(f64, f64)> },
}

/// A validated well family together with its coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub family: Family,
    pub lambda: f64,
}

/// One named reason a spec fails validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// V0(x) != V0(-x) at the given abscissa.
    Asymmetric { x: f64 },
    /// A positive V0 sample: the profile is not a well.
    NotAWell { x: f64, value: f64 },
    /// Table abscissas not strictly increasing.
    UnsortedSamples,
    /// Fewer samples than needed to define a profile.
    TooFewSamples,
    /// Non-positive range, width or depth.
    BadGeometry(String),
    /// Coupling outside [0, 1].
    BadCoupling(f64),
    /// A non-finite number in the spec.
    NonFinite,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Asymmetric { x } => write!(out, "asymmetric profile at x = {x}"),
            Violation::NotAWell { x, value } => {
                write!(out, "not a well: V0({x}) = {value} > 0")
            }
            Violation::UnsortedSamples => write!(out, "table abscissas not strictly increasing"),
            Violation::TooFewSamples => write!(out, "too few table samples (need at least 3)"),
            Violation::BadGeometry(what) => write!(out, "bad geometry: {what}"),
            Violation::BadCoupling(l) => write!(out, "coupling {l} outside [0, 1]"),
            Violation::NonFinite => write!(out, "non-finite value in spec"),
        }
    }
}

/// Outcome of `PotentialSpec::validate`.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let text = self
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidPotential(text))
        }
    }
}

impl PotentialSpec {
    pub fn square(v0: f64, a: f64, lambda: f64) -> Self {
        Self {
            family: Family::Square { v0, a },
            lambda,
        }
    }

    pub fn piecewise(segments: Vec<(f64, f64)>, lambda: f64) -> Self {
        Self {
            family: Family::PiecewiseConstant { segments },
            lambda,
        }
    }

    pub fn table(samples: Vec<(f64, f64)>, lambda: f64) -> Self {
        Self {
            family: Family::SmoothTable { samples },
            lambda,
        }
    }

    /// Support half-width a: V(x) = 0 for |x| > a.
    pub fn range(&self) -> f64 {
        match &self.family {
            Family::Square { a, .. } => *a,
            Family::SmoothTable { samples } => samples
                .iter()
                .map(|&(x, _)| x.abs())
                .fold(0.0, f64::max),
            Family::PiecewiseConstant { segments } => segments.iter().map(|&(w, _)| w).sum(),
        }
    }

    /// Largest depth of the bare profile, max |V0|.
    pub fn max_depth(&self) -> f64 {
        match &self.family {
            Family::Square { v0, .. } => *v0,
            Family::SmoothTable { samples } => samples
                .iter()
                .map(|&(_, v)| -v)
                .fold(0.0, f64::max),
            Family::PiecewiseConstant { segments } => segments
                .iter()
                .map(|&(_, d)| d)
                .fold(0.0, f64::max),
        }
    }

    /// Same profile at a different coupling. The crossing refinement needs
    /// couplings a hair outside [0, 1], so no clamping here; `validate`
    /// still polices the stored value.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            family: self.family.clone(),
            lambda,
        }
    }

    /// V(x; lambda) = lambda * V0(x). Total on the reals, exactly zero
    /// outside the support.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.lambda * self.bare(x)
    }

    /// The bare profile V0(x).
    pub fn bare(&self, x: f64) -> f64 {
        let r = x.abs();
        if r > self.range() {
            return 0.0;
        }
        match &self.family {
            Family::Square { v0, .. } => -v0,
            Family::SmoothTable { samples } => table_interp(samples, x),
            Family::PiecewiseConstant { segments } => {
                let mut edge = 0.0;
                for &(w, d) in segments {
                    edge += w;
                    if r <= edge {
                        return -d;
                    }
                }
                0.0
            }
        }
    }

    /// Exact integral of V(x; lambda) over the whole line.
    ///
    /// Rectangle sums for the constant families; trapezoid rule for tables,
    /// which is exact for the piecewise-linear interpolant the table defines.
    pub fn integral(&self) -> f64 {
        let bare = match &self.family {
            Family::Square { v0, a } => -2.0 * a * v0,
            Family::PiecewiseConstant { segments } => {
                -2.0 * segments.iter().map(|&(w, d)| w * d).sum::<f64>()
            }
            Family::SmoothTable { samples } => {
                let mut acc = 0.0;
                for pair in samples.windows(2) {
                    let (x0, v0) = pair[0];
                    let (x1, v1) = pair[1];
                    acc += 0.5 * (v0 + v1) * (x1 - x0);
                }
                acc
            }
        };
        self.lambda * bare
    }

    /// Checks symmetry, non-positivity and compact support; collects every
    /// violation rather than stopping at the first.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !self.lambda.is_finite() {
            report.violations.push(Violation::NonFinite);
        } else if !(0.0..=1.0).contains(&self.lambda) {
            report.violations.push(Violation::BadCoupling(self.lambda));
        }
        match &self.family {
            Family::Square { v0, a } => {
                if !v0.is_finite() || !a.is_finite() {
                    report.violations.push(Violation::NonFinite);
                } else {
                    if *v0 < 0.0 {
                        report.violations.push(Violation::NotAWell { x: 0.0, value: -v0 });
                    }
                    if *a <= 0.0 {
                        report
                            .violations
                            .push(Violation::BadGeometry(format!("range a = {a}")));
                    }
                }
            }
            Family::PiecewiseConstant { segments } => {
                if segments.is_empty() {
                    report
                        .violations
                        .push(Violation::BadGeometry("no segments".into()));
                }
                for &(w, d) in segments {
                    if !w.is_finite() || !d.is_finite() {
                        report.violations.push(Violation::NonFinite);
                    } else {
                        if w <= 0.0 {
                            report
                                .violations
                                .push(Violation::BadGeometry(format!("segment width {w}")));
                        }
                        if d < 0.0 {
                            report.violations.push(Violation::NotAWell {
                                x: f64::NAN,
                                value: -d,
                            });
                        }
                    }
                }
            }
            Family::SmoothTable { samples } => validate_table(samples, &mut report),
        }
        report
    }
}

fn validate_table(samples: &[(f64, f64)], report: &mut ValidationReport) {
    if samples.len() < 3 {
        report.violations.push(Violation::TooFewSamples);
        return;
    }
    if samples.iter().any(|&(x, v)| !x.is_finite() || !v.is_finite()) {
        report.violations.push(Violation::NonFinite);
        return;
    }
    if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
        report.violations.push(Violation::UnsortedSamples);
        return;
    }
    let n = samples.len();
    let span_lo = samples[0].0;
    let span_hi = samples[n - 1].0;
    if (span_lo + span_hi).abs() > 1e-12 * span_hi.abs().max(1.0) {
        report.violations.push(Violation::BadGeometry(format!(
            "table span [{span_lo}, {span_hi}] not centred on the origin"
        )));
    }
    for i in 0..n {
        let (x, v) = samples[i];
        let (xm, vm) = samples[n - 1 - i];
        // the grid itself must mirror; then value symmetry is point-by-point
        if (x + xm).abs() > 1e-12 * x.abs().max(1.0) || (v - vm).abs() > 1e-12 * v.abs().max(1.0)
        {
            report.violations.push(Violation::Asymmetric { x });
            break;
        }
    }
    for &(x, v) in samples {
        if v > 0.0 {
            report.violations.push(Violation::NotAWell { x, value: v });
            break;
        }
    }
}

// lookup by |x| so the two mirror points share one arithmetic path and the
// symmetry invariant holds bitwise
fn table_interp(samples: &[(f64, f64)], x: f64) -> f64 {
    let n = samples.len();
    let r = x.abs();
    if r >= samples[n - 1].0 {
        return 0.0;
    }
    let idx = samples.partition_point(|&(xs, _)| xs <= r);
    let (x0, v0) = samples[idx - 1];
    let (x1, v1) = samples[idx];
    v0 + (v1 - v0) * (r - x0) / (x1 - x0)
}

/// Parse a potential spec from its JSON document form, e.g.
/// `{"family": "square", "v0": 2.0, "a": 1.0, "lambda": 1.0}`.
pub fn spec_from_json(text: &str) -> Result<PotentialSpec> {
    let spec: PotentialSpec = serde_json::from_str(text)?;
    spec.validate().into_result()?;
    Ok(spec)
}

/// Consistency gate shared by the solver entry points.
pub(crate) fn check_inputs(spec: &PotentialSpec, params: &ModelParams) -> Result<()> {
    spec.validate().into_result()?;
    if !(params.m > 0.0) || !(params.a > 0.0) {
        return Err(Error::InvalidParams(format!(
            "m = {}, a = {} must both be positive",
            params.m, params.a
        )));
    }
    let r = spec.range();
    if (params.a - r).abs() > 1e-12 * r.max(1.0) {
        return Err(Error::InvalidParams(format!(
            "params.a = {} disagrees with the potential range {r}",
            params.a
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_evaluate_matches_definition() {
        let spec = PotentialSpec::square(2.0, 1.0, 0.5);
        assert_eq!(spec.evaluate(0.3), -1.0);
        assert_eq!(spec.evaluate(-0.3), -1.0);
        assert_eq!(spec.evaluate(1.5), 0.0);
        let off = PotentialSpec::square(2.0, 1.0, 0.0);
        assert_eq!(off.evaluate(0.3), 0.0);
    }

    #[test]
    fn square_integral_is_rectangle_area() {
        let spec = PotentialSpec::square(2.0, 1.0, 1.0);
        assert_eq!(spec.integral(), -4.0);
        assert_eq!(spec.with_lambda(0.0).integral(), 0.0);
    }

    #[test]
    fn piecewise_integral_sums_bands() {
        let spec = PotentialSpec::piecewise(vec![(0.5, 1.0), (0.5, 3.0)], 1.0);
        assert_eq!(spec.integral(), -4.0);
        assert_eq!(spec.range(), 1.0);
        assert_eq!(spec.evaluate(0.25), -1.0);
        assert_eq!(spec.evaluate(0.75), -3.0);
        assert_eq!(spec.evaluate(1.25), 0.0);
    }

    #[test]
    fn integral_is_linear_in_lambda() {
        let spec = PotentialSpec::square(1.7, 0.9, 1.0);
        for lam in [0.0, 0.25, 0.5, 0.777, 1.0] {
            let scaled = spec.with_lambda(lam).integral();
            assert!((scaled - lam * spec.integral()).abs() <= 1e-12);
        }
    }

    #[test]
    fn validate_accepts_square_well() {
        assert!(PotentialSpec::square(2.0, 1.0, 1.0).validate().passed());
    }

    #[test]
    fn validate_rejects_asymmetric_table() {
        let spec = PotentialSpec::table(
            vec![(-1.0, 0.0), (-0.2, -1.0), (0.2, -0.5), (1.0, 0.0)],
            1.0,
        );
        let report = spec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Asymmetric { .. })));
    }

    #[test]
    fn validate_rejects_positive_sample() {
        let spec = PotentialSpec::table(
            vec![(-1.0, 0.0), (-0.5, 0.3), (0.0, -1.0), (0.5, 0.3), (1.0, 0.0)],
            1.0,
        );
        let report = spec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotAWell { .. })));
    }

    #[test]
    fn table_evaluate_is_symmetric_and_compact() {
        let spec = PotentialSpec::table(
            vec![(-1.0, 0.0), (-0.5, -1.5), (0.0, -2.0), (0.5, -1.5), (1.0, 0.0)],
            1.0,
        );
        assert!(spec.validate().passed());
        for x in [0.1, 0.33, 0.5, 0.77, 0.999] {
            assert_eq!(spec.evaluate(x), spec.evaluate(-x));
            assert!(spec.evaluate(x) <= 0.0);
        }
        assert_eq!(spec.evaluate(1.0001), 0.0);
        // trapezoid of the tent: two triangles plus the plateau slopes
        let expected = -(0.5 * (0.0 + 1.5) + 0.5 * (1.5 + 2.0)) * 0.5 * 2.0;
        assert!((spec.integral() - expected).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_square() {
        let text = r#"{"family": "square", "v0": 2.0, "a": 1.0, "lambda": 1.0}"#;
        let spec = spec_from_json(text).unwrap();
        assert_eq!(spec, PotentialSpec::square(2.0, 1.0, 1.0));
    }

    #[test]
    fn json_piecewise_and_table() {
        let text = r#"{"family": "piecewise-constant", "segments": [[0.5, 1.0], [0.5, 3.0]], "lambda": 1.0}"#;
        let spec = spec_from_json(text).unwrap();
        assert_eq!(spec.range(), 1.0);

        let text = r#"{"family": "smooth-table",
                       "samples": [[-1.0, 0.0], [0.0, -2.0], [1.0, 0.0]],
                       "lambda": 0.5}"#;
        let spec = spec_from_json(text).unwrap();
        assert_eq!(spec.evaluate(0.0), -1.0);
    }

    #[test]
    fn bad_coupling_rejected() {
        let report = PotentialSpec::square(1.0, 1.0, 1.5).validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::BadCoupling(_))));
    }
}
