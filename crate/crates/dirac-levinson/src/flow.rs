//! Spectral flow: track every bound level as the coupling grows and count
//! the gap-edge crossings that the strong threshold identities refer to.
//!
//! Levels are identified by (parity, node count). Node count is a
//! topological invariant of a 1D level, so it survives where energy ordering
//! would break. A new key appearing near E = +m is a state captured from the
//! positive continuum; a key vanishing near E = -m is a state lost to the
//! negative continuum. Anything appearing or vanishing away from an edge is
//! a tracking failure, never silently dropped.

use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::defaults;
use crate::dirac::{bound_states_scanned, BoundState, Edge, Parity};
use crate::error::{Error, Result};
use crate::integrate::{boundary_values, IntegratorKind};
use crate::model::{check_inputs, ModelParams, PotentialSpec};
use crate::report::{fmt_f64, CsvDoc};

/// Direction a level moves when it crosses an edge under a deepening well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Entered the gap through E = +m.
    IntoGap,
    /// Left the gap through E = -m.
    IntoNegativeContinuum,
}

/// One edge crossing, refined in lambda.
#[derive(Debug, Clone, Copy)]
pub struct CrossingEvent {
    pub lambda: f64,
    pub edge: Edge,
    pub parity: Parity,
    pub direction: Direction,
}

/// The full record of a coupling sweep.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub lambda_grid: Vec<f64>,
    pub levels: Vec<Vec<BoundState>>,
    pub events: Vec<CrossingEvent>,
}

/// The six integers of the strong theorem bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowCounts {
    pub mu_plus: usize,
    pub nu_plus: usize,
    pub mu_minus: usize,
    pub nu_minus: usize,
    pub n_even: usize,
    pub n_odd: usize,
}

impl FlowCounts {
    pub fn zero() -> Self {
        Self {
            mu_plus: 0,
            nu_plus: 0,
            mu_minus: 0,
            nu_minus: 0,
            n_even: 0,
            n_odd: 0,
        }
    }
}

type LevelKey = (u8, usize); // (parity tag, node count)

fn key_of(state: &BoundState) -> LevelKey {
    let tag = match state.parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    (tag, state.nodes)
}

fn level_map(states: &[BoundState]) -> BTreeMap<LevelKey, BoundState> {
    states.iter().map(|s| (key_of(s), *s)).collect()
}

/// Edge matching function whose zero in lambda marks a crossing: at E = +m
/// the exterior solution has no lower component, so the crossing condition
/// is g_a = 0; at E = -m it is f_a = 0.
pub(crate) fn edge_matching(
    spec: &PotentialSpec,
    params: &ModelParams,
    lambda: f64,
    parity: Parity,
    edge: Edge,
) -> Result<f64> {
    let sp = spec.with_lambda(lambda);
    let e = edge.energy(params.m);
    let (f_a, g_a) = boundary_values(&sp, params.m, e, parity, IntegratorKind::Auto)?;
    Ok(match edge {
        Edge::PlusM => g_a,
        Edge::MinusM => f_a,
    })
}

/// Locate a single crossing inside a verified bracket to 1e-9 in lambda.
pub fn refine_crossing(
    spec: &PotentialSpec,
    params: &ModelParams,
    parity: Parity,
    edge: Edge,
    bracket: (f64, f64),
) -> Result<f64> {
    check_inputs(spec, params)?;
    let (lo, hi) = bracket;
    if !(hi > lo) {
        return Err(Error::BadBracket {
            lambda_lo: lo,
            lambda_hi: hi,
            detail: "empty interval".into(),
        });
    }
    let n = 32;
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let l = lo + (hi - lo) * i as f64 / n as f64;
        values.push((l, edge_matching(spec, params, l, parity, edge)?));
    }
    let mut flips = Vec::new();
    for i in 0..n {
        if values[i].1 == 0.0 || values[i].1 * values[i + 1].1 < 0.0 {
            flips.push(i);
        }
    }
    match flips.len() {
        0 => Err(Error::BadBracket {
            lambda_lo: lo,
            lambda_hi: hi,
            detail: format!(
                "no {} {} crossing in the bracket",
                parity.label(),
                edge.label()
            ),
        }),
        1 => {
            let i = flips[0];
            let (mut x0, mut x1) = (values[i].0, values[i + 1].0);
            let mut f0 = values[i].1;
            if f0 == 0.0 {
                return Ok(x0);
            }
            while x1 - x0 > defaults::CROSSING_TOL * 1e-1 {
                let xm = 0.5 * (x0 + x1);
                let fm = edge_matching(spec, params, xm, parity, edge)?;
                if fm == 0.0 {
                    return Ok(xm);
                }
                if f0 * fm < 0.0 {
                    x1 = xm;
                } else {
                    x0 = xm;
                    f0 = fm;
                }
            }
            Ok(0.5 * (x0 + x1))
        }
        _ => Err(Error::BadBracket {
            lambda_lo: lo,
            lambda_hi: hi,
            detail: format!("{} crossings in one bracket", flips.len()),
        }),
    }
}

struct SweepCtx<'c> {
    spec: &'c PotentialSpec,
    params: &'c ModelParams,
    scan_points: usize,
}

impl SweepCtx<'_> {
    fn solve(&self, lambda: f64) -> Result<Vec<BoundState>> {
        bound_states_scanned(self.spec, self.params, lambda, self.scan_points)
    }

    /// Resolve everything that changed between two adjacent couplings,
    /// subdividing tenfold up to twice so each leaf holds one event.
    fn resolve(
        &self,
        lambda_lo: f64,
        lambda_hi: f64,
        lo: &[BoundState],
        hi: &[BoundState],
        depth: usize,
        events: &mut Vec<CrossingEvent>,
    ) -> Result<()> {
        let lo_map = level_map(lo);
        let hi_map = level_map(hi);
        let appeared: Vec<&BoundState> = hi_map
            .iter()
            .filter(|(k, _)| !lo_map.contains_key(k))
            .map(|(_, s)| s)
            .collect();
        let vanished: Vec<&BoundState> = lo_map
            .iter()
            .filter(|(k, _)| !hi_map.contains_key(k))
            .map(|(_, s)| s)
            .collect();
        if appeared.is_empty() && vanished.is_empty() {
            return Ok(());
        }
        if depth < 2 {
            let mut grid = vec![(lambda_lo, lo.to_vec())];
            for i in 1..10 {
                let l = lambda_lo + (lambda_hi - lambda_lo) * i as f64 / 10.0;
                grid.push((l, self.solve(l)?));
            }
            grid.push((lambda_hi, hi.to_vec()));
            for pair in grid.windows(2) {
                self.resolve(
                    pair[0].0,
                    pair[1].0,
                    pair[0].1.as_slice(),
                    pair[1].1.as_slice(),
                    depth + 1,
                    events,
                )?;
            }
            return Ok(());
        }
        let m = self.params.m;
        let window = defaults::EDGE_WINDOW * m;
        for state in appeared {
            if (m - state.energy).abs() > window {
                return Err(Error::TrackingFailure {
                    lambda_lo,
                    lambda_hi,
                    detail: format!(
                        "{} level with {} nodes appeared at E = {}, away from +m",
                        state.parity.label(),
                        state.nodes,
                        state.energy
                    ),
                });
            }
            let lambda = if lambda_lo == 0.0
                && state.parity == Parity::Even
                && edge_matching(self.spec, self.params, 0.0, Parity::Even, Edge::PlusM)? == 0.0
            {
                // the even ground state binds at infinitesimal coupling
                0.0
            } else {
                refine_crossing(
                    self.spec,
                    self.params,
                    state.parity,
                    Edge::PlusM,
                    (lambda_lo, lambda_hi),
                )?
            };
            events.push(CrossingEvent {
                lambda,
                edge: Edge::PlusM,
                parity: state.parity,
                direction: Direction::IntoGap,
            });
        }
        for state in vanished {
            if (state.energy + m).abs() > window {
                return Err(Error::TrackingFailure {
                    lambda_lo,
                    lambda_hi,
                    detail: format!(
                        "{} level with {} nodes vanished at E = {}, away from -m",
                        state.parity.label(),
                        state.nodes,
                        state.energy
                    ),
                });
            }
            let lambda = refine_crossing(
                self.spec,
                self.params,
                state.parity,
                Edge::MinusM,
                (lambda_lo, lambda_hi),
            )?;
            events.push(CrossingEvent {
                lambda,
                edge: Edge::MinusM,
                parity: state.parity,
                direction: Direction::IntoNegativeContinuum,
            });
        }
        Ok(())
    }

}

/// Sweep the coupling from zero to the spec's lambda, tracking every level.
pub fn sweep_coupling(
    spec: &PotentialSpec,
    params: &ModelParams,
    lambda_steps: usize,
) -> Result<FlowTrace> {
    sweep_coupling_scanned(spec, params, lambda_steps, defaults::BOUND_SCAN_POINTS)
}

/// Sweep with an explicit bound-state scan resolution.
pub fn sweep_coupling_scanned(
    spec: &PotentialSpec,
    params: &ModelParams,
    lambda_steps: usize,
    scan_points: usize,
) -> Result<FlowTrace> {
    check_inputs(spec, params)?;
    if lambda_steps < defaults::LAMBDA_STEPS_MIN {
        return Err(Error::InvalidParams(format!(
            "lambda_steps = {lambda_steps} below the minimum {}",
            defaults::LAMBDA_STEPS_MIN
        )));
    }
    let lambda_max = spec.lambda;
    if lambda_max == 0.0 {
        return Ok(FlowTrace {
            lambda_grid: vec![0.0],
            levels: vec![Vec::new()],
            events: Vec::new(),
        });
    }
    let grid: Vec<f64> = (0..=lambda_steps)
        .map(|i| lambda_max * i as f64 / lambda_steps as f64)
        .collect();
    let ctx = SweepCtx {
        spec,
        params,
        scan_points,
    };
    let levels: Vec<Vec<BoundState>> = grid
        .par_iter()
        .map(|&l| ctx.solve(l))
        .collect::<Result<_>>()?;
    let mut events = Vec::new();
    for i in 0..grid.len() - 1 {
        ctx.resolve(
            grid[i],
            grid[i + 1],
            &levels[i],
            &levels[i + 1],
            0,
            &mut events,
        )?;
    }
    events.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap());
    Ok(FlowTrace {
        lambda_grid: grid,
        levels,
        events,
    })
}

/// Tally events per (edge, parity) and check the exact integer identities
/// mu+ - n_e = mu- and nu+ - n_o = nu-.
pub fn count_crossings(trace: &FlowTrace, final_states: &[BoundState]) -> Result<FlowCounts> {
    let mut counts = FlowCounts::zero();
    for ev in &trace.events {
        match (ev.edge, ev.parity) {
            (Edge::PlusM, Parity::Even) => counts.mu_plus += 1,
            (Edge::PlusM, Parity::Odd) => counts.nu_plus += 1,
            (Edge::MinusM, Parity::Even) => counts.mu_minus += 1,
            (Edge::MinusM, Parity::Odd) => counts.nu_minus += 1,
        }
    }
    counts.n_even = final_states
        .iter()
        .filter(|s| s.parity == Parity::Even)
        .count();
    counts.n_odd = final_states
        .iter()
        .filter(|s| s.parity == Parity::Odd)
        .count();
    if counts.mu_plus != counts.mu_minus + counts.n_even {
        return Err(Error::InternalInconsistency(format!(
            "mu+ = {} but mu- + n_e = {} + {}",
            counts.mu_plus, counts.mu_minus, counts.n_even
        )));
    }
    if counts.nu_plus != counts.nu_minus + counts.n_odd {
        return Err(Error::InternalInconsistency(format!(
            "nu+ = {} but nu- + n_o = {} + {}",
            counts.nu_plus, counts.nu_minus, counts.n_odd
        )));
    }
    Ok(counts)
}

/// Serialize the level trace for plotting E_n(lambda).
pub fn trace_csv(trace: &FlowTrace) -> String {
    let mut csv = CsvDoc::new(&["lambda", "parity", "nodes", "energy"]);
    for (lam, states) in trace.lambda_grid.iter().zip(trace.levels.iter()) {
        for s in states {
            csv.row(&[
                fmt_f64(*lam),
                s.parity.label().to_string(),
                s.nodes.to_string(),
                fmt_f64(s.energy),
            ]);
        }
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squarewell::SquareWell;

    #[test]
    fn zero_coupling_sweep_is_empty() {
        let spec = PotentialSpec::square(0.5, 1.0, 0.0);
        let params = ModelParams::for_spec(&spec);
        let trace = sweep_coupling(&spec, &params, 120).unwrap();
        assert!(trace.events.is_empty());
        assert!(trace.levels.iter().all(|l| l.is_empty()));
        let counts = count_crossings(&trace, &[]).unwrap();
        assert_eq!(counts, FlowCounts::zero());
    }

    #[test]
    fn weak_well_has_one_even_capture() {
        let spec = PotentialSpec::square(0.5, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let trace = sweep_coupling(&spec, &params, 120).unwrap();
        assert_eq!(trace.events.len(), 1);
        let ev = trace.events[0];
        assert_eq!(ev.edge, Edge::PlusM);
        assert_eq!(ev.parity, Parity::Even);
        let finals = crate::dirac::bound_states(&spec, &params, 1.0).unwrap();
        let counts = count_crossings(&trace, &finals).unwrap();
        assert_eq!(
            counts,
            FlowCounts {
                mu_plus: 1,
                nu_plus: 0,
                mu_minus: 0,
                nu_minus: 0,
                n_even: 1,
                n_odd: 0
            }
        );
    }

    #[test]
    fn deep_well_event_couplings_match_closed_forms() {
        let spec = PotentialSpec::square(4.0, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let well = SquareWell::new(4.0, 1.0, 1.0);
        let trace = sweep_coupling(&spec, &params, 100).unwrap();

        let even_plus: Vec<f64> = trace
            .events
            .iter()
            .filter(|e| e.edge == Edge::PlusM && e.parity == Parity::Even && e.lambda > 0.0)
            .map(|e| e.lambda)
            .collect();
        let expected = well.critical_couplings(Parity::Even, Edge::PlusM, 4);
        assert_eq!(even_plus.len(), expected.len());
        for (got, want) in even_plus.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-6, "got {got}, want {want}");
        }

        let odd_plus: Vec<f64> = trace
            .events
            .iter()
            .filter(|e| e.edge == Edge::PlusM && e.parity == Parity::Odd)
            .map(|e| e.lambda)
            .collect();
        let expected = well.critical_couplings(Parity::Odd, Edge::PlusM, 4);
        assert_eq!(odd_plus.len(), expected.len());
        for (got, want) in odd_plus.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-6);
        }

        let even_minus: Vec<f64> = trace
            .events
            .iter()
            .filter(|e| e.edge == Edge::MinusM && e.parity == Parity::Even)
            .map(|e| e.lambda)
            .collect();
        let expected = well.critical_couplings(Parity::Even, Edge::MinusM, 4);
        assert_eq!(even_minus.len(), expected.len());
        for (got, want) in even_minus.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn supercritical_counts_satisfy_identities() {
        let spec = PotentialSpec::square(4.0, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let trace = sweep_coupling(&spec, &params, 100).unwrap();
        let finals = crate::dirac::bound_states(&spec, &params, 1.0).unwrap();
        let counts = count_crossings(&trace, &finals).unwrap();
        assert_eq!(counts.mu_plus, 2);
        assert_eq!(counts.mu_minus, 1);
        assert_eq!(counts.n_even, 1);
        assert_eq!(counts.nu_plus, 2);
        assert_eq!(counts.nu_minus, 0);
        assert_eq!(counts.n_odd, 2);
    }

    #[test]
    fn levels_descend_and_keep_their_nodes() {
        let spec = PotentialSpec::square(4.0, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let trace = sweep_coupling(&spec, &params, 100).unwrap();
        let mut last: BTreeMap<LevelKey, f64> = BTreeMap::new();
        for states in &trace.levels {
            for s in states {
                if let Some(prev) = last.get(&key_of(s)) {
                    assert!(
                        s.energy <= prev + 1e-9,
                        "level {:?} rose from {prev} to {}",
                        key_of(s),
                        s.energy
                    );
                }
            }
            last = states.iter().map(|s| (key_of(s), s.energy)).collect();
        }
    }

    #[test]
    fn refine_rejects_empty_bracket() {
        let spec = PotentialSpec::square(4.0, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        // no odd +m crossing in (0.40, 0.55): the first is at 0.2155, the
        // second at 0.9543
        let err = refine_crossing(&spec, &params, Parity::Odd, Edge::PlusM, (0.40, 0.55))
            .unwrap_err();
        assert!(matches!(err, Error::BadBracket { .. }));
    }

    #[test]
    fn refine_matches_closed_form() {
        let spec = PotentialSpec::square(4.0, 1.0, 1.0);
        let params = ModelParams::for_spec(&spec);
        let well = SquareWell::new(4.0, 1.0, 1.0);
        let want = well.critical_couplings(Parity::Even, Edge::PlusM, 1)[0];
        let got =
            refine_crossing(&spec, &params, Parity::Even, Edge::PlusM, (0.5, 0.65)).unwrap();
        assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
    }
}
