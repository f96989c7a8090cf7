//! Alternating iteration toward a best proximity pair.
//!
//! Repeated application of a cyclic map walks back and forth between the two
//! regions. When the map contracts, even-indexed iterates settle down onto a
//! point whose image sits at the set distance; the solver detects that with
//! a two-stage test on even indices and reports the pair together with its
//! residuals.

use serde::Serialize;

use crate::contraction::{orbital_sup, DEFAULT_SUP_TOL};
use crate::error::{Error, Result};
use crate::map::{CyclicMap, Side};
use crate::space::{distance, Point};

const ENVELOPE_SUP_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub pair_tol: f64,
    /// When set, the report also checks the geometric decay envelope
    /// `gap_n - dist <= eta^n (S0 - dist) + gap_tol` at this rate.
    pub eta_for_bound: Option<f64>,
    pub record_trace: bool,
    /// Sampling density for the set-distance computation.
    pub dist_density: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 10_000,
            gap_tol: 1e-9,
            pair_tol: 1e-9,
            eta_for_bound: None,
            record_trace: false,
            dist_density: 101,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 4 {
            return Err(Error::MaxIterTooSmall(self.max_iter));
        }
        for (name, value) in [("gap_tol", self.gap_tol), ("pair_tol", self.pair_tol)] {
            if !(value > 0.0) {
                return Err(Error::NonPositiveTolerance { name, value });
            }
        }
        if let Some(eta) = self.eta_for_bound {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::EtaOutOfRange(eta));
            }
        }
        if self.dist_density < 2 {
            return Err(Error::DensityTooSmall(self.dist_density));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    pub side: Side,
    pub point: Point,
    /// `d(x_n, x_{n+1})`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub seed: Point,
    pub seed_side: Side,
    pub bpp_omega: Point,
    pub bpp_delta: Point,
    pub dist_used: f64,
    pub gap_tol: f64,
    pub pair_tol: f64,
    pub gap_sequence: Vec<f64>,
    /// `| d(bpp_omega, bpp_delta) - dist_used |`.
    pub residual_bpp: f64,
    /// Distance from `bpp_omega` to its second image.
    pub residual_fp2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Outcome of the decay-envelope check when `eta_for_bound` was given.
    pub envelope_ok: Option<bool>,
    #[serde(skip)]
    pub trace: Option<Vec<TraceEntry>>,
}

/// Outcome of re-checking the decay envelope on a recorded trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub holds: bool,
    pub first_violation: Option<usize>,
    pub max_excess: f64,
}

struct Walk {
    xs: Vec<Point>,
    gaps: Vec<f64>,
}

impl Walk {
    fn extend(&mut self, m: &CyclicMap) -> Result<()> {
        let last = self.xs.last().expect("walk starts at the seed");
        let next = m.apply(last)?;
        self.gaps.push(distance(last, &next)?);
        self.xs.push(next);
        Ok(())
    }
}

fn best_pair(
    m: &CyclicMap,
    seed_side: Side,
    final_iterate: &Point,
    dist_used: f64,
) -> Result<(Point, Point, f64, f64)> {
    let bpp_omega = match seed_side {
        Side::Omega => final_iterate.clone(),
        Side::Delta => m.apply(final_iterate)?,
    };
    let bpp_delta = m.apply(&bpp_omega)?;
    let residual_bpp = (distance(&bpp_omega, &bpp_delta)? - dist_used).abs();
    let residual_fp2 = distance(&bpp_omega, &m.apply(&bpp_delta)?)?;
    Ok((bpp_omega, bpp_delta, residual_bpp, residual_fp2))
}

/// Iterate the map from `seed` until the even-indexed iterates settle.
///
/// Convergence at even index `E` requires, for both `E - 2` and `E`, that
/// `d(x_n, x_{n+2}) < pair_tol` and `|gap_n - dist| < gap_tol`, plus the
/// residuals of the resulting pair passing the same tolerances. The last
/// even iterate computed is the reported proximity point (mapped across
/// once when the seed sits in delta, so `bpp_omega` is always on the omega
/// side). The gap sequence carries entries `0..=iterations`; the final one
/// costs a single look-ahead application.
pub fn iterate(m: &CyclicMap, seed: &Point, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let seed_side = m.side_of(seed)?;
    let (dist_used, _) = m.omega().set_distance(m.delta(), opts.dist_density)?;
    let mut walk = Walk {
        xs: vec![seed.clone()],
        gaps: Vec::new(),
    };
    let settled = |walk: &Walk, n: usize| -> Result<bool> {
        Ok(distance(&walk.xs[n], &walk.xs[n + 2])? < opts.pair_tol
            && (walk.gaps[n] - dist_used).abs() < opts.gap_tol)
    };

    let mut outcome: Option<(usize, Point, Point, f64, f64)> = None;
    while walk.xs.len() <= opts.max_iter {
        walk.extend(m)?;
        let last = walk.xs.len() - 1;
        if last % 2 == 0 && last >= 4 {
            let e = last - 2;
            if settled(&walk, e - 2)? && settled(&walk, e)? {
                let (bo, bd, rb, rf) = best_pair(m, seed_side, &walk.xs[last], dist_used)?;
                if rb <= opts.gap_tol && rf <= opts.pair_tol {
                    outcome = Some((last, bo, bd, rb, rf));
                    break;
                }
            }
        }
    }

    let (iterations, converged, bpp_omega, bpp_delta, residual_bpp, residual_fp2) = match outcome {
        Some((last, bo, bd, rb, rf)) => (last, true, bo, bd, rb, rf),
        None => {
            let iterations = walk.xs.len() - 1;
            let last_even = iterations - (iterations % 2);
            let (bo, bd, rb, rf) = best_pair(m, seed_side, &walk.xs[last_even], dist_used)?;
            (iterations, false, bo, bd, rb, rf)
        }
    };

    // One look-ahead application so the gap at `iterations` is defined.
    walk.extend(m)?;

    let gap_sequence = walk.gaps[..=iterations].to_vec();
    let trace = if opts.record_trace {
        Some(
            (0..=iterations)
                .map(|n| TraceEntry {
                    n,
                    side: if n % 2 == 0 {
                        seed_side
                    } else {
                        seed_side.other()
                    },
                    point: walk.xs[n].clone(),
                    gap: walk.gaps[n],
                })
                .collect(),
        )
    } else {
        None
    };

    let envelope_ok = match opts.eta_for_bound {
        Some(eta) => Some(
            envelope_over_gaps(
                m,
                &walk.xs[0],
                &walk.xs[1],
                seed_side,
                &gap_sequence,
                dist_used,
                eta,
                ENVELOPE_SUP_DEPTH,
                opts.gap_tol,
            )?
            .holds,
        ),
        None => None,
    };

    Ok(SolveReport {
        seed: seed.clone(),
        seed_side,
        bpp_omega,
        bpp_delta,
        dist_used,
        gap_tol: opts.gap_tol,
        pair_tol: opts.pair_tol,
        gap_sequence,
        residual_bpp,
        residual_fp2,
        iterations,
        converged,
        envelope_ok,
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn envelope_over_gaps(
    m: &CyclicMap,
    x0: &Point,
    x1: &Point,
    seed_side: Side,
    gaps: &[f64],
    dist: f64,
    eta: f64,
    depth: usize,
    slack: f64,
) -> Result<EnvelopeCheck> {
    let (s, t) = match seed_side {
        Side::Omega => (x0, x1),
        Side::Delta => (x1, x0),
    };
    let s0 = orbital_sup(m, s, t, depth, DEFAULT_SUP_TOL)?.value;
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for (n, gap) in gaps.iter().enumerate() {
        let excess = (gap - dist) - eta.powi(n as i32) * (s0 - dist);
        max_excess = max_excess.max(excess);
        if excess > slack && first_violation.is_none() {
            first_violation = Some(n);
        }
    }
    Ok(EnvelopeCheck {
        holds: first_violation.is_none(),
        first_violation,
        max_excess,
    })
}

/// Re-check the decay envelope against a recorded trace: every gap must sit
/// under `eta^n (S0 - dist) + gap_tol`, where `S0` is the orbital sup of the
/// trace's opening pair at the given depth. Reports the first offending
/// index. Requires the report to carry a trace.
pub fn check_decay_envelope(
    report: &SolveReport,
    m: &CyclicMap,
    eta: f64,
    depth: usize,
) -> Result<EnvelopeCheck> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let trace = report.trace.as_ref().ok_or(Error::MissingTrace)?;
    if trace.len() < 2 {
        return Err(Error::InvalidInput(
            "trace too short to anchor the envelope".into(),
        ));
    }
    let gaps: Vec<f64> = trace.iter().map(|row| row.gap).collect();
    envelope_over_gaps(
        m,
        &trace[0].point,
        &trace[1].point,
        trace[0].side,
        &gaps,
        report.dist_used,
        eta,
        depth,
        report.gap_tol,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum MultiStartVerdict {
    /// Every start converged and all limits agree within `pair_tol` of the
    /// first one.
    Pass { limit: Point },
    /// Two converged starts disagree.
    Fail { first: Point, second: Point },
    /// Some start did not converge within its iteration budget.
    Indeterminate { seed: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiStartReport {
    pub verdict: MultiStartVerdict,
    pub reports: Vec<SolveReport>,
}

/// Run the solver from several omega-side seeds and compare the limits.
pub fn multi_start_check(
    m: &CyclicMap,
    seeds: &[Point],
    opts: &SolveOptions,
) -> Result<MultiStartReport> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSeeds {
            got: seeds.len(),
            need: 2,
        });
    }
    for seed in seeds {
        if !m.omega().contains(seed)? {
            return Err(Error::NotInRegion {
                point: seed.clone(),
                side: Side::Omega,
            });
        }
    }
    let mut reports = Vec::with_capacity(seeds.len());
    for seed in seeds {
        reports.push(iterate(m, seed, opts)?);
    }
    if let Some(stuck) = reports.iter().find(|r| !r.converged) {
        let verdict = MultiStartVerdict::Indeterminate {
            seed: stuck.seed.clone(),
        };
        return Ok(MultiStartReport { verdict, reports });
    }
    let limit = reports[0].bpp_omega.clone();
    for r in &reports[1..] {
        if distance(&limit, &r.bpp_omega)? > opts.pair_tol {
            let verdict = MultiStartVerdict::Fail {
                first: limit,
                second: r.bpp_omega.clone(),
            };
            return Ok(MultiStartReport { verdict, reports });
        }
    }
    Ok(MultiStartReport {
        verdict: MultiStartVerdict::Pass { limit },
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapRule;
    use crate::region::Region;
    use crate::space::Space;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(Space::euclidean(2).unwrap(), vec![x, y]).unwrap()
    }

    fn twin_map() -> CyclicMap {
        let omega = Region::segment(pt(-1.0, -0.5), pt(-1.0, 0.5)).unwrap();
        let delta = Region::segment(pt(1.0, -0.5), pt(1.0, 0.5)).unwrap();
        CyclicMap::new(
            omega,
            delta,
            MapRule::Affine {
                matrix: vec![vec![1.0, 0.0], vec![0.0, -0.5]],
                offset: vec![2.0, 0.0],
            },
            MapRule::Affine {
                matrix: vec![vec![1.0, 0.0], vec![0.0, -1.0 / 3.0]],
                offset: vec![-2.0, 0.0],
            },
        )
        .unwrap()
    }

    #[test]
    fn corner_seed_settles_in_twenty_eight_steps() {
        let m = twin_map();
        let report = iterate(&m, &pt(-1.0, -0.5), &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 28);
        assert_eq!(report.dist_used, 2.0);
        assert_eq!(report.seed_side, Side::Omega);
        assert_eq!(report.bpp_omega.coords()[0], -1.0);
        assert_eq!(report.bpp_omega.coords()[1], -6.3804674721914318e-12);
        assert_eq!(report.bpp_delta, m.apply(&report.bpp_omega).unwrap());
        assert_eq!(report.gap_sequence.len(), 29);
        assert_eq!(report.gap_sequence[0], 2.1360009363293826);
        assert_eq!(report.gap_sequence[1], 2.0275875100994063);
        assert!(report.residual_bpp <= 1e-9);
        assert!(report.residual_fp2 <= 1e-9);
        assert_eq!(report.envelope_ok, None);
        assert!(report.trace.is_none());
    }

    #[test]
    fn stationary_seed_settles_immediately() {
        let m = twin_map();
        let report = iterate(&m, &pt(-1.0, 0.0), &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 4);
        assert_eq!(report.bpp_omega, pt(-1.0, 0.0));
        assert_eq!(report.bpp_delta, pt(1.0, 0.0));
        assert_eq!(report.residual_bpp, 0.0);
        assert_eq!(report.residual_fp2, 0.0);
    }

    #[test]
    fn delta_side_seeds_report_an_omega_side_point() {
        let m = twin_map();
        let report = iterate(&m, &pt(1.0, -0.5), &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.seed_side, Side::Delta);
        assert_eq!(report.bpp_omega.coords()[0], -1.0);
        assert_eq!(report.bpp_delta.coords()[0], 1.0);
        assert!(report.bpp_omega.coords()[1].abs() <= 1e-9);
        assert!(report.residual_fp2 <= 1e-9);
    }

    #[test]
    fn traces_record_every_step() {
        let m = twin_map();
        let opts = SolveOptions {
            record_trace: true,
            ..SolveOptions::default()
        };
        let report = iterate(&m, &pt(-1.0, -0.5), &opts).unwrap();
        let trace = report.trace.as_ref().unwrap();
        assert_eq!(trace.len(), report.iterations + 1);
        assert_eq!(trace[0].n, 0);
        assert_eq!(trace[0].side, Side::Omega);
        assert_eq!(trace[0].point, pt(-1.0, -0.5));
        assert_eq!(trace[0].gap, 2.1360009363293826);
        assert_eq!(trace[1].side, Side::Delta);
        assert_eq!(trace[1].point, pt(1.0, 0.25));
        for (n, row) in trace.iter().enumerate() {
            assert_eq!(row.n, n);
            assert_eq!(row.gap, report.gap_sequence[n]);
        }
    }

    #[test]
    fn envelope_holds_at_the_map_rate() {
        let m = twin_map();
        let opts = SolveOptions {
            eta_for_bound: Some(0.95),
            ..SolveOptions::default()
        };
        let report = iterate(&m, &pt(-1.0, -0.5), &opts).unwrap();
        assert_eq!(report.envelope_ok, Some(true));
    }

    #[test]
    fn iteration_budget_is_respected() {
        let m = twin_map();
        let opts = SolveOptions {
            max_iter: 4,
            ..SolveOptions::default()
        };
        let report = iterate(&m, &pt(-1.0, -0.5), &opts).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 4);
        assert_eq!(report.gap_sequence.len(), 5);
        assert_eq!(report.bpp_omega.coords()[0], -1.0);
    }

    #[test]
    fn envelope_recheck_needs_a_trace_and_flags_too_fast_rates() {
        let m = twin_map();
        let bare = iterate(&m, &pt(-1.0, -0.5), &SolveOptions::default()).unwrap();
        assert_eq!(
            check_decay_envelope(&bare, &m, 0.95, 64).unwrap_err(),
            Error::MissingTrace
        );

        let opts = SolveOptions {
            record_trace: true,
            ..SolveOptions::default()
        };
        let report = iterate(&m, &pt(-1.0, -0.5), &opts).unwrap();
        assert!(report.converged);
        assert_eq!(report.gap_sequence.len(), 29);

        let ok = check_decay_envelope(&report, &m, 0.95, 64).unwrap();
        assert!(ok.holds);
        assert_eq!(ok.first_violation, None);
        assert!(ok.max_excess <= 0.0 + 1e-12);

        let too_fast = check_decay_envelope(&report, &m, 0.1, 64).unwrap();
        assert!(!too_fast.holds);
        assert_eq!(too_fast.first_violation, Some(1));

        assert!(matches!(
            check_decay_envelope(&report, &m, 1.0, 64),
            Err(Error::EtaOutOfRange(_))
        ));
    }

    #[test]
    fn options_are_validated() {
        let m = twin_map();
        let seed = pt(-1.0, 0.0);
        let bad_iter = SolveOptions {
            max_iter: 3,
            ..SolveOptions::default()
        };
        assert!(matches!(
            iterate(&m, &seed, &bad_iter),
            Err(Error::MaxIterTooSmall(3))
        ));
        let bad_tol = SolveOptions {
            gap_tol: 0.0,
            ..SolveOptions::default()
        };
        assert!(matches!(
            iterate(&m, &seed, &bad_tol),
            Err(Error::NonPositiveTolerance { .. })
        ));
        let bad_eta = SolveOptions {
            eta_for_bound: Some(1.0),
            ..SolveOptions::default()
        };
        assert!(matches!(
            iterate(&m, &seed, &bad_eta),
            Err(Error::EtaOutOfRange(_))
        ));
    }

    #[test]
    fn seeds_outside_both_regions_are_rejected() {
        let m = twin_map();
        assert!(matches!(
            iterate(&m, &pt(0.0, 0.0), &SolveOptions::default()),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let m = twin_map();
        let opts = SolveOptions {
            record_trace: true,
            ..SolveOptions::default()
        };
        let a = iterate(&m, &pt(-1.0, 0.3), &opts).unwrap();
        let b = iterate(&m, &pt(-1.0, 0.3), &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_start_agreement_on_the_twin_map() {
        let m = twin_map();
        let seeds: Vec<Point> = m.omega().sample(5, 0).unwrap();
        let out = multi_start_check(&m, &seeds, &SolveOptions::default()).unwrap();
        match &out.verdict {
            MultiStartVerdict::Pass { limit } => {
                assert_eq!(limit.coords()[0], -1.0);
                assert!(limit.coords()[1].abs() <= 1e-9);
            }
            other => panic!("expected pass, got {other:?}"),
        }
        assert_eq!(out.reports.len(), 5);
        for r in &out.reports {
            assert!(r.converged);
            assert!(r.residual_fp2 <= 1e-9);
        }
    }

    #[test]
    fn multi_start_preconditions_and_indeterminate() {
        let m = twin_map();
        assert!(matches!(
            multi_start_check(&m, &[pt(-1.0, 0.0)], &SolveOptions::default()),
            Err(Error::TooFewSeeds { got: 1, need: 2 })
        ));
        assert!(matches!(
            multi_start_check(
                &m,
                &[pt(-1.0, 0.0), pt(1.0, 0.0)],
                &SolveOptions::default()
            ),
            Err(Error::NotInRegion {
                side: Side::Omega,
                ..
            })
        ));
        let tight = SolveOptions {
            max_iter: 4,
            ..SolveOptions::default()
        };
        let out = multi_start_check(&m, &[pt(-1.0, -0.5), pt(-1.0, 0.0)], &tight).unwrap();
        assert_eq!(
            out.verdict,
            MultiStartVerdict::Indeterminate {
                seed: pt(-1.0, -0.5)
            }
        );
    }

    #[test]
    fn multi_start_flags_disagreeing_limits() {
        let omega = Region::finite(vec![pt(-1.0, -0.5), pt(-1.0, 0.5)]).unwrap();
        let delta = Region::finite(vec![pt(1.0, -0.5), pt(1.0, 0.5)]).unwrap();
        let m = CyclicMap::new(
            omega,
            delta,
            MapRule::Table(vec![
                (pt(-1.0, -0.5), pt(1.0, -0.5)),
                (pt(-1.0, 0.5), pt(1.0, 0.5)),
            ]),
            MapRule::Table(vec![
                (pt(1.0, -0.5), pt(-1.0, -0.5)),
                (pt(1.0, 0.5), pt(-1.0, 0.5)),
            ]),
        )
        .unwrap();
        let out = multi_start_check(
            &m,
            &[pt(-1.0, -0.5), pt(-1.0, 0.5)],
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(
            out.verdict,
            MultiStartVerdict::Fail {
                first: pt(-1.0, -0.5),
                second: pt(-1.0, 0.5),
            }
        );
    }
}
