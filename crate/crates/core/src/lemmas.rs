//! Empirical checks of the two convergence statements behind the solver,
//! phrased over recorded sequences.
//!
//! The closeness form: when two sequences in the first region both close in
//! on the set distance against a common sequence in the second region, they
//! close in on each other. The Cauchy form: once the even-indexed terms sit
//! within `eps` of the set distance across the regions, the even terms of
//! the first sequence are `eps`-close among themselves.
//!
//! Both checks work on finite data, so a conclusion can only be certified
//! up to the recorded horizon; [`LemmaVerdict::NotWithinHorizon`] reports
//! exactly that.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::Side;
use crate::region::{ProximalPair, Region, RegionShape};
use crate::space::{distance, geodesic_point, Point};

const MIN_LEN: usize = 10;
const HYPOTHESIS_FLOOR: f64 = 1e-8;
const FIT_FLOOR: f64 = 1e-14;
const MIN_FIT_POINTS: usize = 3;
const R2_MIN: f64 = 0.9;

/// Three aligned sequences: `sigma` and `rho` on the omega side, `theta` on
/// the delta side.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTriple {
    sigma: Vec<Point>,
    rho: Vec<Point>,
    theta: Vec<Point>,
}

impl SequenceTriple {
    pub fn new(sigma: Vec<Point>, rho: Vec<Point>, theta: Vec<Point>) -> Result<Self> {
        let shortest = sigma.len().min(rho.len()).min(theta.len());
        if shortest < MIN_LEN {
            return Err(Error::SequenceTooShort {
                got: shortest,
                min: MIN_LEN,
            });
        }
        if sigma.len() != rho.len() || sigma.len() != theta.len() {
            return Err(Error::LengthMismatch(sigma.len(), rho.len(), theta.len()));
        }
        Ok(SequenceTriple { sigma, rho, theta })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sigma(&self) -> &[Point] {
        &self.sigma
    }

    pub fn rho(&self) -> &[Point] {
        &self.rho
    }

    pub fn theta(&self) -> &[Point] {
        &self.theta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonThreshold {
    pub epsilon: f64,
    /// First index from which the conclusion holds for this epsilon.
    pub from_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LemmaVerdict {
    /// Hypothesis and conclusion both verified on the recorded data.
    Pass {
        /// First even index from which the hypothesis holds (always 0 for
        /// the closeness form, whose hypothesis has no onset index).
        hypothesis_from: usize,
        thresholds: Vec<EpsilonThreshold>,
    },
    /// The data never satisfies the hypothesis, so the lemma says nothing
    /// about it.
    PreconditionFailed { reason: String },
    /// The hypothesis holds but the conclusion could not be certified
    /// before the sequences run out.
    NotWithinHorizon { epsilon: f64 },
}

fn farthest_anchor(region: &Region, base: &Point) -> Result<Option<Point>> {
    match region.shape() {
        RegionShape::FinitePointSet(_) => Ok(None),
        RegionShape::Segment { start, end } => {
            if distance(base, end)? > distance(base, start)? {
                Ok(Some(end.clone()))
            } else {
                Ok(Some(start.clone()))
            }
        }
        RegionShape::Box { lower, upper } => {
            let coords = base
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(&b, (&lo, &hi))| if (b - hi).abs() > (b - lo).abs() { hi } else { lo })
                .collect();
            Ok(Some(Point::new(region.space(), coords)?))
        }
    }
}

fn decaying_walk(
    base: &Point,
    anchor: &Option<Point>,
    amplitude: f64,
    decay: f64,
    length: usize,
) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(length);
    for r in 0..length {
        match anchor {
            None => out.push(base.clone()),
            Some(a) => {
                let lambda = (amplitude * decay.powi(r as i32)).min(1.0);
                out.push(geodesic_point(base, a, lambda)?);
            }
        }
    }
    Ok(out)
}

/// Build a seeded triple that walks into the given proximal pair: `sigma`
/// and `rho` start somewhere between `proximal.a` and the far end of the
/// omega region and slide toward `proximal.a` at the given decay rate,
/// `theta` does the same on the delta side. Finite point sets have no far
/// end, so there the sequences sit at the proximal point throughout.
pub fn generate_converging_triple(
    omega: &Region,
    delta: &Region,
    proximal: &ProximalPair,
    length: usize,
    decay: f64,
    seed: u64,
) -> Result<SequenceTriple> {
    if length < MIN_LEN {
        return Err(Error::SequenceTooShort {
            got: length,
            min: MIN_LEN,
        });
    }
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::DecayOutOfRange(decay));
    }
    if !omega.contains(&proximal.a)? {
        return Err(Error::NotInRegion {
            point: proximal.a.clone(),
            side: Side::Omega,
        });
    }
    if !delta.contains(&proximal.b)? {
        return Err(Error::NotInRegion {
            point: proximal.b.clone(),
            side: Side::Delta,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega_anchor = farthest_anchor(omega, &proximal.a)?;
    let delta_anchor = farthest_anchor(delta, &proximal.b)?;
    let amp_sigma = rng.gen_range(0.2..0.5);
    let amp_rho = rng.gen_range(0.2..0.5);
    let amp_theta = rng.gen_range(0.2..0.5);
    let sigma = decaying_walk(&proximal.a, &omega_anchor, amp_sigma, decay, length)?;
    let rho = decaying_walk(&proximal.a, &omega_anchor, amp_rho, decay, length)?;
    let theta = decaying_walk(&proximal.b, &delta_anchor, amp_theta, decay, length)?;
    SequenceTriple::new(sigma, rho, theta)
}

fn log_linear_r2(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if syy == 0.0 {
        return 1.0;
    }
    (sxy * sxy) / (sxx * syy)
}

fn homes_in(seq: &[Point], theta: &[Point], dist: f64) -> Result<bool> {
    let mut excesses = Vec::with_capacity(seq.len());
    for (s, t) in seq.iter().zip(theta) {
        excesses.push(distance(s, t)? - dist);
    }
    let last = *excesses.last().expect("sequences are nonempty");
    if last > HYPOTHESIS_FLOOR {
        return Ok(false);
    }
    let fit: Vec<(f64, f64)> = excesses
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > FIT_FLOOR)
        .map(|(r, &e)| (r as f64, e.ln()))
        .collect();
    if fit.len() < MIN_FIT_POINTS {
        return Ok(true);
    }
    Ok(log_linear_r2(&fit) >= R2_MIN)
}

fn check_dist(dist: f64) -> Result<()> {
    if !(dist.is_finite() && dist >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "set distance must be finite and nonnegative, got {dist}"
        )));
    }
    Ok(())
}

/// Closeness form. Hypothesis: `d(sigma_r, theta_r)` and `d(rho_r,
/// theta_r)` both decay toward `dist`, judged by the final excess sitting
/// under 1e-8 and a log-linear fit of quality at least 0.9 over the
/// excesses above 1e-14. Conclusion, per epsilon in the schedule: the first
/// index from which `d(sigma_r, rho_r)` stays under epsilon; an epsilon
/// whose threshold does not exist inside the record aborts with
/// [`LemmaVerdict::NotWithinHorizon`].
pub fn check_lemma_close(
    t: &SequenceTriple,
    dist: f64,
    eps_schedule: &[f64],
) -> Result<LemmaVerdict> {
    check_dist(dist)?;
    if eps_schedule.is_empty() {
        return Err(Error::InvalidInput("empty epsilon schedule".into()));
    }
    for &eps in eps_schedule {
        if !(eps > 0.0) {
            return Err(Error::NonPositiveTolerance {
                name: "epsilon",
                value: eps,
            });
        }
    }
    for (seq, label) in [(&t.sigma, "sigma"), (&t.rho, "rho")] {
        if !homes_in(seq, &t.theta, dist)? {
            return Ok(LemmaVerdict::PreconditionFailed {
                reason: format!("{label} does not home in on the set distance against theta"),
            });
        }
    }
    let mut pair_gaps = Vec::with_capacity(t.len());
    for (s, r) in t.sigma.iter().zip(&t.rho) {
        pair_gaps.push(distance(s, r)?);
    }
    let mut thresholds = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let from_index = match pair_gaps.iter().rposition(|&g| g > eps) {
            None => 0,
            Some(last_bad) if last_bad + 1 < pair_gaps.len() => last_bad + 1,
            Some(_) => return Ok(LemmaVerdict::NotWithinHorizon { epsilon: eps }),
        };
        thresholds.push(EpsilonThreshold {
            epsilon: eps,
            from_index,
        });
    }
    Ok(LemmaVerdict::Pass {
        hypothesis_from: 0,
        thresholds,
    })
}

/// Least even index `m0 <= evens[len-2]` such that `pred` holds for every
/// pair of even indices at or beyond it. Certification never rests on the
/// trivial final diagonal pair alone, so the last even index is not a
/// candidate.
fn even_tail_onset<F>(evens: &[usize], mut pred: F) -> Result<Option<usize>>
where
    F: FnMut(usize, usize) -> Result<bool>,
{
    if evens.len() < 2 {
        return Ok(None);
    }
    let mut onset = None;
    for idx in (0..evens.len() - 1).rev() {
        let m0 = evens[idx];
        let mut all_ok = true;
        'scan: for &m in &evens[idx..] {
            for &k in &evens[idx..] {
                if !pred(m, k)? {
                    all_ok = false;
                    break 'scan;
                }
            }
        }
        if all_ok {
            onset = Some(m0);
        } else {
            break;
        }
    }
    Ok(onset)
}

/// Cauchy form. Hypothesis: some even onset `m0` from which every
/// even-indexed cross pair satisfies `d(sigma_m, theta_k) <= dist + eps`.
/// Conclusion: some even onset from which every even-indexed pair inside
/// `sigma` satisfies `d(sigma_m, sigma_k) <= eps`. Either onset must leave
/// at least two even entries in the tail.
pub fn check_lemma_cauchy(t: &SequenceTriple, dist: f64, eps: f64) -> Result<LemmaVerdict> {
    check_dist(dist)?;
    if !(eps > 0.0) {
        return Err(Error::NonPositiveTolerance {
            name: "epsilon",
            value: eps,
        });
    }
    let evens: Vec<usize> = (0..t.len()).step_by(2).collect();
    let hypothesis_from = even_tail_onset(&evens, |m, k| {
        Ok(distance(&t.sigma[m], &t.theta[k])? <= dist + eps)
    })?;
    let Some(hypothesis_from) = hypothesis_from else {
        return Ok(LemmaVerdict::PreconditionFailed {
            reason: format!(
                "no even onset keeps sigma within {eps} of the set distance against theta"
            ),
        });
    };
    let conclusion_from =
        even_tail_onset(&evens, |m, k| Ok(distance(&t.sigma[m], &t.sigma[k])? <= eps))?;
    match conclusion_from {
        Some(from_index) => Ok(LemmaVerdict::Pass {
            hypothesis_from,
            thresholds: vec![EpsilonThreshold {
                epsilon: eps,
                from_index,
            }],
        }),
        None => Ok(LemmaVerdict::NotWithinHorizon { epsilon: eps }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(Space::euclidean(2).unwrap(), vec![x, y]).unwrap()
    }

    fn twin_regions() -> (Region, Region) {
        (
            Region::segment(pt(-1.0, -0.5), pt(-1.0, 0.5)).unwrap(),
            Region::segment(pt(1.0, -0.5), pt(1.0, 0.5)).unwrap(),
        )
    }

    fn twin_proximal() -> ProximalPair {
        let (omega, delta) = twin_regions();
        let (_, pair) = omega.set_distance(&delta, 101).unwrap();
        pair
    }

    #[test]
    fn generated_triples_live_in_their_regions_and_converge() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        assert_eq!(pair.a, pt(-1.0, -0.5));
        assert_eq!(pair.b, pt(1.0, -0.5));
        let t = generate_converging_triple(&omega, &delta, &pair, 40, 0.5, 7).unwrap();
        assert_eq!(t.len(), 40);
        assert_eq!(pair.separation, 2.0);
        for r in 0..t.len() {
            assert!(omega.contains(&t.sigma()[r]).unwrap());
            assert!(omega.contains(&t.rho()[r]).unwrap());
            assert!(delta.contains(&t.theta()[r]).unwrap());
        }
        assert!(distance(&t.sigma()[39], &pair.a).unwrap() <= 1e-9);
        assert!(distance(&t.theta()[39], &pair.b).unwrap() <= 1e-9);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        let a = generate_converging_triple(&omega, &delta, &pair, 20, 0.5, 3).unwrap();
        let b = generate_converging_triple(&omega, &delta, &pair, 20, 0.5, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_converging_triple(&omega, &delta, &pair, 20, 0.5, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generation_validates_its_inputs() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        assert!(matches!(
            generate_converging_triple(&omega, &delta, &pair, 9, 0.5, 0),
            Err(Error::SequenceTooShort { got: 9, min: 10 })
        ));
        assert!(matches!(
            generate_converging_triple(&omega, &delta, &pair, 20, 1.0, 0),
            Err(Error::DecayOutOfRange(_))
        ));
        let off = ProximalPair {
            a: pt(0.0, 0.0),
            b: pt(1.0, 0.0),
            separation: 1.0,
        };
        assert!(matches!(
            generate_converging_triple(&omega, &delta, &off, 20, 0.5, 0),
            Err(Error::NotInRegion {
                side: Side::Omega,
                ..
            })
        ));
    }

    #[test]
    fn triple_construction_checks_lengths() {
        let row = vec![pt(-1.0, 0.0); 9];
        assert!(matches!(
            SequenceTriple::new(row.clone(), row.clone(), row.clone()),
            Err(Error::SequenceTooShort { got: 9, min: 10 })
        ));
        let ten = vec![pt(-1.0, 0.0); 10];
        let eleven = vec![pt(-1.0, 0.0); 11];
        assert!(matches!(
            SequenceTriple::new(ten.clone(), eleven, ten.clone()),
            Err(Error::LengthMismatch(10, 11, 10))
        ));
    }

    #[test]
    fn closeness_passes_on_a_generated_triple() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        let t = generate_converging_triple(&omega, &delta, &pair, 40, 0.5, 11).unwrap();
        let verdict = check_lemma_close(&t, 2.0, &[0.1, 0.01, 0.001]).unwrap();
        match verdict {
            LemmaVerdict::Pass {
                hypothesis_from,
                thresholds,
            } => {
                assert_eq!(hypothesis_from, 0);
                assert_eq!(thresholds.len(), 3);
                for w in thresholds.windows(2) {
                    assert!(w[0].from_index <= w[1].from_index);
                }
                for th in &thresholds {
                    for r in th.from_index..t.len() {
                        assert!(distance(&t.sigma()[r], &t.rho()[r]).unwrap() <= th.epsilon);
                    }
                }
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn closeness_rejects_a_sequence_stuck_away_from_the_distance() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        let t = generate_converging_triple(&omega, &delta, &pair, 40, 0.5, 11).unwrap();
        let stuck = vec![pt(-1.0, 0.5); 40];
        let bad = SequenceTriple::new(t.sigma().to_vec(), stuck, t.theta().to_vec()).unwrap();
        match check_lemma_close(&bad, 2.0, &[0.1]).unwrap() {
            LemmaVerdict::PreconditionFailed { reason } => {
                assert!(reason.contains("rho"));
            }
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn closeness_reports_conclusions_beyond_the_horizon() {
        let n = 40;
        let sigma: Vec<Point> = (0..n)
            .map(|r| pt(-1.0, 1e-4 * 0.999f64.powi(r)))
            .collect();
        let rho: Vec<Point> = (0..n)
            .map(|r| pt(-1.0, -1e-4 * 0.999f64.powi(r)))
            .collect();
        let theta = vec![pt(1.0, 0.0); n as usize];
        let t = SequenceTriple::new(sigma, rho, theta).unwrap();
        match check_lemma_close(&t, 2.0, &[1e-3, 1e-5]).unwrap() {
            LemmaVerdict::NotWithinHorizon { epsilon } => assert_eq!(epsilon, 1e-5),
            other => panic!("expected horizon verdict, got {other:?}"),
        }
        match check_lemma_close(&t, 2.0, &[1e-3]).unwrap() {
            LemmaVerdict::Pass { thresholds, .. } => {
                assert_eq!(thresholds[0].from_index, 0);
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn closeness_validates_the_schedule() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        let t = generate_converging_triple(&omega, &delta, &pair, 20, 0.5, 0).unwrap();
        assert!(matches!(
            check_lemma_close(&t, 2.0, &[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            check_lemma_close(&t, 2.0, &[0.1, 0.0]),
            Err(Error::NonPositiveTolerance { .. })
        ));
        assert!(matches!(
            check_lemma_close(&t, f64::NAN, &[0.1]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn cauchy_passes_on_a_generated_triple() {
        let (omega, delta) = twin_regions();
        let pair = twin_proximal();
        let t = generate_converging_triple(&omega, &delta, &pair, 40, 0.5, 11).unwrap();
        match check_lemma_cauchy(&t, 2.0, 0.05).unwrap() {
            LemmaVerdict::Pass {
                hypothesis_from,
                thresholds,
            } => {
                assert_eq!(hypothesis_from % 2, 0);
                assert_eq!(thresholds.len(), 1);
                assert_eq!(thresholds[0].epsilon, 0.05);
                assert!(thresholds[0].from_index <= 4);
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn cauchy_reports_conclusions_beyond_the_horizon() {
        let n = 10usize;
        let sigma: Vec<Point> = (0..n)
            .map(|r| pt(-1.0, if (r / 2) % 2 == 0 { 0.1 } else { -0.1 }))
            .collect();
        let theta = vec![pt(1.0, 0.0); n];
        let t = SequenceTriple::new(sigma.clone(), sigma, theta).unwrap();
        match check_lemma_cauchy(&t, 2.0, 0.003).unwrap() {
            LemmaVerdict::NotWithinHorizon { epsilon } => assert_eq!(epsilon, 0.003),
            other => panic!("expected horizon verdict, got {other:?}"),
        }
    }

    #[test]
    fn cauchy_rejects_data_that_never_meets_the_hypothesis() {
        let n = 12usize;
        let sigma = vec![pt(-1.0, 0.5); n];
        let theta = vec![pt(1.0, -0.5); n];
        let t = SequenceTriple::new(sigma.clone(), sigma, theta).unwrap();
        match check_lemma_cauchy(&t, 2.0, 1e-3).unwrap() {
            LemmaVerdict::PreconditionFailed { .. } => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn finite_point_regions_yield_constant_sequences() {
        let omega = Region::finite(vec![pt(-1.0, 0.0), pt(-1.0, 0.4)]).unwrap();
        let delta = Region::finite(vec![pt(1.0, 0.0), pt(1.0, 0.4)]).unwrap();
        let (dist, pair) = omega.set_distance(&delta, 3).unwrap();
        assert_eq!(dist, 2.0);
        let t = generate_converging_triple(&omega, &delta, &pair, 15, 0.5, 9).unwrap();
        for r in 0..t.len() {
            assert_eq!(t.sigma()[r], pair.a);
            assert_eq!(t.theta()[r], pair.b);
        }
        match check_lemma_close(&t, dist, &[1e-6]).unwrap() {
            LemmaVerdict::Pass { thresholds, .. } => assert_eq!(thresholds[0].from_index, 0),
            other => panic!("expected pass, got {other:?}"),
        }
        match check_lemma_cauchy(&t, dist, 1e-6).unwrap() {
            LemmaVerdict::Pass {
                hypothesis_from, ..
            } => assert_eq!(hypothesis_from, 0),
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn box_regions_anchor_at_the_far_corner() {
        let omega = Region::box_region(pt(-1.0, -0.5), pt(-0.5, 0.5)).unwrap();
        let delta = Region::box_region(pt(0.5, -0.5), pt(1.0, 0.5)).unwrap();
        let (dist, pair) = omega.set_distance(&delta, 5).unwrap();
        assert!((dist - 1.0).abs() <= 1e-12);
        let t = generate_converging_triple(&omega, &delta, &pair, 30, 0.5, 2).unwrap();
        for r in 0..t.len() {
            assert!(omega.contains(&t.sigma()[r]).unwrap());
            assert!(delta.contains(&t.theta()[r]).unwrap());
        }
        match check_lemma_close(&t, dist, &[0.1, 1e-3]).unwrap() {
            LemmaVerdict::Pass { .. } => {}
            other => panic!("expected pass, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn seeded_triples_always_pass_both_lemmas(seed in any::<u64>()) {
            let (omega, delta) = twin_regions();
            let pair = twin_proximal();
            let t = generate_converging_triple(&omega, &delta, &pair, 30, 0.5, seed).unwrap();
            for r in 0..t.len() {
                prop_assert!(omega.contains(&t.sigma()[r]).unwrap());
                prop_assert!(delta.contains(&t.theta()[r]).unwrap());
            }
            for r in 1..t.len() {
                let closer = distance(&t.sigma()[r], &pair.a).unwrap();
                let before = distance(&t.sigma()[r - 1], &pair.a).unwrap();
                prop_assert!(closer <= before + 1e-12);
            }
            let close_ok = matches!(
                check_lemma_close(&t, 2.0, &[0.1, 0.01]).unwrap(),
                LemmaVerdict::Pass { .. }
            );
            prop_assert!(close_ok);
            let cauchy_ok = matches!(
                check_lemma_cauchy(&t, 2.0, 0.05).unwrap(),
                LemmaVerdict::Pass { .. }
            );
            prop_assert!(cauchy_ok);
        }
    }
}
