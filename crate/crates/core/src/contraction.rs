//! Contraction diagnostics for cyclic maps.
//!
//! Three nested bound families are checked over a sampled product grid. For
//! a pair `(s, t)` with `s` in omega and `t` in delta, each family supplies
//! a bound `B(s, t)` and the inequality under test is
//!
//! ```text
//! d(map s, map t) <= eta * B(s, t) + (1 - eta) * dist(omega, delta)
//! ```
//!
//! * cyclic:  `B = d(s, t)`
//! * suzuki-style: `B = max { d(s, t), d(s, map s), d(t, map t) }`
//! * orbital: `B = sup` of distances along the two orbits, restricted to
//!   index pairs of the right parity (see [`orbital_sup`])
//!
//! The bounds grow pointwise in that order, so the families verify from
//! cyclic up: a map passing the cyclic check passes the other two at the
//! same rate.
//!
//! A failed verdict records the first violating pair in scan order, which
//! makes witnesses stable and reproducible; a passing verdict records the
//! tightest pair instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{CyclicMap, Side};
use crate::space::{distance, Point};

/// Margin tolerance: the inequality is "violated" only beyond this slack,
/// and min-eta estimates are floored at it.
pub const MARGIN_TOL: f64 = 1e-9;

/// Default convergence tolerance for the orbital sup's depth doubling.
pub const DEFAULT_SUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionClass {
    Cyclic,
    Suzuki,
    Orbital,
}

/// Which parity class attains the orbital sup.
///
/// Orbit indices count from 0 at the seed. Same-orbit pairs enter with an
/// odd index difference (recorded as `(i, j)` with `i > j`); cross pairs
/// pair an omega-orbit index with a delta-orbit index of even difference,
/// including `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupClass {
    OmegaOdd,
    DeltaOdd,
    CrossEven,
}

/// A truncated orbital supremum with its convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitalSup {
    pub value: f64,
    pub attained_at: (usize, usize),
    pub class: SupClass,
    pub depth_used: usize,
    pub converged: bool,
}

/// Outcome of one contraction sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionVerdict {
    pub class: ContractionClass,
    pub eta: f64,
    pub holds: bool,
    pub worst_pair: (Point, Point),
    /// Bound-side minus map-side of the inequality at `worst_pair`;
    /// negative exactly when that pair violates it.
    pub worst_margin: f64,
    /// Smallest rate that would make every sampled pair satisfy its
    /// inequality, if one exists below 1.
    pub min_eta_estimate: Option<f64>,
}

fn sup_at_depth(
    m: &CyclicMap,
    s: &Point,
    t: &Point,
    depth: usize,
) -> Result<(f64, (usize, usize), SupClass)> {
    let s_orbit = m.orbit(s, depth)?;
    let t_orbit = m.orbit(t, depth)?;
    let se = &s_orbit.entries;
    let te = &t_orbit.entries;
    let mut best = f64::NEG_INFINITY;
    let mut arg = ((0usize, 0usize), SupClass::CrossEven);
    for i in 0..=depth {
        for j in 0..=depth {
            if (i + j) % 2 == 0 {
                let d = distance(&se[i], &te[j])?;
                if d > best {
                    best = d;
                    arg = ((i, j), SupClass::CrossEven);
                }
            } else if j < i {
                let d = distance(&se[i], &se[j])?;
                if d > best {
                    best = d;
                    arg = ((i, j), SupClass::OmegaOdd);
                }
                let d = distance(&te[i], &te[j])?;
                if d > best {
                    best = d;
                    arg = ((i, j), SupClass::DeltaOdd);
                }
            }
        }
    }
    Ok((best, arg.0, arg.1))
}

/// Truncated supremum of the orbit-pair distances that the orbital bound
/// quantifies over.
///
/// The exhaustive sup over indices `0..=depth` is compared against the sup
/// at twice the depth; if the doubling moves the value by less than
/// `sup_tol` the sup is reported converged at the requested depth.
/// Otherwise one more doubling is tried (four times the requested depth is
/// the cap), and `converged` reports whether the last comparison settled.
pub fn orbital_sup(
    m: &CyclicMap,
    s: &Point,
    t: &Point,
    depth: usize,
    sup_tol: f64,
) -> Result<OrbitalSup> {
    if depth < 2 {
        return Err(Error::DepthTooSmall { got: depth, min: 2 });
    }
    if !(sup_tol > 0.0) {
        return Err(Error::NonPositiveTolerance {
            name: "sup_tol",
            value: sup_tol,
        });
    }
    if !m.omega().contains(s)? {
        return Err(Error::NotInRegion {
            point: s.clone(),
            side: Side::Omega,
        });
    }
    if !m.delta().contains(t)? {
        return Err(Error::NotInRegion {
            point: t.clone(),
            side: Side::Delta,
        });
    }
    let (v0, at0, cls0) = sup_at_depth(m, s, t, depth)?;
    let (v1, at1, cls1) = sup_at_depth(m, s, t, 2 * depth)?;
    if (v1 - v0).abs() < sup_tol {
        return Ok(OrbitalSup {
            value: v0,
            attained_at: at0,
            class: cls0,
            depth_used: depth,
            converged: true,
        });
    }
    let (v2, at2, cls2) = sup_at_depth(m, s, t, 4 * depth)?;
    if (v2 - v1).abs() < sup_tol {
        Ok(OrbitalSup {
            value: v1,
            attained_at: at1,
            class: cls1,
            depth_used: 2 * depth,
            converged: true,
        })
    } else {
        Ok(OrbitalSup {
            value: v2,
            attained_at: at2,
            class: cls2,
            depth_used: 4 * depth,
            converged: false,
        })
    }
}

struct PairGrid {
    omega_samples: Vec<Point>,
    delta_samples: Vec<Point>,
    omega_images: Vec<Point>,
    delta_images: Vec<Point>,
    dist: f64,
}

fn pair_grid(m: &CyclicMap, density: usize) -> Result<PairGrid> {
    let (dist, _) = m.omega().set_distance(m.delta(), density)?;
    let omega_samples = m.omega().sample(density, 0)?;
    let delta_samples = m.delta().sample(density, 0)?;
    let omega_images = omega_samples
        .iter()
        .map(|p| m.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let delta_images = delta_samples
        .iter()
        .map(|p| m.apply(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairGrid {
        omega_samples,
        delta_samples,
        omega_images,
        delta_images,
        dist,
    })
}

fn sweep<B>(
    m: &CyclicMap,
    class: ContractionClass,
    eta: f64,
    density: usize,
    mut bound: B,
) -> Result<ContractionVerdict>
where
    B: FnMut(&PairGrid, usize, usize) -> Result<f64>,
{
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let grid = pair_grid(m, density)?;
    let dist = grid.dist;
    let mut first_violation: Option<((Point, Point), f64)> = None;
    let mut min_margin = f64::INFINITY;
    let mut min_margin_pair: Option<(Point, Point)> = None;
    let mut forced_none = false;
    let mut max_ratio: Option<f64> = None;
    for i in 0..grid.omega_samples.len() {
        for j in 0..grid.delta_samples.len() {
            let lhs = distance(&grid.omega_images[i], &grid.delta_images[j])?;
            let b = bound(&grid, i, j)?;
            let margin = eta * b + (1.0 - eta) * dist - lhs;
            if margin < min_margin {
                min_margin = margin;
                min_margin_pair = Some((
                    grid.omega_samples[i].clone(),
                    grid.delta_samples[j].clone(),
                ));
            }
            if margin < -MARGIN_TOL && first_violation.is_none() {
                first_violation = Some((
                    (
                        grid.omega_samples[i].clone(),
                        grid.delta_samples[j].clone(),
                    ),
                    margin,
                ));
            }
            if b <= dist + MARGIN_TOL {
                if lhs > dist + MARGIN_TOL {
                    forced_none = true;
                }
            } else {
                let ratio = (lhs - dist) / (b - dist);
                max_ratio = Some(max_ratio.map_or(ratio, |r: f64| r.max(ratio)));
            }
        }
    }
    let min_eta_estimate = if forced_none {
        None
    } else {
        match max_ratio {
            None => Some(MARGIN_TOL),
            Some(r) if r >= 1.0 => None,
            Some(r) => Some(r.max(MARGIN_TOL)),
        }
    };
    let (holds, worst_pair, worst_margin) = match first_violation {
        Some((pair, margin)) => (false, pair, margin),
        None => (
            true,
            min_margin_pair.expect("regions sample nonempty"),
            min_margin,
        ),
    };
    Ok(ContractionVerdict {
        class,
        eta,
        holds,
        worst_pair,
        worst_margin,
        min_eta_estimate,
    })
}

/// Check the plain cyclic-contraction inequality on the sampled grid.
pub fn verify_cyclic(m: &CyclicMap, eta: f64, density: usize) -> Result<ContractionVerdict> {
    sweep(m, ContractionClass::Cyclic, eta, density, |grid, i, j| {
        distance(&grid.omega_samples[i], &grid.delta_samples[j])
    })
}

/// Check the inequality with the three-term bound that also admits maps
/// whose displacement dominates the pair separation.
pub fn verify_suzuki(m: &CyclicMap, eta: f64, density: usize) -> Result<ContractionVerdict> {
    sweep(m, ContractionClass::Suzuki, eta, density, |grid, i, j| {
        let d_st = distance(&grid.omega_samples[i], &grid.delta_samples[j])?;
        let d_s = distance(&grid.omega_samples[i], &grid.omega_images[i])?;
        let d_t = distance(&grid.delta_samples[j], &grid.delta_images[j])?;
        Ok(d_st.max(d_s).max(d_t))
    })
}

/// Check the inequality with the orbital bound at the given truncation
/// depth.
pub fn verify_orbital(
    m: &CyclicMap,
    eta: f64,
    density: usize,
    depth: usize,
) -> Result<ContractionVerdict> {
    sweep(m, ContractionClass::Orbital, eta, density, |grid, i, j| {
        Ok(orbital_sup(
            m,
            &grid.omega_samples[i],
            &grid.delta_samples[j],
            depth,
            DEFAULT_SUP_TOL,
        )?
        .value)
    })
}

/// Smallest rate for which the chosen inequality holds on every sampled
/// pair: the max over pairs of `(lhs - dist) / (B - dist)`, floored at
/// [`MARGIN_TOL`]. `None` means no rate below 1 works, either because some
/// ratio reaches 1 or because a pair with `B` at the set distance still
/// moves apart. `depth` only matters for the orbital class.
pub fn estimate_min_eta(
    m: &CyclicMap,
    class: ContractionClass,
    density: usize,
    depth: usize,
) -> Result<Option<f64>> {
    let verdict = match class {
        ContractionClass::Cyclic => verify_cyclic(m, 0.5, density)?,
        ContractionClass::Suzuki => verify_suzuki(m, 0.5, density)?,
        ContractionClass::Orbital => verify_orbital(m, 0.5, density, depth)?,
    };
    Ok(verdict.min_eta_estimate)
}
