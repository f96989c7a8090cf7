//! Cyclic maps between two regions and their orbits.
//!
//! A [`CyclicMap`] carries one rule per side and sends points of `omega`
//! into `delta` and vice versa. Orbits therefore alternate sides; the orbit
//! builder enforces that and reports the first step where it breaks down.

use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::region::Region;
use crate::space::{distance, Point};

const HULL_DENSITY: usize = 11;

/// Which of the two regions a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Omega,
    Delta,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Omega => Side::Delta,
            Side::Delta => Side::Omega,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Omega => "omega",
            Side::Delta => "delta",
        })
    }
}

/// One side's rule: an affine map `x -> matrix * x + offset`, or a lookup
/// table of exact point pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum MapRule {
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    Table(Vec<(Point, Point)>),
}

impl MapRule {
    fn check_shape(&self, dim: usize) -> Result<()> {
        match self {
            MapRule::Affine { matrix, offset } => {
                if matrix.len() != dim
                    || matrix.iter().any(|row| row.len() != dim)
                    || offset.len() != dim
                {
                    return Err(Error::BadRuleShape);
                }
                Ok(())
            }
            MapRule::Table(_) => Ok(()),
        }
    }

    fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            MapRule::Affine { matrix, offset } => {
                let coords: Vec<f64> = matrix
                    .iter()
                    .zip(offset)
                    .map(|(row, b)| {
                        let mut acc = 0.0;
                        for (m, c) in row.iter().zip(x.coords()) {
                            acc += m * c;
                        }
                        acc + b
                    })
                    .collect();
                Point::new(x.space(), coords)
            }
            MapRule::Table(pairs) => pairs
                .iter()
                .find(|(from, _)| from == x)
                .map(|(_, to)| to.clone())
                .ok_or_else(|| Error::TableMiss(x.clone())),
        }
    }
}

/// A map that is meant to exchange the two regions.
#[derive(Debug, Clone)]
pub struct CyclicMap {
    omega: Region,
    delta: Region,
    omega_rule: MapRule,
    delta_rule: MapRule,
}

/// The orbit of a seed under repeated application of the map.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitTable {
    pub seed: Point,
    pub entries: Vec<Point>,
    /// Side of the seed; entry `k` lies on this side for even `k` and on
    /// the other side for odd `k`.
    pub side_parity: Side,
    pub depth: usize,
}

impl OrbitTable {
    pub fn side_of_entry(&self, k: usize) -> Side {
        if k % 2 == 0 {
            self.side_parity
        } else {
            self.side_parity.other()
        }
    }
}

/// Outcome of sampling-based cyclicity screening. A failure is a finding,
/// not an error: the witness tells which sampled point maps off-side.
#[derive(Debug, Clone, Serialize)]
pub struct CyclicityVerdict {
    pub holds: bool,
    pub checked: usize,
    pub witness: Option<CyclicityWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicityWitness {
    pub from: Point,
    pub image: Point,
    pub expected: Side,
}

/// Outcome of the orbit-diameter screening.
#[derive(Debug, Clone, Serialize)]
pub struct BoundednessVerdict {
    pub holds: bool,
    pub bound: f64,
    pub max_diameter: f64,
    pub worst_seed: Option<Point>,
    pub seeds_checked: usize,
}

impl CyclicMap {
    pub fn new(
        omega: Region,
        delta: Region,
        omega_rule: MapRule,
        delta_rule: MapRule,
    ) -> Result<Self> {
        if omega.space() != delta.space() {
            return Err(Error::SpaceMismatch {
                left: omega.space(),
                right: delta.space(),
            });
        }
        let dim = omega.space().dim();
        omega_rule.check_shape(dim)?;
        delta_rule.check_shape(dim)?;
        Ok(CyclicMap {
            omega,
            delta,
            omega_rule,
            delta_rule,
        })
    }

    pub fn omega(&self) -> &Region {
        &self.omega
    }

    pub fn delta(&self) -> &Region {
        &self.delta
    }

    pub fn region(&self, side: Side) -> &Region {
        match side {
            Side::Omega => &self.omega,
            Side::Delta => &self.delta,
        }
    }

    /// Which region `x` belongs to. Membership in both is ambiguous and
    /// membership in neither puts `x` outside the map's domain; both are
    /// errors, since the rule to apply cannot be chosen.
    pub fn side_of(&self, x: &Point) -> Result<Side> {
        let in_omega = self.omega.contains(x)?;
        let in_delta = self.delta.contains(x)?;
        match (in_omega, in_delta) {
            (true, true) => Err(Error::AmbiguousSide(x.clone())),
            (true, false) => Ok(Side::Omega),
            (false, true) => Ok(Side::Delta),
            (false, false) => Err(Error::OutsideDomain(x.clone())),
        }
    }

    /// Apply the side-appropriate rule once.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self.side_of(x)? {
            Side::Omega => self.omega_rule.apply(x),
            Side::Delta => self.delta_rule.apply(x),
        }
    }

    /// Iterate the map `depth` times from `seed`, checking after every step
    /// that the new point lies in the region the alternation demands.
    pub fn orbit(&self, seed: &Point, depth: usize) -> Result<OrbitTable> {
        let side_parity = self.side_of(seed)?;
        let mut entries = Vec::with_capacity(depth + 1);
        entries.push(seed.clone());
        let mut side = side_parity;
        for k in 1..=depth {
            let rule = match side {
                Side::Omega => &self.omega_rule,
                Side::Delta => &self.delta_rule,
            };
            let next = rule.apply(entries.last().expect("nonempty"))?;
            side = side.other();
            if !self.region(side).contains(&next)? {
                return Err(Error::CyclicityViolation { index: k });
            }
            entries.push(next);
        }
        Ok(OrbitTable {
            seed: seed.clone(),
            entries,
            side_parity,
            depth,
        })
    }

    /// Check on a sample of each region that the map sends it into the other
    /// region.
    pub fn cyclicity_check(&self, density: usize) -> Result<CyclicityVerdict> {
        let mut checked = 0usize;
        for (region, rule, target, expected) in [
            (&self.omega, &self.omega_rule, &self.delta, Side::Delta),
            (&self.delta, &self.delta_rule, &self.omega, Side::Omega),
        ] {
            for p in region.sample(density, 0)? {
                let image = rule.apply(&p)?;
                checked += 1;
                if !target.contains(&image)? {
                    return Ok(CyclicityVerdict {
                        holds: false,
                        checked,
                        witness: Some(CyclicityWitness {
                            from: p,
                            image,
                            expected,
                        }),
                    });
                }
            }
        }
        Ok(CyclicityVerdict {
            holds: true,
            checked,
            witness: None,
        })
    }

    /// Check that orbits of the given seeds stay small: each orbit's
    /// diameter must be at most `bound_factor` times the diameter of the
    /// two regions' sampled hull. The verdict reports the worst seed.
    pub fn boundedness_check(
        &self,
        seeds: &[Point],
        depth: usize,
        bound_factor: f64,
    ) -> Result<BoundednessVerdict> {
        if seeds.is_empty() {
            return Err(Error::TooFewSeeds { got: 0, need: 1 });
        }
        if !(bound_factor > 0.0) {
            return Err(Error::NonPositiveTolerance {
                name: "bound_factor",
                value: bound_factor,
            });
        }
        let mut hull = self.omega.sample(HULL_DENSITY, 0)?;
        hull.extend(self.delta.sample(HULL_DENSITY, 0)?);
        let mut hull_diameter = 0.0f64;
        for i in 0..hull.len() {
            for j in (i + 1)..hull.len() {
                hull_diameter = hull_diameter.max(distance(&hull[i], &hull[j])?);
            }
        }
        let bound = bound_factor * hull_diameter;
        let mut max_diameter = 0.0f64;
        let mut worst_seed = None;
        for seed in seeds {
            let orbit = self.orbit(seed, depth)?;
            let mut diameter = 0.0f64;
            for i in 0..orbit.entries.len() {
                for j in (i + 1)..orbit.entries.len() {
                    diameter = diameter.max(distance(&orbit.entries[i], &orbit.entries[j])?);
                }
            }
            if diameter > max_diameter {
                max_diameter = diameter;
                worst_seed = Some(seed.clone());
            }
        }
        Ok(BoundednessVerdict {
            holds: max_diameter <= bound,
            bound,
            max_diameter,
            worst_seed,
            seeds_checked: seeds.len(),
        })
    }
}
