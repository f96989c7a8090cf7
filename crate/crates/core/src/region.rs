//! Regions of a p-normed space: finite point sets, segments, and
//! axis-aligned boxes, together with sampling and the distance between two
//! regions.
//!
//! `set_distance` is the workhorse: a deterministic product-grid search
//! followed, for segment and box pairs, by golden-section coordinate descent
//! to polish the minimizing pair. Evaluation order is canonicalized so the
//! result does not depend on argument order.

use serde::Serialize;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::space::{distance, geodesic_point, Point, Space};

const REFINE_ROUNDS: usize = 20;
const REFINE_STEP_STOP: f64 = 1e-12;

/// Default tolerance used to decide region membership.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape {
    FinitePointSet(Vec<Point>),
    Segment { start: Point, end: Point },
    Box { lower: Point, upper: Point },
}

/// A nonempty closed convex-or-finite subset of a [`Space`], carrying the
/// tolerance used for membership decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    shape: RegionShape,
    space: Space,
    membership_tol: f64,
}

/// Two points realizing (or approximating) the distance between two regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximalPair {
    pub a: Point,
    pub b: Point,
    pub separation: f64,
}

impl Region {
    pub fn finite(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyRegion)?;
        let space = first.space();
        for p in &points {
            if p.space() != space {
                return Err(Error::SpaceMismatch {
                    left: space,
                    right: p.space(),
                });
            }
        }
        Ok(Region {
            shape: RegionShape::FinitePointSet(points),
            space,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        })
    }

    pub fn segment(start: Point, end: Point) -> Result<Self> {
        if start.space() != end.space() {
            return Err(Error::SpaceMismatch {
                left: start.space(),
                right: end.space(),
            });
        }
        let space = start.space();
        Ok(Region {
            shape: RegionShape::Segment { start, end },
            space,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        })
    }

    pub fn box_region(lower: Point, upper: Point) -> Result<Self> {
        if lower.space() != upper.space() {
            return Err(Error::SpaceMismatch {
                left: lower.space(),
                right: upper.space(),
            });
        }
        if lower
            .coords()
            .iter()
            .zip(upper.coords())
            .any(|(lo, hi)| lo > hi)
        {
            return Err(Error::BadBounds);
        }
        let space = lower.space();
        Ok(Region {
            shape: RegionShape::Box { lower, upper },
            space,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        })
    }

    pub fn with_membership_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::NonPositiveTolerance {
                name: "membership_tol",
                value: tol,
            });
        }
        self.membership_tol = tol;
        Ok(self)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    pub fn shape(&self) -> &RegionShape {
        &self.shape
    }

    /// Distance from `x` to the region (zero inside it).
    pub fn distance_to(&self, x: &Point) -> Result<f64> {
        if x.space() != self.space {
            return Err(Error::SpaceMismatch {
                left: self.space,
                right: x.space(),
            });
        }
        match &self.shape {
            RegionShape::FinitePointSet(points) => {
                let mut best = f64::INFINITY;
                for p in points {
                    best = best.min(distance(p, x)?);
                }
                Ok(best)
            }
            RegionShape::Segment { start, end } => {
                if self.space.p() == 2.0 {
                    let sc = start.coords();
                    let ec = end.coords();
                    let xc = x.coords();
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for k in 0..sc.len() {
                        let dir = ec[k] - sc[k];
                        num += (xc[k] - sc[k]) * dir;
                        den += dir * dir;
                    }
                    let t = if den == 0.0 {
                        0.0
                    } else {
                        (num / den).clamp(0.0, 1.0)
                    };
                    distance(&geodesic_point(start, end, t)?, x)
                } else {
                    let eval = |t: f64| -> Result<f64> {
                        distance(&geodesic_point(start, end, t)?, x)
                    };
                    let t = golden_min(|t| eval(t).unwrap_or(f64::INFINITY), 0.0, 1.0);
                    eval(t)
                }
            }
            RegionShape::Box { lower, upper } => {
                let clamped: Vec<f64> = x
                    .coords()
                    .iter()
                    .zip(lower.coords().iter().zip(upper.coords()))
                    .map(|(c, (lo, hi))| c.clamp(*lo, *hi))
                    .collect();
                distance(&Point::new(self.space, clamped)?, x)
            }
        }
    }

    /// Membership within `membership_tol` under the space's metric.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        Ok(self.distance_to(x)? <= self.membership_tol)
    }

    /// Deterministic sample of the region.
    ///
    /// Segments yield `density` equispaced points including both endpoints;
    /// boxes yield the tensor grid with `density` points per axis (first
    /// coordinate slowest); finite point sets yield every member. The `seed`
    /// is accepted for signature stability but the samplers are grids, so it
    /// plays no role.
    pub fn sample(&self, density: usize, _seed: u64) -> Result<Vec<Point>> {
        match &self.shape {
            RegionShape::FinitePointSet(points) => Ok(points.clone()),
            RegionShape::Segment { start, end } => {
                if density < 2 {
                    return Err(Error::DensityTooSmall(density));
                }
                let steps = (density - 1) as f64;
                (0..density)
                    .map(|i| geodesic_point(start, end, i as f64 / steps))
                    .collect()
            }
            RegionShape::Box { lower, upper } => {
                if density < 2 {
                    return Err(Error::DensityTooSmall(density));
                }
                let dim = self.space.dim();
                let total = density.checked_pow(dim as u32).filter(|&n| n <= 10_000_000);
                let total = total.ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "box sample of density {density} in dimension {dim} is too large"
                    ))
                })?;
                let steps = (density - 1) as f64;
                let mut out = Vec::with_capacity(total);
                let mut index = vec![0usize; dim];
                loop {
                    let coords: Vec<f64> = (0..dim)
                        .map(|k| {
                            let t = index[k] as f64 / steps;
                            (1.0 - t) * lower.coords()[k] + t * upper.coords()[k]
                        })
                        .collect();
                    out.push(Point::new(self.space, coords)?);
                    let mut k = dim;
                    loop {
                        if k == 0 {
                            return Ok(out);
                        }
                        k -= 1;
                        index[k] += 1;
                        if index[k] < density {
                            break;
                        }
                        index[k] = 0;
                    }
                }
            }
        }
    }

    /// Distance between two regions with a witnessing pair: `pair.a` belongs
    /// to `self`, `pair.b` to `other`.
    ///
    /// A full product grid at the given density is scanned first; when both
    /// regions are segments or both are boxes, the best pair is polished by
    /// golden-section coordinate descent (the distance along any single
    /// parameter is convex). The computation runs in a canonical argument
    /// order, so swapping the arguments swaps the pair and nothing else.
    pub fn set_distance(&self, other: &Region, density: usize) -> Result<(f64, ProximalPair)> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space,
                right: other.space,
            });
        }
        let swapped = region_order(self, other) == Ordering::Greater;
        let (first, second) = if swapped { (other, self) } else { (self, other) };
        let (separation, fa, fb) = search_min_pair(first, second, density)?;
        let (a, b) = if swapped { (fb, fa) } else { (fa, fb) };
        Ok((separation, ProximalPair { a, b, separation }))
    }

    /// The sampled points of each region that come within `tol` of realizing
    /// the distance between the two regions.
    pub fn proximal_sets(
        &self,
        other: &Region,
        density: usize,
        tol: f64,
    ) -> Result<(Vec<Point>, Vec<Point>)> {
        if !(tol > 0.0) {
            return Err(Error::NonPositiveTolerance {
                name: "tol",
                value: tol,
            });
        }
        let (dist, _) = self.set_distance(other, density)?;
        let mine = self.sample(density, 0)?;
        let theirs = other.sample(density, 0)?;
        let near = |p: &Point, pool: &[Point]| -> Result<bool> {
            let mut best = f64::INFINITY;
            for q in pool {
                best = best.min(distance(p, q)?);
            }
            Ok(best <= dist + tol)
        };
        let mut omega0 = Vec::new();
        for p in &mine {
            if near(p, &theirs)? {
                omega0.push(p.clone());
            }
        }
        let mut delta0 = Vec::new();
        for q in &theirs {
            if near(q, &mine)? {
                delta0.push(q.clone());
            }
        }
        Ok((omega0, delta0))
    }
}

fn shape_rank(r: &Region) -> u8 {
    match r.shape {
        RegionShape::FinitePointSet(_) => 0,
        RegionShape::Segment { .. } => 1,
        RegionShape::Box { .. } => 2,
    }
}

fn defining_coords(r: &Region) -> Vec<f64> {
    match &r.shape {
        RegionShape::FinitePointSet(points) => {
            points.iter().flat_map(|p| p.coords().to_vec()).collect()
        }
        RegionShape::Segment { start, end } => {
            let mut v = start.coords().to_vec();
            v.extend_from_slice(end.coords());
            v
        }
        RegionShape::Box { lower, upper } => {
            let mut v = lower.coords().to_vec();
            v.extend_from_slice(upper.coords());
            v
        }
    }
}

fn region_order(a: &Region, b: &Region) -> Ordering {
    shape_rank(a).cmp(&shape_rank(b)).then_with(|| {
        let ca = defining_coords(a);
        let cb = defining_coords(b);
        ca.len().cmp(&cb.len()).then_with(|| {
            for (x, y) in ca.iter().zip(&cb) {
                let ord = x.total_cmp(y);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
    })
}

/// Golden-section minimizer for a convex function on `[lo, hi]`.
fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > REFINE_STEP_STOP {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn search_min_pair(first: &Region, second: &Region, density: usize) -> Result<(f64, Point, Point)> {
    let fs = first.sample(density, 0)?;
    let ss = second.sample(density, 0)?;
    let mut best = f64::INFINITY;
    let mut best_pair = (0usize, 0usize);
    for (i, p) in fs.iter().enumerate() {
        for (j, q) in ss.iter().enumerate() {
            let d = distance(p, q)?;
            if d < best {
                best = d;
                best_pair = (i, j);
            }
        }
    }
    let mut result = (best, fs[best_pair.0].clone(), ss[best_pair.1].clone());

    match (&first.shape, &second.shape) {
        (
            RegionShape::Segment {
                start: s1,
                end: e1,
            },
            RegionShape::Segment {
                start: s2,
                end: e2,
            },
        ) => {
            let steps = (density - 1) as f64;
            let mut t = best_pair.0 as f64 / steps;
            let mut u = best_pair.1 as f64 / steps;
            let eval = |t: f64, u: f64| -> f64 {
                let p = geodesic_point(s1, e1, t).expect("validated segment");
                let q = geodesic_point(s2, e2, u).expect("validated segment");
                distance(&p, &q).expect("same space")
            };
            for _ in 0..REFINE_ROUNDS {
                let (pt, pu) = (t, u);
                t = golden_min(|x| eval(x, u), 0.0, 1.0);
                u = golden_min(|x| eval(t, x), 0.0, 1.0);
                if (t - pt).abs() + (u - pu).abs() < REFINE_STEP_STOP {
                    break;
                }
            }
            let refined = eval(t, u);
            if refined < result.0 {
                result = (
                    refined,
                    geodesic_point(s1, e1, t)?,
                    geodesic_point(s2, e2, u)?,
                );
            }
        }
        (
            RegionShape::Box {
                lower: l1,
                upper: u1,
            },
            RegionShape::Box {
                lower: l2,
                upper: u2,
            },
        ) => {
            let dim = first.space.dim();
            let steps = (density - 1) as f64;
            let decode = |flat: usize| -> Vec<f64> {
                let mut params = vec![0.0; dim];
                let mut rest = flat;
                for k in (0..dim).rev() {
                    params[k] = (rest % density) as f64 / steps;
                    rest /= density;
                }
                params
            };
            let mut tp = decode(best_pair.0);
            let mut up = decode(best_pair.1);
            let materialize = |params: &[f64], lo: &Point, hi: &Point| -> Point {
                let coords: Vec<f64> = params
                    .iter()
                    .zip(lo.coords().iter().zip(hi.coords()))
                    .map(|(t, (a, b))| (1.0 - t) * a + t * b)
                    .collect();
                Point::new(first.space, coords).expect("validated box")
            };
            let eval = |tp: &[f64], up: &[f64]| -> f64 {
                distance(&materialize(tp, l1, u1), &materialize(up, l2, u2)).expect("same space")
            };
            for _ in 0..REFINE_ROUNDS {
                let mut moved = 0.0;
                for k in 0..dim {
                    let old = tp[k];
                    tp[k] = golden_min(
                        |x| {
                            let mut probe = tp.clone();
                            probe[k] = x;
                            eval(&probe, &up)
                        },
                        0.0,
                        1.0,
                    );
                    moved += (tp[k] - old).abs();
                }
                for k in 0..dim {
                    let old = up[k];
                    up[k] = golden_min(
                        |x| {
                            let mut probe = up.clone();
                            probe[k] = x;
                            eval(&tp, &probe)
                        },
                        0.0,
                        1.0,
                    );
                    moved += (up[k] - old).abs();
                }
                if moved < REFINE_STEP_STOP {
                    break;
                }
            }
            let refined = eval(&tp, &up);
            if refined < result.0 {
                result = (refined, materialize(&tp, l1, u1), materialize(&up, l2, u2));
            }
        }
        _ => {}
    }
    Ok(result)
}
