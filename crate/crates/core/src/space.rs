//! Finite-dimensional p-normed spaces and their metric primitives.
//!
//! A [`Space`] is `R^dim` carrying the p-norm for a finite `p >= 2`. These
//! spaces are uniformly convex, which is what the convergence arguments
//! downstream lean on; [`uniform_convexity_check`] probes that property
//! numerically for a caller-supplied modulus.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// `R^dim` with the p-norm, `2 <= p < infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Space {
    dim: usize,
    p: f64,
}

impl Space {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim < 1 || !p.is_finite() || p < 2.0 {
            return Err(Error::BadSpace { dim, p });
        }
        Ok(Space { dim, p })
    }

    /// The Euclidean plane and its higher-dimensional siblings (`p = 2`).
    pub fn euclidean(dim: usize) -> Result<Self> {
        Space::new(dim, 2.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R^{} with the {}-norm", self.dim, self.p)
    }
}

/// A point of a specific [`Space`]. Coordinates are plain `f64`s; two points
/// compare equal only when they belong to the same space and agree bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    space: Space,
    coords: Vec<f64>,
}

impl Point {
    pub fn new(space: Space, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::CoordCount {
                got: coords.len(),
                want: space.dim(),
            });
        }
        Ok(Point { space, coords })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

fn same_space(a: &Point, b: &Point) -> Result<Space> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch {
            left: a.space,
            right: b.space,
        });
    }
    Ok(a.space)
}

/// p-norm distance between two points of the same space.
pub fn distance(a: &Point, b: &Point) -> Result<f64> {
    let space = same_space(a, b)?;
    let p = space.p();
    if p == 2.0 {
        let mut sum = 0.0;
        for (x, y) in a.coords.iter().zip(&b.coords) {
            let d = x - y;
            sum += d * d;
        }
        Ok(sum.sqrt())
    } else {
        let mut sum = 0.0;
        for (x, y) in a.coords.iter().zip(&b.coords) {
            sum += (x - y).abs().powf(p);
        }
        Ok(sum.powf(1.0 / p))
    }
}

/// The point `(1 - lambda) a + lambda b` on the straight segment from `a`
/// to `b`, which is the geodesic in these spaces. `lambda` must lie in
/// `[0, 1]`; the endpoints come back exactly.
pub fn geodesic_point(a: &Point, b: &Point, lambda: f64) -> Result<Point> {
    let space = same_space(a, b)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let coords = a
        .coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
        .collect();
    Point::new(space, coords)
}

/// Modulus of convexity of a Hilbert space: `1 - sqrt(1 - (eps/2)^2)`.
///
/// Exact for `p = 2`; for larger `p` it is not the true modulus, so pass a
/// modulus fitted to the space instead.
pub fn hilbert_modulus(eps: f64) -> f64 {
    let half = eps / 2.0;
    1.0 - (1.0 - half * half).max(0.0).sqrt()
}

/// Tests one instance of the uniform-convexity inequality: for points
/// `s1, s2` within `big_m` of the anchor `s3` and at least `m` apart, the
/// midpoint of `s1` and `s2` must satisfy
/// `d(mid, s3) <= (1 - modulus(m / big_m)) * big_m`.
///
/// Returns `Ok(false)` only when the hypothesis is satisfied and the
/// conclusion fails, which would falsify uniform convexity for the given
/// modulus. Inputs that do not satisfy the hypothesis are errors, so a
/// `false` is always meaningful.
pub fn uniform_convexity_check<F>(
    s1: &Point,
    s2: &Point,
    s3: &Point,
    big_m: f64,
    m: f64,
    modulus: F,
) -> Result<bool>
where
    F: Fn(f64) -> f64,
{
    same_space(s1, s2)?;
    same_space(s1, s3)?;
    if !big_m.is_finite() || !m.is_finite() || big_m <= 0.0 || m < 0.0 || m > 2.0 * big_m {
        return Err(Error::ConvexityPrecondition { m, big: big_m });
    }
    let slack = 1e-12 * (1.0 + big_m);
    let d13 = distance(s1, s3)?;
    if d13 > big_m + slack {
        return Err(Error::ConvexityHypothesis {
            which: "s1",
            got: d13,
            big: big_m,
        });
    }
    let d23 = distance(s2, s3)?;
    if d23 > big_m + slack {
        return Err(Error::ConvexityHypothesis {
            which: "s2",
            got: d23,
            big: big_m,
        });
    }
    let d12 = distance(s1, s2)?;
    if d12 < m - slack {
        return Err(Error::ConvexityPrecondition { m, big: big_m });
    }
    let mid = geodesic_point(s1, s2, 0.5)?;
    let lhs = distance(&mid, s3)?;
    let bound = if m == 0.0 {
        big_m
    } else {
        (1.0 - modulus(m / big_m)) * big_m
    };
    Ok(lhs <= bound + slack)
}
