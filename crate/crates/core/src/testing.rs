//! Seeded factories for exercising the verifiers on families of maps
//! rather than a single fixture.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::map::{CyclicMap, MapRule};
use crate::region::Region;
use crate::space::{Point, Space};

/// A random pair of parallel segments with affine back-and-forth rules.
///
/// The segments share a direction vector of length in `[0.5, 2]` and sit
/// `[1, 3]` apart along the common normal. Each rule rescales the segment
/// parameter by a factor in `[-0.85, 0.85]` and shifts it so the image
/// stays inside the opposite segment, so the map is always cyclic while the
/// contraction classes it lands in vary with the draw. The same index
/// always produces the same map.
pub fn random_parallel_segment_map(index: u64) -> CyclicMap {
    let mut rng = ChaCha8Rng::seed_from_u64(index);
    let space = Space::euclidean(2).expect("plane construction is infallible");
    let px: f64 = rng.gen_range(-2.0..2.0);
    let py: f64 = rng.gen_range(-2.0..2.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let len: f64 = rng.gen_range(0.5..2.0);
    let sep: f64 = rng.gen_range(1.0..3.0);
    let v = [len * phi.cos(), len * phi.sin()];
    let normal = [-phi.sin(), phi.cos()];
    let p = [px, py];
    let q = [px + sep * normal[0], py + sep * normal[1]];

    let pt = |base: [f64; 2], t: f64| {
        Point::new(space, vec![base[0] + t * v[0], base[1] + t * v[1]])
            .expect("coordinate count matches the plane")
    };
    let omega = Region::segment(pt(p, 0.0), pt(p, 1.0)).expect("endpoints differ");
    let delta = Region::segment(pt(q, 0.0), pt(q, 1.0)).expect("endpoints differ");

    let mut draw_rule = |from: [f64; 2], to: [f64; 2]| {
        let alpha: f64 = rng.gen_range(-0.85..0.85);
        let beta: f64 = if alpha >= 0.0 {
            rng.gen_range(0.0..(1.0 - alpha))
        } else {
            rng.gen_range(-alpha..1.0)
        };
        let offset = vec![
            to[0] + beta * v[0] - alpha * from[0],
            to[1] + beta * v[1] - alpha * from[1],
        ];
        MapRule::Affine {
            matrix: vec![vec![alpha, 0.0], vec![0.0, alpha]],
            offset,
        }
    };
    let omega_rule = draw_rule(p, q);
    let delta_rule = draw_rule(q, p);
    CyclicMap::new(omega, delta, omega_rule, delta_rule)
        .expect("parameter ranges keep the rules well formed")
}
