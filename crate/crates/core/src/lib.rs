//! Tools for locating best proximity points of cyclic maps between two
//! disjoint regions of a p-normed space.
//!
//! A cyclic map sends each of two regions into the other. When the regions
//! do not touch, the map has no fixed point; the natural substitute is a
//! point whose distance to its image equals the distance between the
//! regions. This crate builds the pieces needed to find and certify such
//! points numerically:
//!
//! - [`space`]: points, p-norm distances, geodesics, and a uniform
//!   convexity probe for the ambient space.
//! - [`region`]: finite sets, segments, and boxes, with sampling and
//!   set-distance search.
//! - [`map`]: cyclic maps given by affine or tabulated rules, orbits, and
//!   cyclicity/boundedness verdicts.
//! - [`contraction`]: sampled verification of three nested contraction
//!   inequalities and rate estimation.
//! - [`solver`]: the alternating iteration, its convergence report, and a
//!   geometric decay envelope check.
//! - [`lemmas`]: data-level checks of the convergence statements the
//!   solver leans on.
//! - [`testing`]: seeded map factories for exercising everything above on
//!   families of examples.

pub mod contraction;
pub mod error;
pub mod lemmas;
pub mod map;
pub mod region;
pub mod solver;
pub mod space;
pub mod testing;

pub use contraction::{
    estimate_min_eta, orbital_sup, verify_cyclic, verify_orbital, verify_suzuki, ContractionClass,
    ContractionVerdict, OrbitalSup, SupClass, DEFAULT_SUP_TOL, MARGIN_TOL,
};
pub use error::{Error, Result};
pub use lemmas::{
    check_lemma_cauchy, check_lemma_close, generate_converging_triple, EpsilonThreshold,
    LemmaVerdict, SequenceTriple,
};
pub use map::{
    BoundednessVerdict, CyclicMap, CyclicityVerdict, CyclicityWitness, MapRule, OrbitTable, Side,
};
pub use region::{ProximalPair, Region, RegionShape, DEFAULT_MEMBERSHIP_TOL};
pub use solver::{
    check_decay_envelope, iterate, multi_start_check, EnvelopeCheck, MultiStartReport,
    MultiStartVerdict, SolveOptions, SolveReport, TraceEntry,
};
pub use space::{
    distance, geodesic_point, hilbert_modulus, uniform_convexity_check, Point, Space,
};
pub use testing::random_parallel_segment_map;
