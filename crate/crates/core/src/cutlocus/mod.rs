//! Cut-locus engine: distances and minimal geodesics by multistart
//! shooting, cut times by bisection of the minimality predicate, cutpoint
//! classification, cut-locus sampling with jump data and H^{n-1} weights,
//! superdifferential structure and semiconcavity probes.

pub mod distfield;
pub mod ops;
pub mod shooting;
pub mod types;

pub use distfield::DistanceField;
pub use ops::{
    approximate_tangent_pca, classify_cutpoint, cut_time, cut_time_with, distance, gap_to,
    hull_distance, minimal_geodesics, sample_cutlocus, sample_cutlocus_with,
    cut_quadrature_samples, second_difference_quotient, semiconcavity_probe,
    superdifferential_extremals,
    upper_semicontinuity_probe, CutConfig, CutScan, CUT_BRACKET, TOL_CLASS,
};
pub use shooting::{connect, dedup_hits, final_velocity, point_gap, ConnectOutcome, ShootingConfig};
pub use types::{CutClass, CutRecord, CutlocusSample, GeodesicHit, SuperdifferentialSet};
