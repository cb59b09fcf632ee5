//! Relative capacity of small concentric geodesic balls and the scalar
//! curvature it encodes.
//!
//! The crate provides model metrics in normal coordinates ([`metric`]),
//! volumes and areas of geodesic balls ([`geometry`]), capacities by closed
//! form, quadrature and a finite element solver ([`capacity`]), the predicted
//! small-radius expansion ([`expansion`]) and curvature extraction from
//! computed deficits ([`fit`]).

pub mod capacity;
pub mod error;
pub mod expansion;
pub mod fit;
pub mod geometry;
pub mod metric;
pub mod quadrature;

pub use capacity::{
    euclidean_capacity, euclidean_relative_capacity, field_probe, harmonic_probe, symmetric_capacity,
    szego_upper_bound, variational_capacity, CapacityMethod, CapacityQuery, CapacityResult, HarmonicField,
    HarmonicProbeResult, Resolution, VariationalSolution,
};
pub use error::{Error, Result};
pub use expansion::{deficit_coefficient, predicted_capacity, unified_deficit, Branch, ExpansionPrediction};
pub use fit::{
    collect_deficits, conjecture_scan, fit_deficit_coefficient, nonnegativity_detector, DeficitSample, FitResult,
    SignCall,
};
pub use geometry::{ball_geometry, ball_volume, druet_margin, sphere_area, BallGeometry};
pub use metric::{CurvatureTensor, MetricModel, ModelFamily, Warp};
