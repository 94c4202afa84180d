// SPDX-License-Identifier: Apache-2.0

//! Computable non-autonomous basins of attraction for sequences of Hénon-type
//! automorphisms of C².
//!
//! - [`map`], [`schedule`], [`dynamics`]: maps, iteration schedules, orbit
//!   classification, contraction bounds and the linearizing sequence.
//! - [`linearize`]: step statistics of the linearizing sequence.
//! - [`basin`]: grid slices, the two basin membership tests, boundary
//!   extraction, the slowing-sequence experiment and circle probes.
//! - [`dimension`]: box counting, dimension fits and Hausdorff distances.
//! - [`builder`]: sampled certificates and the repeat-count search.

pub mod basin;
pub mod builder;
pub mod dimension;
pub mod dynamics;
pub mod error;
pub mod filtration;
pub mod linearize;
pub mod map;
pub mod output;
pub mod point;
pub mod sampling;
pub mod schedule;

pub use basin::{
    circle_probe, extract_boundary, omega_member, omega_star_member, real_quadrant_experiment,
    sample_slice, DichotomyReport, LabelGrid, SliceKind, SliceSpec,
};
pub use builder::{build_schedule, BuilderPolicy, BuiltSchedule, Certificate, CertificateKind};
pub use dimension::{
    box_content, box_count, dimension_fit, hausdorff_distance, julia_slice_convergence,
    BoxCountTable, CoveringPlan, PointCloud,
};
pub use dynamics::{
    classify_orbit, contraction_bounds, linearization_image, Classifier, OrbitStatus, OrbitVerdict,
};
pub use error::{BasinError, BuildError, DimensionError, DynamicsError};
pub use filtration::Filtration;
pub use linearize::{linearization_report, LinearizationReport};
pub use map::{normalize_fixed_point, AutoMap, MapFamily, Mat2};
pub use point::C2Point;
pub use schedule::{IterationSchedule, Stage};
