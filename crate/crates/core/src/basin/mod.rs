// SPDX-License-Identifier: Apache-2.0

//! Slice sampling, basin membership and boundary extraction.

mod boundary;
mod membership;
mod probe;
mod quadrant;
mod slice;

pub use boundary::{boundary_cells, boundary_slice_points, extract_boundary};
pub use membership::{omega_member, omega_star_member};
pub use probe::{circle_probe, circle_probe_report, find_crossing_circle, ProbeReport};
pub use quadrant::{
    growth_applies, real_quadrant_experiment, two_step_l1, two_step_lower_bound, ASequence,
    DichotomyReport, GrowthTally, MixedPair, QuadrantConfig, QuadrantDynamics, QuadrantOutcome,
};
pub use slice::{
    configuration_digest, sample_slice, sample_slice_with, LabelGrid, SliceKind, SliceSpec,
};
