// SPDX-License-Identifier: Apache-2.0

//! Box counting, dimension fits, Hausdorff distances and truncated-schedule
//! convergence.
//!
//! Boxes are axis-aligned cubes of side `2ε` on the grid anchored at the
//! origin, so `box_count` is a deterministic function of the point set.

mod boxcount;
mod cloud;
mod convergence;
mod hausdorff;
mod plan;

pub use boxcount::{
    box_content, box_count, dimension_fit, dyadic_scales, least_squares, BoxCountRecord,
    BoxCountTable,
};
pub use cloud::{fixtures, PointCloud};
pub use convergence::{boundary_cloud, julia_slice_convergence, DepthDistance};
pub use hausdorff::{directed_hausdorff, hausdorff_distance};
pub use plan::CoveringPlan;
