// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::builder::CertificateKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("orbit left the representable range")]
    EscapeOverflow,
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fixed point is not attracting (spectral radius {spectral_radius})")]
    RepellingFixedPoint { spectral_radius: f64 },
    #[error("linear part at the origin is singular at application {application}")]
    SingularLinearPart { application: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasinError {
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
    #[error("schedule carries no radii list")]
    MissingRadii,
    #[error("invalid experiment parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("ambient dimensions differ ({0} vs {1})")]
    DimMismatch(usize, usize),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid scale list: {0}")]
    InvalidScales(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid covering plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Basin(#[from] BasinError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("invalid builder input: {0}")]
    InvalidInput(String),
    #[error("truncated schedule has an empty boundary on the sampled slice")]
    BoundaryUnavailable,
    #[error("stage {stage}: {kind:?} certificate still failing at the repeat cap 2^{cap_log2} (margin {margin:e})")]
    CapExceeded {
        stage: usize,
        kind: CertificateKind,
        cap_log2: u32,
        margin: f64,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Basin(#[from] BasinError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}
