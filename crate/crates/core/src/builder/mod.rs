// SPDX-License-Identifier: Apache-2.0

//! Sampled certificates for the "large enough" repeat counts and the
//! greedy doubling search that picks them.

mod build;
mod certificate;

pub use build::{
    build_schedule, default_filtration_radii, default_radius, recertify, BuilderPolicy,
    BuiltSchedule,
};
pub use certificate::{
    certify_ball_map, certify_filtration_nesting, contraction_certificate, resolve_compact,
    Certificate, CertificateKind, CompactSampler, CompactSpec,
};
