// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::map::AutoMap;
use crate::point::C2Point;

/// The filtration `D, V⁺, V⁻` of radius `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filtration {
    pub radius: f64,
}

impl Filtration {
    pub fn new(radius: f64) -> Result<Self, DynamicsError> {
        if radius.is_finite() && radius > 0.0 {
            Ok(Self { radius })
        } else {
            Err(DynamicsError::InvalidMap(format!(
                "filtration radius must be positive, got {radius}"
            )))
        }
    }

    /// Sufficient radius for a single map: `max(3, 2(|a| + Σ|P coefficients|))`.
    pub fn for_map(map: &AutoMap) -> Self {
        let shift = map.shift().norm();
        Self {
            radius: 3f64.max(2.0 * map.coefficient_mass()) + shift,
        }
    }

    /// A radius that works for every map of the list.
    pub fn for_maps<'a>(maps: impl IntoIterator<Item = &'a AutoMap>) -> Self {
        let radius = maps
            .into_iter()
            .map(|m| Self::for_map(m).radius)
            .fold(3.0, f64::max);
        Self { radius }
    }

    /// `|z| ≥ |w|` and `|z| ≥ R`.
    #[inline]
    pub fn in_v_plus(&self, p: &C2Point) -> bool {
        let z2 = p.re1 * p.re1 + p.im1 * p.im1;
        let w2 = p.re2 * p.re2 + p.im2 * p.im2;
        let r2 = self.radius * self.radius;
        if z2.is_finite() && w2.is_finite() && r2.is_finite() {
            z2 >= w2 && z2 >= r2
        } else {
            let (z, w) = (p.z().norm(), p.w().norm());
            z >= w && z >= self.radius
        }
    }

    /// `|w| ≥ |z|` and `|w| ≥ R`.
    pub fn in_v_minus(&self, p: &C2Point) -> bool {
        let z = p.z().norm();
        let w = p.w().norm();
        w >= z && w >= self.radius
    }

    /// `|z|, |w| ≤ R`.
    pub fn in_d(&self, p: &C2Point) -> bool {
        p.z().norm() <= self.radius && p.w().norm() <= self.radius
    }

    /// Signed distance-like slack of `p` inside `V⁺`: positive iff both
    /// defining inequalities hold strictly.
    pub fn v_plus_slack(&self, p: &C2Point) -> f64 {
        let z = p.z().norm();
        let w = p.w().norm();
        (z - w).min(z - self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions() {
        let f = Filtration::new(3.0).unwrap();
        assert!(f.in_v_plus(&C2Point::real(10.0, 0.0)));
        assert!(f.in_v_plus(&C2Point::real(3.0, 3.0)));
        assert!(!f.in_v_plus(&C2Point::real(2.9, 0.0)));
        assert!(f.in_v_minus(&C2Point::real(0.0, -4.0)));
        assert!(f.in_d(&C2Point::real(1.0, -2.0)));
        assert!(!f.in_d(&C2Point::real(1.0, -3.5)));
    }

    #[test]
    fn default_radius() {
        assert_eq!(
            Filtration::for_map(&AutoMap::henon(0.5, 0.0).unwrap()).radius,
            3.0
        );
        assert_eq!(
            Filtration::for_map(&AutoMap::henon(0.1, 0.0).unwrap()).radius,
            3.0
        );
        let r = Filtration::for_map(&AutoMap::henon(0.9, 0.5).unwrap()).radius;
        assert!((r - 4.8).abs() < 1e-12);
        assert!(Filtration::new(0.0).is_err());
    }
}
