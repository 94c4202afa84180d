// SPDX-License-Identifier: Apache-2.0

use crate::error::DimensionError;
use crate::point::C2Point;

/// Finite point set in R² or R⁴ (= C²), stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, DimensionError> {
        if dim != 2 && dim != 4 {
            return Err(DimensionError::InvalidCloud(format!(
                "ambient dimension must be 2 or 4, got {dim}"
            )));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(DimensionError::InvalidCloud(
                "coordinate count is not a multiple of the dimension".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DimensionError::InvalidCloud("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points2(points: &[[f64; 2]]) -> Result<Self, DimensionError> {
        Self::new(2, points.iter().flatten().copied().collect())
    }

    pub fn from_points4(points: &[[f64; 4]]) -> Result<Self, DimensionError> {
        Self::new(4, points.iter().flatten().copied().collect())
    }

    pub fn from_c2(points: &[C2Point]) -> Result<Self, DimensionError> {
        Self::new(4, points.iter().flat_map(|p| p.to_array()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn require_nonempty(&self) -> Result<(), DimensionError> {
        if self.is_empty() {
            Err(DimensionError::EmptyCloud)
        } else {
            Ok(())
        }
    }
}

/// Reference fractals used as fixtures.
pub mod fixtures {
    use super::PointCloud;

    /// Left endpoints of the `2^level` intervals of the middle-thirds
    /// construction.
    pub fn cantor_points(level: u32) -> Vec<f64> {
        let mut pts = vec![0.0f64];
        let mut scale = 1.0;
        for _ in 0..level {
            scale /= 3.0;
            let shift = 2.0 * scale;
            let more: Vec<f64> = pts.iter().map(|x| x + shift).collect();
            pts.extend(more);
        }
        pts.sort_by(f64::total_cmp);
        pts
    }

    pub fn cantor(level: u32) -> PointCloud {
        let pts: Vec<[f64; 2]> = cantor_points(level).into_iter().map(|x| [x, 0.0]).collect();
        PointCloud::from_points2(&pts).expect("finite")
    }

    pub fn cantor_product(level: u32) -> PointCloud {
        let c = cantor_points(level);
        let pts: Vec<[f64; 2]> = c
            .iter()
            .flat_map(|&x| c.iter().map(move |&y| [x, y]))
            .collect();
        PointCloud::from_points2(&pts).expect("finite")
    }

    /// `n` evenly spaced points of `[0, 1] × {0}`, endpoints included.
    pub fn segment(n: usize) -> PointCloud {
        let pts: Vec<[f64; 2]> = (0..n).map(|i| [i as f64 / (n - 1) as f64, 0.0]).collect();
        PointCloud::from_points2(&pts).expect("finite")
    }

    /// Cell midpoints of an `m × m` grid on the unit square.
    pub fn square(m: usize) -> PointCloud {
        let pts: Vec<[f64; 2]> = (0..m * m)
            .map(|k| {
                [
                    ((k % m) as f64 + 0.5) / m as f64,
                    ((k / m) as f64 + 0.5) / m as f64,
                ]
            })
            .collect();
        PointCloud::from_points2(&pts).expect("finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PointCloud::new(3, vec![0.0; 3]).is_err());
        assert!(PointCloud::new(2, vec![0.0; 3]).is_err());
        assert!(PointCloud::new(2, vec![0.0, f64::NAN]).is_err());
        let c = PointCloud::new(2, vec![]).unwrap();
        assert_eq!(c.require_nonempty(), Err(DimensionError::EmptyCloud));
    }

    #[test]
    fn c2_embedding() {
        let c = PointCloud::from_c2(&[C2Point::new(1.0, 2.0, 3.0, 4.0)]).unwrap();
        assert_eq!((c.dim(), c.len()), (4, 1));
        assert_eq!(c.point(0), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn cantor_structure() {
        let pts = fixtures::cantor_points(3);
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0], 0.0);
        assert!((pts[7] - 26.0 / 27.0).abs() < 1e-15);
    }
}
