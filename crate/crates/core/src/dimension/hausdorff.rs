// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use crate::dimension::cloud::PointCloud;
use crate::error::DimensionError;

#[inline]
fn dist_sqr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest-neighbour index over a cloud sorted by its first coordinate.
struct SortedCloud<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    keys: Vec<f64>,
}

impl<'a> SortedCloud<'a> {
    fn new(cloud: &'a PointCloud) -> Self {
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.sort_by(|&i, &j| cloud.point(i)[0].total_cmp(&cloud.point(j)[0]));
        let keys = order.iter().map(|&i| cloud.point(i)[0]).collect();
        Self { cloud, order, keys }
    }

    /// Squared distance from `p` to the nearest point.
    fn nearest_sqr(&self, p: &[f64]) -> f64 {
        let x = p[0];
        let start = self.keys.partition_point(|&k| k < x);
        let mut best = f64::INFINITY;
        let mut up = start;
        let mut down = start;
        loop {
            let mut moved = false;
            if up < self.keys.len() {
                let dx = self.keys[up] - x;
                if dx * dx < best {
                    best = best.min(dist_sqr(p, self.cloud.point(self.order[up])));
                    up += 1;
                    moved = true;
                } else {
                    up = self.keys.len();
                }
            }
            if down > 0 {
                let dx = x - self.keys[down - 1];
                if dx * dx < best {
                    best = best.min(dist_sqr(p, self.cloud.point(self.order[down - 1])));
                    down -= 1;
                    moved = true;
                } else {
                    down = 0;
                }
            }
            if !moved {
                return best;
            }
        }
    }
}

/// `sup_{a∈A} inf_{b∈B} ‖a − b‖`.
pub fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64, DimensionError> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    if a.dim() != b.dim() {
        return Err(DimensionError::DimMismatch(a.dim(), b.dim()));
    }
    let index = SortedCloud::new(b);
    let worst = (0..a.len())
        .into_par_iter()
        .map(|i| index.nearest_sqr(a.point(i)))
        .reduce(|| 0.0, f64::max);
    Ok(worst.sqrt())
}

/// Exact Hausdorff distance between two finite clouds.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64, DimensionError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(a: &PointCloud, b: &PointCloud) -> f64 {
        let dir = |a: &PointCloud, b: &PointCloud| {
            a.iter()
                .map(|p| {
                    b.iter()
                        .map(|q| dist_sqr(p, q))
                        .fold(f64::INFINITY, f64::min)
                        .sqrt()
                })
                .fold(0.0, f64::max)
        };
        dir(a, b).max(dir(b, a))
    }

    fn random_cloud(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> PointCloud {
        PointCloud::new(
            dim,
            (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn examples() {
        let a = PointCloud::from_points2(&[[0.0, 0.0]]).unwrap();
        let b = PointCloud::from_points2(&[[3.0, 4.0]]).unwrap();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = PointCloud::from_points2(&[[0.0, 0.0]]).unwrap();
        let e = PointCloud::new(2, vec![]).unwrap();
        let four = PointCloud::from_points4(&[[0.0; 4]]).unwrap();
        assert_eq!(hausdorff_distance(&a, &e), Err(DimensionError::EmptyCloud));
        assert_eq!(
            hausdorff_distance(&a, &four),
            Err(DimensionError::DimMismatch(2, 4))
        );
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2, 4] {
            for _ in 0..5 {
                let a = random_cloud(&mut rng, dim, 500);
                let b = random_cloud(&mut rng, dim, 500);
                let fast = hausdorff_distance(&a, &b).unwrap();
                assert!((fast - brute(&a, &b)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn duplicate_keys() {
        let a = PointCloud::from_points2(&[[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]]).unwrap();
        let b = PointCloud::from_points2(&[[0.0, 2.0], [0.0, -5.0]]).unwrap();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), brute(&a, &b));
    }
}
