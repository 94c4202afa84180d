// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::basin::{extract_boundary, sample_slice, SliceSpec};
use crate::dimension::cloud::PointCloud;
use crate::dimension::hausdorff::hausdorff_distance;
use crate::error::{BasinError, DimensionError};
use crate::filtration::Filtration;
use crate::schedule::IterationSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthDistance {
    pub depth: usize,
    pub hausdorff: f64,
}

/// Boundary cloud (in C² coordinates) of a sampled slice.
pub fn boundary_cloud(
    schedule: &IterationSchedule,
    spec: &SliceSpec,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<PointCloud, DimensionError> {
    let grid = sample_slice(spec, schedule, budget, filtration, attract_radius)?;
    PointCloud::from_c2(&extract_boundary(&grid))
}

/// For each depth `j`, the Hausdorff distance between the slice boundary of
/// the truncated schedule `F_1, …, F_{j−1}, f_j, f_j, …` and that of the full
/// schedule.
pub fn julia_slice_convergence(
    schedule: &IterationSchedule,
    depths: &[usize],
    spec: &SliceSpec,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<Vec<DepthDistance>, DimensionError> {
    if depths.is_empty() || depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BasinError::InvalidParameters(
            "depths must be a nonempty increasing list".into(),
        )
        .into());
    }
    if depths[0] == 0 || *depths.last().expect("nonempty") > schedule.len() {
        return Err(BasinError::InvalidParameters(format!(
            "depths must lie in 1..={}",
            schedule.len()
        ))
        .into());
    }
    let full = boundary_cloud(schedule, spec, budget, filtration, attract_radius)?;
    depths
        .iter()
        .map(|&depth| {
            let truncated = schedule.truncated(depth).map_err(BasinError::from)?;
            let cloud = boundary_cloud(&truncated, spec, budget, filtration, attract_radius)?;
            Ok(DepthDistance {
                depth,
                hausdorff: hausdorff_distance(&cloud, &full)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::AutoMap;
    use crate::schedule::Stage;

    fn filt() -> Filtration {
        Filtration::new(3.0).unwrap()
    }

    fn spec() -> SliceSpec {
        SliceSpec::real_plane([0.0, 0.0], [2.0, 2.0], 48)
    }

    #[test]
    fn single_map_truncation_is_exact() {
        let s =
            IterationSchedule::new(vec![Stage::new(AutoMap::henon(0.5, 0.0).unwrap(), 4)]).unwrap();
        let d = julia_slice_convergence(&s, &[1], &spec(), 200, filt(), 1e-3).unwrap();
        assert_eq!(
            d,
            vec![DepthDistance {
                depth: 1,
                hausdorff: 0.0
            }]
        );
    }

    #[test]
    fn full_depth_is_zero() {
        let maps = [0.3, 0.2].map(|a| AutoMap::henon(a, 0.0).unwrap());
        let s = IterationSchedule::new(vec![
            Stage::new(maps[0].clone(), 3),
            Stage::new(maps[1].clone(), 2),
        ])
        .unwrap();
        let d = julia_slice_convergence(&s, &[1, 2], &spec(), 200, filt(), 1e-3).unwrap();
        assert_eq!(d[1].hausdorff, 0.0);
        assert!(d[0].hausdorff >= 0.0);
    }

    #[test]
    fn rejects_bad_depths() {
        let s = IterationSchedule::single(AutoMap::henon(0.5, 0.0).unwrap());
        assert!(julia_slice_convergence(&s, &[], &spec(), 10, filt(), 1e-3).is_err());
        assert!(julia_slice_convergence(&s, &[2], &spec(), 10, filt(), 1e-3).is_err());
        assert!(julia_slice_convergence(&s, &[0, 1], &spec(), 10, filt(), 1e-3).is_err());
    }
}
