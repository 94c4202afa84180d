// SPDX-License-Identifier: Apache-2.0

use crate::basin::slice::LabelGrid;
use crate::dynamics::OrbitStatus;
use crate::point::C2Point;

/// Cells `(i, j)` that are UNDECIDED or whose closed 4-neighbourhood holds
/// both an ATTRACTED and an ESCAPED verdict, in row-major order.
pub fn boundary_cells(grid: &LabelGrid) -> Vec<(usize, usize)> {
    let n = grid.resolution();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let s = grid.status(i, j);
            if s == OrbitStatus::Undecided {
                out.push((i, j));
                continue;
            }
            let mut seen_a = s == OrbitStatus::Attracted;
            let mut seen_e = s == OrbitStatus::Escaped;
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (ni, nj) in neighbours {
                if ni < n && nj < n {
                    match grid.status(ni, nj) {
                        OrbitStatus::Attracted => seen_a = true,
                        OrbitStatus::Escaped => seen_e = true,
                        OrbitStatus::Undecided => {}
                    }
                }
            }
            if seen_a && seen_e {
                out.push((i, j));
            }
        }
    }
    out
}

/// Boundary cell centers in slice coordinates.
pub fn boundary_slice_points(grid: &LabelGrid) -> Vec<[f64; 2]> {
    boundary_cells(grid)
        .into_iter()
        .map(|(i, j)| grid.spec.cell_center(i, j))
        .collect()
}

/// Boundary cell centers embedded in C².
pub fn extract_boundary(grid: &LabelGrid) -> Vec<C2Point> {
    boundary_slice_points(grid)
        .into_iter()
        .map(|xy| grid.spec.to_c2(xy))
        .collect()
}
