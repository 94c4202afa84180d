// SPDX-License-Identifier: Apache-2.0

//! Step sizes of the linearizing sequence `H_n = A(n)⁻¹ f(n)` on a point set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::linearization_sequence;
use crate::error::{BasinError, DynamicsError};
use crate::point::C2Point;
use crate::schedule::IterationSchedule;

/// Steps `d_k = ‖H_{k+1}(p) − H_k(p)‖` for every point, checked for
/// `from ≤ k < n − 1` against `d_{k+1} ≤ factor·d_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub from: u64,
    pub n: u64,
    pub factor: f64,
    pub steps_checked: usize,
    pub step_violations: usize,
    pub worst_step_ratio: f64,
    /// Largest per-point `exp(β)`, where `β` is the least-squares slope of
    /// `ln d_k` against `k` with separate intercepts for even and odd `k`.
    pub worst_fitted_rate: f64,
    pub min_pair_distance: f64,
    pub images: Vec<C2Point>,
}

struct PointSteps {
    checked: usize,
    violations: usize,
    worst: f64,
    rate: f64,
    image: C2Point,
}

fn parity_slope(ks: &[(u64, f64)]) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for parity in 0..2 {
        let group: Vec<(f64, f64)> = ks
            .iter()
            .filter(|(k, _)| k % 2 == parity)
            .map(|&(k, d)| (k as f64, d.ln()))
            .collect();
        if group.len() < 2 {
            continue;
        }
        let mx = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
        let my = group.iter().map(|g| g.1).sum::<f64>() / group.len() as f64;
        for (x, y) in group {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

fn point_steps(
    schedule: &IterationSchedule,
    p: &C2Point,
    from: u64,
    n: u64,
    factor: f64,
) -> Result<PointSteps, DynamicsError> {
    let h = linearization_sequence(schedule, p, n)?;
    let d: Vec<f64> = h.windows(2).map(|w| w[1].dist(&w[0])).collect();
    let (mut checked, mut violations, mut worst) = (0, 0, 0.0_f64);
    for k in from as usize..d.len().saturating_sub(1) {
        checked += 1;
        let ratio = if d[k] > 0.0 {
            d[k + 1] / d[k]
        } else if d[k + 1] > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(ratio);
        if ratio > factor {
            violations += 1;
        }
    }
    let tail: Vec<(u64, f64)> = (from as usize..d.len())
        .filter(|&k| d[k] > 0.0)
        .map(|k| (k as u64, d[k]))
        .collect();
    Ok(PointSteps {
        checked,
        violations,
        worst,
        rate: parity_slope(&tail).exp(),
        image: h[n as usize],
    })
}

pub fn linearization_report(
    schedule: &IterationSchedule,
    points: &[C2Point],
    from: u64,
    n: u64,
    factor: f64,
) -> Result<LinearizationReport, BasinError> {
    if from + 2 > n {
        return Err(BasinError::InvalidParameters(format!(
            "need from + 2 ≤ n, got from={from}, n={n}"
        )));
    }
    let steps: Vec<PointSteps> = points
        .par_iter()
        .map(|p| point_steps(schedule, p, from, n, factor))
        .collect::<Result<_, _>>()?;
    let images: Vec<C2Point> = steps.iter().map(|s| s.image).collect();
    let mut min_pair_distance = f64::INFINITY;
    for i in 0..images.len() {
        for j in 0..i {
            min_pair_distance = min_pair_distance.min(images[i].dist(&images[j]));
        }
    }
    Ok(LinearizationReport {
        from,
        n,
        factor,
        steps_checked: steps.iter().map(|s| s.checked).sum(),
        step_violations: steps.iter().map(|s| s.violations).sum(),
        worst_step_ratio: steps.iter().map(|s| s.worst).fold(0.0, f64::max),
        worst_fitted_rate: steps.iter().map(|s| s.rate).fold(0.0, f64::max),
        min_pair_distance,
        images,
    })
}
