// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Classifier, OrbitStatus};
use crate::error::BasinError;
use crate::filtration::Filtration;
use crate::point::C2Point;
use crate::schedule::IterationSchedule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub radius: f64,
    pub statuses: Vec<OrbitStatus>,
    pub attracted: usize,
    pub escaped: usize,
    pub undecided: usize,
    /// Cyclically adjacent samples with one ATTRACTED and one ESCAPED verdict.
    pub adjacent_disagreements: usize,
    pub crosses_boundary: bool,
}

/// Classifies `e^{iθ_k}·q`, `θ_k = 2πk/samples`, for
/// `q = radius·direction/‖direction‖`.
pub fn circle_probe_report(
    schedule: &IterationSchedule,
    radius: f64,
    direction: &C2Point,
    samples: usize,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<ProbeReport, BasinError> {
    let norm = direction.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(BasinError::InvalidParameters(
            "probe direction must be nonzero".into(),
        ));
    }
    if samples < 8 {
        return Err(BasinError::InvalidParameters(format!(
            "probe needs at least 8 samples, got {samples}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(BasinError::InvalidParameters(
            "probe radius must be positive".into(),
        ));
    }
    let classifier = Classifier::new(schedule, budget, filtration, attract_radius)?;
    let q = *direction * (radius / norm);
    let statuses: Vec<OrbitStatus> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let rot = Complex64::from_polar(1.0, TAU * k as f64 / samples as f64);
            classifier.classify(&q.scale_complex(rot)).status
        })
        .collect();
    let count = |s| statuses.iter().filter(|&&x| x == s).count();
    let adjacent_disagreements = (0..samples)
        .filter(|&k| {
            let (a, b) = (statuses[k], statuses[(k + 1) % samples]);
            matches!(
                (a, b),
                (OrbitStatus::Attracted, OrbitStatus::Escaped)
                    | (OrbitStatus::Escaped, OrbitStatus::Attracted)
            )
        })
        .count();
    let attracted = count(OrbitStatus::Attracted);
    let escaped = count(OrbitStatus::Escaped);
    Ok(ProbeReport {
        radius,
        attracted,
        escaped,
        undecided: samples - attracted - escaped,
        adjacent_disagreements,
        crosses_boundary: attracted > 0 && escaped > 0,
        statuses,
    })
}

/// Whether the circle `{e^{iθ}q}` meets both ATTRACTED and ESCAPED points.
pub fn circle_probe(
    schedule: &IterationSchedule,
    radius: f64,
    direction: &C2Point,
    samples: usize,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<bool, BasinError> {
    circle_probe_report(
        schedule,
        radius,
        direction,
        samples,
        budget,
        filtration,
        attract_radius,
    )
    .map(|r| r.crosses_boundary)
}

/// Scans `steps` radii evenly spaced on `[r_lo, r_hi]` for a circle
/// meeting both verdicts. Without one, bisects the radius between the last
/// all-ATTRACTED and the first all-ESCAPED circle of the scan. Returns the
/// report of the first crossing circle found.
#[allow(clippy::too_many_arguments)]
pub fn find_crossing_circle(
    schedule: &IterationSchedule,
    direction: &C2Point,
    r_lo: f64,
    r_hi: f64,
    steps: usize,
    samples: usize,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<Option<ProbeReport>, BasinError> {
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) || steps < 2 {
        return Err(BasinError::InvalidParameters(
            "need 0 < r_lo < r_hi and at least 2 scan steps".into(),
        ));
    }
    let probe = |r: f64| {
        circle_probe_report(
            schedule,
            r,
            direction,
            samples,
            budget,
            filtration,
            attract_radius,
        )
    };
    let mut inside: Option<f64> = None;
    let mut outside: Option<f64> = None;
    for k in 0..steps {
        let r = r_lo + (r_hi - r_lo) * k as f64 / (steps - 1) as f64;
        let rep = probe(r)?;
        if rep.crosses_boundary {
            return Ok(Some(rep));
        }
        if rep.attracted == samples {
            inside = Some(r);
        } else if rep.escaped == samples && inside.is_some() {
            outside = Some(r);
            break;
        }
    }
    let (Some(mut lo), Some(mut hi)) = (inside, outside) else {
        return Ok(None);
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let rep = probe(mid)?;
        if rep.crosses_boundary {
            return Ok(Some(rep));
        }
        if rep.attracted == samples {
            lo = mid;
        } else if rep.escaped == samples {
            hi = mid;
        } else {
            return Ok(None);
        }
    }
    Ok(None)
}
