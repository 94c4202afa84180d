// SPDX-License-Identifier: Apache-2.0

//! Orbit classification under an iteration schedule.
//!
//! An orbit is ESCAPED at its first entry into `V⁺` (or on overflow) and
//! ATTRACTED at the first state with `‖state‖ < attract_radius` where the
//! map about to be applied also has a certified contraction on that ball.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::filtration::Filtration;
use crate::map::{AutoMap, Mat2};
use crate::point::C2Point;
use crate::sampling::SphereSampler;
use crate::schedule::IterationSchedule;

/// Samples used by the attraction certificate inside [`Classifier`].
pub const CERTIFICATE_SAMPLES: usize = 1024;
const CONTRACTION_SHELLS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OrbitStatus {
    Attracted,
    Escaped,
    Undecided,
}

impl OrbitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitStatus::Attracted => "ATTRACTED",
            OrbitStatus::Escaped => "ESCAPED",
            OrbitStatus::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitVerdict {
    pub status: OrbitStatus,
    /// Total map applications at the decision; `None` when undecided.
    pub stage: Option<u64>,
    /// State at the decision (last state reached when undecided).
    pub witness: C2Point,
}

impl OrbitVerdict {
    pub fn attracted(stage: u64, witness: C2Point) -> Self {
        Self {
            status: OrbitStatus::Attracted,
            stage: Some(stage),
            witness,
        }
    }

    pub fn escaped(stage: u64, witness: C2Point) -> Self {
        Self {
            status: OrbitStatus::Escaped,
            stage: Some(stage),
            witness,
        }
    }

    pub fn undecided(witness: C2Point) -> Self {
        Self {
            status: OrbitStatus::Undecided,
            stage: None,
            witness,
        }
    }
}

/// Sampled bounds `a‖z‖ ≤ ‖f(z)‖ ≤ b‖z‖` on a ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionBounds {
    pub lower: f64,
    pub upper: f64,
    /// `b² < a` and `b < 1`.
    pub certifiable: bool,
}

/// Estimates the contraction bounds of `map` on the ball of the given radius
/// from low-discrepancy samples on the spheres of radius `radius·k/16`.
pub fn contraction_bounds(
    map: &AutoMap,
    radius: f64,
    samples: usize,
) -> Result<ContractionBounds, DynamicsError> {
    contraction_bounds_seeded(map, radius, samples, 0)
}

pub fn contraction_bounds_seeded(
    map: &AutoMap,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ContractionBounds, DynamicsError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(DynamicsError::InvalidMap(format!(
            "contraction radius must be positive, got {radius}"
        )));
    }
    let sampler = SphereSampler::new(seed);
    let per_shell = samples.div_ceil(CONTRACTION_SHELLS).max(1);
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for k in 1..=CONTRACTION_SHELLS {
        let r = radius * k as f64 / CONTRACTION_SHELLS as f64;
        for i in 0..per_shell {
            let p = sampler.point(((k - 1) * per_shell + i) as u64, r);
            let ratio = match map.apply(&p) {
                Ok(q) => q.norm() / p.norm(),
                Err(_) => f64::INFINITY,
            };
            lower = lower.min(ratio);
            upper = upper.max(ratio);
        }
    }
    let certifiable = upper * upper < lower && upper < 1.0;
    Ok(ContractionBounds {
        lower,
        upper,
        certifiable,
    })
}

/// Reusable classification context: the per-stage attraction certificates
/// are computed once at construction.
#[derive(Clone, Debug)]
pub struct Classifier<'a> {
    schedule: &'a IterationSchedule,
    filtration: Filtration,
    attract_radius: f64,
    budget: u64,
    certified: Vec<bool>,
    origin_fixed: bool,
}

impl<'a> Classifier<'a> {
    pub fn new(
        schedule: &'a IterationSchedule,
        budget: u64,
        filtration: Filtration,
        attract_radius: f64,
    ) -> Result<Self, DynamicsError> {
        if budget == 0 {
            return Err(DynamicsError::InvalidSchedule(
                "budget must be at least 1".into(),
            ));
        }
        if !(attract_radius.is_finite() && attract_radius > 0.0) {
            return Err(DynamicsError::InvalidSchedule(
                "attract radius must be positive".into(),
            ));
        }
        let stages = schedule.stages();
        let certified = stages
            .par_iter()
            .enumerate()
            .map(|(j, s)| {
                if j > 0 && stages[j - 1].map == s.map {
                    return Ok(None);
                }
                contraction_bounds(&s.map, attract_radius, CERTIFICATE_SAMPLES)
                    .map(|b| Some(b.certifiable))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut flags = Vec::with_capacity(certified.len());
        for c in certified {
            let v = c.unwrap_or_else(|| *flags.last().expect("first stage is always evaluated"));
            flags.push(v);
        }
        let origin_fixed = stages
            .iter()
            .all(|s| s.map.apply(&C2Point::ORIGIN) == Ok(C2Point::ORIGIN));
        Ok(Self {
            schedule,
            filtration,
            attract_radius,
            budget,
            certified: flags,
            origin_fixed,
        })
    }

    pub fn schedule(&self) -> &'a IterationSchedule {
        self.schedule
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn filtration(&self) -> Filtration {
        self.filtration
    }

    pub fn attract_radius(&self) -> f64 {
        self.attract_radius
    }

    /// Whether the attraction certificate holds for listed stage `index`.
    pub fn stage_certified(&self, index: usize) -> bool {
        self.certified[index]
    }

    pub fn classify(&self, p: &C2Point) -> OrbitVerdict {
        self.classify_with_budget(p, self.budget)
    }

    pub fn classify_with_budget(&self, p: &C2Point, budget: u64) -> OrbitVerdict {
        let r2 = self.attract_radius * self.attract_radius;
        let mut cursor = self.schedule.cursor();
        let mut state = *p;
        let mut n = 0u64;
        loop {
            if self.filtration.in_v_plus(&state) {
                return OrbitVerdict::escaped(n, state);
            }
            if state.norm_sqr() < r2
                && (self.certified[cursor.stage_index()]
                    || (self.origin_fixed && state == C2Point::ORIGIN))
            {
                return OrbitVerdict::attracted(n, state);
            }
            if n == budget {
                return OrbitVerdict::undecided(state);
            }
            match cursor.map().apply(&state) {
                Ok(next) => state = next,
                Err(_) => return OrbitVerdict::escaped(n + 1, state),
            }
            cursor.advance();
            n += 1;
        }
    }
}

/// Classifies the orbit of `p` under `schedule`.
pub fn classify_orbit(
    schedule: &IterationSchedule,
    p: &C2Point,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<OrbitVerdict, DynamicsError> {
    Ok(Classifier::new(schedule, budget, filtration, attract_radius)?.classify(p))
}

/// `H_n(p) = A(n)⁻¹ f(n)(p)` where `A(n)` is the product of the derivatives
/// at the origin of the first `n` maps applied.
pub fn linearization_image(
    schedule: &IterationSchedule,
    p: &C2Point,
    n: u64,
) -> Result<C2Point, DynamicsError> {
    Ok(*linearization_sequence(schedule, p, n)?
        .last()
        .expect("sequence holds H_0"))
}

/// `H_0(p), H_1(p), …, H_n(p)`.
pub fn linearization_sequence(
    schedule: &IterationSchedule,
    p: &C2Point,
    n: u64,
) -> Result<Vec<C2Point>, DynamicsError> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(*p);
    let mut cursor = schedule.cursor();
    let mut state = *p;
    let mut inverse_product = Mat2::identity();
    for t in 1..=n {
        let map = cursor.map();
        if map.linear_part_singular() {
            return Err(DynamicsError::SingularLinearPart { application: t });
        }
        let inv = map
            .jacobian_at_origin()
            .inverse()
            .ok_or(DynamicsError::SingularLinearPart { application: t })?;
        state = map.apply(&state)?;
        inverse_product = inverse_product.mul(&inv);
        let h = inverse_product.apply(&state);
        if !h.is_finite() {
            return Err(DynamicsError::EscapeOverflow);
        }
        out.push(h);
        cursor.advance();
    }
    Ok(out)
}
