// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::builder::certificate::{
    certify_ball_map, certify_filtration_nesting, contraction_certificate, Certificate,
    CompactSampler, CompactSpec,
};
use crate::dimension::CoveringPlan;
use crate::error::BuildError;
use crate::filtration::Filtration;
use crate::map::AutoMap;
use crate::schedule::{IterationSchedule, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuilderPolicy {
    /// Sphere samples for ball nesting (at least 1000).
    pub samples: usize,
    pub filtration_samples: usize,
    pub seed: u64,
    /// Largest repeat count tried is `2^cap_log2`.
    pub cap_log2: u32,
    /// Compact-resolution grid: `[−box_radius, box_radius]²` at `resolution`.
    pub box_radius: f64,
    pub resolution: usize,
    pub budget: u64,
    pub attract_radius: f64,
    /// `ε̂_1` of the covering plans; stage `j` uses `δ_j` of its plan.
    pub eps_hat: f64,
    /// Fixed `δ` for every stage instead of the plan's `δ_j`.
    pub delta: Option<f64>,
    /// Contraction factor required by the default radii policy.
    pub contraction_factor: f64,
}

impl Default for BuilderPolicy {
    fn default() -> Self {
        Self {
            samples: 1024,
            filtration_samples: 4096,
            seed: 0,
            cap_log2: 20,
            box_radius: 2.0,
            resolution: 128,
            budget: 1000,
            attract_radius: 1e-3,
            eps_hat: 4.0,
            delta: None,
            contraction_factor: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuiltSchedule {
    #[serde(flatten)]
    pub schedule: IterationSchedule,
    pub filtration_radii: Vec<f64>,
    pub certificates: Vec<Certificate>,
    pub plans: Vec<CoveringPlan>,
}

impl BuiltSchedule {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }
}

/// Largest `2^{-k}`, `1 ≤ k ≤ 40`, on whose ball every map passes the
/// contraction certificate with factor below `policy.contraction_factor`.
pub fn default_radius(maps: &[AutoMap], policy: &BuilderPolicy) -> Result<f64, BuildError> {
    for k in 1..=40 {
        let r = 2f64.powi(-k);
        let mut ok = true;
        for m in maps {
            if !contraction_certificate(
                m,
                r,
                policy.contraction_factor,
                policy.samples,
                policy.seed,
            )?
            .passed
            {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(r);
        }
    }
    Err(BuildError::InvalidInput(format!(
        "no dyadic radius down to 2^-40 certifies contraction factor {} for every map",
        policy.contraction_factor
    )))
}

/// `R_j = max(R_{j−1}, sufficient radius of f_j)`, with `R_{m+1} = R_m`.
pub fn default_filtration_radii(maps: &[AutoMap]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(maps.len() + 1);
    for m in maps {
        let r = Filtration::for_map(m)
            .radius
            .max(out.last().copied().unwrap_or(3.0));
        out.push(r);
    }
    out.push(*out.last().expect("at least one map"));
    out
}

struct StageCertifier<'a> {
    stage: usize,
    map: &'a AutoMap,
    r: (f64, f64),
    big_r: (f64, f64),
    compact: Option<CompactSampler>,
    policy: &'a BuilderPolicy,
}

impl<'a> StageCertifier<'a> {
    /// Linear maps have no escaping orbits, so only ball nesting applies.
    fn new(
        stage: usize,
        prefix: &[Stage],
        map: &'a AutoMap,
        r: (f64, f64),
        big_r: (f64, f64),
        policy: &'a BuilderPolicy,
    ) -> Result<Self, BuildError> {
        let compact = if map.is_linear() {
            None
        } else {
            let delta = match policy.delta {
                Some(d) => d,
                None => CoveringPlan::for_stage(stage, policy.eps_hat)?.delta,
            };
            let spec = CompactSpec {
                delta,
                box_radius: policy.box_radius,
                resolution: policy.resolution,
                budget: policy.budget,
                attract_radius: policy.attract_radius,
            };
            Some(CompactSampler::new(prefix, map, &spec, r.1, big_r.1)?)
        };
        Ok(Self {
            stage,
            map,
            r,
            big_r,
            compact,
            policy,
        })
    }

    /// Certificates at `n`, stopping at the first failure.
    fn certify(&self, n: u64) -> Result<Vec<Certificate>, BuildError> {
        let p = self.policy;
        let mut out = vec![
            certify_ball_map(self.map, n, self.r.0, self.r.1, p.samples, p.seed)?
                .at_stage(self.stage),
        ];
        if let Some(compact) = &self.compact {
            if out[0].passed {
                out.push(
                    certify_filtration_nesting(
                        self.map,
                        n,
                        self.big_r.0,
                        self.big_r.1,
                        p.filtration_samples,
                        p.seed,
                    )?
                    .at_stage(self.stage),
                );
            }
            if out.iter().all(|c| c.passed) {
                out.push(compact.evaluate(n).at_stage(self.stage));
            }
        }
        Ok(out)
    }
}

fn validate(
    maps: &[AutoMap],
    radii: &[f64],
    filtration_radii: &[f64],
    policy: &BuilderPolicy,
) -> Result<(), BuildError> {
    let m = maps.len();
    if m == 0 {
        return Err(BuildError::InvalidInput(
            "at least one map is required".into(),
        ));
    }
    if radii.len() != m + 1 || filtration_radii.len() != m + 1 {
        return Err(BuildError::InvalidInput(format!(
            "{m} maps need {} radii and filtration radii, got {} and {}",
            m + 1,
            radii.len(),
            filtration_radii.len()
        )));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(BuildError::InvalidInput("radii must be positive".into()));
    }
    if filtration_radii
        .iter()
        .any(|r| !(r.is_finite() && *r >= 3.0))
        || filtration_radii.windows(2).any(|w| w[1] < w[0])
    {
        return Err(BuildError::InvalidInput(
            "filtration radii must be at least 3 and nondecreasing".into(),
        ));
    }
    if policy.cap_log2 > 40 {
        return Err(BuildError::InvalidInput(
            "cap_log2 must be at most 40".into(),
        ));
    }
    if policy.resolution < 2 || policy.budget == 0 {
        return Err(BuildError::InvalidInput(
            "resolution must be at least 2 and budget positive".into(),
        ));
    }
    Ok(())
}

/// For each stage, doubles `n_j` from 1 until ball nesting, filtration
/// nesting and compact resolution all pass, then fixes it and moves on.
/// `radii = None` selects the default dyadic radius for every stage;
/// `filtration_radii = None` selects [`default_filtration_radii`].
pub fn build_schedule(
    maps: &[AutoMap],
    radii: Option<&[f64]>,
    filtration_radii: Option<&[f64]>,
    policy: &BuilderPolicy,
) -> Result<BuiltSchedule, BuildError> {
    if maps.is_empty() {
        return Err(BuildError::InvalidInput(
            "at least one map is required".into(),
        ));
    }
    let mut certificates = Vec::new();
    let radii: Vec<f64> = match radii {
        Some(r) => r.to_vec(),
        None => {
            let r = default_radius(maps, policy)?;
            for (j, m) in maps.iter().enumerate() {
                certificates.push(
                    contraction_certificate(
                        m,
                        r,
                        policy.contraction_factor,
                        policy.samples,
                        policy.seed,
                    )?
                    .at_stage(j + 1),
                );
            }
            vec![r; maps.len() + 1]
        }
    };
    let big_r = filtration_radii
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| default_filtration_radii(maps));
    validate(maps, &radii, &big_r, policy)?;

    let mut stages: Vec<Stage> = Vec::with_capacity(maps.len());
    let mut plans = Vec::with_capacity(maps.len());
    for (j0, map) in maps.iter().enumerate() {
        let stage = j0 + 1;
        plans.push(CoveringPlan::for_stage(stage, policy.eps_hat)?);
        let cert = StageCertifier::new(
            stage,
            &stages,
            map,
            (radii[j0], radii[j0 + 1]),
            (big_r[j0], big_r[j0 + 1]),
            policy,
        )?;
        let mut log2 = 0u32;
        loop {
            let n = 1u64 << log2;
            let result = cert.certify(n)?;
            if let Some(failed) = result.iter().find(|c| !c.passed) {
                if log2 >= policy.cap_log2 {
                    return Err(BuildError::CapExceeded {
                        stage,
                        kind: failed.kind,
                        cap_log2: policy.cap_log2,
                        margin: failed.margin,
                    });
                }
                log2 += 1;
                continue;
            }
            certificates.extend(result);
            stages.push(Stage::new(map.clone(), n));
            break;
        }
    }
    let schedule = IterationSchedule::new(stages)?.with_radii(radii)?;
    Ok(BuiltSchedule {
        schedule,
        filtration_radii: big_r,
        certificates,
        plans,
    })
}

/// Re-evaluates every stage certificate of `schedule` at its own repeat
/// counts, with each prefix taken from `schedule` itself.
pub fn recertify(
    schedule: &IterationSchedule,
    filtration_radii: &[f64],
    policy: &BuilderPolicy,
) -> Result<Vec<Certificate>, BuildError> {
    let radii = schedule
        .radii()
        .ok_or_else(|| BuildError::InvalidInput("schedule carries no radii".into()))?;
    let maps: Vec<AutoMap> = schedule.stages().iter().map(|s| s.map.clone()).collect();
    let radii = &radii[..radii.len().min(maps.len() + 1)];
    validate(&maps, radii, filtration_radii, policy)?;
    let stages = schedule.stages();
    let mut out = Vec::new();
    for (j0, s) in stages.iter().enumerate() {
        let cert = StageCertifier::new(
            j0 + 1,
            &stages[..j0],
            &s.map,
            (radii[j0], radii[j0 + 1]),
            (filtration_radii[j0], filtration_radii[j0 + 1]),
            policy,
        )?;
        let mut c = cert.certify(s.repeat)?;
        // report every kind even past the first failure
        if let Some(compact) = cert.compact.as_ref() {
            if c.len() == 1 {
                c.push(
                    certify_filtration_nesting(
                        &s.map,
                        s.repeat,
                        cert.big_r.0,
                        cert.big_r.1,
                        policy.filtration_samples,
                        policy.seed,
                    )?
                    .at_stage(j0 + 1),
                );
            }
            if c.len() == 2 {
                c.push(compact.evaluate(s.repeat).at_stage(j0 + 1));
            }
        }
        out.extend(c);
    }
    Ok(out)
}
