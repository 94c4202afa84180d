// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basin::{boundary_cells, sample_slice, SliceSpec};
use crate::dynamics::contraction_bounds_seeded;
use crate::error::BuildError;
use crate::filtration::Filtration;
use crate::map::AutoMap;
use crate::point::C2Point;
use crate::sampling::{LowDiscrepancy, SphereSampler};
use crate::schedule::{IterationSchedule, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateKind {
    BallNesting,
    FiltrationNesting,
    CompactResolution,
    Contraction,
}

/// Outcome of a sampled check. `passed` implies `margin > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// 1-based stage the certificate belongs to, when built by a schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    /// Map applications checked.
    pub n: u64,
    pub passed: bool,
    pub margin: f64,
    pub samples: usize,
    pub seed: u64,
    /// Passed because the sample set was empty.
    #[serde(default)]
    pub vacuous: bool,
}

impl Certificate {
    /// Infinite margins (every sample overflowed) are clamped to `±f64::MAX`
    /// so they survive JSON.
    fn from_margin(kind: CertificateKind, n: u64, margin: f64, samples: usize, seed: u64) -> Self {
        let margin = margin.clamp(-f64::MAX, f64::MAX);
        Self {
            kind,
            stage: None,
            n,
            passed: margin > 0.0,
            margin,
            samples,
            seed,
            vacuous: false,
        }
    }

    pub fn at_stage(mut self, stage: usize) -> Self {
        self.stage = Some(stage);
        self
    }
}

fn iterate(map: &AutoMap, mut p: C2Point, n: u64) -> Option<C2Point> {
    for _ in 0..n {
        p = map.apply(&p).ok()?;
    }
    Some(p)
}

fn positive(name: &str, v: f64) -> Result<(), BuildError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(BuildError::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Checks `f^n(S(r_in)) ⊂ B(r_out)` on low-discrepancy samples of the sphere
/// `S(r_in)`; `margin = r_out − max ‖f^n(p)‖`.
pub fn certify_ball_map(
    map: &AutoMap,
    n: u64,
    r_in: f64,
    r_out: f64,
    samples: usize,
    seed: u64,
) -> Result<Certificate, BuildError> {
    positive("r_in", r_in)?;
    positive("r_out", r_out)?;
    if samples < 1000 {
        return Err(BuildError::InvalidInput(format!(
            "ball certificate needs at least 1000 samples, got {samples}"
        )));
    }
    let sampler = SphereSampler::new(seed);
    let worst = (0..samples)
        .into_par_iter()
        .map(|i| iterate(map, sampler.point(i as u64, r_in), n).map_or(f64::INFINITY, |q| q.norm()))
        .reduce(|| 0.0, f64::max);
    Ok(Certificate::from_margin(
        CertificateKind::BallNesting,
        n,
        r_out - worst,
        samples,
        seed,
    ))
}

/// Checks that `f^n` maps the shell `{R_in ≤ |z| ≤ 2R_out, |w| ≤ |z|}` of
/// `V⁺(R_in)` into `V⁺(R_out)`; `margin` is the smallest
/// `min(|z| − |w|, |z| − R_out)` over the images. Overflowing orbits count as
/// inside. Beyond the shell `|z²| ≫ |a w|`, so the shell is the binding part.
pub fn certify_filtration_nesting(
    map: &AutoMap,
    n: u64,
    big_r_in: f64,
    big_r_out: f64,
    samples: usize,
    seed: u64,
) -> Result<Certificate, BuildError> {
    if !(big_r_in >= 3.0 && big_r_out >= big_r_in && big_r_out.is_finite()) {
        return Err(BuildError::InvalidInput(format!(
            "filtration radii need R_out >= R_in >= 3, got R_in = {big_r_in}, R_out = {big_r_out}"
        )));
    }
    if samples == 0 {
        return Err(BuildError::InvalidInput("samples must be positive".into()));
    }
    let target = Filtration { radius: big_r_out };
    let seq = LowDiscrepancy::<4>::new(seed);
    let shift = map.shift();
    let margin = (0..samples)
        .into_par_iter()
        .map(|i| {
            let [u0, u1, u2, u3] = seq.point(i as u64);
            let rz = big_r_in + u0 * (2.0 * big_r_out - big_r_in);
            let z = Complex64::from_polar(rz, TAU * u1);
            let w = Complex64::from_polar(u2 * rz, TAU * u3);
            // V⁺ of a translated map lives in the translated coordinates
            let p = C2Point::from_complex(z, w) - shift;
            match iterate(map, p, n) {
                Some(q) => target.v_plus_slack(&(q + shift)),
                None => f64::INFINITY,
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(Certificate::from_margin(
        CertificateKind::FiltrationNesting,
        n,
        margin,
        samples,
        seed,
    ))
}

/// Sampled contraction bounds `a‖z‖ ≤ ‖f(z)‖ ≤ b‖z‖` on `B(radius)`;
/// `margin = min(max_factor − b, 1 − b, a − b²)`, so passing means the map is
/// certifiable there with factor below `max_factor`.
pub fn contraction_certificate(
    map: &AutoMap,
    radius: f64,
    max_factor: f64,
    samples: usize,
    seed: u64,
) -> Result<Certificate, BuildError> {
    let b = contraction_bounds_seeded(map, radius, samples, seed)?;
    let margin = (max_factor - b.upper)
        .min(1.0 - b.upper)
        .min(b.lower - b.upper * b.upper);
    Ok(Certificate::from_margin(
        CertificateKind::Contraction,
        1,
        margin,
        samples,
        seed,
    ))
}

/// Parameters of the compact-resolution check: the real-plane grid on
/// `[−box_radius, box_radius]²` and the classification used to locate the
/// truncated boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSpec {
    pub delta: f64,
    pub box_radius: f64,
    pub resolution: usize,
    pub budget: u64,
    pub attract_radius: f64,
}

/// The δ-interior sample set `K` of one stage with its prefix images
/// `F(j−1)(x)` precomputed, reusable across trial repeat counts.
#[derive(Clone, Debug)]
pub struct CompactSampler {
    map: AutoMap,
    /// `None` when the prefix orbit overflowed.
    starts: Vec<Option<C2Point>>,
    r_next: f64,
    big_r_next: f64,
}

impl CompactSampler {
    pub fn new(
        prefix: &[Stage],
        map: &AutoMap,
        spec: &CompactSpec,
        r_next: f64,
        big_r_next: f64,
    ) -> Result<Self, BuildError> {
        positive("delta", spec.delta)?;
        positive("box_radius", spec.box_radius)?;
        positive("r_next", r_next)?;
        positive("R_next", big_r_next)?;
        let mut stages = prefix.to_vec();
        stages.push(Stage::new(map.clone(), 1));
        let truncated = IterationSchedule::new(stages)?;
        let slice = SliceSpec::real_plane(
            [0.0, 0.0],
            [spec.box_radius, spec.box_radius],
            spec.resolution,
        );
        let filtration = Filtration::for_maps(truncated.stages().iter().map(|s| &s.map));
        let grid = sample_slice(
            &slice,
            &truncated,
            spec.budget,
            filtration,
            spec.attract_radius,
        )?;
        let boundary = boundary_cells(&grid);
        if boundary.is_empty() {
            return Err(BuildError::BoundaryUnavailable);
        }
        let res = spec.resolution;
        let mut is_boundary = vec![false; res * res];
        for &(i, j) in &boundary {
            is_boundary[j * res + i] = true;
        }
        let cell = slice.cell_size()[0];
        let reach = (spec.delta / cell).ceil().min(res as f64) as isize;
        let far = |i: usize, j: usize| {
            let c = slice.cell_center(i, j);
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    let (bi, bj) = (i as isize + di, j as isize + dj);
                    if bi < 0 || bj < 0 || bi >= res as isize || bj >= res as isize {
                        continue;
                    }
                    if is_boundary[bj as usize * res + bi as usize] {
                        let b = slice.cell_center(bi as usize, bj as usize);
                        if (c[0] - b[0]).hypot(c[1] - b[1]) < spec.delta {
                            return false;
                        }
                    }
                }
            }
            true
        };
        let starts = (0..res * res)
            .into_par_iter()
            .filter_map(|k| {
                let (i, j) = (k % res, k / res);
                far(i, j).then(|| {
                    let mut p = slice.to_c2(slice.cell_center(i, j));
                    for s in prefix {
                        p = iterate(&s.map, p, s.repeat)?;
                    }
                    Some(p)
                })
            })
            .collect();
        Ok(Self {
            map: map.clone(),
            starts,
            r_next,
            big_r_next,
        })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Every sample must, after exactly `n` applications of the map, lie in
    /// `B(r_next)` or `V⁺(R_next)`; the margin is the smallest
    /// `max(r_next − ‖x‖, V⁺ slack)`.
    pub fn evaluate(&self, n: u64) -> Certificate {
        if self.starts.is_empty() {
            return Certificate {
                kind: CertificateKind::CompactResolution,
                stage: None,
                n,
                passed: true,
                margin: f64::MAX,
                samples: 0,
                seed: 0,
                vacuous: true,
            };
        }
        let target = Filtration {
            radius: self.big_r_next,
        };
        let shift = self.map.shift();
        let margin = self
            .starts
            .par_iter()
            .map(|start| match start.and_then(|p| iterate(&self.map, p, n)) {
                Some(q) => (self.r_next - q.norm()).max(target.v_plus_slack(&(q + shift))),
                None => f64::INFINITY,
            })
            .reduce(|| f64::INFINITY, f64::min);
        Certificate::from_margin(
            CertificateKind::CompactResolution,
            n,
            margin,
            self.starts.len(),
            0,
        )
    }
}

/// Samples the grid points of `[−box_R, box_R]²` at distance at least
/// `delta` from the boundary of the truncated schedule `prefix, f, f, …` and
/// checks that `n_trial` applications of `f` after the prefix resolve each
/// of them into `B(r_next)` or `V⁺(R_next)`.
pub fn resolve_compact(
    prefix: &[Stage],
    map: &AutoMap,
    spec: &CompactSpec,
    n_trial: u64,
    r_next: f64,
    big_r_next: f64,
) -> Result<Certificate, BuildError> {
    Ok(CompactSampler::new(prefix, map, spec, r_next, big_r_next)?.evaluate(n_trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn henon(a: f64) -> AutoMap {
        AutoMap::henon(a, 0.0).unwrap()
    }

    #[test]
    fn ball_examples() {
        let c = certify_ball_map(&AutoMap::halving(), 1, 1.0, 0.6, 1024, 0).unwrap();
        assert!(c.passed);
        assert!((c.margin - 0.1).abs() < 1e-12);
        let c = certify_ball_map(&AutoMap::halving(), 1, 1.0, 0.4, 1024, 0).unwrap();
        assert!(!c.passed);
        assert!((c.margin + 0.1).abs() < 1e-12);
        assert!(
            certify_ball_map(&henon(0.5), 8, 0.1, 0.01, 1024, 0)
                .unwrap()
                .passed
        );
        assert!(certify_ball_map(&henon(0.5), 1, 0.1, 0.01, 999, 0).is_err());
    }

    #[test]
    fn ball_certificate_is_reproducible() {
        let a = certify_ball_map(&henon(0.4), 3, 0.2, 0.05, 2048, 11).unwrap();
        let b = certify_ball_map(&henon(0.4), 3, 0.2, 0.05, 2048, 11).unwrap();
        assert_eq!(a.margin.to_bits(), b.margin.to_bits());
    }

    #[test]
    fn filtration_examples() {
        assert!(
            certify_filtration_nesting(&henon(0.5), 1, 3.0, 3.0, 4096, 0)
                .unwrap()
                .passed
        );
        let c = certify_filtration_nesting(&henon(0.5), 1, 3.0, 100.0, 4096, 0).unwrap();
        assert!(!c.passed && c.margin < 0.0);
        assert!(
            certify_filtration_nesting(&henon(0.5), 4, 3.0, 100.0, 4096, 0)
                .unwrap()
                .passed
        );
        assert!(certify_filtration_nesting(&henon(0.5), 1, 2.0, 3.0, 4096, 0).is_err());
        assert!(certify_filtration_nesting(&henon(0.5), 1, 4.0, 3.0, 4096, 0).is_err());
    }

    #[test]
    fn contraction_certificate_factor() {
        assert!(
            !contraction_certificate(&AutoMap::halving(), 1.0, 0.5, 1024, 0)
                .unwrap()
                .passed
        );
        assert!(
            contraction_certificate(&AutoMap::halving(), 1.0, 0.6, 1024, 0)
                .unwrap()
                .passed
        );
        assert!(
            contraction_certificate(&henon(0.3), 0.25, 0.5, 1024, 0)
                .unwrap()
                .passed
        );
        assert!(
            !contraction_certificate(&henon(0.5), 0.25, 0.5, 1024, 0)
                .unwrap()
                .passed
        );
    }

    fn compact(delta: f64) -> CompactSpec {
        CompactSpec {
            delta,
            box_radius: 2.0,
            resolution: 64,
            budget: 500,
            attract_radius: 1e-3,
        }
    }

    #[test]
    fn compact_examples() {
        let f = henon(0.5);
        let c = resolve_compact(&[], &f, &compact(0.2), 200, 0.1, 3.0).unwrap();
        assert!(c.passed && !c.vacuous && c.samples > 0, "{c:?}");
        let c = resolve_compact(&[], &f, &compact(0.2), 1, 0.1, 3.0).unwrap();
        assert!(!c.passed);
        let c = resolve_compact(&[], &f, &compact(10.0), 1, 0.1, 3.0).unwrap();
        assert!(c.passed && c.vacuous && c.samples == 0);
    }

    #[test]
    fn compact_without_boundary() {
        // the whole window escapes at once
        let spec = CompactSpec {
            delta: 0.1,
            box_radius: 0.5,
            resolution: 16,
            budget: 50,
            attract_radius: 1e-3,
        };
        let far = henon(0.5).translated(C2Point::real(-20.0, 0.0));
        assert!(matches!(
            resolve_compact(&[], &far, &spec, 1, 0.1, 3.0),
            Err(BuildError::BoundaryUnavailable)
        ));
    }
}
