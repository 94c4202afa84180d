// SPDX-License-Identifier: Apache-2.0

//! The slowing-sequence experiment on the closed positive quadrant: maps
//! `f_j(x, y) = (x² + a_j y, a_j x)` with `a_j → 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basin::slice::{LabelGrid, SliceSpec};
use crate::dynamics::{contraction_bounds, OrbitStatus, OrbitVerdict, CERTIFICATE_SAMPLES};
use crate::error::BasinError;
use crate::map::AutoMap;
use crate::output::to_json;
use crate::point::C2Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ASequence {
    /// `a_j = 1 − 1/(j+2)`.
    Slowing,
    /// `a_1, …, a_m`, then `a_m` forever.
    Explicit { values: Vec<f64> },
}

impl ASequence {
    pub fn validate(&self) -> Result<(), BasinError> {
        if let ASequence::Explicit { values } = self {
            if values.is_empty() {
                return Err(BasinError::InvalidParameters("a-sequence is empty".into()));
            }
            if values.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(BasinError::InvalidParameters(
                    "a-sequence values must lie in (0, 1)".into(),
                ));
            }
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Err(BasinError::InvalidParameters(
                    "a-sequence must be nondecreasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// `a_j` for `j ≥ 1`.
    #[inline]
    pub fn a(&self, j: u64) -> f64 {
        match self {
            ASequence::Slowing => 1.0 - 1.0 / (j as f64 + 2.0),
            ASequence::Explicit { values } => values[(j.max(1) as usize - 1).min(values.len() - 1)],
        }
    }

    pub fn map(&self, j: u64) -> AutoMap {
        AutoMap::henon(self.a(j), 0.0).expect("a_j lies in (0, 1)")
    }
}

/// `‖f_{n+2} f_{n+1}(x, y)‖₁` on the closed quadrant.
pub fn two_step_l1(a1: f64, a2: f64, x: f64, y: f64) -> f64 {
    let (x1, y1) = (x * x + a1 * y, a1 * x);
    let (x2, y2) = (x1 * x1 + a2 * y1, a2 * x1);
    x2.abs() + y2.abs()
}

/// `a_{n+1}² y² + a_{n+2} x² + a_{n+2} a_{n+1}(x + y)`, a lower bound for
/// [`two_step_l1`] on the closed quadrant.
pub fn two_step_lower_bound(a1: f64, a2: f64, x: f64, y: f64) -> f64 {
    a1 * a1 * y * y + a2 * x * x + a2 * a1 * (x + y)
}

/// Whether the pair `a_{n+1}, a_{n+2}` is close enough to 1 for the
/// two-step growth bound at level `epsilon`.
pub fn growth_applies(a1: f64, a2: f64, epsilon: f64) -> bool {
    let m = a1.min(a2);
    m * m * (1.0 + epsilon * epsilon / 4.0) > 1.0 + epsilon * epsilon / 5.0
}

/// Per-index attraction certificates and the real-arithmetic orbit loop.
/// Attraction is only recognized while the map about to be applied has an
/// entry in the certificate table (indices `0..=base_budget`); beyond it
/// an orbit can only escape.
#[derive(Clone, Debug)]
pub struct QuadrantDynamics {
    sequence: ASequence,
    filtration_radius: f64,
    attract_radius: f64,
    certified: Vec<bool>,
}

impl QuadrantDynamics {
    pub fn new(
        sequence: ASequence,
        base_budget: u64,
        filtration_radius: f64,
        attract_radius: f64,
    ) -> Result<Self, BasinError> {
        sequence.validate()?;
        if !(attract_radius.is_finite() && attract_radius > 0.0) {
            return Err(BasinError::InvalidParameters(
                "attract radius must be positive".into(),
            ));
        }
        if !(filtration_radius.is_finite() && filtration_radius > 0.0) {
            return Err(BasinError::InvalidParameters(
                "filtration radius must be positive".into(),
            ));
        }
        let len = base_budget as usize + 1;
        let certified = (0..len)
            .into_par_iter()
            .map(|n| {
                contraction_bounds(
                    &sequence.map(n as u64 + 1),
                    attract_radius,
                    CERTIFICATE_SAMPLES,
                )
                .map(|b| b.certifiable)
            })
            .collect::<Result<Vec<bool>, _>>()?;
        Ok(Self {
            sequence,
            filtration_radius,
            attract_radius,
            certified,
        })
    }

    pub fn sequence(&self) -> &ASequence {
        &self.sequence
    }

    /// Whether `f_{n+1}` is certified on the attraction ball.
    pub fn certified(&self, n: u64) -> bool {
        self.certified.get(n as usize).copied().unwrap_or(false)
    }

    #[inline]
    fn in_v_plus(&self, x: f64, y: f64) -> bool {
        let (z2, w2, r2) = (
            x * x,
            y * y,
            self.filtration_radius * self.filtration_radius,
        );
        if z2.is_finite() && w2.is_finite() {
            z2 >= w2 && z2 >= r2
        } else {
            x.abs() >= y.abs() && x.abs() >= self.filtration_radius
        }
    }

    pub fn classify(&self, x: f64, y: f64, budget: u64) -> OrbitVerdict {
        let r2 = self.attract_radius * self.attract_radius;
        let (mut x, mut y) = (x, y);
        let mut n = 0u64;
        loop {
            if self.in_v_plus(x, y) {
                return OrbitVerdict::escaped(n, C2Point::real(x, y));
            }
            if x * x + y * y < r2 && self.certified(n) {
                return OrbitVerdict::attracted(n, C2Point::real(x, y));
            }
            if n == budget {
                return OrbitVerdict::undecided(C2Point::real(x, y));
            }
            let a = self.sequence.a(n + 1);
            let (nx, ny) = (x * x + a * y, a * x);
            if !(nx.is_finite() && ny.is_finite()) {
                return OrbitVerdict::escaped(n + 1, C2Point::real(x, y));
            }
            (x, y) = (nx, ny);
            n += 1;
        }
    }

    /// First escape step within `horizon` applications, ignoring attraction.
    pub fn escape_time(&self, x: f64, y: f64, horizon: u64) -> Option<u64> {
        let (mut x, mut y) = (x, y);
        for n in 0..=horizon {
            if self.in_v_plus(x, y) {
                return Some(n);
            }
            let a = self.sequence.a(n + 1);
            (x, y) = (x * x + a * y, a * x);
            if !(x.is_finite() && y.is_finite()) {
                return Some(n + 1);
            }
        }
        None
    }

    /// Runs the orbit for `n_max + 1` applications past index 0 and checks
    /// the two-step growth bound at every `n ≤ n_max` where it applies.
    pub fn growth_check(&self, x: f64, y: f64, n_max: u64, epsilon: f64) -> GrowthTally {
        let mut tally = GrowthTally::default();
        let step = |n: u64, (x, y): (f64, f64)| {
            let a = self.sequence.a(n + 1);
            (x * x + a * y, a * x)
        };
        let mut z0 = (x, y);
        let mut z1 = step(0, z0);
        for n in 0..=n_max {
            let z2 = step(n + 1, z1);
            if !(z2.0.is_finite() && z2.1.is_finite()) {
                break;
            }
            let l1 = z0.0 + z0.1;
            let (a1, a2) = (self.sequence.a(n + 1), self.sequence.a(n + 2));
            if l1 > epsilon && growth_applies(a1, a2, epsilon) {
                tally.checks += 1;
                let next = z2.0.abs() + z2.1.abs();
                if next <= (1.0 + epsilon * epsilon / 5.0) * l1 {
                    tally.violations += 1;
                }
                if next < two_step_lower_bound(a1, a2, z0.0, z0.1) {
                    tally.bound_violations += 1;
                }
            }
            z0 = z1;
            z1 = z2;
        }
        tally
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthTally {
    pub checks: u64,
    /// `‖z_{n+2}‖₁ ≤ (1 + ε²/5)‖z_n‖₁` despite the hypotheses.
    pub violations: u64,
    /// `‖z_{n+2}‖₁` below [`two_step_lower_bound`].
    pub bound_violations: u64,
}

impl std::ops::Add for GrowthTally {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            checks: self.checks + o.checks,
            violations: self.violations + o.violations,
            bound_violations: self.bound_violations + o.bound_violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrantConfig {
    pub a_sequence: ASequence,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub resolution: usize,
    pub budget: u64,
    pub attract_radius: f64,
    pub filtration_radius: f64,
    pub pair_tolerance: f64,
    pub max_pairs: usize,
    pub bisection_steps: u32,
    /// Horizon for escape detection on bisection midpoints left undecided
    /// at `budget`.
    pub escape_budget: u64,
    pub growth_epsilon: f64,
}

impl Default for QuadrantConfig {
    fn default() -> Self {
        Self {
            a_sequence: ASequence::Slowing,
            x_range: [0.0, 2.0],
            y_range: [0.0, 2.0],
            resolution: 256,
            budget: 10_000,
            attract_radius: 0.01,
            filtration_radius: 3.0,
            pair_tolerance: 1e-3,
            max_pairs: 64,
            bisection_steps: 40,
            escape_budget: 1 << 24,
            growth_epsilon: 1.0,
        }
    }
}

impl QuadrantConfig {
    pub fn validate(&self) -> Result<(), BasinError> {
        self.a_sequence.validate()?;
        let bad = |m: &str| Err(BasinError::InvalidParameters(m.into()));
        let range_ok =
            |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] >= 0.0 && r[1] > r[0];
        if !range_ok(self.x_range) || !range_ok(self.y_range) {
            return bad("window must be a nondegenerate rectangle in the closed positive quadrant");
        }
        if self.resolution < 2 {
            return bad("resolution must be at least 2");
        }
        if self.budget == 0 {
            return bad("budget must be at least 1");
        }
        if self.escape_budget < self.budget {
            return bad("escape_budget must be at least budget");
        }
        if !(self.pair_tolerance > 0.0 && self.pair_tolerance.is_finite()) {
            return bad("pair_tolerance must be positive");
        }
        if !(self.growth_epsilon > 0.0 && self.growth_epsilon <= 2.0) {
            return bad("growth_epsilon must lie in (0, 2]");
        }
        Ok(())
    }

    pub fn slice(&self) -> SliceSpec {
        SliceSpec::real_window(self.x_range, self.y_range, self.resolution)
    }
}

/// Two nearby points, one certified ATTRACTED and one certified ESCAPED.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPair {
    pub attracted: [f64; 2],
    pub escaped: [f64; 2],
    pub separation: f64,
    pub attracted_stage: u64,
    pub escaped_stage: u64,
    /// Escape step of the attracted endpoint when iterated on to
    /// `escape_budget` with attraction ignored. The certificate is local to
    /// the next map, so a late escape can occur when `a_j → 1`.
    pub attracted_late_escape: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub total: usize,
    pub attracted: usize,
    pub escaped: usize,
    pub undecided: usize,
    pub undecided_fraction: f64,
    pub budget: u64,
    pub escape_budget: u64,
    pub attract_radius: f64,
    pub pair_tolerance: f64,
    /// Grid edges joining an ATTRACTED and an ESCAPED cell.
    pub interface_edges: usize,
    /// Edges whose bisection stalled on a point undecided at `escape_budget`.
    pub abandoned_edges: usize,
    pub mixed_boundary_samples: Vec<MixedPair>,
    pub growth_epsilon: f64,
    pub growth: GrowthTally,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrantOutcome {
    pub report: DichotomyReport,
    pub grid: LabelGrid,
}

fn bisect(
    dynamics: &QuadrantDynamics,
    config: &QuadrantConfig,
    mut a: ([f64; 2], OrbitVerdict),
    mut e: ([f64; 2], OrbitVerdict),
) -> Option<MixedPair> {
    let dist = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    for _ in 0..config.bisection_steps {
        if dist(a.0, e.0) < config.pair_tolerance {
            break;
        }
        let mid = [(a.0[0] + e.0[0]) / 2.0, (a.0[1] + e.0[1]) / 2.0];
        let mut v = dynamics.classify(mid[0], mid[1], config.budget);
        if v.status == OrbitStatus::Undecided {
            v = dynamics.classify(mid[0], mid[1], config.escape_budget);
        }
        match v.status {
            OrbitStatus::Attracted => a = (mid, v),
            OrbitStatus::Escaped => e = (mid, v),
            OrbitStatus::Undecided => return None,
        }
    }
    let separation = dist(a.0, e.0);
    (separation < config.pair_tolerance).then(|| MixedPair {
        attracted: a.0,
        escaped: e.0,
        separation,
        attracted_stage: a.1.stage.expect("decided"),
        escaped_stage: e.1.stage.expect("decided"),
        attracted_late_escape: dynamics.escape_time(a.0[0], a.0[1], config.escape_budget),
    })
}

/// Classifies the window under the slowing maps, then bisects grid edges
/// across the ATTRACTED/ESCAPED interface and checks the two-step growth
/// bound on every escaped cell orbit.
pub fn real_quadrant_experiment(config: &QuadrantConfig) -> Result<QuadrantOutcome, BasinError> {
    config.validate()?;
    let dynamics = QuadrantDynamics::new(
        config.a_sequence.clone(),
        config.budget,
        config.filtration_radius,
        config.attract_radius,
    )?;
    let spec = config.slice();
    let n = spec.resolution;
    let verdicts: Vec<OrbitVerdict> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let [x, y] = spec.cell_center(k % n, k / n);
            dynamics.classify(x, y, config.budget)
        })
        .collect();
    let digest = hex::encode(Sha256::digest(
        to_json(config).expect("serializable").as_bytes(),
    ));
    let grid = LabelGrid::new(spec.clone(), verdicts, digest)?;
    let (attracted, escaped, undecided) = grid.counts();

    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= n || nj >= n {
                    continue;
                }
                let (s, t) = (grid.status(i, j), grid.status(ni, nj));
                match (s, t) {
                    (OrbitStatus::Attracted, OrbitStatus::Escaped) => {
                        edges.push(((i, j), (ni, nj)))
                    }
                    (OrbitStatus::Escaped, OrbitStatus::Attracted) => {
                        edges.push(((ni, nj), (i, j)))
                    }
                    _ => {}
                }
            }
        }
    }
    // evenly spread edge subset, oversampled since some bisections stall
    let want = config.max_pairs.saturating_mul(4).min(edges.len());
    let chosen: Vec<_> = (0..want).map(|k| edges[k * edges.len() / want]).collect();
    let results: Vec<Option<MixedPair>> = chosen
        .par_iter()
        .map(|&((ai, aj), (ei, ej))| {
            bisect(
                &dynamics,
                config,
                (spec.cell_center(ai, aj), *grid.get(ai, aj)),
                (spec.cell_center(ei, ej), *grid.get(ei, ej)),
            )
        })
        .collect();
    let abandoned_edges = results.iter().filter(|r| r.is_none()).count();
    let mixed_boundary_samples: Vec<MixedPair> = results
        .into_iter()
        .flatten()
        .take(config.max_pairs)
        .collect();

    let growth = (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let v = grid.verdicts[k];
            (v.status == OrbitStatus::Escaped).then(|| {
                let [x, y] = spec.cell_center(k % n, k / n);
                dynamics.growth_check(x, y, v.stage.expect("escaped"), config.growth_epsilon)
            })
        })
        .reduce(GrowthTally::default, |a, b| a + b);

    let total = n * n;
    let report = DichotomyReport {
        total,
        attracted,
        escaped,
        undecided,
        undecided_fraction: undecided as f64 / total as f64,
        budget: config.budget,
        escape_budget: config.escape_budget,
        attract_radius: config.attract_radius,
        pair_tolerance: config.pair_tolerance,
        interface_edges: edges.len(),
        abandoned_edges,
        mixed_boundary_samples,
        growth_epsilon: config.growth_epsilon,
        growth,
    };
    Ok(QuadrantOutcome { report, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::classify_orbit;
    use crate::filtration::Filtration;
    use crate::schedule::IterationSchedule;

    #[test]
    fn slowing_values() {
        let s = ASequence::Slowing;
        assert_eq!(s.a(1), 1.0 - 1.0 / 3.0);
        assert_eq!(s.a(8), 0.9);
    }

    #[test]
    fn explicit_sequence_validation() {
        assert!(ASequence::Explicit {
            values: vec![0.5, 0.4]
        }
        .validate()
        .is_err());
        assert!(ASequence::Explicit {
            values: vec![0.5, 1.0]
        }
        .validate()
        .is_err());
        let s = ASequence::Explicit {
            values: vec![0.5, 0.6],
        };
        assert!(s.validate().is_ok());
        assert_eq!((s.a(1), s.a(2), s.a(50)), (0.5, 0.6, 0.6));
    }

    #[test]
    fn two_step_example() {
        let exact = (1.0f64 + 0.99).powi(2) + 0.99 * 0.99 + 0.99 + 0.99 * 0.99;
        let v = two_step_l1(0.99, 0.99, 1.0, 1.0);
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        assert!(v >= (1.0 + 0.2f64.powi(2) / 5.0) * 2.0);
        assert!(v >= two_step_lower_bound(0.99, 0.99, 1.0, 1.0));
        assert!(growth_applies(0.99, 0.99, 1.0));
        assert!(!growth_applies(0.9, 0.99, 1.0));
    }

    #[test]
    fn matches_generic_classifier() {
        let budget = 300;
        let r = 0.05;
        let d = QuadrantDynamics::new(ASequence::Slowing, budget, 3.0, r).unwrap();
        let maps = (1..=budget + 1).map(|j| ASequence::Slowing.map(j));
        let schedule = IterationSchedule::from_maps(maps).unwrap();
        let filt = Filtration::new(3.0).unwrap();
        for k in 0..60 {
            let (x, y) = (0.013 * k as f64, 0.021 * (59 - k) as f64);
            let fast = d.classify(x, y, budget);
            let generic = classify_orbit(&schedule, &C2Point::real(x, y), budget, filt, r).unwrap();
            assert_eq!(fast, generic, "at ({x}, {y})");
        }
    }

    #[test]
    fn unit_point_escapes_with_growing_l1_norm() {
        let d = QuadrantDynamics::new(ASequence::Slowing, 100, 3.0, 0.01).unwrap();
        let v = d.classify(1.0, 1.0, 100);
        assert_eq!(v.status, OrbitStatus::Escaped);
        // direct iteration: from the first step with a_j ≥ 0.9 (j = 8), ‖·‖₁ increases
        let (mut x, mut y) = (1.0f64, 1.0f64);
        let mut prev = f64::NAN;
        for j in 1..=v.stage.unwrap() {
            let a = 1.0 - 1.0 / (j as f64 + 2.0);
            (x, y) = (x * x + a * y, a * x);
            if j >= 8 {
                assert!(x + y > prev);
            }
            prev = x + y;
        }
        let g = d.growth_check(1.0, 1.0, v.stage.unwrap(), 1.0);
        assert_eq!(g.violations, 0);
        assert_eq!(g.bound_violations, 0);
    }

    #[test]
    fn small_point_decays_like_the_product() {
        // ∏_{j≤n} a_j = 2/(n+2); after 10⁴ steps the orbit of (0.01, 0.01)
        // has norm close to ‖p‖·2/(n+2)·const, of order 1e−6
        let (mut x, mut y) = (0.01f64, 0.01f64);
        for j in 1..=10_000u64 {
            let a = 1.0 - 1.0 / (j as f64 + 2.0);
            (x, y) = (x * x + a * y, a * x);
        }
        let norm = x.hypot(y);
        assert!(norm < 5e-6 && norm > 1e-7, "{norm}");
        let d = QuadrantDynamics::new(ASequence::Slowing, 10_000, 3.0, 0.01).unwrap();
        assert_eq!(
            d.classify(0.01, 0.01, 10_000).status,
            OrbitStatus::Attracted
        );
    }

    #[test]
    fn config_validation() {
        let mut c = QuadrantConfig::default();
        assert!(c.validate().is_ok());
        c.x_range = [-0.5, 1.0];
        assert!(c.validate().is_err());
        let c = QuadrantConfig {
            growth_epsilon: 3.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = QuadrantConfig {
            escape_budget: 10,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_experiment_is_consistent() {
        let c = QuadrantConfig {
            resolution: 32,
            budget: 2000,
            max_pairs: 4,
            ..Default::default()
        };
        let out = real_quadrant_experiment(&c).unwrap();
        let r = &out.report;
        assert_eq!(r.attracted + r.escaped + r.undecided, r.total);
        assert!(r.attracted > 0 && r.escaped > 0);
        for pair in &r.mixed_boundary_samples {
            assert!(pair.separation < c.pair_tolerance);
            let d =
                QuadrantDynamics::new(ASequence::Slowing, c.budget, 3.0, c.attract_radius).unwrap();
            assert_eq!(
                d.classify(pair.attracted[0], pair.attracted[1], c.budget)
                    .status,
                OrbitStatus::Attracted
            );
            assert_eq!(
                d.classify(pair.escaped[0], pair.escaped[1], c.escape_budget)
                    .status,
                OrbitStatus::Escaped
            );
        }
        assert_eq!(r.growth.violations, 0);
    }
}
