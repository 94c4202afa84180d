// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one JSON document per experiment, plus flag overrides.

use std::fmt;
use std::path::PathBuf;

use basin_lab::basin::QuadrantConfig;
use basin_lab::{AutoMap, BuilderPolicy, C2Point, Filtration, IterationSchedule, SliceSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Experiment {
    Slice,
    RealQuadrant,
    Dimension,
    ScheduleBuild,
    CircleProbe,
    Linearization,
    JuliaConvergence,
}

impl Experiment {
    pub fn from_verb(verb: &str) -> Option<Self> {
        Some(match verb {
            "slice" => Self::Slice,
            "quadrant" => Self::RealQuadrant,
            "dim" => Self::Dimension,
            "schedule" => Self::ScheduleBuild,
            "probe" => Self::CircleProbe,
            "linearize" => Self::Linearization,
            "converge" => Self::JuliaConvergence,
            _ => return None,
        })
    }

    pub fn verb(self) -> &'static str {
        match self {
            Self::Slice => "slice",
            Self::RealQuadrant => "quadrant",
            Self::Dimension => "dim",
            Self::ScheduleBuild => "schedule",
            Self::CircleProbe => "probe",
            Self::Linearization => "linearize",
            Self::JuliaConvergence => "converge",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.verb())
    }
}

/// `a_{j+1} = a_j^t`, one map per stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FornaessParams {
    pub a1: f64,
    pub t: f64,
    pub stages: usize,
}

impl Default for FornaessParams {
    fn default() -> Self {
        Self {
            a1: 0.1,
            t: 2.5,
            stages: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureName {
    Segment,
    Square,
    Cantor,
    CantorProduct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimensionSource {
    /// Reference set: `size` is the point count (segment), side (square)
    /// or construction level (Cantor sets).
    Fixture { name: FixtureName, size: usize },
    /// Boundary cells of the configured slice.
    SliceBoundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionParams {
    pub source: DimensionSource,
    /// Scales `2^{-k}` for `k_min ≤ k ≤ k_max`. For a slice boundary the
    /// default runs from 1 down to four cells.
    pub k_min: Option<i32>,
    pub k_max: Option<i32>,
    pub hs: Vec<f64>,
}

impl Default for DimensionParams {
    fn default() -> Self {
        Self {
            source: DimensionSource::SliceBoundary,
            k_min: None,
            k_max: None,
            hs: vec![1.0, 1.5, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuilderParams {
    pub maps: Vec<AutoMap>,
    pub radii: Option<Vec<f64>>,
    pub filtration_radii: Option<Vec<f64>>,
    pub policy: BuilderPolicy,
    /// Re-certify the schedule with every repeat count doubled.
    pub recertify_doubled: bool,
}

impl Default for BuilderParams {
    fn default() -> Self {
        Self {
            maps: [0.3, 0.2, 0.1]
                .iter()
                .map(|&a| AutoMap::henon(a, 0.0).expect("valid parameter"))
                .collect(),
            radii: Some(vec![0.1; 4]),
            filtration_radii: Some(vec![3.0; 4]),
            policy: BuilderPolicy::default(),
            recertify_doubled: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    /// Fixed radius; without it the radius is searched on `scan`.
    pub radius: Option<f64>,
    pub direction: C2Point,
    pub samples: usize,
    pub scan: [f64; 2],
    pub scan_steps: usize,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            radius: None,
            direction: C2Point::real(1.0, 0.0),
            samples: 64,
            scan: [0.05, 3.0],
            scan_steps: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizeParams {
    /// Random schedules drawn when no schedule is configured.
    pub schedules: usize,
    pub stages: usize,
    pub a_range: [f64; 2],
    pub points: usize,
    /// Basin points are drawn from `[−point_box, point_box]⁴`.
    pub point_box: f64,
    pub from: u64,
    pub n: u64,
    pub factor: f64,
}

impl Default for LinearizeParams {
    fn default() -> Self {
        Self {
            schedules: 20,
            stages: 60,
            a_range: [0.3, 0.7],
            points: 50,
            point_box: 1.0,
            from: 10,
            n: 40,
            factor: 0.8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeParams {
    /// Defaults to every depth of the schedule.
    pub depths: Option<Vec<usize>>,
    /// Build the schedule first instead of using the configured one.
    pub build: Option<BuilderParams>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<AutoMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<IterationSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fornaess: Option<FornaessParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attract_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtration_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrant: Option<QuadrantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<BuilderParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearize: Option<LinearizeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeParams>,
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub budget: Option<u64>,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A config problem, tagged with the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub const DEFAULT_BUDGET: u64 = 1000;
pub const DEFAULT_ATTRACT_RADIUS: f64 = 1e-3;
pub const DEFAULT_RESOLUTION: usize = 256;

/// Parses a config document. Syntax and type errors carry serde's line and
/// column.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("invalid config: {e}")))
}

impl RunConfig {
    /// Applies the flags, fills every default the experiment reads and
    /// validates the result. The returned config is what the run echoes.
    pub fn resolve(mut self, verb: Experiment, o: &Overrides) -> Result<RunConfig, ConfigError> {
        if let Some(e) = self.experiment {
            if e != verb {
                return Err(ConfigError::new(
                    "experiment",
                    format!(
                        "config is for `{}` but the verb is `{}`",
                        e.verb(),
                        verb.verb()
                    ),
                ));
            }
        }
        self.experiment = Some(verb);
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if self.seed.is_none() {
            return Err(ConfigError::new(
                "seed",
                "seed is mandatory (set it in the config or pass --seed)",
            ));
        }
        if o.out.is_some() {
            self.output_dir = o.out.clone();
        }
        if o.budget.is_some() {
            self.budget = o.budget;
        }
        if self.budget == Some(0) {
            return Err(ConfigError::new("budget", "must be at least 1"));
        }
        let seed = self.seed.expect("checked");
        match verb {
            Experiment::Slice => {
                self.resolve_dynamics()?;
                self.resolve_slice(o)?;
            }
            Experiment::RealQuadrant => {
                let q = self.quadrant.get_or_insert_with(Default::default);
                if let Some(b) = self.budget.take() {
                    q.budget = b;
                    q.escape_budget = q.escape_budget.max(b);
                }
                if let Some(r) = o.resolution {
                    q.resolution = r;
                }
                if q.resolution < 2 {
                    return Err(ConfigError::new(
                        "quadrant.resolution",
                        format!("must be at least 2, got {}", q.resolution),
                    ));
                }
                q.validate().map_err(|e| ConfigError::new("quadrant", e))?;
            }
            Experiment::Dimension => {
                let d = self.dimension.get_or_insert_with(Default::default);
                if d.hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                    return Err(ConfigError::new(
                        "dimension.hs",
                        "exponents must be positive",
                    ));
                }
                match d.source {
                    DimensionSource::Fixture { size, .. } => {
                        if size == 0 {
                            return Err(ConfigError::new(
                                "dimension.source.size",
                                "must be positive",
                            ));
                        }
                        if d.k_min.is_none() || d.k_max.is_none() {
                            return Err(ConfigError::new(
                                "dimension.k_min",
                                "fixtures need explicit k_min and k_max",
                            ));
                        }
                    }
                    DimensionSource::SliceBoundary => {
                        self.resolve_dynamics()?;
                        self.resolve_slice(o)?;
                    }
                }
                let d = self.dimension.as_mut().expect("inserted");
                if d.k_min.is_none() {
                    d.k_min = Some(0);
                }
                if d.k_max.is_none() {
                    let res = self.slice.as_ref().expect("resolved").resolution;
                    d.k_max = Some(((res as f64 / 4.0).log2().floor() as i32).max(0));
                }
                let (k0, k1) = (d.k_min.expect("set"), d.k_max.expect("set"));
                if k1 < k0 + 5 {
                    return Err(ConfigError::new(
                        "dimension.k_max",
                        format!("need at least 6 scales, got k_min={k0}, k_max={k1}"),
                    ));
                }
            }
            Experiment::ScheduleBuild => {
                let b = self.builder.get_or_insert_with(Default::default);
                resolve_builder(b, "builder", seed, self.budget, o)?;
                self.budget = None;
            }
            Experiment::CircleProbe => {
                self.resolve_dynamics()?;
                let p = self.probe.get_or_insert_with(Default::default);
                if p.samples < 8 {
                    return Err(ConfigError::new(
                        "probe.samples",
                        format!("must be at least 8, got {}", p.samples),
                    ));
                }
                if !(p.direction.is_finite() && p.direction.norm() > 0.0) {
                    return Err(ConfigError::new(
                        "probe.direction",
                        "must be finite and nonzero",
                    ));
                }
                if let Some(r) = p.radius {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(ConfigError::new("probe.radius", "must be positive"));
                    }
                } else if !(p.scan[0] > 0.0 && p.scan[1] > p.scan[0] && p.scan[1].is_finite())
                    || p.scan_steps < 2
                {
                    return Err(ConfigError::new(
                        "probe.scan",
                        "need 0 < scan[0] < scan[1] and scan_steps ≥ 2",
                    ));
                }
            }
            Experiment::Linearization => {
                if self.map.is_some() || self.schedule.is_some() || self.fornaess.is_some() {
                    self.resolve_dynamics()?;
                } else {
                    self.budget.get_or_insert(DEFAULT_BUDGET);
                    self.attract_radius.get_or_insert(DEFAULT_ATTRACT_RADIUS);
                }
                let l = self.linearize.get_or_insert_with(Default::default);
                let [lo, hi] = l.a_range;
                if !(lo > 0.0 && hi >= lo && hi < 1.0) {
                    return Err(ConfigError::new(
                        "linearize.a_range",
                        "need 0 < lo ≤ hi < 1",
                    ));
                }
                if l.schedules == 0 || l.stages == 0 {
                    return Err(ConfigError::new(
                        "linearize.schedules",
                        "schedules and stages must be positive",
                    ));
                }
                if l.points == 0 {
                    return Err(ConfigError::new("linearize.points", "must be positive"));
                }
                if !(l.point_box > 0.0 && l.point_box.is_finite()) {
                    return Err(ConfigError::new("linearize.point_box", "must be positive"));
                }
                if l.from + 2 > l.n {
                    return Err(ConfigError::new(
                        "linearize.n",
                        format!("need from + 2 ≤ n, got from={}, n={}", l.from, l.n),
                    ));
                }
                if !(l.factor > 0.0) {
                    return Err(ConfigError::new("linearize.factor", "must be positive"));
                }
            }
            Experiment::JuliaConvergence => {
                let mut c = self.converge.take().unwrap_or_default();
                if let Some(b) = c.build.as_mut() {
                    resolve_builder(b, "converge.build", seed, None, &Overrides::default())?;
                    self.budget.get_or_insert(DEFAULT_BUDGET);
                    self.attract_radius.get_or_insert(DEFAULT_ATTRACT_RADIUS);
                    check_attract_radius(self.attract_radius)?;
                    let r = self.filtration_radius.get_or_insert(3.0);
                    Filtration::new(*r).map_err(|e| ConfigError::new("filtration_radius", e))?;
                } else {
                    self.resolve_dynamics()?;
                }
                if let Some(d) = &c.depths {
                    if d.is_empty() || d[0] == 0 || d.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(ConfigError::new(
                            "converge.depths",
                            "must be a nonempty increasing list of positive depths",
                        ));
                    }
                }
                self.converge = Some(c);
                self.resolve_slice(o)?;
            }
        }
        Ok(self)
    }

    fn resolve_dynamics(&mut self) -> Result<(), ConfigError> {
        let set = [
            self.map.is_some(),
            self.schedule.is_some(),
            self.fornaess.is_some(),
        ];
        match set.iter().filter(|&&s| s).count() {
            0 => {
                return Err(ConfigError::new(
                    "map",
                    "one of `map`, `schedule` or `fornaess` is required",
                ))
            }
            1 => {}
            _ => {
                return Err(ConfigError::new(
                    "map",
                    "give only one of `map`, `schedule` or `fornaess`",
                ))
            }
        }
        if let Some(f) = &self.fornaess {
            IterationSchedule::fornaess(f.a1, f.t, f.stages)
                .map_err(|e| ConfigError::new("fornaess", e))?;
        }
        self.budget.get_or_insert(DEFAULT_BUDGET);
        self.attract_radius.get_or_insert(DEFAULT_ATTRACT_RADIUS);
        check_attract_radius(self.attract_radius)?;
        if self.filtration_radius.is_none() {
            let s = self.dynamics().expect("validated");
            self.filtration_radius =
                Some(Filtration::for_maps(s.stages().iter().map(|st| &st.map)).radius);
        }
        Filtration::new(self.filtration_radius.expect("set"))
            .map_err(|e| ConfigError::new("filtration_radius", e))?;
        Ok(())
    }

    fn resolve_slice(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        let s = self.slice.get_or_insert_with(|| {
            SliceSpec::real_plane([0.0, 0.0], [2.0, 2.0], DEFAULT_RESOLUTION)
        });
        if let Some(r) = o.resolution {
            s.resolution = r;
        }
        if s.resolution < 2 {
            return Err(ConfigError::new(
                "slice.resolution",
                format!("must be at least 2, got {}", s.resolution),
            ));
        }
        s.validate().map_err(|e| ConfigError::new("slice", e))
    }

    /// The configured schedule, if any.
    pub fn dynamics(&self) -> Option<IterationSchedule> {
        if let Some(m) = &self.map {
            return Some(IterationSchedule::single(m.clone()));
        }
        if let Some(s) = &self.schedule {
            return Some(s.clone());
        }
        self.fornaess
            .as_ref()
            .and_then(|f| IterationSchedule::fornaess(f.a1, f.t, f.stages).ok())
    }

    pub fn filtration(&self) -> Filtration {
        Filtration::new(self.filtration_radius.expect("resolved")).expect("validated")
    }
}

fn check_attract_radius(r: Option<f64>) -> Result<(), ConfigError> {
    match r {
        Some(r) if r > 0.0 && r.is_finite() => Ok(()),
        _ => Err(ConfigError::new("attract_radius", "must be positive")),
    }
}

fn resolve_builder(
    b: &mut BuilderParams,
    path: &str,
    seed: u64,
    budget: Option<u64>,
    o: &Overrides,
) -> Result<(), ConfigError> {
    b.policy.seed = seed;
    if let Some(budget) = budget {
        b.policy.budget = budget;
    }
    if let Some(r) = o.resolution {
        b.policy.resolution = r;
    }
    if b.maps.is_empty() {
        return Err(ConfigError::new(
            format!("{path}.maps"),
            "at least one map is required",
        ));
    }
    if b.policy.resolution < 2 {
        return Err(ConfigError::new(
            format!("{path}.policy.resolution"),
            format!("must be at least 2, got {}", b.policy.resolution),
        ));
    }
    if b.policy.samples < 1000 {
        return Err(ConfigError::new(
            format!("{path}.policy.samples"),
            "must be at least 1000",
        ));
    }
    if b.policy.budget == 0 {
        return Err(ConfigError::new(
            format!("{path}.policy.budget"),
            "must be at least 1",
        ));
    }
    if b.policy.cap_log2 > 40 {
        return Err(ConfigError::new(
            format!("{path}.policy.cap_log2"),
            "must be at most 40",
        ));
    }
    let m = b.maps.len();
    for (name, list) in [
        ("radii", &b.radii),
        ("filtration_radii", &b.filtration_radii),
    ] {
        if let Some(l) = list {
            if l.len() != m + 1 {
                return Err(ConfigError::new(
                    format!("{path}.{name}"),
                    format!(
                        "needs {} entries (one more than maps), got {}",
                        m + 1,
                        l.len()
                    ),
                ));
            }
        }
    }
    Ok(())
}
