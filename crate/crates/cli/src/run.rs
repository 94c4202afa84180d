// SPDX-License-Identifier: Apache-2.0

//! One runner per experiment. Each writes its artifacts and reports whether
//! a certificate failed.

use std::path::PathBuf;

use basin_lab::basin::{
    boundary_cells, boundary_slice_points, circle_probe_report, find_crossing_circle,
    real_quadrant_experiment, sample_slice, ProbeReport,
};
use basin_lab::builder::{build_schedule, recertify, BuiltSchedule, Certificate};
use basin_lab::dimension::{
    dimension_fit, dyadic_scales, fixtures, julia_slice_convergence, PointCloud,
};
use basin_lab::output::fmt_f64;
use basin_lab::{
    linearization_report, AutoMap, BuildError, C2Point, Classifier, Filtration, IterationSchedule,
    LinearizationReport, OrbitStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::artifacts::{csv_text, ArtifactSet, Manifest};
use crate::config::{
    BuilderParams, ConfigError, DimensionSource, Experiment, FixtureName, LinearizeParams,
    RunConfig,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Compute(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Certificate(_) => 3,
            RunError::Io(_) | RunError::Compute(_) => 1,
        }
    }
}

fn compute(e: impl std::fmt::Display) -> RunError {
    RunError::Compute(e.to_string())
}

/// Completed run: the manifest written and, for exit code 3, the reason.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub output_dir: PathBuf,
    pub certificate_failure: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.certificate_failure.is_some() {
            3
        } else {
            0
        }
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Runs a resolved config in the current rayon pool.
pub fn execute(config: RunConfig) -> Result<RunOutcome, RunError> {
    let experiment = config
        .experiment
        .ok_or_else(|| ConfigError::new("experiment", "unresolved config"))?;
    let dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut set = ArtifactSet::create(&dir)?;
    let failure = match experiment {
        Experiment::Slice => run_slice(&config, &mut set)?,
        Experiment::RealQuadrant => run_quadrant(&config, &mut set)?,
        Experiment::Dimension => run_dimension(&config, &mut set)?,
        Experiment::ScheduleBuild => run_schedule(&config, &mut set)?,
        Experiment::CircleProbe => run_probe(&config, &mut set)?,
        Experiment::Linearization => run_linearize(&config, &mut set)?,
        Experiment::JuliaConvergence => run_converge(&config, &mut set)?,
    };
    let status = if failure.is_some() {
        "certificate_failure"
    } else {
        "ok"
    };
    let manifest = set.finish(experiment, status, config)?;
    Ok(RunOutcome {
        manifest,
        output_dir: dir,
        certificate_failure: failure,
    })
}

type Step = Result<Option<String>, RunError>;

fn schedule_of(config: &RunConfig) -> IterationSchedule {
    config.dynamics().expect("resolved configs carry dynamics")
}

#[derive(Serialize)]
struct SliceSummary<'a> {
    resolution: usize,
    attracted: usize,
    escaped: usize,
    undecided: usize,
    boundary_cells: usize,
    schedule_digest: &'a str,
}

fn run_slice(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let spec = config.slice.as_ref().expect("resolved");
    let grid = sample_slice(
        spec,
        &schedule_of(config),
        config.budget.expect("resolved"),
        config.filtration(),
        config.attract_radius.expect("resolved"),
    )
    .map_err(compute)?;
    let (attracted, escaped, undecided) = grid.counts();
    set.write("slice.pgm", &grid.to_pgm())?;
    set.write("slice.csv", &grid.to_csv())?;
    set.write_json(
        "slice.json",
        &SliceSummary {
            resolution: spec.resolution,
            attracted,
            escaped,
            undecided,
            boundary_cells: boundary_cells(&grid).len(),
            schedule_digest: &grid.schedule_digest,
        },
    )?;
    Ok(None)
}

fn run_quadrant(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let outcome =
        real_quadrant_experiment(config.quadrant.as_ref().expect("resolved")).map_err(compute)?;
    set.write("quadrant.pgm", &outcome.grid.to_pgm())?;
    set.write("quadrant.csv", &outcome.grid.to_csv())?;
    set.write_json("quadrant.json", &outcome.report)?;
    Ok(None)
}

fn run_dimension(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let d = config.dimension.as_ref().expect("resolved");
    let cloud = match &d.source {
        DimensionSource::Fixture { name, size } => {
            let level = u32::try_from(*size).map_err(compute)?;
            match name {
                FixtureName::Segment => fixtures::segment(*size),
                FixtureName::Square => fixtures::square(*size),
                FixtureName::Cantor => fixtures::cantor(level),
                FixtureName::CantorProduct => fixtures::cantor_product(level),
            }
        }
        DimensionSource::SliceBoundary => {
            let grid = sample_slice(
                config.slice.as_ref().expect("resolved"),
                &schedule_of(config),
                config.budget.expect("resolved"),
                config.filtration(),
                config.attract_radius.expect("resolved"),
            )
            .map_err(compute)?;
            let points = boundary_slice_points(&grid);
            set.write(
                "boundary.csv",
                &csv_text(
                    "x,y",
                    points
                        .iter()
                        .map(|p| format!("{},{}", fmt_f64(p[0]), fmt_f64(p[1]))),
                ),
            )?;
            PointCloud::from_points2(&points).map_err(compute)?
        }
    };
    let scales = dyadic_scales(d.k_min.expect("resolved"), d.k_max.expect("resolved"));
    let table = dimension_fit(&cloud, &scales, &d.hs).map_err(compute)?;
    set.write("boxcount.csv", &table.to_csv())?;
    set.write(
        "dimension.json",
        format!("{}\n", table.summary_json()).as_bytes(),
    )?;
    Ok(None)
}

fn certificates_csv(certs: &[Certificate]) -> Vec<u8> {
    csv_text(
        "stage,kind,n,passed,margin,samples,seed,vacuous",
        certs.iter().map(|c| {
            let kind = serde_json::to_value(c.kind)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            format!(
                "{},{},{},{},{},{},{},{}",
                c.stage.map(|s| s.to_string()).unwrap_or_default(),
                kind,
                c.n,
                c.passed,
                fmt_f64(c.margin),
                c.samples,
                c.seed,
                c.vacuous
            )
        }),
    )
}

#[derive(Serialize)]
struct BuildFailure {
    error: String,
}

/// Builds the schedule and writes its artifacts under `prefix`. Returns the
/// schedule, or the failure that makes the run exit with code 3.
fn build_and_write(
    b: &BuilderParams,
    set: &mut ArtifactSet,
    prefix: &str,
) -> Result<Result<BuiltSchedule, String>, RunError> {
    let built = match build_schedule(
        &b.maps,
        b.radii.as_deref(),
        b.filtration_radii.as_deref(),
        &b.policy,
    ) {
        Ok(built) => built,
        Err(e @ (BuildError::CapExceeded { .. } | BuildError::BoundaryUnavailable)) => {
            let error = e.to_string();
            set.write_json(
                &format!("{prefix}failure.json"),
                &BuildFailure {
                    error: error.clone(),
                },
            )?;
            return Ok(Err(error));
        }
        Err(e) => return Err(compute(e)),
    };
    set.write_json(&format!("{prefix}schedule.json"), &built)?;
    set.write(
        &format!("{prefix}certificates.csv"),
        &certificates_csv(&built.certificates),
    )?;
    if !built.all_passed() {
        return Ok(Err("built schedule has a failing certificate".into()));
    }
    Ok(Ok(built))
}

fn run_schedule(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let b = config.builder.as_ref().expect("resolved");
    let built = match build_and_write(b, set, "")? {
        Ok(built) => built,
        Err(failure) => return Ok(Some(failure)),
    };
    if b.recertify_doubled {
        let doubled = built.schedule.with_scaled_repeats(2);
        let certs = recertify(&doubled, &built.filtration_radii, &b.policy).map_err(compute)?;
        set.write("doubled_certificates.csv", &certificates_csv(&certs))?;
        if let Some(c) = certs.iter().find(|c| !c.passed) {
            return Ok(Some(format!(
                "doubled schedule fails {:?} at stage {}",
                c.kind,
                c.stage.map(|s| s.to_string()).unwrap_or_default()
            )));
        }
    }
    Ok(None)
}

#[derive(Serialize)]
struct ProbeOutput {
    direction: C2Point,
    searched: bool,
    found: bool,
    report: Option<ProbeReport>,
}

fn run_probe(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let p = config.probe.as_ref().expect("resolved");
    let schedule = schedule_of(config);
    let (budget, filt, r) = (
        config.budget.expect("resolved"),
        config.filtration(),
        config.attract_radius.expect("resolved"),
    );
    let report = match p.radius {
        Some(radius) => Some(
            circle_probe_report(&schedule, radius, &p.direction, p.samples, budget, filt, r)
                .map_err(compute)?,
        ),
        None => find_crossing_circle(
            &schedule,
            &p.direction,
            p.scan[0],
            p.scan[1],
            p.scan_steps,
            p.samples,
            budget,
            filt,
            r,
        )
        .map_err(compute)?,
    };
    if let Some(rep) = &report {
        set.write(
            "probe.csv",
            &csv_text(
                "k,theta,status",
                rep.statuses.iter().enumerate().map(|(k, s)| {
                    format!(
                        "{k},{},{}",
                        fmt_f64(std::f64::consts::TAU * k as f64 / p.samples as f64),
                        s.as_str()
                    )
                }),
            ),
        )?;
    }
    set.write_json(
        "probe.json",
        &ProbeOutput {
            direction: p.direction,
            searched: p.radius.is_none(),
            found: report.as_ref().is_some_and(|r| r.crosses_boundary),
            report,
        },
    )?;
    Ok(None)
}

/// A schedule with the basin points drawn for it.
pub struct LinearizationCase {
    pub schedule: IterationSchedule,
    pub points: Vec<C2Point>,
}

/// Draws `params.points` ATTRACTED points from `[−point_box, point_box]⁴`
/// for each schedule. Candidates come in fixed-size batches from a ChaCha
/// stream and are classified in parallel, so the selection depends only on
/// the seed.
pub fn basin_points(
    schedule: &IterationSchedule,
    params: &LinearizeParams,
    rng: &mut ChaCha8Rng,
    budget: u64,
    attract_radius: f64,
) -> Result<Vec<C2Point>, RunError> {
    let filt = Filtration::for_maps(schedule.stages().iter().map(|s| &s.map));
    let classifier = Classifier::new(schedule, budget, filt, attract_radius).map_err(compute)?;
    let b = params.point_box;
    let mut points = Vec::with_capacity(params.points);
    for _ in 0..1000 {
        let batch: Vec<C2Point> = (0..4 * params.points)
            .map(|_| {
                C2Point::new(
                    rng.gen_range(-b..=b),
                    rng.gen_range(-b..=b),
                    rng.gen_range(-b..=b),
                    rng.gen_range(-b..=b),
                )
            })
            .collect();
        let verdicts: Vec<bool> = batch
            .par_iter()
            .map(|p| classifier.classify(p).status == OrbitStatus::Attracted)
            .collect();
        points.extend(
            batch
                .iter()
                .zip(verdicts)
                .filter(|(_, a)| *a)
                .map(|(p, _)| *p)
                .take(params.points - points.len()),
        );
        if points.len() == params.points {
            return Ok(points);
        }
    }
    Err(RunError::Compute(
        "too few basin points in the sampling box".into(),
    ))
}

/// The configured schedule, or `params.schedules` random ones with one
/// application per stage and `a_j` uniform in `a_range`.
pub fn linearization_cases(config: &RunConfig) -> Result<Vec<LinearizationCase>, RunError> {
    let params = config.linearize.clone().unwrap_or_default();
    let seed = config.seed.expect("resolved");
    let (budget, r) = (
        config.budget.expect("resolved"),
        config.attract_radius.expect("resolved"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schedules: Vec<IterationSchedule> = match config.dynamics() {
        Some(s) => vec![s],
        None => (0..params.schedules)
            .map(|_| {
                let maps: Vec<AutoMap> = (0..params.stages)
                    .map(|_| {
                        AutoMap::henon(rng.gen_range(params.a_range[0]..=params.a_range[1]), 0.0)
                    })
                    .collect::<Result<_, _>>()
                    .map_err(compute)?;
                IterationSchedule::from_maps(maps).map_err(compute)
            })
            .collect::<Result<_, _>>()?,
    };
    schedules
        .into_iter()
        .map(|schedule| {
            let points = basin_points(&schedule, &params, &mut rng, budget, r)?;
            Ok(LinearizationCase { schedule, points })
        })
        .collect()
}

#[derive(Serialize)]
struct LinearizationSummary {
    schedules: usize,
    points_per_schedule: usize,
    steps_checked: usize,
    step_violations: usize,
    worst_step_ratio: f64,
    worst_fitted_rate: f64,
    min_pair_distance: f64,
}

fn run_linearize(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let params = config.linearize.clone().expect("resolved");
    let cases = linearization_cases(config)?;
    let reports: Vec<LinearizationReport> = cases
        .iter()
        .map(|c| {
            linearization_report(&c.schedule, &c.points, params.from, params.n, params.factor)
                .map_err(compute)
        })
        .collect::<Result<_, _>>()?;
    set.write(
        "linearize.csv",
        &csv_text(
            "schedule,steps_checked,step_violations,worst_step_ratio,worst_fitted_rate,min_pair_distance",
            reports.iter().enumerate().map(|(k, r)| {
                format!(
                    "{k},{},{},{},{},{}",
                    r.steps_checked,
                    r.step_violations,
                    fmt_f64(r.worst_step_ratio),
                    fmt_f64(r.worst_fitted_rate),
                    fmt_f64(r.min_pair_distance.min(f64::MAX))
                )
            }),
        ),
    )?;
    set.write_json(
        "linearize.json",
        &LinearizationSummary {
            schedules: reports.len(),
            points_per_schedule: params.points,
            steps_checked: reports.iter().map(|r| r.steps_checked).sum(),
            step_violations: reports.iter().map(|r| r.step_violations).sum(),
            worst_step_ratio: reports
                .iter()
                .map(|r| r.worst_step_ratio)
                .fold(0.0, f64::max)
                .min(f64::MAX),
            worst_fitted_rate: reports
                .iter()
                .map(|r| r.worst_fitted_rate)
                .fold(0.0, f64::max),
            min_pair_distance: reports
                .iter()
                .map(|r| r.min_pair_distance)
                .fold(f64::INFINITY, f64::min)
                .min(f64::MAX),
        },
    )?;
    Ok(None)
}

fn run_converge(config: &RunConfig, set: &mut ArtifactSet) -> Step {
    let c = config.converge.as_ref().expect("resolved");
    let schedule = match &c.build {
        Some(b) => match build_and_write(b, set, "built_")? {
            Ok(built) => built.schedule,
            Err(failure) => return Ok(Some(failure)),
        },
        None => schedule_of(config),
    };
    let depths = c
        .depths
        .clone()
        .unwrap_or_else(|| (1..=schedule.len()).collect());
    let out = julia_slice_convergence(
        &schedule,
        &depths,
        config.slice.as_ref().expect("resolved"),
        config.budget.expect("resolved"),
        config.filtration(),
        config.attract_radius.expect("resolved"),
    )
    .map_err(compute)?;
    set.write(
        "convergence.csv",
        &csv_text(
            "depth,hausdorff",
            out.iter()
                .map(|d| format!("{},{}", d.depth, fmt_f64(d.hausdorff))),
        ),
    )?;
    set.write_json("convergence.json", &out)?;
    Ok(None)
}
