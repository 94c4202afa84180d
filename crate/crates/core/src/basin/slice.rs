// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{Classifier, OrbitStatus, OrbitVerdict};
use crate::error::BasinError;
use crate::filtration::Filtration;
use crate::output::{fmt_f64, to_json};
use crate::point::C2Point;
use crate::schedule::IterationSchedule;

#[derive(Clone, Debug, PartialEq)]
pub enum SliceKind {
    /// `(x, y) ↦ (x, y)` with both coordinates real.
    RealPlane,
    /// `(x, y) ↦ base + (x + iy)·direction`.
    ComplexLine { base: C2Point, direction: C2Point },
}

/// A square-celled window on a 2D slice of C².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SliceWire", into = "SliceWire")]
pub struct SliceSpec {
    pub kind: SliceKind,
    pub center: [f64; 2],
    pub half_widths: [f64; 2],
    pub resolution: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    RealPlane,
    ComplexLine,
}

/// Wire form of a [`SliceSpec`]: the kind tag sits beside the window fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceWire {
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<C2Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<C2Point>,
    center: [f64; 2],
    half_widths: [f64; 2],
    resolution: usize,
}

impl TryFrom<SliceWire> for SliceSpec {
    type Error = String;

    fn try_from(w: SliceWire) -> Result<Self, String> {
        let kind = match (w.kind, w.base, w.direction) {
            (KindTag::RealPlane, None, None) => SliceKind::RealPlane,
            (KindTag::RealPlane, _, _) => {
                return Err("a real_plane slice takes no base or direction".into())
            }
            (KindTag::ComplexLine, Some(base), Some(direction)) => {
                SliceKind::ComplexLine { base, direction }
            }
            (KindTag::ComplexLine, _, _) => {
                return Err("a complex_line slice needs base and direction".into())
            }
        };
        Ok(SliceSpec {
            kind,
            center: w.center,
            half_widths: w.half_widths,
            resolution: w.resolution,
        })
    }
}

impl From<SliceSpec> for SliceWire {
    fn from(s: SliceSpec) -> Self {
        let (kind, base, direction) = match s.kind {
            SliceKind::RealPlane => (KindTag::RealPlane, None, None),
            SliceKind::ComplexLine { base, direction } => {
                (KindTag::ComplexLine, Some(base), Some(direction))
            }
        };
        SliceWire {
            kind,
            base,
            direction,
            center: s.center,
            half_widths: s.half_widths,
            resolution: s.resolution,
        }
    }
}

impl SliceSpec {
    pub fn real_plane(center: [f64; 2], half_widths: [f64; 2], resolution: usize) -> Self {
        Self {
            kind: SliceKind::RealPlane,
            center,
            half_widths,
            resolution,
        }
    }

    /// Real-plane window `[x0, x1] × [y0, y1]`.
    pub fn real_window(x: [f64; 2], y: [f64; 2], resolution: usize) -> Self {
        Self::real_plane(
            [(x[0] + x[1]) / 2.0, (y[0] + y[1]) / 2.0],
            [(x[1] - x[0]) / 2.0, (y[1] - y[0]) / 2.0],
            resolution,
        )
    }

    pub fn validate(&self) -> Result<(), BasinError> {
        if self.resolution < 2 {
            return Err(BasinError::InvalidSlice(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if !self.half_widths.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(BasinError::InvalidSlice(
                "half_widths must be positive".into(),
            ));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(BasinError::InvalidSlice("center must be finite".into()));
        }
        if let SliceKind::ComplexLine { base, direction } = &self.kind {
            if !base.is_finite() || !direction.is_finite() || direction.norm() == 0.0 {
                return Err(BasinError::InvalidSlice(
                    "complex line needs a finite base and nonzero direction".into(),
                ));
            }
        }
        Ok(())
    }

    /// Cell side lengths along x and y.
    pub fn cell_size(&self) -> [f64; 2] {
        let n = self.resolution as f64;
        [2.0 * self.half_widths[0] / n, 2.0 * self.half_widths[1] / n]
    }

    /// Slice coordinates of the center of cell `(i, j)`; `i` runs along x.
    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let [dx, dy] = self.cell_size();
        [
            self.center[0] - self.half_widths[0] + (i as f64 + 0.5) * dx,
            self.center[1] - self.half_widths[1] + (j as f64 + 0.5) * dy,
        ]
    }

    #[inline]
    pub fn to_c2(&self, xy: [f64; 2]) -> C2Point {
        match &self.kind {
            SliceKind::RealPlane => C2Point::real(xy[0], xy[1]),
            SliceKind::ComplexLine { base, direction } => {
                *base + direction.scale_complex(Complex64::new(xy[0], xy[1]))
            }
        }
    }

    /// Length in C² of a unit step in slice coordinates.
    pub fn metric_scale(&self) -> f64 {
        match &self.kind {
            SliceKind::RealPlane => 1.0,
            SliceKind::ComplexLine { direction, .. } => direction.norm(),
        }
    }
}

/// Per-cell verdicts of a sampled slice, stored row-major with `j` (the y
/// index) as the row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelGrid {
    pub spec: SliceSpec,
    pub verdicts: Vec<OrbitVerdict>,
    pub schedule_digest: String,
}

impl LabelGrid {
    pub fn new(
        spec: SliceSpec,
        verdicts: Vec<OrbitVerdict>,
        schedule_digest: String,
    ) -> Result<Self, BasinError> {
        spec.validate()?;
        if verdicts.len() != spec.resolution * spec.resolution {
            return Err(BasinError::InvalidSlice(
                "verdict count does not match resolution".into(),
            ));
        }
        Ok(Self {
            spec,
            verdicts,
            schedule_digest,
        })
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &OrbitVerdict {
        &self.verdicts[j * self.spec.resolution + i]
    }

    #[inline]
    pub fn status(&self, i: usize, j: usize) -> OrbitStatus {
        self.get(i, j).status
    }

    /// `(attracted, escaped, undecided)`
    pub fn counts(&self) -> (usize, usize, usize) {
        self.verdicts
            .iter()
            .fold((0, 0, 0), |(a, e, u), v| match v.status {
                OrbitStatus::Attracted => (a + 1, e, u),
                OrbitStatus::Escaped => (a, e + 1, u),
                OrbitStatus::Undecided => (a, e, u + 1),
            })
    }

    /// Binary PGM (P5): 0 escaped, 128 undecided, 255 attracted. The first
    /// image row is the largest y.
    pub fn to_pgm(&self) -> Vec<u8> {
        let n = self.spec.resolution;
        let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
        out.reserve(n * n);
        for j in (0..n).rev() {
            for i in 0..n {
                out.push(match self.status(i, j) {
                    OrbitStatus::Escaped => 0,
                    OrbitStatus::Undecided => 128,
                    OrbitStatus::Attracted => 255,
                });
            }
        }
        out
    }

    /// CSV with header `i,j,x,y,status,stage`; `stage` is empty when
    /// undecided.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(["i", "j", "x", "y", "status", "stage"])
            .expect("in-memory write");
        let n = self.spec.resolution;
        for j in 0..n {
            for i in 0..n {
                let [x, y] = self.spec.cell_center(i, j);
                let v = self.get(i, j);
                let stage = v.stage.map(|s| s.to_string()).unwrap_or_default();
                w.write_record([
                    &i.to_string(),
                    &j.to_string(),
                    &fmt_f64(x),
                    &fmt_f64(y),
                    v.status.as_str(),
                    &stage,
                ])
                .expect("in-memory write");
            }
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Hex SHA-256 of the canonical JSON of the classification configuration.
pub fn configuration_digest(
    schedule: &IterationSchedule,
    budget: u64,
    filtration: Filtration,
    attract_radius: Option<f64>,
) -> String {
    let doc = serde_json::json!({
        "schedule": schedule,
        "budget": budget,
        "filtration_radius": filtration.radius,
        "attract_radius": attract_radius,
    });
    hex::encode(Sha256::digest(
        to_json(&doc).expect("serializable").as_bytes(),
    ))
}

/// Classifies every cell center of the slice in the current rayon pool.
pub fn sample_slice_with(
    spec: &SliceSpec,
    classifier: &Classifier<'_>,
) -> Result<LabelGrid, BasinError> {
    spec.validate()?;
    let n = spec.resolution;
    let verdicts: Vec<OrbitVerdict> = (0..n * n)
        .into_par_iter()
        .map(|k| classifier.classify(&spec.to_c2(spec.cell_center(k % n, k / n))))
        .collect();
    let digest = configuration_digest(
        classifier.schedule(),
        classifier.budget(),
        classifier.filtration(),
        Some(classifier.attract_radius()),
    );
    LabelGrid::new(spec.clone(), verdicts, digest)
}

pub fn sample_slice(
    spec: &SliceSpec,
    schedule: &IterationSchedule,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<LabelGrid, BasinError> {
    let classifier = Classifier::new(schedule, budget, filtration, attract_radius)?;
    sample_slice_with(spec, &classifier)
}
