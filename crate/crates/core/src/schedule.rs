// SPDX-License-Identifier: Apache-2.0

//! Iteration schedules `(f_j, n_j)`: the map `f_j` is applied `n_j` times in
//! stage `j`. After the listed stages the last stage repeats forever, so a
//! schedule always describes an infinite sequence of maps.

use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::map::AutoMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    #[serde(flatten)]
    pub map: AutoMap,
    #[serde(rename = "n")]
    pub repeat: u64,
}

impl Stage {
    pub fn new(map: AutoMap, repeat: u64) -> Self {
        Self { map, repeat }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleSpec", into = "ScheduleSpec")]
pub struct IterationSchedule {
    stages: Vec<Stage>,
    radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl TryFrom<ScheduleSpec> for IterationSchedule {
    type Error = DynamicsError;
    fn try_from(s: ScheduleSpec) -> Result<Self, Self::Error> {
        let schedule = IterationSchedule::new(s.stages)?;
        match s.radii {
            Some(r) => schedule.with_radii(r),
            None => Ok(schedule),
        }
    }
}

impl From<IterationSchedule> for ScheduleSpec {
    fn from(s: IterationSchedule) -> Self {
        ScheduleSpec {
            stages: s.stages,
            radii: s.radii,
        }
    }
}

impl IterationSchedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self, DynamicsError> {
        if stages.is_empty() {
            return Err(DynamicsError::InvalidSchedule(
                "at least one stage is required".into(),
            ));
        }
        if let Some(j) = stages.iter().position(|s| s.repeat == 0) {
            return Err(DynamicsError::InvalidSchedule(format!(
                "stage {} has repeat count 0",
                j + 1
            )));
        }
        Ok(Self {
            stages,
            radii: None,
        })
    }

    /// A single map applied forever.
    pub fn single(map: AutoMap) -> Self {
        Self {
            stages: vec![Stage::new(map, 1)],
            radii: None,
        }
    }

    /// `f_j = (z² + a_j w, a_j z)` with `a_{j+1} = a_j^t`, one application
    /// per stage. Needs `0 < a_1 < 1` and `t > 2`; fails once `a_j`
    /// underflows.
    pub fn fornaess(a1: f64, t: f64, stages: usize) -> Result<Self, DynamicsError> {
        if !(a1 > 0.0 && a1 < 1.0) {
            return Err(DynamicsError::InvalidSchedule(format!(
                "a1 must lie in (0, 1), got {a1}"
            )));
        }
        if !(t > 2.0 && t.is_finite()) {
            return Err(DynamicsError::InvalidSchedule(format!(
                "t must exceed 2, got {t}"
            )));
        }
        let mut maps = Vec::with_capacity(stages);
        let mut a = a1;
        for j in 1..=stages {
            if a < f64::MIN_POSITIVE {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "a_{j} underflows; use at most {} stages",
                    j - 1
                )));
            }
            maps.push(AutoMap::henon(a, 0.0)?);
            a = a.powf(t);
        }
        Self::from_maps(maps)
    }

    /// One application of each map, in order.
    pub fn from_maps(maps: impl IntoIterator<Item = AutoMap>) -> Result<Self, DynamicsError> {
        Self::new(maps.into_iter().map(|m| Stage::new(m, 1)).collect())
    }

    /// Attaches the radii `r_1, r_2, …`; stage `j` is tested against
    /// `r_{j+1}`, and the last radius is reused past the end of the list.
    pub fn with_radii(mut self, radii: Vec<f64>) -> Result<Self, DynamicsError> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(DynamicsError::InvalidSchedule(
                "radii must be a nonempty list of positive reals".into(),
            ));
        }
        self.radii = Some(radii);
        Ok(self)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn radii(&self) -> Option<&[f64]> {
        self.radii.as_deref()
    }

    /// `r_{j+1}` for the 1-based stage number `j`.
    pub fn radius_after_stage(&self, j: u64) -> Option<f64> {
        let r = self.radii.as_ref()?;
        Some(r[(j as usize).min(r.len() - 1)])
    }

    /// Cumulative counts `N_j = n_1 + … + n_j` for the listed stages.
    pub fn cumulative_counts(&self) -> Vec<u64> {
        self.stages
            .iter()
            .scan(0u64, |acc, s| {
                *acc = acc.saturating_add(s.repeat);
                Some(*acc)
            })
            .collect()
    }

    /// The schedule `F_1, …, F_{j-1}, f_j, f_j, …` used for truncated Julia
    /// sets; `depth` is 1-based.
    pub fn truncated(&self, depth: usize) -> Result<Self, DynamicsError> {
        if depth == 0 || depth > self.stages.len() {
            return Err(DynamicsError::InvalidSchedule(format!(
                "truncation depth {depth} outside 1..={}",
                self.stages.len()
            )));
        }
        let mut stages = self.stages[..depth - 1].to_vec();
        stages.push(Stage::new(self.stages[depth - 1].map.clone(), 1));
        Ok(Self {
            stages,
            radii: self.radii.clone(),
        })
    }

    /// Every repeat count multiplied by `factor`.
    pub fn with_scaled_repeats(&self, factor: u64) -> Self {
        let stages = self
            .stages
            .iter()
            .map(|s| Stage::new(s.map.clone(), s.repeat.saturating_mul(factor)))
            .collect();
        Self {
            stages,
            radii: self.radii.clone(),
        }
    }

    pub fn cursor(&self) -> Cursor<'_> {
        Cursor {
            stages: &self.stages,
            stage: 0,
            done: 0,
        }
    }
}

/// Walks the infinite application sequence of a schedule.
#[derive(Clone, Debug)]
pub struct Cursor<'a> {
    stages: &'a [Stage],
    // 0-based virtual stage; may run past the end of the list
    stage: u64,
    done: u64,
}

impl<'a> Cursor<'a> {
    /// Index into the stage list of the map applied next.
    #[inline]
    pub fn stage_index(&self) -> usize {
        (self.stage as usize).min(self.stages.len() - 1)
    }

    #[inline]
    pub fn map(&self) -> &'a AutoMap {
        &self.stages[self.stage_index()].map
    }

    /// Records one application of [`Cursor::map`]. Returns the 1-based number
    /// of the stage it completed, if any.
    #[inline]
    pub fn advance(&mut self) -> Option<u64> {
        self.done += 1;
        if self.done == self.stages[self.stage_index()].repeat {
            self.done = 0;
            self.stage += 1;
            Some(self.stage)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn henon(a: f64) -> AutoMap {
        AutoMap::henon(a, 0.0).unwrap()
    }

    #[test]
    fn fornaess_sequence() {
        let s = IterationSchedule::fornaess(0.1, 2.5, 4).unwrap();
        let a: Vec<f64> = s
            .stages()
            .iter()
            .map(|st| st.map.henon_a().unwrap().re)
            .collect();
        assert_eq!(a[0], 0.1);
        assert!((a[1] - 10f64.powf(-2.5)).abs() < 1e-15);
        assert!((a[3] / 10f64.powf(-15.625) - 1.0).abs() < 1e-9);
        assert!(IterationSchedule::fornaess(0.1, 2.0, 3).is_err());
        assert!(IterationSchedule::fornaess(0.1, 2.5, 9).is_err());
        assert!(IterationSchedule::fornaess(0.1, 2.5, 0).is_err());
    }

    #[test]
    fn validation() {
        assert!(IterationSchedule::new(vec![]).is_err());
        assert!(IterationSchedule::new(vec![Stage::new(henon(0.5), 0)]).is_err());
        assert!(IterationSchedule::single(henon(0.5))
            .with_radii(vec![0.1, -1.0])
            .is_err());
    }

    #[test]
    fn cumulative_counts_increase() {
        let s = IterationSchedule::new(vec![
            Stage::new(henon(0.3), 2),
            Stage::new(henon(0.2), 3),
            Stage::new(henon(0.1), 1),
        ])
        .unwrap();
        assert_eq!(s.cumulative_counts(), vec![2, 5, 6]);
    }

    #[test]
    fn cursor_walks_stages_then_repeats_last() {
        let s = IterationSchedule::new(vec![Stage::new(henon(0.3), 2), Stage::new(henon(0.2), 3)])
            .unwrap();
        let mut c = s.cursor();
        let mut seen = vec![];
        for _ in 0..11 {
            let idx = c.stage_index();
            seen.push((idx, c.advance()));
        }
        assert_eq!(
            seen,
            vec![
                (0, None),
                (0, Some(1)),
                (1, None),
                (1, None),
                (1, Some(2)),
                (1, None),
                (1, None),
                (1, Some(3)),
                (1, None),
                (1, None),
                (1, Some(4)),
            ]
        );
    }

    #[test]
    fn truncation() {
        let s = IterationSchedule::new(vec![
            Stage::new(henon(0.3), 4),
            Stage::new(henon(0.2), 8),
            Stage::new(henon(0.1), 2),
        ])
        .unwrap();
        let t = s.truncated(2).unwrap();
        assert_eq!(t.stages().len(), 2);
        assert_eq!(t.stages()[0].repeat, 4);
        assert_eq!(t.stages()[1].repeat, 1);
        assert!(s.truncated(0).is_err() && s.truncated(4).is_err());
    }

    #[test]
    fn radii_lookup() {
        let s = IterationSchedule::single(henon(0.5))
            .with_radii(vec![1.0, 0.5, 0.25])
            .unwrap();
        assert_eq!(s.radius_after_stage(1), Some(0.5));
        assert_eq!(s.radius_after_stage(2), Some(0.25));
        assert_eq!(s.radius_after_stage(9), Some(0.25));
    }

    #[test]
    fn json_shape() {
        let s = IterationSchedule::new(vec![Stage::new(henon(0.3), 2)])
            .unwrap()
            .with_radii(vec![0.1, 0.1])
            .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"stages":[{"a":0.3,"c":0.0,"n":2}],"radii":[0.1,0.1]}"#
        );
        let back: IterationSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(
            serde_json::from_str::<IterationSchedule>(r#"{"stages":[{"a":0.3,"n":0}]}"#).is_err()
        );
    }
}
