// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::DimensionError;

/// Scales `ε̂ > ε` and separation `δ` for one stage of the covering
/// argument, with `(ε̂/ε)^h < 2` and `δ < ε̂ − ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringPlan {
    pub h: f64,
    pub eps_hat: f64,
    pub eps: f64,
    pub delta: f64,
}

impl CoveringPlan {
    pub fn new(h: f64, eps_hat: f64, eps: f64, delta: f64) -> Result<Self, DimensionError> {
        let plan = Self {
            h,
            eps_hat,
            eps,
            delta,
        };
        plan.check()?;
        Ok(plan)
    }

    pub fn check(&self) -> Result<(), DimensionError> {
        let Self {
            h,
            eps_hat,
            eps,
            delta,
        } = *self;
        let finite = [h, eps_hat, eps, delta].iter().all(|v| v.is_finite());
        if !finite || h <= 0.0 || eps <= 0.0 || delta <= 0.0 {
            return Err(DimensionError::InvalidPlan(
                "h, eps and delta must be positive and finite".into(),
            ));
        }
        if eps >= eps_hat {
            return Err(DimensionError::InvalidPlan(format!(
                "eps {eps} must be below eps_hat {eps_hat}"
            )));
        }
        if delta >= eps_hat - eps {
            return Err(DimensionError::InvalidPlan(format!(
                "delta {delta} must be below eps_hat - eps"
            )));
        }
        if (eps_hat / eps).powf(h) >= 2.0 {
            return Err(DimensionError::InvalidPlan(
                "(eps_hat/eps)^h must be below 2".into(),
            ));
        }
        Ok(())
    }

    /// Plan for 1-based stage `j`: `h_j = 4 − 2^{1−j}`,
    /// `ε̂_j = ε̂_1·2^{1−j}`, `ε_j = ε̂_j·2^{−1/(2h_j)}` (so
    /// `(ε̂_j/ε_j)^{h_j} = √2`) and `δ_j = (ε̂_j − ε_j)/2`.
    pub fn for_stage(j: usize, eps_hat_1: f64) -> Result<Self, DimensionError> {
        if j == 0 {
            return Err(DimensionError::InvalidPlan(
                "stages are numbered from 1".into(),
            ));
        }
        if !(eps_hat_1.is_finite() && eps_hat_1 > 0.0) {
            return Err(DimensionError::InvalidPlan(
                "eps_hat must be positive".into(),
            ));
        }
        let e = 1 - j as i32;
        let h = 4.0 - 2f64.powi(e);
        let eps_hat = eps_hat_1 * 2f64.powi(e);
        let eps = eps_hat * 2f64.powf(-1.0 / (2.0 * h));
        Self::new(h, eps_hat, eps, (eps_hat - eps) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_plans_satisfy_invariants() {
        for j in 1..=30 {
            let p = CoveringPlan::for_stage(j, 0.25).unwrap();
            assert!(p.eps < p.eps_hat && p.delta < p.eps_hat - p.eps);
            assert!((p.eps_hat / p.eps).powf(p.h) < 2.0);
            assert!(p.h < 4.0);
        }
        let p1 = CoveringPlan::for_stage(1, 0.25).unwrap();
        assert_eq!((p1.h, p1.eps_hat), (3.0, 0.25));
        assert!(CoveringPlan::for_stage(2, 0.25).unwrap().h > p1.h);
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(CoveringPlan::new(2.0, 1.0, 1.0, 0.0001).is_err());
        assert!(CoveringPlan::new(2.0, 1.0, 0.9, 0.2).is_err());
        assert!(CoveringPlan::new(8.0, 1.0, 0.9, 0.01).is_err());
        assert!(CoveringPlan::new(2.0, 1.0, 0.9, 0.01).is_ok());
        assert!(CoveringPlan::for_stage(0, 1.0).is_err());
    }
}
