// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::cloud::PointCloud;
use crate::error::DimensionError;
use crate::output::{fmt_f64, to_json};

const CHUNK: usize = 4096;

fn validate_eps(eps: f64) -> Result<(), DimensionError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(DimensionError::InvalidScales(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

/// Number of occupied origin-anchored grid boxes of side `2·eps`.
pub fn box_count(cloud: &PointCloud, eps: f64) -> Result<usize, DimensionError> {
    cloud.require_nonempty()?;
    validate_eps(eps)?;
    let side = 2.0 * eps;
    let dim = cloud.dim();
    let set = cloud
        .coords()
        .par_chunks(CHUNK * dim)
        .fold(HashSet::new, |mut set, chunk| {
            for p in chunk.chunks_exact(dim) {
                let mut key = [0i64; 4];
                for (k, x) in key.iter_mut().zip(p) {
                    *k = (x / side).floor() as i64;
                }
                set.insert(key);
            }
            set
        })
        .reduce(HashSet::new, |mut a, b| {
            if a.len() < b.len() {
                return b.into_iter().chain(a).collect();
            }
            a.extend(b);
            a
        });
    Ok(set.len())
}

/// `eps^h · box_count(cloud, eps)`.
pub fn box_content(cloud: &PointCloud, h: f64, eps: f64) -> Result<f64, DimensionError> {
    Ok(gamma(eps, h, box_count(cloud, eps)?))
}

#[inline]
fn gamma(eps: f64, h: f64, count: usize) -> f64 {
    eps.powf(h) * count as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRecord {
    pub eps: f64,
    pub count: usize,
    /// `eps^h · count` for each requested `h`.
    pub gamma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountTable {
    pub hs: Vec<f64>,
    pub records: Vec<BoxCountRecord>,
    pub fitted_slope: f64,
    /// Half-open index range of the records used by the fit.
    pub fit_window: [usize; 2],
    /// Largest absolute deviation of `ln count` from the fitted line.
    pub residual: f64,
    /// Finite proxy for `μ_h`: the largest `γ_h` over the three finest
    /// scales of the fit window.
    pub mu_h_proxy: Vec<f64>,
}

impl BoxCountTable {
    /// CSV with header `eps,count,gamma_<h>…`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let mut header = vec!["eps".to_string(), "count".to_string()];
        header.extend(self.hs.iter().map(|h| format!("gamma_{h}")));
        w.write_record(&header).expect("in-memory write");
        for r in &self.records {
            let mut row = vec![fmt_f64(r.eps), r.count.to_string()];
            row.extend(r.gamma.iter().map(|g| fmt_f64(*g)));
            w.write_record(&row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// One-line JSON summary `{slope, window, residual, mu_h_proxy}`.
    pub fn summary_json(&self) -> String {
        let proxy: Vec<_> = self
            .hs
            .iter()
            .zip(&self.mu_h_proxy)
            .map(|(h, v)| serde_json::json!({"h": h, "value": v}))
            .collect();
        to_json(&serde_json::json!({
            "slope": self.fitted_slope,
            "window": self.fit_window,
            "residual": self.residual,
            "mu_h_proxy": proxy,
        }))
        .expect("serializable")
    }
}

/// Exact dyadic check: `eps = 2^k` for an integer `k`.
fn is_dyadic(eps: f64) -> bool {
    let k = eps.log2().round();
    eps.is_finite() && eps > 0.0 && (k as i32 as f64) == k && 2f64.powi(k as i32) == eps
}

/// Box counts at the given dyadic scales and the least-squares slope of
/// `ln count` against `ln(1/eps)`. The fit uses every supplied scale except
/// saturated ones: leading coarse scales with a single box and trailing fine
/// scales where every point has its own box.
pub fn dimension_fit(
    cloud: &PointCloud,
    eps: &[f64],
    hs: &[f64],
) -> Result<BoxCountTable, DimensionError> {
    cloud.require_nonempty()?;
    if cloud.len() < 10 {
        return Err(DimensionError::InvalidCloud(format!(
            "dimension fit needs at least 10 points, got {}",
            cloud.len()
        )));
    }
    if eps.len() < 6 {
        return Err(DimensionError::InvalidScales(format!(
            "need at least 6 scales, got {}",
            eps.len()
        )));
    }
    if let Some(e) = eps.iter().find(|e| !is_dyadic(**e)) {
        return Err(DimensionError::InvalidScales(format!(
            "scale {e} is not a power of two"
        )));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DimensionError::InvalidScales(
            "scales must be strictly decreasing".into(),
        ));
    }
    if hs.iter().any(|h| !h.is_finite()) {
        return Err(DimensionError::InvalidScales(
            "exponents must be finite".into(),
        ));
    }
    let counts = eps
        .iter()
        .map(|&e| box_count(cloud, e))
        .collect::<Result<Vec<_>, _>>()?;
    if counts.iter().all(|&c| c == counts[0]) {
        return Err(DimensionError::DegenerateFit(
            "all box counts are equal".into(),
        ));
    }
    let records: Vec<BoxCountRecord> = eps
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| BoxCountRecord {
            eps: e,
            count: c,
            gamma: hs.iter().map(|&h| gamma(e, h, c)).collect(),
        })
        .collect();

    let mut lo = 0;
    while lo + 1 < counts.len() && counts[lo] == 1 && counts[lo + 1] == 1 {
        lo += 1;
    }
    let mut hi = counts.len();
    while hi > lo + 1 && counts[hi - 1] == cloud.len() && counts[hi - 2] == cloud.len() {
        hi -= 1;
    }
    if hi - lo < 2 {
        return Err(DimensionError::DegenerateFit(
            "fewer than two unsaturated scales".into(),
        ));
    }
    let xs: Vec<f64> = eps[lo..hi].iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts[lo..hi].iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    let fine_start = hi.saturating_sub(3).max(lo);
    let mu_h_proxy = (0..hs.len())
        .map(|k| {
            records[fine_start..hi]
                .iter()
                .map(|r| r.gamma[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(BoxCountTable {
        hs: hs.to_vec(),
        records,
        fitted_slope: slope,
        fit_window: [lo, hi],
        residual,
        mu_h_proxy,
    })
}

/// `(slope, intercept)` of the least-squares line through `(xs, ys)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `[2^-k0, 2^-(k0+1), …, 2^-k1]`.
pub fn dyadic_scales(k0: i32, k1: i32) -> Vec<f64> {
    (k0..=k1).map(|k| 2f64.powi(-k)).collect()
}
