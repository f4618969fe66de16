use rayon::prelude::*;
use serde::Serialize;

use super::PointCloud;
use crate::error::{IfsError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BoxDimEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Scales used in the final fit, strictly decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub r_squared: f64,
    /// Coarse scales discarded because the full fit had `r² < 0.99`.
    pub dropped_coarse: usize,
}

/// Occupied boxes of the origin-anchored grid with side `scale`.
pub fn box_count(cloud: &PointCloud, scale: f64) -> u64 {
    let d = cloud.dim();
    let inv = 1.0 / scale;
    let cell = |x: f64| (x * inv).floor() as i64;
    if d <= 4 {
        let mut keys: Vec<[i64; 4]> = cloud
            .points()
            .map(|p| {
                let mut k = [0i64; 4];
                for (slot, &x) in k.iter_mut().zip(p) {
                    *slot = cell(x);
                }
                k
            })
            .collect();
        keys.par_sort_unstable();
        keys.dedup();
        keys.len() as u64
    } else {
        let mut keys: Vec<Vec<i64>> = cloud
            .points()
            .map(|p| p.iter().map(|&x| cell(x)).collect())
            .collect();
        keys.par_sort_unstable();
        keys.dedup();
        keys.len() as u64
    }
}

/// `D · 2^-k` for `k` in `lo..=hi`.
pub fn dyadic_scales(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| base * 2f64.powi(-k)).collect()
}

/// `D · 2^-k`, `k = 3..=10`, with `D` the cloud extent (1 if the cloud is a point).
pub fn default_scales(cloud: &PointCloud) -> Vec<f64> {
    let e = cloud.extent();
    dyadic_scales(if e > 0.0 { e } else { 1.0 }, 3, 10)
}

fn fit(scales: &[f64], counts: &[u64]) -> Result<(f64, f64, f64)> {
    let xs: Vec<f64> = scales.iter().map(|s| (1.0 / s).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(IfsError::Numeric("degenerate box-count fit".into()));
    }
    if syy == 0.0 {
        return Ok((0.0, my, 1.0));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = (1.0 - ss_res / syy).clamp(0.0, 1.0);
    Ok((slope, intercept, r2))
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
///
/// With at least four scales and `r² < 0.99`, the two coarsest scales are
/// dropped and the fit redone.
pub fn box_dim(cloud: &PointCloud, scales: &[f64]) -> Result<BoxDimEstimate> {
    if cloud.len() < 100 {
        return Err(IfsError::InvalidArgument(format!(
            "box counting needs >= 100 points, got {}",
            cloud.len()
        )));
    }
    if scales.len() < 2 {
        return Err(IfsError::InvalidArgument("box counting needs >= 2 scales".into()));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(IfsError::InvalidArgument(
            "scales must be positive and strictly decreasing".into(),
        ));
    }
    let counts: Vec<u64> = scales.par_iter().map(|&s| box_count(cloud, s)).collect();
    let (mut slope, mut intercept, mut r2) = fit(scales, &counts)?;
    let mut start = 0;
    if r2 < 0.99 && scales.len() >= 4 {
        start = 2;
        (slope, intercept, r2) = fit(&scales[2..], &counts[2..])?;
    }
    Ok(BoxDimEstimate {
        slope,
        intercept,
        scales: scales[start..].to_vec(),
        counts: counts[start..].to_vec(),
        r_squared: r2,
        dropped_coarse: start,
    })
}

pub fn box_dim_default(cloud: &PointCloud) -> Result<BoxDimEstimate> {
    box_dim(cloud, &default_scales(cloud))
}

/// `N(scale) · (scale √d)^t`: an upper bound for the `t`-content of the
/// sample from the grid cover at that scale.
pub fn covering_sum_upper_bound(cloud: &PointCloud, t: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !(t > 0.0) {
        return Err(IfsError::InvalidArgument("need scale > 0 and t > 0".into()));
    }
    if cloud.is_empty() {
        return Err(IfsError::Empty("point cloud"));
    }
    let diam = scale * (cloud.dim() as f64).sqrt();
    Ok(box_count(cloud, scale) as f64 * diam.powf(t))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoveringPoint {
    pub scale: f64,
    pub count: u64,
    pub sum: f64,
}

pub fn covering_sweep(cloud: &PointCloud, t: f64, scales: &[f64]) -> Result<Vec<CoveringPoint>> {
    if !(t > 0.0) {
        return Err(IfsError::InvalidArgument("need t > 0".into()));
    }
    let diam_factor = (cloud.dim() as f64).sqrt();
    scales
        .par_iter()
        .map(|&scale| {
            if !(scale > 0.0) {
                return Err(IfsError::InvalidArgument("scales must be positive".into()));
            }
            let count = box_count(cloud, scale);
            Ok(CoveringPoint {
                scale,
                count,
                sum: count as f64 * (scale * diam_factor).powf(t),
            })
        })
        .collect()
}
