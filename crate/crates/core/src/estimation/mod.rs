//! Finite samples of attractors and box-counting estimates on them.

mod boxcount;
pub mod csv;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::sim_dim_ssifs;
use crate::error::{IfsError, Result};
use crate::geometry::{LinearMap, Mat, Ssifs, MAX_ITERATED_WORDS};

pub use boxcount::{
    box_count, box_dim, box_dim_default, covering_sum_upper_bound, covering_sweep, default_scales,
    dyadic_scales, BoxDimEstimate, CoveringPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChaosWeights {
    Uniform,
    /// Map `i` chosen with probability `r_i^s`.
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SamplingMethod {
    ChaosGame { weights: ChaosWeights },
    DeterministicDepth { depth: usize },
    /// Points supplied directly.
    Supplied,
}

impl SamplingMethod {
    pub fn chaos_uniform() -> Self {
        SamplingMethod::ChaosGame {
            weights: ChaosWeights::Uniform,
        }
    }
    pub fn chaos_natural() -> Self {
        SamplingMethod::ChaosGame {
            weights: ChaosWeights::Natural,
        }
    }
    /// Depth is filled in by the sampler.
    pub fn deterministic() -> Self {
        SamplingMethod::DeterministicDepth { depth: 0 }
    }
}

/// Flat row-major point storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    pub seed: u64,
    pub method: SamplingMethod,
    pub source_hash: String,
    /// Linear map applied since sampling, if any.
    pub transform: Option<Mat>,
}

impl PointCloud {
    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(IfsError::InvalidArgument(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(IfsError::NonFinite("point cloud"));
        }
        Ok(Self {
            dim,
            coords,
            seed: 0,
            method: SamplingMethod::Supplied,
            source_hash: String::new(),
            transform: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Per-axis `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.points() {
            for (k, &x) in p.iter().enumerate() {
                b[k].0 = b[k].0.min(x);
                b[k].1 = b[k].1.max(x);
            }
        }
        b
    }

    /// Largest coordinate extent; the exact diameter in one dimension.
    pub fn extent(&self) -> f64 {
        self.bounds()
            .iter()
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> PointCloud {
        let mut out = self.clone();
        out.coords.iter_mut().for_each(|x| *x *= factor);
        out
    }
}

const CHAOS_BLOCK: usize = 1 << 14;
const BURN_IN: usize = 100;

/// Samples `n` points of the attractor.
///
/// The chaos game runs independent ChaCha streams per fixed block of
/// points, so the output is bit-identical for a seed on any thread count.
/// The deterministic method returns all `m^k` images of the first map's
/// fixed point at the smallest depth `k` with `m^k >= n`.
pub fn sample_attractor(ifs: &Ssifs, n: usize, seed: u64, method: SamplingMethod) -> Result<PointCloud> {
    if n == 0 {
        return Err(IfsError::InvalidArgument("sample size must be >= 1".into()));
    }
    let d = ifs.dim();
    let x0: Vec<f64> = ifs.map(0).fixed_point()?.iter().copied().collect();
    let (coords, method) = match method {
        SamplingMethod::ChaosGame { weights } => {
            let cumulative: Vec<f64> = match weights {
                ChaosWeights::Uniform => Vec::new(),
                ChaosWeights::Natural => {
                    let s = sim_dim_ssifs(ifs)?.value;
                    let mut acc = 0.0;
                    ifs.ratios()
                        .iter()
                        .map(|r| {
                            acc += r.powf(s);
                            acc
                        })
                        .collect()
                }
            };
            let m = ifs.len();
            let blocks = n.div_ceil(CHAOS_BLOCK);
            let chunks: Vec<Vec<f64>> = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let len = CHAOS_BLOCK.min(n - b * CHAOS_BLOCK);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(b as u64);
                    let pick = |rng: &mut ChaCha8Rng| -> usize {
                        if cumulative.is_empty() {
                            rng.random_range(0..m)
                        } else {
                            let u: f64 = rng.random::<f64>() * cumulative[m - 1];
                            cumulative.partition_point(|&c| c <= u).min(m - 1)
                        }
                    };
                    let mut x = x0.clone();
                    let mut y = vec![0.0; d];
                    for _ in 0..BURN_IN {
                        ifs.map(pick(&mut rng)).apply_slice(&x, &mut y);
                        std::mem::swap(&mut x, &mut y);
                    }
                    let mut out = Vec::with_capacity(len * d);
                    for _ in 0..len {
                        ifs.map(pick(&mut rng)).apply_slice(&x, &mut y);
                        std::mem::swap(&mut x, &mut y);
                        out.extend_from_slice(&x);
                    }
                    out
                })
                .collect();
            (chunks.concat(), SamplingMethod::ChaosGame { weights })
        }
        SamplingMethod::DeterministicDepth { .. } => {
            let m = ifs.len();
            let mut k = 0usize;
            let mut count = 1usize;
            while count < n {
                k += 1;
                count = count.saturating_mul(m);
                if count > MAX_ITERATED_WORDS * 16 {
                    return Err(IfsError::InvalidArgument(format!(
                        "deterministic sample of {n} points is too deep"
                    )));
                }
            }
            let mut level = x0.clone();
            let mut y = vec![0.0; d];
            for _ in 0..k {
                let mut next = Vec::with_capacity(level.len() * m);
                for s in ifs.maps() {
                    for p in level.chunks_exact(d) {
                        s.apply_slice(p, &mut y);
                        next.extend_from_slice(&y);
                    }
                }
                level = next;
            }
            (level, SamplingMethod::DeterministicDepth { depth: k })
        }
        SamplingMethod::Supplied => {
            return Err(IfsError::InvalidArgument("supplied clouds are not sampled".into()));
        }
    };
    Ok(PointCloud {
        dim: d,
        coords,
        seed,
        method,
        source_hash: ifs.digest(),
        transform: None,
    })
}

/// Pointwise image `L(x)`; the cloud remembers the accumulated map.
pub fn project_cloud(cloud: &PointCloud, l: &LinearMap) -> Result<PointCloud> {
    if l.source_dim() != cloud.dim {
        return Err(IfsError::DimensionMismatch {
            what: "projection columns",
            expected: cloud.dim,
            got: l.source_dim(),
        });
    }
    let a = l.matrix();
    let d2 = l.target_dim();
    let d = cloud.dim;
    let coords: Vec<f64> = cloud
        .coords
        .par_chunks_exact(d)
        .flat_map_iter(|p| {
            (0..d2).map(move |i| (0..d).map(|j| a[(i, j)] * p[j]).sum::<f64>())
        })
        .collect();
    let transform = Some(match &cloud.transform {
        Some(prev) => a * prev,
        None => a.clone(),
    });
    Ok(PointCloud {
        dim: d2,
        coords,
        seed: cloud.seed,
        method: cloud.method,
        source_hash: cloud.source_hash.clone(),
        transform,
    })
}
