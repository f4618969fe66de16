//! Spectral radius of nonnegative matrices by shifted power iteration.

use crate::error::{IfsError, Result};
use crate::geometry::Mat;
use crate::tolerance::{POWER_ITER_MAX_SWEEPS, TAU_EIG};

use super::graph::strongly_connected_components;

#[derive(Debug, Clone)]
pub struct PerronRoot {
    pub value: f64,
    /// Positive eigenvector, normalised to max entry 1.
    pub vector: Vec<f64>,
    pub sweeps: usize,
}

fn check_nonnegative(a: &Mat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(IfsError::InvalidArgument("spectral_radius needs a square matrix".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(IfsError::NonFinite("matrix"));
    }
    if a.iter().any(|&x| x < 0.0) {
        return Err(IfsError::InvalidArgument("matrix has negative entries".into()));
    }
    Ok(())
}

fn adjacency(a: &Mat) -> Vec<Vec<usize>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).filter(|&j| a[(i, j)] > 0.0).collect())
        .collect()
}

/// Perron root and vector of an irreducible nonnegative matrix.
///
/// Iterates on `A + cI` with `c > 0`, which is primitive, and stops when the
/// Collatz-Wielandt bounds `min (Bx)_i/x_i <= ρ(B) <= max (Bx)_i/x_i` agree
/// to `TAU_EIG` relative.
pub fn perron_root(a: &Mat) -> Result<PerronRoot> {
    check_nonnegative(a)?;
    let n = a.nrows();
    if n == 0 {
        return Err(IfsError::Empty("matrix"));
    }
    let max_row: f64 = (0..n).map(|i| a.row(i).sum()).fold(0.0, f64::max);
    if max_row == 0.0 {
        return Ok(PerronRoot {
            value: 0.0,
            vector: vec![1.0; n],
            sweeps: 0,
        });
    }
    let shift = 0.5 * max_row;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for sweep in 1..=POWER_ITER_MAX_SWEEPS {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let mut acc = shift * x[i];
            for j in 0..n {
                acc += a[(i, j)] * x[j];
            }
            y[i] = acc;
            let q = acc / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let top = y.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            x[i] = y[i] / top;
        }
        if hi - lo <= TAU_EIG * hi {
            return Ok(PerronRoot {
                value: 0.5 * (lo + hi) - shift,
                vector: x,
                sweeps: sweep,
            });
        }
    }
    Err(IfsError::NonConvergence {
        routine: "power iteration",
        iterations: POWER_ITER_MAX_SWEEPS,
    })
}

/// `ρ(A)` for `A >= 0`: the maximum Perron root over strongly connected
/// components.
pub fn spectral_radius(a: &Mat) -> Result<f64> {
    check_nonnegative(a)?;
    let comps = strongly_connected_components(&adjacency(a));
    let mut best = 0.0f64;
    for comp in comps {
        let k = comp.len();
        let sub = Mat::from_fn(k, k, |i, j| a[(comp[i], comp[j])]);
        if k == 1 {
            best = best.max(sub[(0, 0)]);
            continue;
        }
        best = best.max(perron_root(&sub)?.value);
    }
    Ok(best)
}
