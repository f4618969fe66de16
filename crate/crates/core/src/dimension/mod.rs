//! Similarity dimensions of self-similar and graph-directed systems.

pub mod graph;
pub mod perron;

use serde::Serialize;

use crate::error::{IfsError, Result};
use crate::geometry::{Mat, Similarity, Ssifs};
use crate::tolerance::{Tolerances, BISECTION_MAX_ITER};

pub use graph::strongly_connected_components;
pub use perron::{perron_root, spectral_radius, PerronRoot};

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub map: Similarity,
}

/// Graph-directed IFS on a directed multigraph with `vertex_count` vertices.
#[derive(Debug, Clone)]
pub struct Gdifs {
    vertex_count: usize,
    edges: Vec<Edge>,
    dim: usize,
}

impl Gdifs {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(IfsError::Empty("vertex set"));
        }
        let dim = edges.first().ok_or(IfsError::Empty("edge list"))?.map.dim();
        let mut out_degree = vec![0usize; vertex_count];
        for e in &edges {
            for v in [e.from, e.to] {
                if v >= vertex_count {
                    return Err(IfsError::IndexOutOfRange {
                        what: "vertex set",
                        index: v,
                        len: vertex_count,
                    });
                }
            }
            if e.map.dim() != dim {
                return Err(IfsError::DimensionMismatch {
                    what: "edge map",
                    expected: dim,
                    got: e.map.dim(),
                });
            }
            out_degree[e.from] += 1;
        }
        if let Some(v) = out_degree.iter().position(|&d| d == 0) {
            return Err(IfsError::InvalidArgument(format!(
                "vertex {v} has no outgoing edge"
            )));
        }
        Ok(Self {
            vertex_count,
            edges,
            dim,
        })
    }

    /// One vertex with a self-loop per map.
    pub fn single_vertex(ifs: &Ssifs) -> Self {
        let edges = ifs
            .maps()
            .iter()
            .map(|s| Edge {
                from: 0,
                to: 0,
                map: s.clone(),
            })
            .collect();
        Self {
            vertex_count: 1,
            edges,
            dim: ifs.dim(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        adj
    }

    /// `A^(s)_{ij} = Σ_{e: i→j} r_e^s`.
    pub fn matrix_at(&self, s: f64) -> Mat {
        let mut a = Mat::zeros(self.vertex_count, self.vertex_count);
        for e in &self.edges {
            a[(e.from, e.to)] += e.map.ratio().powf(s);
        }
        a
    }

    /// Copy with edge `index` removed.
    pub fn without_edge(&self, index: usize) -> Result<Gdifs> {
        if index >= self.edges.len() {
            return Err(IfsError::IndexOutOfRange {
                what: "edge list",
                index,
                len: self.edges.len(),
            });
        }
        let mut edges = self.edges.clone();
        edges.remove(index);
        Gdifs::new(self.vertex_count, edges)
    }
}

pub fn is_strongly_connected(g: &Gdifs) -> bool {
    graph::is_strongly_connected_adj(&g.adjacency())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DimensionMethod {
    SsifsMoran,
    GdifsSpectralRadius,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: DimensionMethod,
}

/// Bisection for the root of a strictly decreasing `f` on `[lo, hi]` with
/// `f(lo) > 0 > f(hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: &mut dyn FnMut(f64) -> Result<f64>) -> Result<(f64, usize)> {
    let mut it = 0;
    while it < BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        it += 1;
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), it))
}

pub fn sim_dim_ssifs(ifs: &Ssifs) -> Result<DimensionReport> {
    sim_dim_ratios(&ifs.ratios(), ifs.dim(), ifs.tolerances())
}

/// Root of `Σ r_i^s = 1`.
pub fn sim_dim_ratios(ratios: &[f64], dim: usize, tol: &Tolerances) -> Result<DimensionReport> {
    if ratios.len() < 2 {
        return Err(IfsError::InvalidArgument(
            "similarity dimension needs at least two maps".into(),
        ));
    }
    if let Some(&r) = ratios.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(IfsError::RatioOutOfRange(r));
    }
    let moran = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let r_max = ratios.iter().cloned().fold(0.0, f64::max);
    let m = ratios.len() as f64;
    let mut hi = dim.max(1) as f64 * m.ln() / (1.0 / r_max).ln() + 1.0;
    let mut widen = 0;
    while moran(hi) >= 0.0 {
        hi *= 2.0;
        widen += 1;
        if widen > 64 || !hi.is_finite() {
            return Err(IfsError::Numeric("similarity dimension bracket failed".into()));
        }
    }
    let (s, iterations) = bisect(0.0, hi, &mut |s| Ok(moran(s)))?;
    let residual = moran(s);
    if residual.abs() >= tol.dim {
        return Err(IfsError::NonConvergence {
            routine: "similarity dimension bisection",
            iterations,
        });
    }
    Ok(DimensionReport {
        value: s,
        residual,
        iterations,
        method: DimensionMethod::SsifsMoran,
    })
}

/// Root of `ρ(A^(s)) = 1` for a strongly connected GD-IFS.
pub fn sim_dim_gdifs(g: &Gdifs) -> Result<DimensionReport> {
    sim_dim_gdifs_with(g, &Tolerances::DEFAULT)
}

pub fn sim_dim_gdifs_with(g: &Gdifs, tol: &Tolerances) -> Result<DimensionReport> {
    let comps = strongly_connected_components(&g.adjacency());
    if comps.len() != 1 {
        return Err(IfsError::NotStronglyConnected {
            components: comps.len(),
        });
    }
    let mut rho_minus_one = |s: f64| -> Result<f64> { Ok(spectral_radius(&g.matrix_at(s))? - 1.0) };
    let at_zero = rho_minus_one(0.0)?;
    if at_zero <= tol.dim {
        // A single cycle: the attractor tuple consists of points.
        return Ok(DimensionReport {
            value: 0.0,
            residual: at_zero,
            iterations: 0,
            method: DimensionMethod::GdifsSpectralRadius,
        });
    }
    let max_row = |s: f64| -> f64 {
        let a = g.matrix_at(s);
        (0..a.nrows()).map(|i| a.row(i).sum()).fold(0.0, f64::max)
    };
    let mut hi = 1.0;
    let mut widen = 0;
    while max_row(hi) >= 1.0 {
        hi *= 2.0;
        widen += 1;
        if widen > 64 {
            return Err(IfsError::Numeric("GD-IFS dimension bracket failed".into()));
        }
    }
    let (s, iterations) = bisect(0.0, hi, &mut rho_minus_one)?;
    let residual = rho_minus_one(s)?;
    if residual.abs() >= tol.dim {
        return Err(IfsError::NonConvergence {
            routine: "spectral-radius bisection",
            iterations,
        });
    }
    Ok(DimensionReport {
        value: s,
        residual,
        iterations,
        method: DimensionMethod::GdifsSpectralRadius,
    })
}
