//! Linear images of a self-similar set as graph-directed attractors, and
//! the exact-overlap projection that lowers the dimension.

use serde::Serialize;

use crate::dimension::{is_strongly_connected, sim_dim_gdifs, sim_dim_ssifs, Edge, Gdifs};
use crate::error::{IfsError, Result};
use crate::geometry::{max_entry_distance, orth_mul, LinearMap, Mat, Similarity, Ssifs, Subspace, Word};
use crate::group::closure_of;

#[derive(Debug, Clone)]
pub struct ProjectionGdifs {
    /// Edge `i * m + n` leaves vertex `i` along map `n`.
    pub gdifs: Gdifs,
    /// Group element attached to each vertex.
    pub vertex_labels: Vec<Mat>,
    /// Similarity dimension of the source system.
    pub source_dim: f64,
    pub identity_vertex: usize,
}

/// Vertices are the elements `O_i` of the finite transformation group; the
/// edge for map `n` at vertex `i` goes to `O_i T_n` and carries the
/// homothety `x -> r_n x + L O_i v_n`. Vertex `i` has attractor `L O_i (K)`.
pub fn build_projection_gdifs(ifs: &Ssifs, l: &LinearMap) -> Result<ProjectionGdifs> {
    if l.source_dim() != ifs.dim() {
        return Err(IfsError::DimensionMismatch {
            what: "linear map columns",
            expected: ifs.dim(),
            got: l.source_dim(),
        });
    }
    if l.rank() == 0 {
        return Err(IfsError::InvalidArgument("linear map is zero".into()));
    }
    let group = closure_of(&ifs.rotations())?;
    let fg = group.require_finite()?;
    let labels = fg.elements().to_vec();
    let m = ifs.len();
    let mut edges = Vec::with_capacity(labels.len() * m);
    for (i, o) in labels.iter().enumerate() {
        let lo = l.matrix() * o;
        for s in ifs.maps() {
            let to = fg.index_of(&orth_mul(o, s.rotation()))?;
            let v = &lo * s.translation();
            edges.push(Edge {
                from: i,
                to,
                map: Similarity::homothety(s.ratio(), v)?,
            });
        }
    }
    let gdifs = Gdifs::new(labels.len(), edges)?;
    if !is_strongly_connected(&gdifs) {
        return Err(IfsError::Numeric(
            "projection graph of a finite group came out disconnected".into(),
        ));
    }
    Ok(ProjectionGdifs {
        identity_vertex: fg.identity_index()?,
        gdifs,
        vertex_labels: labels,
        source_dim: sim_dim_ssifs(ifs)?.value,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapWitness {
    /// Words of the original system.
    pub word_a: Word,
    pub word_b: Word,
    /// Iteration level the pair was found at.
    pub level: usize,
    /// `Π_M ∘ S_a`, equal to `Π_M ∘ S_b`.
    #[serde(skip)]
    pub shared_ratio: f64,
    #[serde(skip)]
    pub shared_offset: Vec<f64>,
    /// Largest entry difference between the two projected maps.
    pub mismatch: f64,
}

#[derive(Debug, Clone)]
pub struct DimensionDrop {
    pub subspace: Subspace,
    /// Projection GD-IFS of the level system with the duplicate loop removed.
    pub dropped_gdifs: Gdifs,
    pub s_original: f64,
    pub s_reduced: f64,
    pub witness: OverlapWitness,
    /// Translation difference `v` with `K_b = K_a + v`.
    pub shift: Vec<f64>,
}

/// First pair `a < b` (by index) with identity rotation and equal ratio.
fn first_identity_pair(ifs: &Ssifs, tol: f64) -> Option<(usize, usize)> {
    let d = ifs.dim();
    let id = Mat::identity(d, d);
    let mut cands: Vec<(f64, usize)> = ifs
        .maps()
        .iter()
        .enumerate()
        .filter(|(_, s)| max_entry_distance(s.rotation(), &id) < tol)
        .map(|(i, s)| (s.ratio(), i))
        .collect();
    cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    while start < cands.len() {
        let mut end = start + 1;
        while end < cands.len() && cands[end].0 - cands[start].0 <= tol * cands[start].0 {
            end += 1;
        }
        if end - start >= 2 {
            let mut idx: Vec<usize> = cands[start..end].iter().map(|c| c.1).collect();
            idx.sort_unstable();
            let pair = (idx[0], idx[1]);
            if best.is_none_or(|b| pair < b) {
                best = Some(pair);
            }
        }
        start = end;
    }
    best
}

/// Finds two words with identical rotation and ratio, projects along their
/// translation difference and removes the duplicated loop.
///
/// Levels 1, q and 2q are tried in that order.
pub fn find_dimension_drop(ifs: &Ssifs, l: usize) -> Result<DimensionDrop> {
    let d = ifs.dim();
    if l == 0 || l >= d {
        return Err(IfsError::InvalidArgument(format!(
            "subspace dimension {l} must lie in [1, {d})"
        )));
    }
    let tol = ifs.tolerances();
    let group = closure_of(&ifs.rotations())?;
    let q = group.require_finite()?.order();
    let mut levels = vec![1, q, 2 * q];
    levels.dedup();
    let s_original = sim_dim_ssifs(ifs)?.value;

    for &level in &levels {
        let (system, words) = if level == 1 {
            (ifs.clone(), ifs.words_of_length(1)?)
        } else {
            ifs.iterate(level)?
        };
        let Some((a, b)) = first_identity_pair(&system, tol.orth.max(1e-12)) else {
            continue;
        };
        let sa = system.map(a);
        let sb = system.map(b);
        let v = sb.translation() - sa.translation();
        let scale = 1.0 + sa.translation().norm().max(sb.translation().norm());
        let subspace = if v.norm() <= tol.num * scale {
            Subspace::coordinate(d, l)?
        } else {
            Subspace::inside_complement_of(&v, l)?
        };
        let p = subspace.projection();
        let pa = p.apply(sa.translation());
        let pb = p.apply(sb.translation());
        let mismatch = (&pa - &pb)
            .iter()
            .fold((sa.ratio() - sb.ratio()).abs(), |acc, x| acc.max(x.abs()));
        if mismatch > tol.num {
            return Err(IfsError::Numeric(format!(
                "projected overlap maps differ by {mismatch:.3e}"
            )));
        }

        let proj = build_projection_gdifs(&system, &p)?;
        let edge = proj.identity_vertex * system.len() + b;
        let dropped = proj.gdifs.without_edge(edge)?;
        let s_reduced = sim_dim_gdifs(&dropped)?.value;
        if !(s_reduced < s_original - 1e-12) {
            return Err(IfsError::Numeric(format!(
                "removing a duplicate loop did not lower the dimension ({s_reduced} vs {s_original})"
            )));
        }
        return Ok(DimensionDrop {
            subspace,
            dropped_gdifs: dropped,
            s_original,
            s_reduced,
            witness: OverlapWitness {
                word_a: words[a].clone(),
                word_b: words[b].clone(),
                level,
                shared_ratio: sa.ratio(),
                shared_offset: pa.iter().copied().collect(),
                mismatch,
            },
            shift: v.iter().copied().collect(),
        });
    }
    Err(IfsError::NoDropWitness { levels })
}
