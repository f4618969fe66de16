//! The transformation group generated by the orthogonal parts of a system:
//! closure, normal forms, finite orders and Kronecker powers.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{IfsError, Result};
use crate::geometry::{
    block_diag, max_entry_distance, op_norm, orth_mul, orth_pow, orth_residual, rotation_2d, Mat,
};
use crate::tolerance::{CLOSURE_CAP, GROUP_DEDUP, TAU_ANGLE, TAU_ORTH};

/// Hash index over matrices keyed by their two leading entries.
#[derive(Debug, Clone, Default)]
struct ElementIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl ElementIndex {
    fn new(tol: f64) -> Self {
        Self {
            cell: 2.0 * tol,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, m: &Mat) -> (i64, i64) {
        let a = m[(0, 0)];
        let b = if m.ncols() > 1 { m[(0, 1)] } else { 0.0 };
        ((a / self.cell).floor() as i64, (b / self.cell).floor() as i64)
    }

    fn insert(&mut self, m: &Mat, idx: usize) {
        let k = self.key(m);
        self.buckets.entry(k).or_default().push(idx);
    }

    /// Indices of stored elements within `tol` of `m` (max-entry metric).
    fn matches(&self, m: &Mat, elements: &[Mat], tol: f64) -> Vec<usize> {
        let (k0, k1) = self.key(m);
        let mut out = Vec::new();
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                if let Some(list) = self.buckets.get(&(k0 + d0, k1 + d1)) {
                    for &i in list {
                        if max_entry_distance(&elements[i], m) < tol {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Finite closure with a canonical (lexicographic) element order.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    elements: Vec<Mat>,
    tolerance: f64,
    index: ElementIndex,
}

impl FiniteGroup {
    fn from_elements(mut elements: Vec<Mat>, tolerance: f64) -> Self {
        // Sort on entries rounded far below the dedup tolerance so that
        // rounding noise does not perturb the order.
        let key = |m: &Mat| -> Vec<i64> {
            m.transpose().iter().map(|x| (x * 1e9).round() as i64).collect()
        };
        elements.sort_by(|a, b| key(a).cmp(&key(b)).then(Ordering::Equal));
        let mut index = ElementIndex::new(tolerance);
        for (i, e) in elements.iter().enumerate() {
            index.insert(e, i);
        }
        Self {
            elements,
            tolerance,
            index,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn elements(&self) -> &[Mat] {
        &self.elements
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Position of the unique element within tolerance of `m`.
    pub fn index_of(&self, m: &Mat) -> Result<usize> {
        let hits = self.index.matches(m, &self.elements, self.tolerance);
        match hits.len() {
            1 => Ok(hits[0]),
            0 => Err(IfsError::OutsideClosure {
                distance: self
                    .elements
                    .iter()
                    .map(|e| max_entry_distance(e, m))
                    .fold(f64::INFINITY, f64::min),
            }),
            n => Err(IfsError::AmbiguousLookup { matches: n }),
        }
    }

    pub fn identity_index(&self) -> Result<usize> {
        let d = self.elements[0].nrows();
        self.index_of(&Mat::identity(d, d))
    }
}

#[derive(Debug, Clone)]
pub enum GroupVerdict {
    Finite(FiniteGroup),
    /// Distinct elements exceeded the closure cap. A verdict, not a proof.
    InfiniteDetected { witness_count: usize },
}

#[derive(Debug, Clone)]
pub struct TransformationGroup {
    pub generators: Vec<Mat>,
    pub verdict: GroupVerdict,
    pub tolerance: f64,
}

impl TransformationGroup {
    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }
    pub fn finite(&self) -> Option<&FiniteGroup> {
        match &self.verdict {
            GroupVerdict::Finite(g) => Some(g),
            GroupVerdict::InfiniteDetected { .. } => None,
        }
    }
    pub fn is_finite(&self) -> bool {
        self.finite().is_some()
    }
    /// The finite closure, or `InfiniteGroup`.
    pub fn require_finite(&self) -> Result<&FiniteGroup> {
        match &self.verdict {
            GroupVerdict::Finite(g) => Ok(g),
            GroupVerdict::InfiniteDetected { witness_count } => Err(IfsError::InfiniteGroup {
                explored: *witness_count,
            }),
        }
    }
}

/// Closure of the semigroup generated by `generators` (plus their
/// transposes, which changes nothing for finite groups).
pub fn group_closure(generators: &[Mat], tolerance: f64, closure_cap: usize) -> Result<TransformationGroup> {
    let first = generators.first().ok_or(IfsError::Empty("generator list"))?;
    let d = first.nrows();
    if closure_cap == 0 {
        return Err(IfsError::InvalidArgument("closure_cap must be >= 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(IfsError::InvalidArgument("closure tolerance must be positive".into()));
    }
    for g in generators {
        if g.nrows() != d || g.ncols() != d {
            return Err(IfsError::DimensionMismatch {
                what: "generator",
                expected: d,
                got: g.nrows().max(g.ncols()),
            });
        }
        let residual = orth_residual(g);
        if residual > TAU_ORTH {
            return Err(IfsError::NotOrthogonal {
                residual,
                tol: TAU_ORTH,
            });
        }
    }
    let mut steps: Vec<Mat> = generators.to_vec();
    steps.extend(generators.iter().map(|g| g.transpose()));

    let mut elements = vec![Mat::identity(d, d)];
    let mut index = ElementIndex::new(tolerance);
    index.insert(&elements[0], 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &steps {
            let p = orth_mul(&elements[i], g);
            if index.matches(&p, &elements, tolerance).is_empty() {
                let idx = elements.len();
                index.insert(&p, idx);
                elements.push(p);
                queue.push_back(idx);
                if elements.len() > closure_cap {
                    return Ok(TransformationGroup {
                        generators: generators.to_vec(),
                        verdict: GroupVerdict::InfiniteDetected {
                            witness_count: elements.len(),
                        },
                        tolerance,
                    });
                }
            }
        }
    }
    Ok(TransformationGroup {
        generators: generators.to_vec(),
        verdict: GroupVerdict::Finite(FiniteGroup::from_elements(elements, tolerance)),
        tolerance,
    })
}

/// `group_closure` with the default tolerance and cap.
pub fn closure_of(generators: &[Mat]) -> Result<TransformationGroup> {
    group_closure(generators, GROUP_DEDUP, CLOSURE_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Block {
    PlusOne,
    MinusOne,
    /// Planar rotation block by the given angle.
    Rotation(f64),
}

impl Block {
    fn size(&self) -> usize {
        match self {
            Block::Rotation(_) => 2,
            _ => 1,
        }
    }
    fn matrix(&self) -> Mat {
        match *self {
            Block::PlusOne => Mat::from_element(1, 1, 1.0),
            Block::MinusOne => Mat::from_element(1, 1, -1.0),
            Block::Rotation(a) => rotation_2d(a),
        }
    }
    fn sort_rank(&self) -> (u8, f64) {
        match *self {
            Block::PlusOne => (0, 0.0),
            Block::MinusOne => (1, 0.0),
            Block::Rotation(a) => (2, a),
        }
    }
}

/// `T = basis_change · diag(blocks) · basis_changeᵀ`.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub basis_change: Mat,
    pub blocks: Vec<Block>,
}

impl BlockForm {
    pub fn reassemble(&self) -> Mat {
        let mats: Vec<Mat> = self.blocks.iter().map(|b| b.matrix()).collect();
        &self.basis_change * block_diag(&mats) * self.basis_change.transpose()
    }

    pub fn rotation_angles(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .filter_map(|b| match b {
                Block::Rotation(a) => Some(*a),
                _ => None,
            })
            .collect()
    }
}

/// Sub-diagonal entries below this split the real Schur form.
const SCHUR_SPLIT: f64 = 1e-10;

/// Normal form of an orthogonal matrix via its real Schur decomposition.
/// Rotation angles come out in `(0, π)`.
pub fn block_diagonalize(t: &Mat) -> Result<BlockForm> {
    let d = t.nrows();
    if d == 0 || t.ncols() != d {
        return Err(IfsError::InvalidArgument("block_diagonalize needs a square matrix".into()));
    }
    let residual = orth_residual(t);
    if residual > TAU_ORTH {
        return Err(IfsError::NotOrthogonal {
            residual,
            tol: TAU_ORTH,
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(t.clone(), 1e-15, 10_000)
        .ok_or(IfsError::NonConvergence {
            routine: "real Schur",
            iterations: 10_000,
        })?;
    let (mut q, s) = schur.unpack();

    // (block, first column) pairs in Schur order.
    let mut found: Vec<(Block, Vec<usize>)> = Vec::new();
    let mut i = 0;
    while i < d {
        if i + 1 < d && s[(i + 1, i)].abs() > SCHUR_SPLIT {
            let b = s.view((i, i), (2, 2)).into_owned();
            let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
            if det < 0.0 {
                // Reflection block: split into +1 and -1 axes.
                let sym = (&b + b.transpose()) * 0.5;
                let eig = sym.symmetric_eigen();
                let (plus, minus) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
                    (0, 1)
                } else {
                    (1, 0)
                };
                let cols = q.columns(i, 2).into_owned();
                let e = eig.eigenvectors;
                q.set_column(i, &(&cols * e.column(plus)));
                q.set_column(i + 1, &(&cols * e.column(minus)));
                found.push((Block::PlusOne, vec![i]));
                found.push((Block::MinusOne, vec![i + 1]));
            } else {
                let mut angle = (b[(1, 0)] - b[(0, 1)]).atan2(b[(0, 0)] + b[(1, 1)]);
                if angle < 0.0 {
                    let c = -q.column(i + 1).into_owned();
                    q.set_column(i + 1, &c);
                    angle = -angle;
                }
                if angle < 1e-15 {
                    found.push((Block::PlusOne, vec![i]));
                    found.push((Block::PlusOne, vec![i + 1]));
                } else if PI - angle < 1e-15 {
                    found.push((Block::MinusOne, vec![i]));
                    found.push((Block::MinusOne, vec![i + 1]));
                } else {
                    found.push((Block::Rotation(angle), vec![i, i + 1]));
                }
            }
            i += 2;
        } else {
            let blk = if s[(i, i)] >= 0.0 {
                Block::PlusOne
            } else {
                Block::MinusOne
            };
            found.push((blk, vec![i]));
            i += 1;
        }
    }

    found.sort_by(|a, b| {
        let (ra, aa) = a.0.sort_rank();
        let (rb, ab) = b.0.sort_rank();
        ra.cmp(&rb).then(aa.total_cmp(&ab))
    });
    let mut basis = Mat::zeros(d, d);
    let mut col = 0;
    let mut blocks = Vec::with_capacity(found.len());
    for (blk, cols) in found {
        debug_assert_eq!(cols.len(), blk.size());
        for c in cols {
            basis.set_column(col, &q.column(c));
            col += 1;
        }
        blocks.push(blk);
    }
    let form = BlockForm {
        basis_change: basis,
        blocks,
    };
    let err = max_entry_distance(&form.reassemble(), t);
    if err > 10.0 * TAU_ORTH {
        return Err(IfsError::Numeric(format!(
            "block form reassembly residual {err:.3e}"
        )));
    }
    Ok(form)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleOrder {
    FiniteOrder(u64),
    Irrational,
}

pub fn angle_order(alpha: f64, max_denominator: u64) -> AngleOrder {
    angle_order_with_tolerance(alpha, max_denominator, TAU_ANGLE)
}

/// Smallest `k <= max_denominator` with `|k·α/2π - p| < tau` for an
/// integer `p`. Only continued-fraction denominators can be minimal, so
/// those are the only candidates tested.
pub fn angle_order_with_tolerance(alpha: f64, max_denominator: u64, tau: f64) -> AngleOrder {
    let x = (alpha / (2.0 * PI)).rem_euclid(1.0);
    if x < tau || 1.0 - x < tau {
        return AngleOrder::FiniteOrder(1);
    }
    // Convergents p_n/q_n of x.
    let (mut p_prev, mut p) = (0.0f64, 1.0f64);
    let (mut q_prev, mut q) = (1.0f64, 0.0f64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        let p_next = a * p + p_prev;
        let q_next = a * q + q_prev;
        p_prev = p;
        p = p_next;
        q_prev = q;
        q = q_next;
        if q > max_denominator as f64 {
            break;
        }
        if q >= 1.0 && (q * x - p).abs() < tau {
            return AngleOrder::FiniteOrder(q as u64);
        }
        let frac = rem - a;
        if frac < 1e-300 {
            break;
        }
        rem = 1.0 / frac;
    }
    AngleOrder::Irrational
}

/// Largest denominator tried when classifying block angles.
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct KroneckerPower {
    /// Exponent with `T^k` generating a dense subgroup of `<T>`.
    pub k: u64,
    /// `2^N · ∏ k_i` over finite-order rotation blocks.
    pub k0: u64,
    pub finite_orders: Vec<u64>,
    pub irrational_blocks: usize,
    /// `z` with `‖T^{kz} - T‖ < witness_tol`.
    pub witness_z: u64,
    pub witness_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct KroneckerOptions {
    pub witness_tol: f64,
    pub z_cap: u64,
    pub max_denominator: u64,
}

impl Default for KroneckerOptions {
    fn default() -> Self {
        Self {
            witness_tol: 0.05,
            z_cap: 100_000,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
        }
    }
}

pub fn kronecker_power(t: &Mat, n: u32) -> Result<KroneckerPower> {
    kronecker_power_with(t, n, &KroneckerOptions::default())
}

/// `k = 2^N ∏ k_i + 1`. Angles are treated as rationally independent
/// unless `angle_order` finds a finite order; the density witness is then
/// searched for explicitly.
pub fn kronecker_power_with(t: &Mat, n: u32, opts: &KroneckerOptions) -> Result<KroneckerPower> {
    let form = block_diagonalize(t)?;
    let mut finite_orders = Vec::new();
    let mut irrational_blocks = 0;
    let mut has_minus = false;
    for b in &form.blocks {
        match *b {
            Block::Rotation(a) => match angle_order(a, opts.max_denominator) {
                AngleOrder::FiniteOrder(k) => finite_orders.push(k),
                AngleOrder::Irrational => irrational_blocks += 1,
            },
            Block::MinusOne => has_minus = true,
            Block::PlusOne => {}
        }
    }
    let overflow = || IfsError::InvalidArgument("Kronecker exponent overflows u64".into());
    let mut k0: u64 = 1u64.checked_shl(n).filter(|_| n < 64).ok_or_else(overflow)?;
    for &ki in &finite_orders {
        k0 = k0.checked_mul(ki).ok_or_else(overflow)?;
    }
    if n == 0 && has_minus {
        // -1 blocks need an odd exponent.
        k0 = k0.checked_mul(2).ok_or_else(overflow)?;
    }
    let k = k0.checked_add(1).ok_or_else(overflow)?;

    let p = orth_pow(t, k);
    let mut q = p.clone();
    let d = t.nrows() as f64;
    for z in 1..=opts.z_cap {
        let frob = (&q - t).norm();
        if frob < d.sqrt() * opts.witness_tol.max(1e-12) {
            let err = op_norm(&(&q - t));
            let tol = if irrational_blocks == 0 {
                1e-9
            } else {
                opts.witness_tol
            };
            if err < tol {
                return Ok(KroneckerPower {
                    k,
                    k0,
                    finite_orders,
                    irrational_blocks,
                    witness_z: z,
                    witness_error: err,
                });
            }
        }
        if irrational_blocks == 0 {
            break;
        }
        q = orth_mul(&q, &p);
    }
    Err(IfsError::SearchExhausted(format!(
        "no z <= {} with |T^(kz) - T| < {}",
        opts.z_cap, opts.witness_tol
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitDensity {
    DenseInGrassmannian,
    NotDense,
    Unknown,
}

/// Whether `{O(M) : O ∈ closure}` is dense in the Grassmannian of
/// `l`-planes. Decided only in the plane; finite groups never are.
pub fn orbit_dense_classification(group: &TransformationGroup, l: usize) -> OrbitDensity {
    let d = group.dim();
    if group.is_finite() {
        return OrbitDensity::NotDense;
    }
    if l == 0 || l >= d {
        return OrbitDensity::Unknown;
    }
    if d == 2 {
        OrbitDensity::DenseInGrassmannian
    } else {
        OrbitDensity::Unknown
    }
}
