//! Similarities, words over the map alphabet, and self-similar systems.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{IfsError, Result};
use crate::tolerance::{Tolerances, TAU_SEP_REL};

pub type Mat = DMatrix<f64>;
pub type Vect = DVector<f64>;

/// Products drifting further than this from orthogonal get a polar cleanup.
const DRIFT_CLEANUP: f64 = 1e-13;

/// `max |M^T M - I|`.
pub fn orth_residual(m: &Mat) -> f64 {
    let g = m.transpose() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Nearest orthogonal matrix (orthogonal polar factor `U V^T`).
pub fn polar_orthonormalize(m: &Mat) -> Mat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    u * vt
}

/// Multiplies two orthogonal matrices, cleaning up accumulated drift.
pub fn orth_mul(a: &Mat, b: &Mat) -> Mat {
    let p = a * b;
    if orth_residual(&p) > DRIFT_CLEANUP {
        polar_orthonormalize(&p)
    } else {
        p
    }
}

/// `T^n` by repeated squaring with drift cleanup.
pub fn orth_pow(t: &Mat, mut n: u64) -> Mat {
    let mut result = Mat::identity(t.nrows(), t.ncols());
    let mut base = t.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = orth_mul(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = orth_mul(&base, &base);
        }
    }
    result
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.singular_values().max()
}

/// Operator-norm distance between two rotations.
pub fn rotation_distance(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b))
}

/// `max |a_ij - b_ij|`.
pub fn max_entry_distance(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Counter-clockwise planar rotation.
pub fn rotation_2d(angle: f64) -> Mat {
    let (s, c) = angle.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((at, at), (k, k)).copy_from(b);
        at += k;
    }
    out
}

/// Numerical rank with threshold `rel * sigma_max`.
pub fn numerical_rank(m: &Mat, rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * top).count()
}

/// Contracting similarity `x -> ratio * rotation * x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    ratio: f64,
    rotation: Mat,
    translation: Vect,
}

impl Similarity {
    pub fn new(ratio: f64, rotation: Mat, translation: Vect) -> Result<Self> {
        Self::with_tolerances(ratio, rotation, translation, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(
        ratio: f64,
        rotation: Mat,
        translation: Vect,
        tol: &Tolerances,
    ) -> Result<Self> {
        if !ratio.is_finite() {
            return Err(IfsError::NonFinite("ratio"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(IfsError::RatioOutOfRange(ratio));
        }
        let d = translation.len();
        if d == 0 {
            return Err(IfsError::Empty("translation"));
        }
        if rotation.nrows() != d || rotation.ncols() != d {
            return Err(IfsError::DimensionMismatch {
                what: "rotation",
                expected: d,
                got: rotation.nrows().max(rotation.ncols()),
            });
        }
        if rotation.iter().chain(translation.iter()).any(|x| !x.is_finite()) {
            return Err(IfsError::NonFinite("similarity"));
        }
        let residual = orth_residual(&rotation);
        if residual > tol.orth {
            return Err(IfsError::NotOrthogonal {
                residual,
                tol: tol.orth,
            });
        }
        Ok(Self {
            ratio,
            rotation,
            translation,
        })
    }

    /// Homothety `x -> ratio * x + translation`.
    pub fn homothety(ratio: f64, translation: Vect) -> Result<Self> {
        let d = translation.len();
        Self::new(ratio, Mat::identity(d, d), translation)
    }

    /// The identity map; ratio 1 is allowed only here.
    pub fn identity(dim: usize) -> Self {
        Self {
            ratio: 1.0,
            rotation: Mat::identity(dim, dim),
            translation: Vect::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }
    pub fn ratio(&self) -> f64 {
        self.ratio
    }
    pub fn rotation(&self) -> &Mat {
        &self.rotation
    }
    pub fn translation(&self) -> &Vect {
        &self.translation
    }

    pub fn apply(&self, x: &Vect) -> Vect {
        &self.rotation * x * self.ratio + &self.translation
    }

    /// Allocation-free application on raw slices.
    #[inline]
    pub fn apply_slice(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let acc: f64 = x.iter().enumerate().map(|(j, &xj)| self.rotation[(i, j)] * xj).sum();
            *o = self.ratio * acc + self.translation[i];
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        let rotation = orth_mul(&self.rotation, &other.rotation);
        let translation = &self.rotation * &other.translation * self.ratio + &self.translation;
        Similarity {
            ratio: self.ratio * other.ratio,
            rotation,
            translation,
        }
    }

    /// Unique fixed point, solving `(I - rT) x = v`.
    pub fn fixed_point(&self) -> Result<Vect> {
        let d = self.dim();
        let a = Mat::identity(d, d) - &self.rotation * self.ratio;
        a.lu()
            .solve(&self.translation)
            .ok_or_else(|| IfsError::Numeric("singular fixed-point system".into()))
    }

    /// The image of a ball under this map.
    pub fn image_ball(&self, ball: &BoundingBall) -> BoundingBall {
        BoundingBall {
            center: self.apply(&ball.center),
            radius: self.ratio * ball.radius,
        }
    }
}

/// Finite word over map indices, stored 0-based and printed 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
    pub fn single(i: usize) -> Self {
        Word(vec![i])
    }
    /// From 1-based letters.
    pub fn from_one_based(letters: &[usize]) -> Result<Self> {
        letters
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| IfsError::InvalidArgument("word letters are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn letters(&self) -> &[usize] {
        &self.0
    }
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
    pub fn push(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }
    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

/// Closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBall {
    pub center: Vect,
    pub radius: f64,
}

impl BoundingBall {
    /// Strict separation with the given slack.
    pub fn disjoint_from(&self, other: &BoundingBall, slack: f64) -> bool {
        (&self.center - &other.center).norm() > self.radius + other.radius + slack
    }

    pub fn contains(&self, x: &Vect, slack: f64) -> bool {
        (x - &self.center).norm() <= self.radius + slack
    }
}

/// Smallest radius reported for a ball, so certificates stay meaningful.
const MIN_RADIUS: f64 = 1e-12;

/// Ball `B(c, R)` mapped into itself by every map, hence containing the
/// attractor. `c` is the fixed point of the averaged map and
/// `R = max |S_i(c) - c| / (1 - r_i)`.
pub fn attractor_bounding_ball(maps: &[Similarity]) -> Result<BoundingBall> {
    let first = maps.first().ok_or(IfsError::Empty("map list"))?;
    let d = first.dim();
    let m = maps.len() as f64;
    let mut a = Mat::identity(d, d);
    let mut b = Vect::zeros(d);
    for s in maps {
        a -= s.rotation() * (s.ratio() / m);
        b += s.translation() / m;
    }
    let center = a
        .lu()
        .solve(&b)
        .ok_or_else(|| IfsError::Numeric("averaged map has no fixed point".into()))?;
    let mut radius = 0.0f64;
    for s in maps {
        radius = radius.max((s.apply(&center) - &center).norm() / (1.0 - s.ratio()));
    }
    Ok(BoundingBall {
        center,
        radius: radius.max(MIN_RADIUS),
    })
}

/// Self-similar IFS on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssifs {
    maps: Vec<Similarity>,
    tol: Tolerances,
}

/// Upper bound on the number of words materialised by `iterate`.
pub const MAX_ITERATED_WORDS: usize = 1 << 22;

impl Ssifs {
    pub fn new(maps: Vec<Similarity>) -> Result<Self> {
        Self::with_tolerances(maps, Tolerances::DEFAULT)
    }

    pub fn with_tolerances(maps: Vec<Similarity>, tol: Tolerances) -> Result<Self> {
        let first = maps.first().ok_or(IfsError::Empty("map list"))?;
        let d = first.dim();
        for s in &maps {
            if s.dim() != d {
                return Err(IfsError::DimensionMismatch {
                    what: "map",
                    expected: d,
                    got: s.dim(),
                });
            }
            if s.ratio() >= 1.0 {
                return Err(IfsError::RatioOutOfRange(s.ratio()));
            }
        }
        let fixed: Vec<Vect> = maps.iter().map(|s| s.fixed_point()).collect::<Result<_>>()?;
        let scale = 1.0 + fixed.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if fixed
            .iter()
            .all(|x| (x - &fixed[0]).norm() <= tol.num * scale)
        {
            return Err(IfsError::Degenerate(
                "all maps share one fixed point, attractor is a single point".into(),
            ));
        }
        Ok(Self { maps, tol })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }
    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }
    pub fn map(&self, i: usize) -> &Similarity {
        &self.maps[i]
    }
    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|s| s.ratio()).collect()
    }
    pub fn rotations(&self) -> Vec<Mat> {
        self.maps.iter().map(|s| s.rotation().clone()).collect()
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(IfsError::IndexOutOfRange {
                what: "map list",
                index,
                len: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// `S_{i1} ∘ ... ∘ S_{ik}`; the empty word gives the identity.
    pub fn word_map(&self, w: &Word) -> Result<Similarity> {
        self.check_word(w)?;
        Ok(w
            .0
            .iter()
            .fold(Similarity::identity(self.dim()), |acc, &i| {
                acc.compose(&self.maps[i])
            }))
    }

    /// Product of stored ratios, multiplied left to right.
    pub fn word_ratio(&self, w: &Word) -> Result<f64> {
        self.check_word(w)?;
        Ok(w.0.iter().map(|&i| self.maps[i].ratio()).product())
    }

    pub fn word_rotation(&self, w: &Word) -> Result<Mat> {
        self.check_word(w)?;
        let d = self.dim();
        Ok(w.0.iter().fold(Mat::identity(d, d), |acc, &i| {
            orth_mul(&acc, self.maps[i].rotation())
        }))
    }

    /// All words of length `k` in lexicographic order.
    pub fn words_of_length(&self, k: usize) -> Result<Vec<Word>> {
        let m = self.len();
        let count = (m as f64).powi(k as i32);
        if count > MAX_ITERATED_WORDS as f64 {
            return Err(IfsError::InvalidArgument(format!(
                "{m}^{k} words exceeds the cap of {MAX_ITERATED_WORDS}"
            )));
        }
        let mut words = vec![Word::empty()];
        for _ in 0..k {
            words = words
                .iter()
                .flat_map(|w| (0..m).map(move |i| w.push(i)))
                .collect();
        }
        Ok(words)
    }

    /// The level-`k` system `{S_w : |w| = k}` with its words.
    pub fn iterate(&self, k: usize) -> Result<(Ssifs, Vec<Word>)> {
        if k == 0 {
            return Err(IfsError::InvalidArgument("iteration level must be >= 1".into()));
        }
        let words = self.words_of_length(k)?;
        let mut maps: Vec<Similarity> = Vec::with_capacity(words.len());
        // Build level by level so prefixes are shared.
        let mut level: Vec<Similarity> = vec![Similarity::identity(self.dim())];
        for _ in 0..k {
            level = level
                .iter()
                .flat_map(|p| self.maps.iter().map(move |s| p.compose(s)))
                .collect();
        }
        maps.extend(level);
        Ok((
            Ssifs {
                maps,
                tol: self.tol,
            },
            words,
        ))
    }

    pub fn bounding_ball(&self) -> Result<BoundingBall> {
        attractor_bounding_ball(&self.maps)
    }

    /// Slack used when comparing ball separations for this system.
    pub fn separation_slack(&self, ball: &BoundingBall) -> f64 {
        TAU_SEP_REL * 2.0 * ball.radius
    }

    /// True when the first-level images of the bounding ball are pairwise
    /// disjoint, which certifies the strong separation condition.
    pub fn ball_certified_ssc(&self) -> Result<bool> {
        let ball = self.bounding_ball()?;
        let slack = self.separation_slack(&ball);
        let images: Vec<BoundingBall> = self.maps.iter().map(|s| s.image_ball(&ball)).collect();
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if !images[i].disjoint_from(&images[j], slack) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Hex SHA-256 over the bit patterns of every parameter.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim() as u64).to_le_bytes());
        for s in &self.maps {
            h.update(s.ratio().to_bits().to_le_bytes());
            for x in s.rotation().transpose().iter() {
                h.update(x.to_bits().to_le_bytes());
            }
            for x in s.translation().iter() {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// `S_w(B(root_center, root_radius))`.
pub fn cylinder_ball(ifs: &Ssifs, word: &Word, root: &BoundingBall) -> Result<BoundingBall> {
    Ok(ifs.word_map(word)?.image_ball(root))
}

/// Linear map `R^d -> R^{d2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: Mat,
}

impl LinearMap {
    pub fn new(matrix: Mat) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(IfsError::Empty("linear map"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(IfsError::NonFinite("linear map"));
        }
        Ok(Self { matrix })
    }

    /// Row vector `u^T / |u|`: orthogonal projection onto the line through `u`,
    /// in the coordinate of that line.
    pub fn onto_direction(u: &[f64]) -> Result<Self> {
        let v = Vect::from_column_slice(u);
        let n = v.norm();
        if !(n > 0.0) {
            return Err(IfsError::InvalidArgument("zero direction".into()));
        }
        Self::new(Mat::from_row_slice(1, u.len(), (v / n).as_slice()))
    }

    /// Projection onto the direction at angle `theta` in the plane.
    pub fn planar_direction(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            matrix: Mat::from_row_slice(1, 2, &[c, s]),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }
    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix, crate::tolerance::TAU_RANK_REL)
    }
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }
    pub fn apply(&self, x: &Vect) -> Vect {
        &self.matrix * x
    }
    /// `L ∘ O`.
    pub fn after(&self, o: &Mat) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * o,
        }
    }
}

/// `l`-dimensional subspace of `R^d` with orthonormal basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Mat,
}

impl Subspace {
    pub fn new(basis: Mat) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(IfsError::InvalidArgument("subspace basis shape".into()));
        }
        let residual = orth_residual(&basis);
        if residual > crate::tolerance::TAU_ORTH {
            return Err(IfsError::NotOrthogonal {
                residual,
                tol: crate::tolerance::TAU_ORTH,
            });
        }
        Ok(Self { basis })
    }

    /// Span of the first `l` standard basis vectors.
    pub fn coordinate(d: usize, l: usize) -> Result<Self> {
        Self::new(Mat::identity(d, d).columns(0, l).into_owned())
    }

    /// An `l`-dimensional subspace of the orthogonal complement of `v`.
    pub fn inside_complement_of(v: &Vect, l: usize) -> Result<Self> {
        let d = v.len();
        if l == 0 || l >= d {
            return Err(IfsError::InvalidArgument(format!(
                "subspace dimension {l} must lie in [1, {d})"
            )));
        }
        let n = v.norm();
        if !(n > 0.0) {
            return Err(IfsError::InvalidArgument("zero normal vector".into()));
        }
        // Gram-Schmidt on (v, e_1, ..., e_d), keeping vectors after v.
        let mut kept: Vec<Vect> = vec![v / n];
        for i in 0..d {
            let mut e = Vect::zeros(d);
            e[i] = 1.0;
            for _ in 0..2 {
                for k in &kept {
                    let c = k.dot(&e);
                    e -= k * c;
                }
            }
            let en = e.norm();
            if en > 1e-8 {
                kept.push(e / en);
            }
            if kept.len() == d {
                break;
            }
        }
        let cols: Vec<Vect> = kept.into_iter().skip(1).take(l).collect();
        Self::new(Mat::from_columns(&cols))
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }
    /// Orthogonal projection expressed in basis coordinates (`basis^T`).
    pub fn projection(&self) -> LinearMap {
        LinearMap {
            matrix: self.basis.transpose(),
        }
    }
}

fn ord_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

/// Set of balls supporting "is this ball disjoint from all stored ones".
///
/// Balls are grouped by dyadic radius class; within a class they are
/// ordered by first coordinate, so a query scans a slab per class.
#[derive(Debug, Clone, Default)]
pub struct BallSet {
    balls: Vec<BoundingBall>,
    /// Radius class to (largest radius, (center key, ball index)).
    classes: std::collections::BTreeMap<i32, (f64, std::collections::BTreeSet<(i64, usize)>)>,
}

impl BallSet {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn len(&self) -> usize {
        self.balls.len()
    }
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
    pub fn balls(&self) -> &[BoundingBall] {
        &self.balls
    }

    pub fn insert(&mut self, ball: BoundingBall) {
        let class = ball.radius.log2().floor() as i32;
        let idx = self.balls.len();
        let entry = self
            .classes
            .entry(class)
            .or_insert_with(|| (0.0, Default::default()));
        entry.0 = entry.0.max(ball.radius);
        entry.1.insert((ord_key(ball.center[0]), idx));
        self.balls.push(ball);
    }

    pub fn disjoint_from_all(&self, ball: &BoundingBall, slack: f64) -> bool {
        let x = ball.center[0];
        for (max_r, tree) in self.classes.values() {
            let reach = ball.radius + max_r + slack;
            let lo = (ord_key(x - reach), 0usize);
            let hi = (ord_key(x + reach), usize::MAX);
            for &(_, idx) in tree.range(lo..=hi) {
                if !self.balls[idx].disjoint_from(ball, slack) {
                    return false;
                }
            }
        }
        true
    }
}

/// True when all pairs of balls are separated by more than `slack`.
pub fn pairwise_disjoint(balls: &[BoundingBall], slack: f64) -> bool {
    let mut set = BallSet::new();
    for b in balls {
        if !set.disjoint_from_all(b, slack) {
            return false;
        }
        set.insert(b.clone());
    }
    true
}

/// `a ∘ b`, checking dimensions.
pub fn compose(a: &Similarity, b: &Similarity) -> Result<Similarity> {
    if a.dim() != b.dim() {
        return Err(IfsError::DimensionMismatch {
            what: "composition",
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.compose(b))
}
