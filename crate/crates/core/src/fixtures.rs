//! Reference systems used by the CLI corpus, the tests and the benches.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{block_diag, rotation_2d, Mat, Similarity, Ssifs, Vect};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub ifs: Ssifs,
    pub expected_sim_dim: Option<f64>,
    pub osc_certified: bool,
    /// Hausdorff dimension when it is known and differs from the
    /// similarity dimension (overlapping systems).
    pub known_dimension: Option<f64>,
    /// Named projection directions.
    pub directions: Vec<(&'static str, Vec<f64>)>,
}

fn v(xs: &[f64]) -> Vect {
    Vect::from_column_slice(xs)
}

fn sim(r: f64, t: Mat, x: &[f64]) -> Similarity {
    Similarity::new(r, t, v(x)).expect("fixture similarity")
}

fn hom(r: f64, x: &[f64]) -> Similarity {
    Similarity::homothety(r, v(x)).expect("fixture homothety")
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Corners of the unit-side equilateral triangle.
pub const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3_2]];

fn triangle_maps(r: f64) -> Vec<Similarity> {
    TRIANGLE
        .iter()
        .map(|c| hom(r, &[(1.0 - r) * c[0], (1.0 - r) * c[1]]))
        .collect()
}

fn build(
    name: &'static str,
    maps: Vec<Similarity>,
    expected_sim_dim: Option<f64>,
    osc_certified: bool,
) -> Result<Fixture> {
    Ok(Fixture {
        name,
        ifs: Ssifs::new(maps)?,
        expected_sim_dim,
        osc_certified,
        known_dimension: None,
        directions: Vec::new(),
    })
}

pub fn sierpinski_half() -> Fixture {
    let mut f = build("sierpinski_half", triangle_maps(0.5), Some(3f64.ln() / 2f64.ln()), true)
        .expect("sierpinski");
    f.directions = vec![("side", vec![1.0, 0.0]), ("drop", vec![0.0, 1.0])];
    f
}

/// Three homotheties of ratio 0.3 at the triangle corners; strongly separated.
pub fn ssc_triangle() -> Fixture {
    let s = 3f64.ln() / (1.0 / 0.3f64).ln();
    build("ssc_triangle", triangle_maps(0.3), Some(s), true).expect("ssc triangle")
}

pub fn cantor_third() -> Fixture {
    let maps = vec![hom(1.0 / 3.0, &[0.0]), hom(1.0 / 3.0, &[2.0 / 3.0])];
    build("cantor_third", maps, Some(2f64.ln() / 3f64.ln()), true).expect("cantor")
}

/// Unit-square system with one quarter-turn map:
/// `[0,.4]^2`, `[.6,1]x[0,.4]`, `[.3,.7]x[.6,1]`.
pub fn c4_rotation() -> Fixture {
    let r = 0.4;
    let maps = vec![
        hom(r, &[0.0, 0.0]),
        hom(r, &[0.6, 0.0]),
        sim(r, rotation_2d(PI / 2.0), &[0.7, 0.6]),
    ];
    build("c4_rotation", maps, Some(3f64.ln() / 2.5f64.ln()), true).expect("c4")
}

/// Dimension of the irrational-rotation fixture.
pub const IRRATIONAL_T: f64 = 0.84;
/// Common rotation angle of the irrational-rotation fixture (radians).
pub const IRRATIONAL_ANGLE: f64 = 2.6;

/// Three maps `r rot(2.6) x + u_k`, `u_k` on the unit circle at angles
/// `2πk/3`, ratio `3^(-1/0.84)`. Strongly separated, dimension 0.84.
pub fn irrational_rotation_planar() -> Fixture {
    let r = 3f64.powf(-1.0 / IRRATIONAL_T);
    let t = rotation_2d(IRRATIONAL_ANGLE);
    let maps = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            sim(r, t.clone(), &[a.cos(), a.sin()])
        })
        .collect();
    let mut f = build("irrational_rotation_planar", maps, Some(IRRATIONAL_T), true)
        .expect("irrational rotation");
    f.directions = vec![("x", vec![1.0, 0.0])];
    f
}

/// Product in `R^4` of a strongly separated rotating triple (angle 1 rad)
/// and the ratio-1/3 triangle system, all maps with `T(x, y) = (T1 x, y)`.
pub fn example_7_2_r4() -> Fixture {
    let r = 1.0 / 3.0;
    let t = block_diag(&[rotation_2d(1.0), Mat::identity(2, 2)]);
    let maps = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            let c = TRIANGLE[k];
            sim(
                r,
                t.clone(),
                &[a.cos(), a.sin(), (1.0 - r) * c[0], (1.0 - r) * c[1]],
            )
        })
        .collect();
    let mut f = build("example_7_2_r4", maps, Some(1.0), true).expect("product system");
    f.directions = vec![
        ("L1", vec![1.0, 0.0, 0.0, 0.0]),
        ("L2", vec![0.0, 0.0, 1.0, 0.0]),
        ("L3", vec![0.0, 0.0, 0.0, 1.0]),
    ];
    f
}

/// Ratio of the overlapping line system.
pub const LINE_OVERLAP_RATIO: f64 = 0.3;

/// Four homotheties of ratio `r = 0.3` on the line with exact overlaps:
/// `S1`, `S1 + r(r+g)`, `S2`, `S2 + r(r+g)` where `S1 = rx`,
/// `S2 = rx + r + g` and `g = (1-3r)/2`.
pub fn example_7_4_line() -> Fixture {
    let r = LINE_OVERLAP_RATIO;
    let g = (1.0 - 3.0 * r) / 2.0;
    let shift = r * (r + g);
    let maps = vec![
        hom(r, &[0.0]),
        hom(r, &[shift]),
        hom(r, &[r + g]),
        hom(r, &[r + g + shift]),
    ];
    let mut f = build("example_7_4_line", maps, Some(4f64.ln() / (1.0 / r).ln()), false)
        .expect("overlapping line");
    f.known_dimension = Some(3f64.ln() / (1.0 / r).ln());
    f
}

/// Ratio of the overlapping eighth-turn system.
pub const PLANE_OVERLAP_RATIO: f64 = 0.25;

/// Four maps `r T x + w` with `T` the eighth turn, built from
/// `S1 = rTx + (-g-2r, 0)` and `S2 = rTx`, `g = 1 - 3r`:
/// `S1`, `S1(x + (g+2r, 0))`, `S2`, `S2(x + (g+2r, 0))`.
pub fn example_7_5_plane() -> Fixture {
    let r = PLANE_OVERLAP_RATIO;
    let g = 1.0 - 3.0 * r;
    let t = rotation_2d(PI / 4.0);
    let a = g + 2.0 * r;
    let w = &t * v(&[a, 0.0]) * r;
    let maps = vec![
        sim(r, t.clone(), &[-a, 0.0]),
        sim(r, t.clone(), &[w[0] - a, w[1]]),
        sim(r, t.clone(), &[0.0, 0.0]),
        sim(r, t.clone(), &[w[0], w[1]]),
    ];
    build("example_7_5_plane", maps, Some(4f64.ln() / (1.0 / r).ln()), false).expect("overlapping plane")
}

/// Two ratio-1/3 homotheties fixing `(0,0)` and `(1,1)`.
pub fn cantor_pair_r2() -> Fixture {
    let maps = vec![hom(1.0 / 3.0, &[0.0, 0.0]), hom(1.0 / 3.0, &[2.0 / 3.0, 2.0 / 3.0])];
    build("cantor_pair_r2", maps, Some(2f64.ln() / 3f64.ln()), true).expect("cantor pair")
}

/// `x/2` and `x/3`: both fix the origin, so `Ssifs::new` rejects them.
pub fn degenerate_single_fixed_point_maps() -> Vec<Similarity> {
    vec![hom(0.5, &[0.0]), hom(1.0 / 3.0, &[0.0])]
}

/// Every constructible fixture.
pub fn all() -> Vec<Fixture> {
    vec![
        sierpinski_half(),
        ssc_triangle(),
        cantor_third(),
        c4_rotation(),
        irrational_rotation_planar(),
        example_7_2_r4(),
        example_7_4_line(),
        example_7_5_plane(),
        cantor_pair_r2(),
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
