use approx::assert_abs_diff_eq;
use ifsproj_core::fixtures;
use ifsproj_core::geometry::{max_entry_distance, orth_residual, rotation_2d};
use ifsproj_core::*;
use proptest::prelude::*;

fn planar(r: f64, angle: f64, x: f64, y: f64) -> Similarity {
    Similarity::new(r, rotation_2d(angle), Vect::from_vec(vec![x, y])).unwrap()
}

/// Direct affine evaluation `r T x + v`, written out without the crate.
fn eval(s: &Similarity, x: &[f64]) -> Vec<f64> {
    let t = s.rotation();
    (0..x.len())
        .map(|i| s.ratio() * (0..x.len()).map(|j| t[(i, j)] * x[j]).sum::<f64>() + s.translation()[i])
        .collect()
}

fn similar(a: &Similarity, b: &Similarity, tol: f64) -> bool {
    (a.ratio() - b.ratio()).abs() < tol
        && max_entry_distance(a.rotation(), b.rotation()) < tol
        && (a.translation() - b.translation()).amax() < tol
}

#[test]
fn compose_with_identity_is_noop() {
    let s = planar(0.4, 0.7, 0.1, -0.3);
    let id = Similarity::identity(2);
    assert!(similar(&compose(&id, &s).unwrap(), &s, 1e-15));
    assert!(similar(&compose(&s, &id).unwrap(), &s, 1e-15));
}

#[test]
fn compose_homothety_with_itself() {
    let v = Vect::from_vec(vec![0.3, 0.8]);
    let s = Similarity::homothety(0.5, v.clone()).unwrap();
    let ss = compose(&s, &s).unwrap();
    assert_eq!(ss.ratio(), 0.25);
    assert_abs_diff_eq!(ss.translation(), &(&v * 0.5 + &v), epsilon = 1e-15);
}

#[test]
fn compose_sierpinski_pair_matches_pointwise_evaluation() {
    let s1 = planar(0.5, 0.0, 0.0, 0.0);
    let s2 = planar(0.5, 0.0, 0.5, 0.0);
    let c = compose(&s1, &s2).unwrap();
    assert_eq!(c.ratio(), 0.25);
    assert_abs_diff_eq!(c.translation()[0], 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(c.translation()[1], 0.0, epsilon = 1e-15);
    for x in [[0.0, 0.0], [1.0, 2.0], [-0.3, 0.7]] {
        let direct = eval(&s1, &eval(&s2, &x));
        let via = eval(&c, &x);
        for k in 0..2 {
            assert_abs_diff_eq!(direct[k], via[k], epsilon = 1e-15);
        }
    }
}

#[test]
fn compose_rejects_mixed_dimensions() {
    let a = Similarity::homothety(0.5, Vect::zeros(1)).unwrap();
    let b = Similarity::homothety(0.5, Vect::zeros(2)).unwrap();
    assert!(matches!(compose(&a, &b), Err(IfsError::DimensionMismatch { .. })));
}

#[test]
fn invalid_similarities_are_rejected() {
    let z = Vect::zeros(2);
    for r in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
        assert!(Similarity::new(r, rotation_2d(0.0), z.clone()).is_err(), "ratio {r}");
    }
    let shear = Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
    assert!(matches!(
        Similarity::new(0.5, shear, z.clone()),
        Err(IfsError::NotOrthogonal { .. })
    ));
    assert!(Similarity::new(0.5, Mat::identity(3, 3), z).is_err());
}

#[test]
fn cylinder_ball_examples() {
    let ifs = fixtures::sierpinski_half().ifs;
    let root = BoundingBall {
        center: Vect::from_vec(vec![0.5, 0.433]),
        radius: 0.6,
    };
    assert_eq!(cylinder_ball(&ifs, &Word::empty(), &root).unwrap(), root);
    let b1 = cylinder_ball(&ifs, &Word::single(0), &root).unwrap();
    assert_abs_diff_eq!(b1.radius, 0.3, epsilon = 1e-15);
    assert_abs_diff_eq!(b1.center, ifs.map(0).apply(&root.center), epsilon = 1e-15);

    let w = Word::from_one_based(&[1, 3, 2]).unwrap();
    let b3 = cylinder_ball(&ifs, &w, &root).unwrap();
    assert_abs_diff_eq!(b3.radius, 0.6 / 8.0, epsilon = 1e-15);
    let mut c = root.center.clone();
    for &i in w.letters().iter().rev() {
        c = ifs.map(i).apply(&c);
    }
    assert_abs_diff_eq!(b3.center, c, epsilon = 1e-14);
}

#[test]
fn degenerate_systems_are_rejected() {
    let err = Ssifs::new(fixtures::degenerate_single_fixed_point_maps()).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Degenerate);
    let ball = attractor_bounding_ball(&fixtures::degenerate_single_fixed_point_maps()).unwrap();
    assert!(ball.center.norm() < 1e-15);
    assert!(ball.radius > 0.0 && ball.radius < 1e-9);
}

#[test]
fn bounding_ball_contains_sierpinski_corners_and_is_invariant() {
    let ifs = fixtures::sierpinski_half().ifs;
    let b = ifs.bounding_ball().unwrap();
    for c in fixtures::TRIANGLE {
        assert!(b.contains(&Vect::from_vec(c.to_vec()), 1e-12));
    }
    for s in ifs.maps() {
        let img = s.image_ball(&b);
        assert!((&img.center - &b.center).norm() + img.radius <= b.radius + 1e-12);
    }
}

#[test]
fn bounding_ball_of_middle_thirds_cantor_set() {
    let ifs = fixtures::cantor_third().ifs;
    let b = ifs.bounding_ball().unwrap();
    assert_abs_diff_eq!(b.center[0], 0.5, epsilon = 1e-12);
    assert!(b.radius >= 0.5 - 1e-12);
}

#[test]
fn words_enumerate_lexicographically() {
    let ifs = fixtures::cantor_third().ifs;
    let words = ifs.words_of_length(3).unwrap();
    assert_eq!(words.len(), 8);
    assert_eq!(words[0].to_string(), "(1,1,1)");
    assert_eq!(words[5].to_string(), "(2,1,2)");
    assert!(words.windows(2).all(|w| w[0] < w[1]));
    let (it, labels) = ifs.iterate(3).unwrap();
    assert_eq!(it.len(), 8);
    assert_eq!(labels, words);
    assert_abs_diff_eq!(it.map(5).ratio(), 1.0 / 27.0, epsilon = 1e-17);
}

#[test]
fn word_from_one_based_rejects_zero() {
    assert!(Word::from_one_based(&[1, 0]).is_err());
    assert_eq!(Word::from_one_based(&[2, 1]).unwrap(), Word(vec![1, 0]));
}

#[test]
fn digest_tracks_parameters() {
    let a = fixtures::sierpinski_half().ifs;
    let b = fixtures::ssc_triangle().ifs;
    assert_eq!(a.digest(), fixtures::sierpinski_half().ifs.digest());
    assert_ne!(a.digest(), b.digest());
    assert_eq!(a.digest().len(), 64);
}

#[test]
fn subspace_orthogonal_to_a_vector() {
    let v = Vect::from_vec(vec![1.0, 2.0, -1.0]);
    for l in 1..3 {
        let m = Subspace::inside_complement_of(&v, l).unwrap();
        assert_eq!(m.dim(), l);
        let b = m.basis();
        assert!((b.transpose() * b - Mat::identity(l, l)).amax() < 1e-12);
        assert!((b.transpose() * &v).amax() < 1e-12);
    }
}

#[test]
fn linear_map_after_composes_on_the_right() {
    let l = LinearMap::planar_direction(0.3);
    let o = rotation_2d(1.1);
    let lo = l.after(&o);
    let x = Vect::from_vec(vec![0.2, -0.7]);
    assert_abs_diff_eq!(lo.apply(&x), l.apply(&(&o * &x)), epsilon = 1e-15);
}

fn arb_planar() -> impl Strategy<Value = Similarity> {
    (0.05f64..0.95, -4.0f64..4.0, -2.0f64..2.0, -2.0f64..2.0, any::<bool>()).prop_map(
        |(r, a, x, y, flip)| {
            let mut t = rotation_2d(a);
            if flip {
                t.column_mut(1).neg_mut();
            }
            Similarity::new(r, t, Vect::from_vec(vec![x, y])).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn compose_is_associative(a in arb_planar(), b in arb_planar(), c in arb_planar()) {
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        prop_assert!(similar(&left, &right, 1e-9));
    }

    #[test]
    fn word_ratio_is_exact_product(
        maps in prop::collection::vec(arb_planar(), 2..5),
        letters in prop::collection::vec(0usize..64, 0..12),
    ) {
        let m = maps.len();
        let w = Word(letters.iter().map(|i| i % m).collect());
        let ratios: Vec<f64> = maps.iter().map(|s| s.ratio()).collect();
        let ifs = match Ssifs::new(maps) {
            Ok(ifs) => ifs,
            Err(_) => return Ok(()),
        };
        let product = w.letters().iter().fold(1.0, |acc, &i| acc * ratios[i]);
        prop_assert_eq!(ifs.word_ratio(&w).unwrap(), product);
        prop_assert_eq!(ifs.word_map(&w).unwrap().ratio(), product);
    }

    #[test]
    fn deep_compositions_stay_orthogonal(
        maps in prop::collection::vec(arb_planar(), 2..4),
        letters in prop::collection::vec(0usize..64, 30..=30),
    ) {
        // Ratios near 1 keep the product representable at depth 30.
        let maps: Vec<Similarity> = maps
            .into_iter()
            .map(|s| Similarity::new(0.97, s.rotation().clone(), s.translation().clone()).unwrap())
            .collect();
        let m = maps.len();
        let mut acc = Similarity::identity(2);
        for (k, &i) in letters.iter().enumerate() {
            acc = acc.compose(&maps[i % m]);
            prop_assert!(orth_residual(acc.rotation()) < 1e-9, "depth {}", k + 1);
        }
    }

    #[test]
    fn cylinder_balls_nest(
        letters in prop::collection::vec(0usize..3, 0..10),
        j in 0usize..3,
    ) {
        let ifs = fixtures::c4_rotation().ifs;
        let root = ifs.bounding_ball().unwrap();
        let w = Word(letters);
        let outer = cylinder_ball(&ifs, &w, &root).unwrap();
        let inner = cylinder_ball(&ifs, &w.push(j), &root).unwrap();
        prop_assert!((&inner.center - &outer.center).norm() + inner.radius <= outer.radius + 1e-9);
    }
}
