use ifsproj_cli::commands::{parse_matrix, parse_scales, parse_vector};
use ifsproj_cli::doc::{MapDoc, SCHEMA_VERSION};
use ifsproj_cli::{GdifsDocument, IfsDocument};
use ifsproj_core::geometry::rotation_2d;
use ifsproj_core::{build_projection_gdifs, fixtures, LinearMap, Similarity, Ssifs, Tolerances, Vect};
use proptest::prelude::*;

fn arb_planar_ifs() -> impl Strategy<Value = Ssifs> {
    prop::collection::vec((0.05f64..0.95, -3.2f64..3.2, -5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 2..6).prop_map(
        |maps| {
            let sims = maps
                .iter()
                .enumerate()
                .map(|(i, &(r, a, x, y, flip))| {
                    let mut t = rotation_2d(a);
                    if flip {
                        t.set_column(1, &(-t.column(1)));
                    }
                    Similarity::new(r, t, Vect::from_vec(vec![x + i as f64, y])).unwrap()
                })
                .collect();
            Ssifs::new(sims).unwrap()
        },
    )
}

fn same_maps(a: &Ssifs, b: &Ssifs, tol: f64) -> bool {
    a.len() == b.len()
        && a.maps().iter().zip(b.maps()).all(|(x, y)| {
            (x.ratio() - y.ratio()).abs() <= tol
                && (x.rotation() - y.rotation()).amax() <= tol
                && (x.translation() - y.translation()).amax() <= tol
        })
}

proptest! {
    #[test]
    fn ifs_document_round_trips(ifs in arb_planar_ifs()) {
        let doc = IfsDocument::from_ssifs(&ifs, None);
        let text = serde_json::to_string(&doc).unwrap();
        let back = IfsDocument::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        let reloaded = back.to_ssifs(&Tolerances::DEFAULT).unwrap();
        prop_assert!(same_maps(&ifs, &reloaded, 1e-9));
    }

    #[test]
    fn parsed_vectors_match(xs in prop::collection::vec(-1e6f64..1e6, 1..8)) {
        let text: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        prop_assert_eq!(parse_vector(&text.join(",")).unwrap(), xs);
    }
}

#[test]
fn every_fixture_round_trips() {
    for f in fixtures::all() {
        let doc = IfsDocument::from_fixture(&f);
        let back = IfsDocument::parse(&serde_json::to_string_pretty(&doc).unwrap()).unwrap();
        assert_eq!(back, doc, "{}", f.name);
        assert!(same_maps(&f.ifs, &back.to_ssifs(&Tolerances::DEFAULT).unwrap(), 1e-9), "{}", f.name);
    }
}

#[test]
fn projection_graphs_round_trip() {
    for f in [fixtures::c4_rotation(), fixtures::example_7_5_plane(), fixtures::sierpinski_half()] {
        let p = build_projection_gdifs(&f.ifs, &LinearMap::planar_direction(0.3)).unwrap();
        let doc = GdifsDocument::from_gdifs(&p.gdifs);
        let back = GdifsDocument::parse(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
        let g = back.to_gdifs(&Tolerances::DEFAULT).unwrap();
        assert_eq!(g.vertex_count(), p.gdifs.vertex_count());
        for (a, b) in g.edges().iter().zip(p.gdifs.edges()) {
            assert_eq!((a.from, a.to), (b.from, b.to));
            assert!((a.map.ratio() - b.map.ratio()).abs() <= 1e-9);
            assert!((a.map.translation() - b.map.translation()).amax() <= 1e-9);
        }
    }
}

#[test]
fn document_validation() {
    let map = MapDoc {
        ratio: 0.5,
        rotation: vec![1.0, 0.0, 0.0],
        translation: vec![0.0, 0.0],
    };
    let doc = IfsDocument {
        schema_version: SCHEMA_VERSION.into(),
        ambient_dim: 2,
        maps: vec![map],
        metadata: None,
    };
    assert_eq!(doc.to_ssifs(&Tolerances::DEFAULT).unwrap_err().exit_code(), 2);
    assert!(IfsDocument::parse(r#"{"schema_version":"1","ambient_dim":1,"maps":[]}"#).is_err());
    assert!(IfsDocument::parse(r#"{"schema_version":"1","ambient_dim":1,"maps":[],"extra":1}"#).is_err());
    assert!(GdifsDocument::parse(r#"{"vertices":1,"edges":[]}"#)
        .unwrap()
        .to_gdifs(&Tolerances::DEFAULT)
        .is_err());
}

#[test]
fn argument_parsers() {
    assert_eq!(parse_scales("4..10").unwrap(), (4, 10));
    assert!(parse_scales("10..4").is_err());
    assert!(parse_scales("4-10").is_err());
    let m = parse_matrix("1,0,0;0,1,0").unwrap();
    assert_eq!((m.nrows(), m.ncols()), (2, 3));
    assert!(parse_matrix("1,0;1").is_err());
    assert!(parse_vector("1,x").is_err());
}
