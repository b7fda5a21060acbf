mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use quadnil_core::complex::{build_sequence, make_unit_tile, subdivide, BuildLimits, Complex};
use quadnil_core::metrics::{
    bundle_width, distance, ellipticity_probe, geodesic_width, path_distance, shortest_path_bundle,
    DistanceTable, SampleSpec, WidthMethod,
};
use quadnil_core::{SubdivisionScheme, VertexId};

fn tiles() -> Vec<Complex> {
    let scheme = SubdivisionScheme::default();
    let mut out = vec![make_unit_tile()];
    for _ in 0..2 {
        let next = subdivide(out.last().unwrap(), &scheme);
        out.push(next);
    }
    out
}

use common::{dfs_paths, floyd};

#[test]
fn bundles_match_dfs_enumeration_on_small_complexes() {
    for c in tiles().iter().filter(|c| c.edge_count() <= 100) {
        let fw = floyd(c);
        let table = DistanceTable::new(c).unwrap();
        for a in 0..c.vertex_count() {
            for b in 0..c.vertex_count() {
                let (va, vb) = (VertexId(a as u32), VertexId(b as u32));
                let s = fw[a][b];
                assert_eq!(distance(c, va, vb).unwrap(), s);
                assert_eq!(table.get(va, vb), s);
                let bundle = shortest_path_bundle(c, va, vb, 1_000_000).unwrap();
                assert!(!bundle.truncated);
                assert_eq!(bundle.length, s);
                let ours: BTreeSet<Vec<u32>> = bundle
                    .paths
                    .iter()
                    .map(|p| p.vertices.iter().map(|v| v.0).collect())
                    .collect();
                assert_eq!(ours.len(), bundle.paths.len(), "duplicate path");
                let oracle = dfs_paths(c, &fw, a, b, s);
                assert_eq!(ours, oracle, "bundle {a}->{b} on T_{}", c.stage());

                // Width by all pairs of oracle paths against both routes.
                let oracle: Vec<Vec<u32>> = oracle.into_iter().collect();
                let mut w = 0;
                for i in 0..oracle.len() {
                    for j in i + 1..oracle.len() {
                        for (p, q) in oracle[i].iter().zip(&oracle[j]) {
                            w = w.max(fw[*p as usize][*q as usize]);
                        }
                    }
                }
                assert_eq!(bundle_width(c, &bundle).unwrap().value, w);
                assert_eq!(geodesic_width(c, va, vb).unwrap(), w);
                assert!(w <= s);
                assert_eq!(w == 0, oracle.len() == 1);
            }
        }
    }
}

#[test]
fn distance_examples() {
    let t = tiles();
    let t1 = &t[0];
    assert_eq!(distance(t1, VertexId(0), VertexId(1)).unwrap(), 1);
    assert_eq!(distance(t1, VertexId(3), VertexId(3)).unwrap(), 0);
    let t2 = &t[1];
    let fw = floyd(t2);
    let [nw, ne, se, sw] = t2.initial_corners();
    assert_eq!(distance(t2, nw, se).unwrap(), fw[nw.index()][se.index()]);
    assert_eq!(distance(t2, ne, sw).unwrap(), fw[ne.index()][sw.index()]);
    // Golden: no diagonal shortcut through the centre, both diagonals take 4.
    assert_eq!(distance(t2, nw, se).unwrap(), 4);
    assert_eq!(distance(t2, ne, sw).unwrap(), 4);
}

#[test]
fn opposite_corners_of_t3_golden_bundle() {
    let t3 = &tiles()[2];
    let [nw, _, se, _] = t3.initial_corners();
    let fw = floyd(t3);
    let s = fw[nw.index()][se.index()];
    let oracle = dfs_paths(t3, &fw, nw.index(), se.index(), s);
    let bundle = shortest_path_bundle(t3, nw, se, 100_000).unwrap();
    assert_eq!(bundle.paths.len(), oracle.len());
    assert_eq!((bundle.length, bundle.paths.len()), (8, 78));
}

#[test]
fn path_distance_is_symmetric_and_zero_on_diagonal() {
    let t3 = &tiles()[2];
    let [nw, _, se, _] = t3.initial_corners();
    let bundle = shortest_path_bundle(t3, nw, se, 100).unwrap();
    for p in &bundle.paths {
        assert_eq!(path_distance(t3, p, p).unwrap(), 0);
        for q in &bundle.paths {
            assert_eq!(
                path_distance(t3, p, q).unwrap(),
                path_distance(t3, q, p).unwrap()
            );
        }
    }
}

#[test]
fn probe_on_small_levels_is_exhaustive_and_consistent() {
    let levels = build_sequence(3, &SubdivisionScheme::default(), BuildLimits::default()).unwrap();
    let spec = SampleSpec {
        k: 1,
        ..SampleSpec::default()
    };
    let exact = ellipticity_probe(&levels, &spec).unwrap();
    let enumerated = ellipticity_probe(
        &levels,
        &SampleSpec {
            method: WidthMethod::Enumerated { cap: 100_000 },
            ..spec.clone()
        },
    )
    .unwrap();
    assert_eq!(exact.rows, enumerated.rows);
    assert!(exact.coverage.iter().all(|c| c.exhaustive));
    for r in &exact.rows {
        assert!(r.width <= r.s);
        let c = &levels[r.n as usize - 1];
        let bundle = shortest_path_bundle(c, r.pair.0, r.pair.1, 100_000).unwrap();
        assert_eq!(r.width == 0, bundle.paths.len() == 1);
        if r.s == 1 {
            assert_eq!(r.width, 0);
        }
    }
    let k2_cells = exact.rows.iter().filter(|r| r.n == 2).count();
    assert_eq!(k2_cells as u32, exact.coverage[1].max_distance);
    assert!(exact.csv_string().starts_with("n,s,pair,width,truncated\n"));
}

fn k4() -> &'static Complex {
    use std::sync::OnceLock;
    static K4: OnceLock<Complex> = OnceLock::new();
    K4.get_or_init(|| {
        build_sequence(4, &SubdivisionScheme::default(), BuildLimits::default())
            .unwrap()
            .pop()
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(a in 0u32..347, b in 0u32..347, m in 0u32..347) {
        let c = k4();
        let (a, b, m) = (VertexId(a), VertexId(b), VertexId(m));
        let ab = distance(c, a, b).unwrap();
        prop_assert!(ab <= distance(c, a, m).unwrap() + distance(c, m, b).unwrap());
        prop_assert_eq!(ab, distance(c, b, a).unwrap());
    }

    #[test]
    fn bundle_members_are_geodesics(a in 0u32..347, b in 0u32..347) {
        let c = k4();
        let (a, b) = (VertexId(a), VertexId(b));
        let bundle = shortest_path_bundle(c, a, b, 500).unwrap();
        let s = distance(c, a, b).unwrap();
        for p in &bundle.paths {
            prop_assert_eq!(p.len() as u32, s);
            prop_assert_eq!((p.start(), p.end()), (a, b));
        }
        let w = bundle_width(c, &bundle).unwrap();
        let exact = geodesic_width(c, a, b).unwrap();
        prop_assert!(w.value <= exact);
        if !bundle.truncated {
            prop_assert_eq!(w.value, exact);
        }
        prop_assert!(exact <= s);
    }
}
