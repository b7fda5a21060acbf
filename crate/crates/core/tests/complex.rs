use std::collections::BTreeSet;

use proptest::prelude::*;
use quadnil_core::complex::{
    apply_pastings, build_sequence, find_pasting_sites, make_unit_tile, pasting_conditions_hold,
    subdivide, BuildLimits, Complex, ComplexError, OrientationRule, Origin, PasteRole, VertexId,
    VertexKind,
};
use quadnil_core::scheme::SubdivisionScheme;

fn scheme() -> SubdivisionScheme {
    SubdivisionScheme::default()
}

fn iterate(n: u32) -> Complex {
    let mut c = make_unit_tile();
    for _ in 1..n {
        c = subdivide(&c, &scheme());
    }
    c
}

/// Exhaustive scan over all simple 4-edge paths, checking the site
/// conditions with linear searches only.
fn brute_force_sites(c: &Complex) -> BTreeSet<[VertexId; 5]> {
    let k = c.max_depth();
    let is_side = |v: VertexId, d: i32| {
        let r = c.vertex(v);
        r.kind == VertexKind::Side && r.depth == d
    };
    let is_mid = |m: VertexId, a: VertexId, b: VertexId| {
        let r = c.vertex(m);
        r.kind == VertexKind::Side
            && r.depth == k
            && r.creation_stage == c.stage()
            && r.host.is_some_and(|h| {
                let mut e = h.ends;
                e.sort();
                let mut w = [a, b];
                w.sort();
                e == w
            })
    };
    let mut out = BTreeSet::new();
    for v0 in c.vertex_ids() {
        for &(v1, _) in c.neighbors(v0) {
            for &(v2, _) in c.neighbors(v1) {
                for &(v3, _) in c.neighbors(v2) {
                    for &(v4, _) in c.neighbors(v3) {
                        let p = [v0, v1, v2, v3, v4];
                        let distinct: BTreeSet<_> = p.iter().collect();
                        if distinct.len() != 5 {
                            continue;
                        }
                        let three_corners = c
                            .faces()
                            .iter()
                            .any(|f| [v0, v2, v4].iter().all(|v| f.corners.contains(v)));
                        if three_corners
                            || !is_side(v0, k - 1)
                            || !is_side(v4, k - 1)
                            || c.vertex(v2).depth != k - 2
                            || !is_mid(v1, v0, v2)
                            || !is_mid(v3, v4, v2)
                        {
                            continue;
                        }
                        let mut r = p;
                        r.reverse();
                        out.insert(p.min(r));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn unit_tile_and_first_subdivisions() {
    let t1 = make_unit_tile();
    assert_eq!(
        (t1.vertex_count(), t1.edge_count(), t1.unit_face_count()),
        (4, 4, 1)
    );
    let t2 = iterate(2);
    assert_eq!(
        (t2.vertex_count(), t2.edge_count(), t2.unit_face_count()),
        (11, 16, 6)
    );
    let t3 = iterate(3);
    assert_eq!(
        (t3.vertex_count(), t3.edge_count(), t3.unit_face_count()),
        (45, 80, 36)
    );
    for c in [&t1, &t2, &t3] {
        let euler =
            c.vertex_count() as i64 - c.edge_count() as i64 + c.unit_face_count() as i64 + 1;
        assert_eq!(euler, 2);
    }
}

#[test]
fn build_matches_plain_iteration_below_four() {
    let seq = build_sequence(3, &scheme(), BuildLimits::default()).unwrap();
    for (n, c) in seq.iter().enumerate() {
        assert_eq!(c.canonical_dump(), iterate(n as u32 + 1).canonical_dump());
        assert!(c.pasting_log().is_empty());
    }
}

#[test]
fn no_sites_before_level_four() {
    let t2 = subdivide(&make_unit_tile(), &scheme());
    assert!(find_pasting_sites(&t2).unwrap().is_empty());
    // T_3 does contain paths meeting the site conditions, but K_3 is T_3
    // by definition and never pasted.
    let seq = build_sequence(3, &scheme(), BuildLimits::default()).unwrap();
    assert!(seq.iter().all(|c| c.pasting_log().is_empty()));
    let t3 = subdivide(&t2, &scheme());
    assert!(!find_pasting_sites(&t3).unwrap().is_empty());
}

#[test]
fn find_sites_requires_fresh_subdivision() {
    assert!(matches!(
        find_pasting_sites(&make_unit_tile()),
        Err(ComplexError::NotFreshlySubdivided(1))
    ));
    let k4 = build_sequence(4, &scheme(), BuildLimits::default())
        .unwrap()
        .pop()
        .unwrap();
    assert!(find_pasting_sites(&k4).is_err());
}

#[test]
fn sites_match_brute_force_scan() {
    let seq = build_sequence(4, &scheme(), BuildLimits::default()).unwrap();
    for base in &seq[2..] {
        let fresh = subdivide(base, &scheme());
        let sites = find_pasting_sites(&fresh).unwrap();
        let ours: BTreeSet<_> = sites.iter().map(|s| s.unordered_key()).collect();
        assert_eq!(ours.len(), sites.len(), "site listed twice");
        assert_eq!(ours, brute_force_sites(&fresh));
        assert!(!sites.is_empty());
        let k = fresh.max_depth();
        for s in &sites {
            let depths: Vec<i32> = s.path().iter().map(|&v| fresh.vertex(v).depth).collect();
            assert_eq!(depths, vec![k - 1, k, k - 2, k, k - 1]);
            pasting_conditions_hold(&fresh, s).unwrap();
        }
    }
}

#[test]
fn orientation_rules_follow_host_edges() {
    let seq = build_sequence(4, &scheme(), BuildLimits::default()).unwrap();
    let fresh = subdivide(&seq[3], &scheme());
    for s in find_pasting_sites(&fresh).unwrap() {
        let hx = fresh.vertex(s.x1).host.unwrap();
        let hz = fresh.vertex(s.z1).host.unwrap();
        match s.rule {
            OrientationRule::HostLevel => assert!(hx.level > hz.level),
            OrientationRule::HostType => {
                assert_eq!(hx.level, hz.level);
                assert!(hx.edge_type.ordinal() > hz.edge_type.ordinal());
            }
            OrientationRule::SameBoundaryEdge => {
                assert_eq!(hx.root, hz.root);
                assert!(hx.edge_type.is_boundary());
                assert!(hx.position < hz.position);
            }
            OrientationRule::SameInteriorEdge => {
                assert_eq!(hx.root, hz.root);
                assert!(!hx.edge_type.is_boundary());
            }
            OrientationRule::IdTieBreak => {
                assert_eq!((hx.level, hx.edge_type), (hz.level, hz.edge_type));
                assert!(s.x1 < s.z1);
            }
        }
    }
}

#[test]
fn single_pasting_adds_six_vertices_and_eleven_edges() {
    let seq = build_sequence(3, &scheme(), BuildLimits::default()).unwrap();
    let fresh = subdivide(&seq[2], &scheme());
    let sites = find_pasting_sites(&fresh).unwrap();
    let site = sites[0];
    let pasted = apply_pastings(&fresh, &[site]).unwrap();
    assert_eq!(pasted.vertex_count(), fresh.vertex_count() + 6);
    assert_eq!(pasted.edge_count(), fresh.edge_count() + 11);

    let record = &pasted.pasting_log()[0];
    let macro_tile = pasted.face(record.macrotile);
    assert_eq!(
        macro_tile.corners,
        [site.x1, site.y, site.z1, record.created[0]]
    );
    assert_eq!(macro_tile.top_edge(), (site.x1, site.y));
    assert_eq!(macro_tile.level, 2);
    assert!(macro_tile.pasted);

    for v in site.path() {
        assert_eq!(pasted.vertex(v).kind, fresh.vertex(v).kind);
        assert_eq!(pasted.vertex(v).depth, fresh.vertex(v).depth);
    }
    let k = fresh.max_depth();
    for (role, &v) in PasteRole::ALL.iter().zip(&record.created) {
        let r = pasted.vertex(v);
        assert_eq!(r.origin, Origin::Pasting(*role));
        assert_eq!(r.kind, role.kind());
        let want = if *role == PasteRole::T1 { k - 1 } else { k };
        assert_eq!(r.depth, want);
    }
    let [t1, t2, t3, ta, tb, tc] = record.created;
    for (a, b) in [
        (site.x1, t2),
        (site.x2, ta),
        (site.x2, tb),
        (t2, tb),
        (tc, tb),
        (tc, ta),
        (t2, t1),
        (t3, t1),
        (t3, site.z1),
        (tc, site.z1),
        (ta, site.z2),
    ] {
        assert!(pasted.edge_between(a, b).is_some(), "missing {a}-{b}");
    }
    assert_eq!(pasted.vertex(t2).host.unwrap().ends, [t1, site.x1]);
    assert_eq!(pasted.vertex(t3).host.unwrap().ends, [site.z1, t1]);
    pasted.validate().unwrap();
}

#[test]
fn duplicate_sites_rejected() {
    let seq = build_sequence(3, &scheme(), BuildLimits::default()).unwrap();
    let fresh = subdivide(&seq[2], &scheme());
    let site = find_pasting_sites(&fresh).unwrap()[0];
    let mut reversed = site;
    std::mem::swap(&mut reversed.x1, &mut reversed.z1);
    std::mem::swap(&mut reversed.x2, &mut reversed.z2);
    assert!(matches!(
        apply_pastings(&fresh, &[site, reversed]),
        Err(ComplexError::DuplicateSite(_))
    ));
}

#[test]
fn pasting_arithmetic_per_round() {
    let seq = build_sequence(5, &scheme(), BuildLimits::default()).unwrap();
    for n in 4..=5usize {
        let fresh = subdivide(&seq[n - 2], &scheme());
        let sites = find_pasting_sites(&fresh).unwrap();
        let built = &seq[n - 1];
        assert_eq!(built.vertex_count(), fresh.vertex_count() + 6 * sites.len());
        assert_eq!(built.edge_count(), fresh.edge_count() + 11 * sites.len());
        assert_eq!(built.core_unit_face_count(), 6usize.pow(n as u32 - 1));
        built.validate().unwrap();
    }
}

#[test]
fn level_four_golden_counts() {
    let k4 = build_sequence(4, &scheme(), BuildLimits::default())
        .unwrap()
        .pop()
        .unwrap();
    assert_eq!(k4.pasting_log().len(), 19);
    assert_eq!(
        (k4.vertex_count(), k4.edge_count(), k4.unit_face_count()),
        (347, 657, 292)
    );
}

#[test]
fn resource_cap_reports_partial_stats() {
    let err = build_sequence(5, &scheme(), BuildLimits { max_vertices: 400 }).unwrap_err();
    match err {
        ComplexError::CapExceeded { level, partial, .. } => {
            assert_eq!(level, 5);
            assert_eq!(partial.len(), 4);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn builds_are_reproducible() {
    let a = build_sequence(5, &scheme(), BuildLimits::default()).unwrap();
    let b = build_sequence(5, &scheme(), BuildLimits::default()).unwrap();
    assert_eq!(a[4].canonical_dump(), b[4].canonical_dump());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn subdivision_preserves_euler_characteristic(rounds in 1u32..4) {
        let c = iterate(rounds + 1);
        let chi = c.vertex_count() as i64 - c.edge_count() as i64 + c.unit_face_count() as i64 + 1;
        prop_assert_eq!(chi, 2);
        prop_assert_eq!(c.unit_face_count(), 6usize.pow(rounds));
    }
}
