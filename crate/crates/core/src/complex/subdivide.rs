use std::collections::HashMap;

use super::{
    Complex, EdgeId, EdgeRecord, EdgeType, FaceId, FaceRecord, HostEdge, Origin, RootEdge,
    VertexId, VertexKind, VertexRecord,
};
use crate::scheme::{Slot, SubdivisionScheme, BOUNDARY_HALVES};

/// Replaces every unit tile by the six tiles of `scheme`.
///
/// Side midpoints are created once per edge and shared by the tiles on both
/// sides of it. Edges that bound no unit tile are carried over unsplit.
pub fn subdivide(c: &Complex, scheme: &SubdivisionScheme) -> Complex {
    let stage = c.stage + 1;
    let mut vertices = c.vertices.clone();
    let mut roots = c.roots.clone();
    let mut faces = c.faces.clone();
    for f in &mut faces {
        f.level += 1;
    }

    let unit_ids: Vec<FaceId> = c.unit_faces().map(|f| f.id).collect();
    let mut midpoint: HashMap<EdgeId, VertexId> = HashMap::new();
    // Slot assignment per unit face, indexed by `Slot::index`.
    let mut slot_maps: Vec<[VertexId; 11]> = Vec::with_capacity(unit_ids.len());

    let push_vertex = |vertices: &mut Vec<VertexRecord>,
                       kind: VertexKind,
                       depth: i32,
                       host: Option<HostEdge>,
                       origin: Origin| {
        let id = VertexId(vertices.len() as u32);
        vertices.push(VertexRecord {
            id,
            kind,
            depth,
            creation_stage: stage,
            host,
            origin,
        });
        id
    };

    for &fid in &unit_ids {
        let face = c.face(fid);
        let mut slots = [VertexId(u32::MAX); 11];
        for (k, &corner) in face.corners.iter().enumerate() {
            slots[Slot::CORNERS[k].index()] = corner;
        }
        for k in 0..4 {
            let (a, b) = (face.corners[k], face.corners[(k + 1) % 4]);
            let eid = c
                .edge_between(a, b)
                .expect("unit face sides are edges of the complex");
            let mid = *midpoint.entry(eid).or_insert_with(|| {
                let e = c.edge(eid);
                let depth = 1 + c.vertex(e.tail).depth.max(c.vertex(e.head).depth);
                let host = HostEdge {
                    ends: [e.tail, e.head],
                    edge_type: e.edge_type,
                    level: e.level + 1,
                    root: e.root,
                    position: 0.5 * (e.span.0 + e.span.1),
                };
                push_vertex(
                    &mut vertices,
                    VertexKind::Side,
                    depth,
                    Some(host),
                    Origin::Subdivision(Slot::SIDES[k]),
                )
            });
            slots[Slot::SIDES[k].index()] = mid;
        }
        let depth = 1 + face
            .corners
            .iter()
            .map(|&v| c.vertex(v).depth)
            .max()
            .expect("four corners");
        for slot in [Slot::A, Slot::B, Slot::C] {
            slots[slot.index()] = push_vertex(
                &mut vertices,
                VertexKind::Interior,
                depth,
                None,
                Origin::Subdivision(slot),
            );
        }
        slot_maps.push(slots);
    }

    let mut edges: Vec<EdgeRecord> = Vec::with_capacity(c.edges.len() * 2 + unit_ids.len() * 8);
    let push_edge = |edges: &mut Vec<EdgeRecord>, mut e: EdgeRecord| {
        e.id = EdgeId(edges.len() as u32);
        edges.push(e);
    };
    for e in &c.edges {
        let level = e.level + 1;
        match midpoint.get(&e.id) {
            Some(&m) => {
                let mid = 0.5 * (e.span.0 + e.span.1);
                push_edge(
                    &mut edges,
                    EdgeRecord {
                        head: m,
                        level,
                        creation_stage: stage,
                        span: (e.span.0, mid),
                        ..e.clone()
                    },
                );
                push_edge(
                    &mut edges,
                    EdgeRecord {
                        tail: m,
                        level,
                        creation_stage: stage,
                        span: (mid, e.span.1),
                        ..e.clone()
                    },
                );
            }
            None => push_edge(&mut edges, EdgeRecord { level, ..e.clone() }),
        }
    }

    for slots in &slot_maps {
        for ie in scheme.interior_edges() {
            let root = roots.len() as u32;
            roots.push(RootEdge {
                edge_type: EdgeType::Interior(ie.edge_type),
                tail_on_boundary: ie.from.on_boundary(),
                head_on_boundary: ie.to.on_boundary(),
            });
            push_edge(
                &mut edges,
                EdgeRecord {
                    id: EdgeId(0),
                    tail: slots[ie.from.index()],
                    head: slots[ie.to.index()],
                    edge_type: EdgeType::Interior(ie.edge_type),
                    level: 2,
                    creation_stage: stage,
                    root,
                    span: (0.0, 1.0),
                },
            );
        }
    }

    for (fid, slots) in unit_ids.iter().zip(&slot_maps) {
        let parent_pasted = faces[fid.index()].pasted;
        let mut children = Vec::with_capacity(6);
        for quad in scheme.subquads() {
            let id = FaceId(faces.len() as u32);
            faces.push(FaceRecord {
                id,
                corners: quad.corners.map(|s| slots[s.index()]),
                level: 1,
                parent: Some(*fid),
                children: Vec::new(),
                pasted: parent_pasted,
            });
            children.push(id);
        }
        faces[fid.index()].children = children;
    }

    debug_assert_eq!(BOUNDARY_HALVES.len(), 8);
    Complex::from_parts(
        vertices,
        edges,
        faces,
        roots,
        stage,
        true,
        c.pasting_log.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::make_unit_tile;

    fn euler(c: &Complex) -> i64 {
        c.vertex_count() as i64 - c.edge_count() as i64 + c.unit_face_count() as i64 + 1
    }

    #[test]
    fn t2_counts_and_depths() {
        let scheme = SubdivisionScheme::default();
        let t2 = subdivide(&make_unit_tile(), &scheme);
        assert_eq!(
            (t2.vertex_count(), t2.edge_count(), t2.unit_face_count()),
            (11, 16, 6)
        );
        assert_eq!(euler(&t2), 2);
        assert!(t2.vertices()[4..].iter().all(|v| v.depth == 0));
        assert_eq!(
            t2.vertices()
                .iter()
                .filter(|v| v.kind == VertexKind::Side)
                .count(),
            4
        );
        assert_eq!(t2.face(FaceId(0)).level, 2);
        assert_eq!(t2.face(FaceId(0)).children.len(), 6);
        t2.validate().unwrap();
    }

    #[test]
    fn t3_counts() {
        let scheme = SubdivisionScheme::default();
        let t3 = subdivide(&subdivide(&make_unit_tile(), &scheme), &scheme);
        assert_eq!(
            (t3.vertex_count(), t3.edge_count(), t3.unit_face_count()),
            (45, 80, 36)
        );
        assert_eq!(euler(&t3), 2);
        t3.validate().unwrap();
    }

    #[test]
    fn halves_inherit_type_and_root() {
        let scheme = SubdivisionScheme::default();
        let t2 = subdivide(&make_unit_tile(), &scheme);
        let top: Vec<_> = t2
            .edges()
            .iter()
            .filter(|e| e.edge_type == EdgeType::Top)
            .collect();
        assert_eq!(top.len(), 2);
        assert!(top.iter().all(|e| e.root == 0 && e.level == 2));
        assert_eq!(top[0].head, top[1].tail);
        let u = t2.vertex(top[0].head);
        assert_eq!(u.origin, Origin::Subdivision(Slot::U));
        assert_eq!(u.host.unwrap().ends, [VertexId(0), VertexId(1)]);
    }

    #[test]
    fn every_edge_touches_latest_round() {
        let scheme = SubdivisionScheme::default();
        let mut c = make_unit_tile();
        for _ in 0..3 {
            c = subdivide(&c, &scheme);
            for e in c.edges() {
                let newest = c
                    .vertex(e.tail)
                    .creation_stage
                    .max(c.vertex(e.head).creation_stage);
                assert_eq!(
                    newest,
                    c.stage(),
                    "edge {} untouched by the latest round",
                    e.id
                );
            }
        }
    }
}
