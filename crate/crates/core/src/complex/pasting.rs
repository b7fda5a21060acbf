//! Pasting: attaching a new macrotile along a five-vertex path.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{
    Complex, ComplexError, EdgeId, EdgeRecord, EdgeType, FaceId, FaceRecord, HostEdge, Origin,
    RootEdge, VertexId, VertexKind, VertexRecord,
};

/// Roles of the six vertices created by one pasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PasteRole {
    T1,
    T2,
    T3,
    TA,
    TB,
    TC,
}

impl PasteRole {
    pub const ALL: [PasteRole; 6] = [
        PasteRole::T1,
        PasteRole::T2,
        PasteRole::T3,
        PasteRole::TA,
        PasteRole::TB,
        PasteRole::TC,
    ];

    pub fn kind(self) -> VertexKind {
        match self {
            PasteRole::T1 => VertexKind::Corner,
            PasteRole::T2 | PasteRole::T3 => VertexKind::Side,
            PasteRole::TA | PasteRole::TB | PasteRole::TC => VertexKind::Interior,
        }
    }
}

/// Nodes of a pasting, the site path followed by the created vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteNode {
    X1,
    X2,
    Y,
    Z2,
    Z1,
    New(PasteRole),
}

/// The eleven edges added by a pasting, in the order they are created.
/// Boundary pieces of the pasted macrotile run clockwise around
/// `X1 -> Y -> Z1 -> T1`; interior edges are numbered in listing order.
pub const PASTED_EDGES: [(SiteNode, SiteNode, EdgeType); 11] = {
    use PasteRole::*;
    use SiteNode::*;
    [
        (New(T2), X1, EdgeType::Left),
        (X2, New(TA), EdgeType::Interior(1)),
        (X2, New(TB), EdgeType::Interior(2)),
        (New(T2), New(TB), EdgeType::Interior(3)),
        (New(TC), New(TB), EdgeType::Interior(4)),
        (New(TC), New(TA), EdgeType::Interior(5)),
        (New(T1), New(T2), EdgeType::Left),
        (New(T3), New(T1), EdgeType::Bottom),
        (Z1, New(T3), EdgeType::Bottom),
        (New(TC), Z1, EdgeType::Interior(6)),
        (New(TA), Z2, EdgeType::Interior(7)),
    ]
};

/// Unit tiles of the pasted macrotile that the pasted edges close up.
const PASTED_TILES: [[SiteNode; 4]; 4] = {
    use PasteRole::*;
    use SiteNode::*;
    [
        [X1, X2, New(TB), New(T2)],
        [X2, Y, Z2, New(TA)],
        [X2, New(TA), New(TC), New(TB)],
        [New(TA), Z2, Z1, New(TC)],
    ]
};

/// How the orientation of a site was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OrientationRule {
    /// Host edge of X1 has the higher level.
    HostLevel,
    /// Same level, different host types: X1 on the larger type number.
    HostType,
    /// Same boundary edge: X1 precedes Z1 clockwise.
    SameBoundaryEdge,
    /// Same interior edge: X1 nearer the macrotile contour.
    SameInteriorEdge,
    /// Nothing above decides; the smaller vertex id becomes X1.
    IdTieBreak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PastingSite {
    pub x1: VertexId,
    pub x2: VertexId,
    pub y: VertexId,
    pub z2: VertexId,
    pub z1: VertexId,
    /// A unit tile containing the edge X2-Y.
    pub base_face: FaceId,
    pub rule: OrientationRule,
}

impl PastingSite {
    pub fn path(&self) -> [VertexId; 5] {
        [self.x1, self.x2, self.y, self.z2, self.z1]
    }

    /// Orientation-free identity of the site.
    pub fn unordered_key(&self) -> [VertexId; 5] {
        let p = self.path();
        let mut r = p;
        r.reverse();
        p.min(r)
    }
}

impl fmt::Display for PastingSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}-{}-{}",
            self.x1, self.x2, self.y, self.z2, self.z1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PastingRecord {
    pub stage: u32,
    pub site: PastingSite,
    /// Created vertices in `PasteRole::ALL` order.
    pub created: [VertexId; 6],
    pub macrotile: FaceId,
}

fn side_host(c: &Complex, v: VertexId) -> Option<&HostEdge> {
    let rec = c.vertex(v);
    (rec.kind == VertexKind::Side)
        .then_some(())
        .and(rec.host.as_ref())
}

/// Decides which of the two outer path vertices plays X1.
/// Returns true when `a` is X1.
fn orient(c: &Complex, a: VertexId, b: VertexId) -> (bool, OrientationRule) {
    let ha = side_host(c, a).expect("site ends are side vertices");
    let hb = side_host(c, b).expect("site ends are side vertices");
    if ha.level != hb.level {
        return (ha.level > hb.level, OrientationRule::HostLevel);
    }
    if ha.edge_type != hb.edge_type {
        return (
            ha.edge_type.ordinal() > hb.edge_type.ordinal(),
            OrientationRule::HostType,
        );
    }
    if ha.root == hb.root && ha.position != hb.position {
        let root = &c.roots[ha.root as usize];
        if root.edge_type.is_boundary() {
            // Boundary roots run clockwise, so clockwise order is position order.
            return (ha.position < hb.position, OrientationRule::SameBoundaryEdge);
        }
        let reach = |p: f64| {
            let tail = root.tail_on_boundary.then_some(p);
            let head = root.head_on_boundary.then_some(1.0 - p);
            match (tail, head) {
                (Some(t), Some(h)) => Some(t.min(h)),
                (t, h) => t.or(h),
            }
        };
        if let (Some(da), Some(db)) = (reach(ha.position), reach(hb.position)) {
            if da != db {
                return (da < db, OrientationRule::SameInteriorEdge);
            }
        }
    }
    (a < b, OrientationRule::IdTieBreak)
}

fn corner_triples(c: &Complex) -> HashSet<[VertexId; 3]> {
    let mut set = HashSet::with_capacity(c.faces.len() * 4);
    for f in &c.faces {
        for skip in 0..4 {
            let mut t = [VertexId(0); 3];
            let mut i = 0;
            for (k, &v) in f.corners.iter().enumerate() {
                if k != skip {
                    t[i] = v;
                    i += 1;
                }
            }
            t.sort();
            set.insert(t);
        }
    }
    set
}

fn is_latest_side(c: &Complex, v: VertexId, depth: i32) -> Option<&HostEdge> {
    let rec = c.vertex(v);
    if rec.depth == depth && rec.creation_stage == c.stage {
        side_host(c, v)
    } else {
        None
    }
}

fn is_side_of_depth(c: &Complex, v: VertexId, depth: i32) -> bool {
    c.vertex(v).depth == depth && side_host(c, v).is_some()
}

fn base_face(c: &Complex, x2: VertexId, y: VertexId) -> FaceId {
    c.unit_faces()
        .find(|f| f.corners.contains(&x2) && f.corners.contains(&y))
        .or_else(|| c.unit_faces().find(|f| f.corners.contains(&y)))
        .map(|f| f.id)
        .unwrap_or(FaceId(0))
}

/// All pasting sites of a freshly subdivided complex, each unordered site
/// once, in its resolved orientation, sorted by site path.
pub fn find_pasting_sites(c: &Complex) -> Result<Vec<PastingSite>, ComplexError> {
    if !c.fresh {
        return Err(ComplexError::NotFreshlySubdivided(c.stage));
    }
    let k = c.max_depth();
    let triples = corner_triples(c);
    let mut found: BTreeSet<[VertexId; 5]> = BTreeSet::new();

    for x2 in c.vertex_ids() {
        let Some(hx) = is_latest_side(c, x2, k) else {
            continue;
        };
        for (y, x1) in [(hx.ends[0], hx.ends[1]), (hx.ends[1], hx.ends[0])] {
            if c.vertex(y).depth != k - 2 || !is_side_of_depth(c, x1, k - 1) {
                continue;
            }
            for &(z2, _) in c.neighbors(y) {
                if z2 == x2 {
                    continue;
                }
                let Some(hz) = is_latest_side(c, z2, k) else {
                    continue;
                };
                let z1 = match hz.ends {
                    [a, b] if a == y => b,
                    [a, b] if b == y => a,
                    _ => continue,
                };
                if z1 == x1 || !is_side_of_depth(c, z1, k - 1) {
                    continue;
                }
                let mut t = [x1, y, z1];
                t.sort();
                if triples.contains(&t) {
                    continue;
                }
                let p = [x1, x2, y, z2, z1];
                let mut r = p;
                r.reverse();
                found.insert(p.min(r));
            }
        }
    }

    let mut sites: Vec<PastingSite> = found
        .into_iter()
        .map(|[a, a2, y, b2, b]| {
            let (a_first, rule) = orient(c, a, b);
            let (x1, x2, z2, z1) = if a_first {
                (a, a2, b2, b)
            } else {
                (b, b2, a2, a)
            };
            PastingSite {
                x1,
                x2,
                y,
                z2,
                z1,
                base_face: base_face(c, x2, y),
                rule,
            }
        })
        .collect();
    sites.sort_by_key(|s| s.path());
    Ok(sites)
}

/// Checks conditions 1-5 for one oriented site on a freshly subdivided complex.
pub fn pasting_conditions_hold(c: &Complex, site: &PastingSite) -> Result<(), String> {
    let k = c.max_depth();
    let [x1, x2, y, z2, z1] = site.path();
    for (a, b) in [(x1, x2), (x2, y), (y, z2), (z2, z1)] {
        if c.edge_between(a, b).is_none() {
            return Err(format!("{a}-{b} is not an edge"));
        }
    }
    let mut t = [x1, y, z1];
    t.sort();
    if c.faces.iter().any(|f| {
        let mut hits = 0;
        for v in t {
            if f.corners.contains(&v) {
                hits += 1;
            }
        }
        hits == 3
    }) {
        return Err("X1, Y, Z1 are corners of one macrotile".into());
    }
    if !is_side_of_depth(c, x1, k - 1) || !is_side_of_depth(c, z1, k - 1) {
        return Err("X1/Z1 are not side vertices of depth k-1".into());
    }
    for (mid, end) in [(x2, x1), (z2, z1)] {
        match is_latest_side(c, mid, k) {
            Some(h) if (h.ends == [end, y] || h.ends == [y, end]) => {}
            _ => return Err(format!("{mid} is not the latest midpoint of {end}-{y}")),
        }
    }
    if c.vertex(y).depth != k - 2 {
        return Err("Y does not have depth k-2".into());
    }
    let (x1_first, rule) = orient(c, x1, z1);
    if !x1_first || rule != site.rule {
        return Err("orientation does not follow the tie-break rules".into());
    }
    Ok(())
}

/// Applies all sites to the snapshot `c`. Each site adds six vertices, eleven
/// edges, the pasted macrotile and the unit tiles the new edges enclose.
pub fn apply_pastings(c: &Complex, sites: &[PastingSite]) -> Result<Complex, ComplexError> {
    let mut seen = HashSet::new();
    for s in sites {
        if !seen.insert(s.unordered_key()) {
            return Err(ComplexError::DuplicateSite(s.to_string()));
        }
        for v in s.path() {
            if v.index() >= c.vertex_count() {
                return Err(ComplexError::InvalidSite {
                    site: s.to_string(),
                    reason: format!("unknown vertex {v}"),
                });
            }
        }
        for (a, b) in [(s.x1, s.x2), (s.x2, s.y), (s.y, s.z2), (s.z2, s.z1)] {
            if c.edge_between(a, b).is_none() {
                return Err(ComplexError::InvalidSite {
                    site: s.to_string(),
                    reason: format!("{a}-{b} is not an edge"),
                });
            }
        }
    }

    let stage = c.stage;
    let k = c.max_depth();
    let mut vertices = c.vertices.clone();
    let mut edges = c.edges.clone();
    let mut faces = c.faces.clone();
    let mut roots = c.roots.clone();
    let mut log = c.pasting_log.clone();

    for site in sites {
        let left_root = roots.len() as u32;
        roots.push(RootEdge {
            edge_type: EdgeType::Left,
            tail_on_boundary: true,
            head_on_boundary: true,
        });
        let bottom_root = left_root + 1;
        roots.push(RootEdge {
            edge_type: EdgeType::Bottom,
            tail_on_boundary: true,
            head_on_boundary: true,
        });

        let base = vertices.len() as u32;
        let created: [VertexId; 6] = std::array::from_fn(|i| VertexId(base + i as u32));
        let node = |n: SiteNode| match n {
            SiteNode::X1 => site.x1,
            SiteNode::X2 => site.x2,
            SiteNode::Y => site.y,
            SiteNode::Z2 => site.z2,
            SiteNode::Z1 => site.z1,
            SiteNode::New(role) => created[role as usize],
        };
        let t1 = created[PasteRole::T1 as usize];
        for (i, role) in PasteRole::ALL.into_iter().enumerate() {
            let host = match role {
                PasteRole::T2 => Some(HostEdge {
                    ends: [t1, site.x1],
                    edge_type: EdgeType::Left,
                    level: 2,
                    root: left_root,
                    position: 0.5,
                }),
                PasteRole::T3 => Some(HostEdge {
                    ends: [site.z1, t1],
                    edge_type: EdgeType::Bottom,
                    level: 2,
                    root: bottom_root,
                    position: 0.5,
                }),
                _ => None,
            };
            vertices.push(VertexRecord {
                id: created[i],
                kind: role.kind(),
                depth: if role == PasteRole::T1 { k - 1 } else { k },
                creation_stage: stage,
                host,
                origin: Origin::Pasting(role),
            });
        }

        let on_contour = |n: SiteNode| {
            !matches!(
                n,
                SiteNode::New(PasteRole::TA)
                    | SiteNode::New(PasteRole::TB)
                    | SiteNode::New(PasteRole::TC)
            )
        };
        for (from, to, edge_type) in PASTED_EDGES {
            let (root, span) = match (edge_type, from, to) {
                (EdgeType::Left, SiteNode::New(PasteRole::T1), _) => (left_root, (0.0, 0.5)),
                (EdgeType::Left, _, _) => (left_root, (0.5, 1.0)),
                (EdgeType::Bottom, SiteNode::Z1, _) => (bottom_root, (0.0, 0.5)),
                (EdgeType::Bottom, _, _) => (bottom_root, (0.5, 1.0)),
                _ => {
                    roots.push(RootEdge {
                        edge_type,
                        tail_on_boundary: on_contour(from),
                        head_on_boundary: on_contour(to),
                    });
                    (roots.len() as u32 - 1, (0.0, 1.0))
                }
            };
            edges.push(EdgeRecord {
                id: EdgeId(edges.len() as u32),
                tail: node(from),
                head: node(to),
                edge_type,
                level: 2,
                creation_stage: stage,
                root,
                span,
            });
        }

        let macro_id = FaceId(faces.len() as u32);
        faces.push(FaceRecord {
            id: macro_id,
            corners: [site.x1, site.y, site.z1, t1],
            level: 2,
            parent: None,
            children: Vec::new(),
            pasted: true,
        });
        let mut children = Vec::with_capacity(PASTED_TILES.len());
        for tile in PASTED_TILES {
            let id = FaceId(faces.len() as u32);
            faces.push(FaceRecord {
                id,
                corners: tile.map(node),
                level: 1,
                parent: Some(macro_id),
                children: Vec::new(),
                pasted: true,
            });
            children.push(id);
        }
        faces[macro_id.index()].children = children;
        log.push(PastingRecord {
            stage,
            site: *site,
            created,
            macrotile: macro_id,
        });
    }

    Ok(Complex::from_parts(
        vertices, edges, faces, roots, stage, false, log,
    ))
}
