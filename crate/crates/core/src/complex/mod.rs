//! Quad-tile complexes: the macrotiles T_n and the pasted complexes K_n.

mod build;
mod dump;
mod pasting;
mod subdivide;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scheme::{SchemeError, Slot};

pub use build::{
    build_complex, build_sequence, build_sequence_with_stats, BuildLimits, LevelStats,
};
pub use pasting::{
    apply_pastings, find_pasting_sites, pasting_conditions_hold, OrientationRule, PasteRole,
    PastingRecord, PastingSite, PASTED_EDGES,
};
pub use subdivide::subdivide;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FaceId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl FaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VertexKind {
    Corner,
    Side,
    Interior,
}

/// Edge types: eight interior types and four boundary types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeType {
    Interior(u8),
    Top,
    Right,
    Bottom,
    Left,
}

impl EdgeType {
    pub const ALL: [EdgeType; 12] = [
        EdgeType::Interior(1),
        EdgeType::Interior(2),
        EdgeType::Interior(3),
        EdgeType::Interior(4),
        EdgeType::Interior(5),
        EdgeType::Interior(6),
        EdgeType::Interior(7),
        EdgeType::Interior(8),
        EdgeType::Top,
        EdgeType::Right,
        EdgeType::Bottom,
        EdgeType::Left,
    ];

    /// Boundary types indexed by side (top, right, bottom, left).
    pub const BOUNDARY: [EdgeType; 4] = [
        EdgeType::Top,
        EdgeType::Right,
        EdgeType::Bottom,
        EdgeType::Left,
    ];

    /// Type number used for orientation tie-breaks: interior types keep their
    /// number, boundary types follow as 9-12.
    pub fn ordinal(self) -> u8 {
        match self {
            EdgeType::Interior(t) => t,
            EdgeType::Top => 9,
            EdgeType::Right => 10,
            EdgeType::Bottom => 11,
            EdgeType::Left => 12,
        }
    }

    pub fn from_ordinal(ord: u8) -> Option<EdgeType> {
        match ord {
            1..=8 => Some(EdgeType::Interior(ord)),
            9 => Some(EdgeType::Top),
            10 => Some(EdgeType::Right),
            11 => Some(EdgeType::Bottom),
            12 => Some(EdgeType::Left),
            _ => None,
        }
    }

    pub fn is_boundary(self) -> bool {
        !matches!(self, EdgeType::Interior(_))
    }

    /// Short token: `1`..`8`, `T`, `R`, `B`, `L`.
    pub fn token(self) -> String {
        match self {
            EdgeType::Interior(t) => t.to_string(),
            EdgeType::Top => "T".into(),
            EdgeType::Right => "R".into(),
            EdgeType::Bottom => "B".into(),
            EdgeType::Left => "L".into(),
        }
    }

    pub fn from_token(s: &str) -> Option<EdgeType> {
        match s {
            "T" => Some(EdgeType::Top),
            "R" => Some(EdgeType::Right),
            "B" => Some(EdgeType::Bottom),
            "L" => Some(EdgeType::Left),
            _ => s
                .parse::<u8>()
                .ok()
                .filter(|t| (1..=8).contains(t))
                .map(EdgeType::Interior),
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Traversal sense of an edge relative to its intrinsic orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sense {
    Forward,
    Backward,
}

impl Sense {
    pub fn reversed(self) -> Sense {
        match self {
            Sense::Forward => Sense::Backward,
            Sense::Backward => Sense::Forward,
        }
    }

    pub fn token(self) -> char {
        match self {
            Sense::Forward => '+',
            Sense::Backward => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Origin {
    Initial,
    Subdivision(Slot),
    Pasting(PasteRole),
}

/// The edge a side vertex subdivided, recorded when the vertex was created.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HostEdge {
    /// Endpoints of the subdivided edge in its intrinsic orientation.
    pub ends: [VertexId; 2],
    pub edge_type: EdgeType,
    pub level: u32,
    /// Lineage of the edge: all pieces of one original edge share a root.
    pub root: u32,
    /// Position of the vertex along the root edge, in (0, 1).
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRecord {
    pub id: VertexId,
    pub kind: VertexKind,
    pub depth: i32,
    /// Level of the complex in which the vertex first appeared.
    pub creation_stage: u32,
    pub host: Option<HostEdge>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub edge_type: EdgeType,
    pub level: u32,
    pub creation_stage: u32,
    pub root: u32,
    /// Interval of the root edge covered by this edge.
    pub span: (f64, f64),
}

impl EdgeRecord {
    /// Sense of traversing this edge when leaving `from`.
    pub fn sense_from(&self, from: VertexId) -> Sense {
        if self.tail == from {
            Sense::Forward
        } else {
            Sense::Backward
        }
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

/// An original edge and the pieces it was later split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RootEdge {
    pub edge_type: EdgeType,
    /// Whether the tail/head of the original edge lies on the contour of the
    /// macrotile that owns it.
    pub tail_on_boundary: bool,
    pub head_on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceRecord {
    pub id: FaceId,
    /// Clockwise from the left end of the top edge.
    pub corners: [VertexId; 4],
    pub level: u32,
    pub parent: Option<FaceId>,
    pub children: Vec<FaceId>,
    pub pasted: bool,
}

impl FaceRecord {
    pub fn is_unit(&self) -> bool {
        self.level == 1
    }

    /// The top edge as (left, right) corner pair.
    pub fn top_edge(&self) -> (VertexId, VertexId) {
        (self.corners[0], self.corners[1])
    }
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("pasting sites requested on a complex that was not just subdivided (level {0})")]
    NotFreshlySubdivided(u32),
    #[error("pasting site {0} listed more than once")]
    DuplicateSite(String),
    #[error("invalid pasting site {site}: {reason}")]
    InvalidSite { site: String, reason: String },
    #[error("complex level must be at least 1")]
    ZeroLevel,
    #[error("resource cap exceeded while building level {level}: {vertices} vertices > cap {cap}")]
    CapExceeded {
        level: u32,
        vertices: usize,
        cap: usize,
        partial: Vec<LevelStats>,
    },
    #[error("malformed complex: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone)]
pub struct Complex {
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    faces: Vec<FaceRecord>,
    roots: Vec<RootEdge>,
    /// Level n of the complex (T_1 has stage 1).
    stage: u32,
    /// Set by `subdivide`, cleared once pastings are applied.
    fresh: bool,
    pasting_log: Vec<PastingRecord>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
}

fn pair_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Complex {
    fn from_parts(
        vertices: Vec<VertexRecord>,
        edges: Vec<EdgeRecord>,
        faces: Vec<FaceRecord>,
        roots: Vec<RootEdge>,
        stage: u32,
        fresh: bool,
        pasting_log: Vec<PastingRecord>,
    ) -> Complex {
        let mut c = Complex {
            vertices,
            edges,
            faces,
            roots,
            stage,
            fresh,
            pasting_log,
            adjacency: Vec::new(),
            edge_index: HashMap::new(),
        };
        c.reindex();
        c
    }

    fn reindex(&mut self) {
        let mut adjacency = vec![Vec::new(); self.vertices.len()];
        let mut edge_index = HashMap::with_capacity(self.edges.len());
        for e in &self.edges {
            adjacency[e.tail.index()].push((e.head, e.id));
            adjacency[e.head.index()].push((e.tail, e.id));
            edge_index.insert(pair_key(e.tail, e.head), e.id);
        }
        for list in &mut adjacency {
            list.sort();
        }
        self.adjacency = adjacency;
        self.edge_index = edge_index;
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn is_fresh(&self) -> bool {
        self.fresh
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    /// All registered macrotiles, of every level.
    pub fn faces(&self) -> &[FaceRecord] {
        &self.faces
    }

    pub fn roots(&self) -> &[RootEdge] {
        &self.roots
    }

    pub fn pasting_log(&self) -> &[PastingRecord] {
        &self.pasting_log
    }

    pub fn vertex(&self, v: VertexId) -> &VertexRecord {
        &self.vertices[v.index()]
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeRecord {
        &self.edges[e.index()]
    }

    pub fn face(&self, f: FaceId) -> &FaceRecord {
        &self.faces[f.index()]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    /// Level-1 faces (the unit tiles).
    pub fn unit_faces(&self) -> impl Iterator<Item = &FaceRecord> {
        self.faces.iter().filter(|f| f.is_unit())
    }

    pub fn unit_face_count(&self) -> usize {
        self.unit_faces().count()
    }

    /// Unit tiles descending from the initial quad only.
    pub fn core_unit_face_count(&self) -> usize {
        self.unit_faces().filter(|f| !f.pasted).count()
    }

    /// Neighbors of `v` with the connecting edge, sorted by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v.index()]
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&pair_key(a, b)).copied()
    }

    pub fn max_depth(&self) -> i32 {
        self.vertices.iter().map(|v| v.depth).max().unwrap_or(-1)
    }

    /// The four corners of the initial quad keep ids 0..4 at every level.
    pub fn initial_corners(&self) -> [VertexId; 4] {
        [VertexId(0), VertexId(1), VertexId(2), VertexId(3)]
    }

    /// Checks cross-references and record-level invariants.
    pub fn validate(&self) -> Result<(), ComplexError> {
        let bad = |m: String| Err(ComplexError::Malformed(m));
        let nv = self.vertices.len() as u32;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id.0 as usize != i {
                return bad(format!("vertex slot {i} holds {}", v.id));
            }
            match v.origin {
                Origin::Initial => {
                    if v.depth != -1 || v.kind != VertexKind::Corner {
                        return bad(format!("initial vertex {} is not a depth -1 corner", v.id));
                    }
                }
                Origin::Subdivision(slot) => {
                    let want = if slot.is_interior() {
                        VertexKind::Interior
                    } else {
                        VertexKind::Side
                    };
                    if v.kind != want || slot.is_corner() {
                        return bad(format!(
                            "vertex {} of origin {slot} has kind {:?}",
                            v.id, v.kind
                        ));
                    }
                }
                Origin::Pasting(role) => {
                    if v.kind != role.kind() {
                        return bad(format!(
                            "pasted vertex {} ({role:?}) has kind {:?}",
                            v.id, v.kind
                        ));
                    }
                }
            }
            if v.kind == VertexKind::Side && v.host.is_none() {
                return bad(format!("side vertex {} has no host edge", v.id));
            }
            if v.depth < -1 {
                return bad(format!("vertex {} has depth {}", v.id, v.depth));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.id.0 as usize != i {
                return bad(format!("edge slot {i} holds {}", e.id));
            }
            if e.tail.0 >= nv || e.head.0 >= nv || e.tail == e.head {
                return bad(format!("edge {} has bad endpoints", e.id));
            }
            if e.root as usize >= self.roots.len() {
                return bad(format!("edge {} has dangling root {}", e.id, e.root));
            }
            if e.level < 1 {
                return bad(format!("edge {} has level 0", e.id));
            }
        }
        if self.edge_index.len() != self.edges.len() {
            return bad("parallel edges present".into());
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.id.0 as usize != i {
                return bad(format!("face slot {i} holds {}", f.id));
            }
            for a in 0..4 {
                if f.corners[a].0 >= nv {
                    return bad(format!("face {} has dangling corner", f.id));
                }
                for b in a + 1..4 {
                    if f.corners[a] == f.corners[b] {
                        return bad(format!("face {} repeats a corner", f.id));
                    }
                }
            }
            if f.is_unit() {
                for k in 0..4 {
                    if self
                        .edge_between(f.corners[k], f.corners[(k + 1) % 4])
                        .is_none()
                    {
                        return bad(format!("unit face {} side {k} is not an edge", f.id));
                    }
                }
            }
            if let Some(p) = f.parent {
                if p.index() >= self.faces.len() || !self.faces[p.index()].children.contains(&f.id)
                {
                    return bad(format!("face {} has inconsistent parent", f.id));
                }
            }
        }
        if !self.is_connected() {
            return bad("1-skeleton is disconnected".into());
        }
        Ok(())
    }

    /// The same complex with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[VertexId]) -> Complex {
        assert_eq!(perm.len(), self.vertices.len(), "permutation size");
        let m = |v: VertexId| perm[v.index()];
        let mut vertices = self.vertices.clone();
        for r in &self.vertices {
            let mut r = r.clone();
            r.id = m(r.id);
            if let Some(h) = &mut r.host {
                h.ends = h.ends.map(m);
            }
            let slot = r.id.index();
            vertices[slot] = r;
        }
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeRecord {
                tail: m(e.tail),
                head: m(e.head),
                ..e.clone()
            })
            .collect();
        let faces = self
            .faces
            .iter()
            .map(|f| FaceRecord {
                corners: f.corners.map(m),
                ..f.clone()
            })
            .collect();
        let log = self
            .pasting_log
            .iter()
            .map(|p| {
                let mut p = p.clone();
                let s = &mut p.site;
                (s.x1, s.x2, s.y, s.z2, s.z1) = (m(s.x1), m(s.x2), m(s.y), m(s.z2), m(s.z1));
                p.created = p.created.map(m);
                p
            })
            .collect();
        Complex::from_parts(
            vertices,
            edges,
            faces,
            self.roots.clone(),
            self.stage,
            self.fresh,
            log,
        )
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in self.neighbors(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertices.len()
    }
}

/// T_1: a single oriented quad with its four boundary edges.
pub fn make_unit_tile() -> Complex {
    let vertices = (0..4)
        .map(|i| VertexRecord {
            id: VertexId(i),
            kind: VertexKind::Corner,
            depth: -1,
            creation_stage: 1,
            host: None,
            origin: Origin::Initial,
        })
        .collect();
    // Clockwise contour NW -> NE -> SE -> SW -> NW.
    let mut edges = Vec::with_capacity(4);
    let mut roots = Vec::with_capacity(4);
    for side in 0..4u32 {
        edges.push(EdgeRecord {
            id: EdgeId(side),
            tail: VertexId(side),
            head: VertexId((side + 1) % 4),
            edge_type: EdgeType::BOUNDARY[side as usize],
            level: 1,
            creation_stage: 1,
            root: side,
            span: (0.0, 1.0),
        });
        roots.push(RootEdge {
            edge_type: EdgeType::BOUNDARY[side as usize],
            tail_on_boundary: true,
            head_on_boundary: true,
        });
    }
    let faces = vec![FaceRecord {
        id: FaceId(0),
        corners: [VertexId(0), VertexId(1), VertexId(2), VertexId(3)],
        level: 1,
        parent: None,
        children: Vec::new(),
        pasted: false,
    }];
    Complex::from_parts(vertices, edges, faces, roots, 1, false, Vec::new())
}
