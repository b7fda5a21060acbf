//! The combinatorial datum describing how one oriented quad splits into six.
//!
//! A scheme names eleven node slots: the four parent corners, the four side
//! midpoints `U R D L` (top, right, bottom, left) and three interior nodes
//! `A B C`. It lists eight interior edges, each tagged with a type number
//! 1-8 and oriented from the first slot to the second, and six subquads.
//! Every subquad lists its corners clockwise starting at the left end of its
//! top edge.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Slot {
    NW,
    NE,
    SE,
    SW,
    U,
    R,
    D,
    L,
    A,
    B,
    C,
}

impl Slot {
    pub const ALL: [Slot; 11] = [
        Slot::NW,
        Slot::NE,
        Slot::SE,
        Slot::SW,
        Slot::U,
        Slot::R,
        Slot::D,
        Slot::L,
        Slot::A,
        Slot::B,
        Slot::C,
    ];

    /// Parent corners in clockwise order from the top-left.
    pub const CORNERS: [Slot; 4] = [Slot::NW, Slot::NE, Slot::SE, Slot::SW];

    /// Side midpoints, indexed like the parent sides (top, right, bottom, left).
    pub const SIDES: [Slot; 4] = [Slot::U, Slot::R, Slot::D, Slot::L];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_corner(self) -> bool {
        matches!(self, Slot::NW | Slot::NE | Slot::SE | Slot::SW)
    }

    pub fn is_side(self) -> bool {
        matches!(self, Slot::U | Slot::R | Slot::D | Slot::L)
    }

    pub fn is_interior(self) -> bool {
        matches!(self, Slot::A | Slot::B | Slot::C)
    }

    /// True for slots lying on the parent's contour.
    pub fn on_boundary(self) -> bool {
        !self.is_interior()
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::NW => "NW",
            Slot::NE => "NE",
            Slot::SE => "SE",
            Slot::SW => "SW",
            Slot::U => "U",
            Slot::R => "R",
            Slot::D => "D",
            Slot::L => "L",
            Slot::A => "A",
            Slot::B => "B",
            Slot::C => "C",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slot {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slot::ALL
            .iter()
            .copied()
            .find(|slot| slot.name() == s)
            .ok_or_else(|| SchemeError::UnknownSlot(s.to_string()))
    }
}

/// The eight boundary half-edges of a subdivided quad, each oriented
/// clockwise along the parent contour, paired with the parent side index.
pub const BOUNDARY_HALVES: [(Slot, Slot, usize); 8] = [
    (Slot::NW, Slot::U, 0),
    (Slot::U, Slot::NE, 0),
    (Slot::NE, Slot::R, 1),
    (Slot::R, Slot::SE, 1),
    (Slot::SE, Slot::D, 2),
    (Slot::D, Slot::SW, 2),
    (Slot::SW, Slot::L, 3),
    (Slot::L, Slot::NW, 3),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorEdgeSlot {
    pub from: Slot,
    pub to: Slot,
    /// Type number in 1..=8.
    pub edge_type: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubQuad {
    /// Clockwise, `corners[0] -> corners[1]` is the top edge.
    pub corners: [Slot; 4],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("unknown node slot `{0}`")]
    UnknownSlot(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed scheme: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdivisionScheme {
    interior_edges: Vec<InteriorEdgeSlot>,
    subquads: Vec<SubQuad>,
}

impl SubdivisionScheme {
    pub fn new(
        interior_edges: Vec<InteriorEdgeSlot>,
        subquads: Vec<SubQuad>,
    ) -> Result<Self, SchemeError> {
        let scheme = SubdivisionScheme {
            interior_edges,
            subquads,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn interior_edges(&self) -> &[InteriorEdgeSlot] {
        &self.interior_edges
    }

    pub fn subquads(&self) -> &[SubQuad] {
        &self.subquads
    }

    /// Finds the interior edge joining two slots, in either direction.
    pub fn interior_edge(&self, a: Slot, b: Slot) -> Option<&InteriorEdgeSlot> {
        self.interior_edges
            .iter()
            .find(|e| (e.from == a && e.to == b) || (e.from == b && e.to == a))
    }

    fn validate(&self) -> Result<(), SchemeError> {
        let bad = |msg: String| Err(SchemeError::Malformed(msg));

        if self.interior_edges.len() != 8 {
            return bad(format!(
                "expected 8 interior edges, found {}",
                self.interior_edges.len()
            ));
        }
        if self.subquads.len() != 6 {
            return bad(format!(
                "expected 6 subquads, found {}",
                self.subquads.len()
            ));
        }

        let mut seen_types = [false; 9];
        for e in &self.interior_edges {
            if !(1..=8).contains(&e.edge_type) {
                return bad(format!(
                    "edge {}-{} has type {} outside 1..=8",
                    e.from, e.to, e.edge_type
                ));
            }
            if std::mem::replace(&mut seen_types[e.edge_type as usize], true) {
                return bad(format!("type {} used twice", e.edge_type));
            }
            if e.from == e.to {
                return bad(format!("edge {}-{} is a loop", e.from, e.to));
            }
            if BOUNDARY_HALVES
                .iter()
                .any(|&(a, b, _)| (a, b) == (e.from, e.to) || (b, a) == (e.from, e.to))
            {
                return bad(format!(
                    "edge {}-{} duplicates a boundary half",
                    e.from, e.to
                ));
            }
        }
        for (i, e) in self.interior_edges.iter().enumerate() {
            for f in &self.interior_edges[i + 1..] {
                if (e.from, e.to) == (f.from, f.to) || (e.from, e.to) == (f.to, f.from) {
                    return bad(format!("edge {}-{} listed twice", e.from, e.to));
                }
            }
        }

        // Directed side usage: every interior edge must be traversed once in
        // each direction, every boundary half once in its clockwise direction.
        let mut interior_uses = vec![(0usize, 0usize); self.interior_edges.len()];
        let mut half_uses = [0usize; 8];
        for (qi, quad) in self.subquads.iter().enumerate() {
            let c = quad.corners;
            for i in 0..4 {
                for j in i + 1..4 {
                    if c[i] == c[j] {
                        return bad(format!("subquad {qi} repeats slot {}", c[i]));
                    }
                }
            }
            for i in 0..4 {
                let (a, b) = (c[i], c[(i + 1) % 4]);
                if let Some(h) = BOUNDARY_HALVES
                    .iter()
                    .position(|&(x, y, _)| (x, y) == (a, b))
                {
                    half_uses[h] += 1;
                } else if BOUNDARY_HALVES.iter().any(|&(x, y, _)| (y, x) == (a, b)) {
                    return bad(format!(
                        "subquad {qi} runs boundary half {b}-{a} counter-clockwise"
                    ));
                } else if let Some(k) = self
                    .interior_edges
                    .iter()
                    .position(|e| (e.from, e.to) == (a, b) || (e.to, e.from) == (a, b))
                {
                    if self.interior_edges[k].from == a {
                        interior_uses[k].0 += 1;
                    } else {
                        interior_uses[k].1 += 1;
                    }
                } else {
                    return bad(format!("subquad {qi} side {a}-{b} is not an edge"));
                }
            }
        }
        for (h, &uses) in half_uses.iter().enumerate() {
            if uses != 1 {
                let (a, b, _) = BOUNDARY_HALVES[h];
                return bad(format!("boundary half {a}-{b} borders {uses} subquads"));
            }
        }
        for (k, &(fwd, back)) in interior_uses.iter().enumerate() {
            if (fwd, back) != (1, 1) {
                let e = &self.interior_edges[k];
                return bad(format!(
                    "interior edge {}-{} borders subquads {fwd}+{back} times, expected once per side",
                    e.from, e.to
                ));
            }
        }
        Ok(())
    }

    /// Parses the plain-text scheme table.
    ///
    /// ```text
    /// nodes NW NE SE SW U R D L A B C
    /// edge U A 1
    /// quad NW U A L top 0
    /// ```
    ///
    /// `top i` marks side `corners[i] -> corners[i+1]` as the top edge.
    pub fn parse(text: &str) -> Result<Self, SchemeError> {
        let mut edges = Vec::new();
        let mut quads = Vec::new();
        let mut saw_nodes = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| SchemeError::Parse { line, message };
            let slot = |s: &str| s.parse::<Slot>().map_err(|e| err(e.to_string()));
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "nodes" => {
                    let mut listed: Vec<Slot> = tokens[1..]
                        .iter()
                        .map(|t| slot(t))
                        .collect::<Result<_, _>>()?;
                    listed.sort();
                    if listed != Slot::ALL {
                        return Err(err("nodes must list the 11 slots exactly once".into()));
                    }
                    saw_nodes = true;
                }
                "edge" => {
                    if tokens.len() != 4 {
                        return Err(err("expected `edge <from> <to> <type>`".into()));
                    }
                    let edge_type = tokens[3]
                        .parse::<u8>()
                        .map_err(|_| err(format!("bad type number `{}`", tokens[3])))?;
                    edges.push(InteriorEdgeSlot {
                        from: slot(tokens[1])?,
                        to: slot(tokens[2])?,
                        edge_type,
                    });
                }
                "quad" => {
                    if tokens.len() != 7 || tokens[5] != "top" {
                        return Err(err("expected `quad <s0> <s1> <s2> <s3> top <i>`".into()));
                    }
                    let mut corners = [Slot::NW; 4];
                    for (i, t) in tokens[1..5].iter().enumerate() {
                        corners[i] = slot(t)?;
                    }
                    let top = tokens[6]
                        .parse::<usize>()
                        .ok()
                        .filter(|&t| t < 4)
                        .ok_or_else(|| err(format!("bad top index `{}`", tokens[6])))?;
                    corners.rotate_left(top);
                    quads.push(SubQuad { corners });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        if !saw_nodes {
            return Err(SchemeError::Parse {
                line: 0,
                message: "missing `nodes` line".into(),
            });
        }
        SubdivisionScheme::new(edges, quads)
    }

    /// Canonical text form, accepted by [`SubdivisionScheme::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("nodes NW NE SE SW U R D L A B C\n");
        for e in &self.interior_edges {
            out.push_str(&format!("edge {} {} {}\n", e.from, e.to, e.edge_type));
        }
        for q in &self.subquads {
            let c = q.corners;
            out.push_str(&format!("quad {} {} {} {} top 0\n", c[0], c[1], c[2], c[3]));
        }
        out
    }
}

impl Default for SubdivisionScheme {
    fn default() -> Self {
        use Slot::*;
        let edge = |from, to, edge_type| InteriorEdgeSlot {
            from,
            to,
            edge_type,
        };
        let quad = |corners| SubQuad { corners };
        SubdivisionScheme::new(
            vec![
                edge(U, A, 1),
                edge(A, L, 2),
                edge(A, R, 3),
                edge(A, B, 4),
                edge(B, SW, 5),
                edge(B, SE, 6),
                edge(B, C, 7),
                edge(C, D, 8),
            ],
            vec![
                quad([NW, U, A, L]),
                quad([U, NE, R, A]),
                quad([SW, L, A, B]),
                quad([SE, B, A, R]),
                quad([SW, B, C, D]),
                quad([B, SE, D, C]),
            ],
        )
        .expect("default scheme is well-formed")
    }
}
