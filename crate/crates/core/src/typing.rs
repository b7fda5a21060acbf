//! Vertex types, edge letters and the determinism coloring of unit tiles.
//!
//! A tile is determined by three of its corners when, for every position
//! `j`, the colors of the other three corners together with the letters of
//! the two sides joining them fix the color of corner `j` and the letters of
//! its two sides. This is what lets a two-edge corner path be rewritten into
//! the opposite one by a single relation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::complex::{Complex, EdgeType, FaceId, Sense, VertexId, VertexKind};
use crate::presentation::Letter;

#[derive(Debug, Error)]
pub enum TypingError {
    #[error("depth clip must be at least 1")]
    BadClip,
    #[error("color budget of {budget} exceeded with {} unresolved conflicts", .report.len())]
    BudgetExceeded {
        budget: usize,
        report: Vec<Violation>,
    },
    #[error("{} conflicts remain between tiles sharing their known corners", .report.len())]
    Irreducible { report: Vec<Violation> },
    #[error("coloring file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tile corner {0} outside the vertex range")]
    CornerOutOfRange(u32),
}

/// Whether an incident edge leaves or enters the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Incidence {
    Out,
    In,
}

/// Edge class as seen from a vertex star: interior types are kept, the four
/// boundary types are one class, so a label does not depend on which side
/// of a macrotile the vertex sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StarEdge {
    Interior(u8),
    Boundary,
}

impl From<EdgeType> for StarEdge {
    fn from(t: EdgeType) -> Self {
        match t {
            EdgeType::Interior(i) => StarEdge::Interior(i),
            _ => StarEdge::Boundary,
        }
    }
}

/// Local type of a vertex: what it is, how deep, and its star.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexTypeLabel {
    pub kind: VertexKind,
    /// Depth, with everything above the clip folded into the clip value.
    pub depth_class: i32,
    pub host_type: Option<EdgeType>,
    /// Sorted multiset of incident edge classes.
    pub star: Vec<(StarEdge, Incidence)>,
}

impl fmt::Display for VertexTypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            VertexKind::Corner => "corner",
            VertexKind::Side => "side",
            VertexKind::Interior => "interior",
        };
        write!(f, "{kind} d{}", self.depth_class)?;
        if let Some(t) = self.host_type {
            write!(f, " host={t}")?;
        }
        f.write_str(" [")?;
        for (i, (t, inc)) in self.star.iter().enumerate() {
            let arrow = if *inc == Incidence::Out { '>' } else { '<' };
            if i > 0 {
                f.write_char(' ')?;
            }
            match t {
                StarEdge::Interior(i) => write!(f, "{i}{arrow}")?,
                StarEdge::Boundary => write!(f, "b{arrow}")?,
            }
        }
        f.write_char(']')
    }
}

pub fn vertex_label(c: &Complex, v: VertexId, depth_clip: i32) -> VertexTypeLabel {
    let r = c.vertex(v);
    let mut star: Vec<(StarEdge, Incidence)> = c
        .neighbors(v)
        .iter()
        .map(|&(_, e)| {
            let e = c.edge(e);
            let inc = if e.tail == v {
                Incidence::Out
            } else {
                Incidence::In
            };
            (e.edge_type.into(), inc)
        })
        .collect();
    star.sort();
    VertexTypeLabel {
        kind: r.kind,
        depth_class: r.depth.min(depth_clip),
        host_type: r.host.map(|h| h.edge_type),
        star,
    }
}

pub fn classify_vertices(
    c: &Complex,
    depth_clip: i32,
) -> Result<Vec<VertexTypeLabel>, TypingError> {
    if depth_clip < 1 {
        return Err(TypingError::BadClip);
    }
    Ok(c.vertex_ids()
        .map(|v| vertex_label(c, v, depth_clip))
        .collect())
}

/// Number of distinct labels realized in K_1 … K_n, for each n.
pub fn label_census(levels: &[Complex], depth_clip: i32) -> Result<Vec<(u32, usize)>, TypingError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in levels {
        seen.extend(classify_vertices(c, depth_clip)?);
        out.push((c.stage(), seen.len()));
    }
    Ok(out)
}

/// Out- and in-letters for every edge type and sense realized.
pub fn enumerate_edge_letters(levels: &[Complex]) -> BTreeSet<Letter> {
    let mut out = BTreeSet::new();
    for c in levels {
        for e in c.edges() {
            for s in [Sense::Forward, Sense::Backward] {
                out.insert(Letter::Out(e.edge_type, s));
                out.insert(Letter::In(e.edge_type, s));
            }
        }
    }
    out
}

/// A side of a tile read clockwise: its edge type and the traversal sense.
pub type SideLetter = (EdgeType, Sense);

/// One unit tile with its corners in clockwise order from the top-left and
/// `sides[i]` running from `corners[i]` to `corners[i + 1]`. Corners are
/// global indices into a `TileSet`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tile {
    pub level: u32,
    pub face: FaceId,
    pub corners: [u32; 4],
    pub sides: [SideLetter; 4],
}

/// Unit tiles pooled over several complexes, with vertices numbered
/// globally: level `n` occupies `offsets[n-1] ..`.
#[derive(Debug, Clone)]
pub struct TileSet {
    pub tiles: Vec<Tile>,
    pub vertex_count: usize,
    pub offsets: Vec<usize>,
    /// Per vertex, the vertices reached from a common neighbor by the same
    /// edge letter.
    pub siblings: Vec<Vec<u32>>,
    /// Every two-edge walk that does not return to its start.
    pub paths: Vec<CornerPath>,
}

/// A walk x→y→z (x ≠ z) on one level with its completions: for each unit
/// tile having x, y, z as consecutive corners, the fourth corner w and the
/// letters of x→w→z. Empty when the walk bounds no tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CornerPath {
    pub ends: [u32; 3],
    pub letters: [SideLetter; 2],
    pub completions: Vec<(u32, [SideLetter; 2])>,
}

fn corner_paths(c: &Complex, base: usize, out: &mut Vec<CornerPath>) {
    let letter = |a: VertexId, b: VertexId| {
        let e = c.edge(c.edge_between(a, b).expect("adjacent"));
        (e.edge_type, e.sense_from(a))
    };
    let g = |v: VertexId| (base + v.index()) as u32;
    let mut around: BTreeMap<[VertexId; 3], Vec<(u32, [SideLetter; 2])>> = BTreeMap::new();
    for f in c.unit_faces() {
        let k = f.corners;
        for p in 0..4 {
            let [x, y, z, w] = [0, 1, 2, 3].map(|i| k[(p + i) % 4]);
            around
                .entry([x, y, z])
                .or_default()
                .push((g(w), [letter(x, w), letter(w, z)]));
            around
                .entry([z, y, x])
                .or_default()
                .push((g(w), [letter(z, w), letter(w, x)]));
        }
    }
    for y in c.vertex_ids() {
        for &(x, _) in c.neighbors(y) {
            for &(z, _) in c.neighbors(y) {
                if x != z {
                    let mut completions = around.get(&[x, y, z]).cloned().unwrap_or_default();
                    completions.sort_unstable();
                    out.push(CornerPath {
                        ends: [g(x), g(y), g(z)],
                        letters: [letter(x, y), letter(y, z)],
                        completions,
                    });
                }
            }
        }
    }
}

impl TileSet {
    pub fn from_levels(levels: &[Complex]) -> TileSet {
        let mut tiles = Vec::new();
        let mut offsets = Vec::with_capacity(levels.len());
        let mut base = 0usize;
        let mut siblings: Vec<Vec<u32>> = Vec::new();
        let mut paths = Vec::new();
        for c in levels {
            offsets.push(base);
            corner_paths(c, base, &mut paths);
            siblings.resize(base + c.vertex_count(), Vec::new());
            for v in c.vertex_ids() {
                let mut by_letter: BTreeMap<SideLetter, Vec<u32>> = BTreeMap::new();
                for &(u, e) in c.neighbors(v) {
                    let e = c.edge(e);
                    by_letter
                        .entry((e.edge_type, e.sense_from(v)))
                        .or_default()
                        .push((base + u.index()) as u32);
                }
                for group in by_letter.values().filter(|g| g.len() > 1) {
                    for &a in group {
                        let list = &mut siblings[a as usize];
                        list.extend(group.iter().filter(|&&b| b != a));
                    }
                }
            }
            for f in c.unit_faces() {
                let k = f.corners;
                let sides = [0, 1, 2, 3].map(|i| {
                    let (a, b) = (k[i], k[(i + 1) % 4]);
                    let e = c.edge_between(a, b).expect("tile sides are edges");
                    let e = c.edge(e);
                    (e.edge_type, e.sense_from(a))
                });
                tiles.push(Tile {
                    level: c.stage(),
                    face: f.id,
                    corners: k.map(|v| (base + v.index()) as u32),
                    sides,
                });
            }
            base += c.vertex_count();
        }
        for list in &mut siblings {
            list.sort_unstable();
            list.dedup();
        }
        TileSet {
            tiles,
            vertex_count: base,
            offsets,
            siblings,
            paths,
        }
    }

    /// A hand-built tile set over `vertex_count` anonymous vertices.
    pub fn new(vertex_count: usize, tiles: Vec<Tile>) -> Result<TileSet, TypingError> {
        for t in &tiles {
            if let Some(&v) = t.corners.iter().find(|&&v| v as usize >= vertex_count) {
                return Err(TypingError::CornerOutOfRange(v));
            }
        }
        Ok(TileSet {
            tiles,
            vertex_count,
            offsets: vec![0],
            siblings: vec![Vec::new(); vertex_count],
            paths: Vec::new(),
        })
    }

    pub fn global(&self, level: u32, v: VertexId) -> usize {
        self.offsets[level as usize - 1] + v.index()
    }
}

/// Initial classes for refinement.
#[derive(Debug, Clone)]
pub struct SeedPartition {
    pub classes: Vec<u32>,
    pub description: String,
}

impl SeedPartition {
    /// One class per realized `VertexTypeLabel`, numbered in label order.
    pub fn from_labels(levels: &[Complex], depth_clip: i32) -> Result<SeedPartition, TypingError> {
        let mut labels = Vec::new();
        for c in levels {
            labels.extend(classify_vertices(c, depth_clip)?);
        }
        let distinct: BTreeSet<&VertexTypeLabel> = labels.iter().collect();
        let index: HashMap<&VertexTypeLabel, u32> = distinct
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i as u32))
            .collect();
        Ok(SeedPartition {
            classes: labels.iter().map(|l| index[l]).collect(),
            description: format!("vertex-type labels, depth clip {depth_clip}"),
        })
    }

    /// Everything in one class.
    pub fn uniform(vertex_count: usize) -> SeedPartition {
        SeedPartition {
            classes: vec![0; vertex_count],
            description: "uniform".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementStep {
    pub round: usize,
    pub conflicts: usize,
    pub colors_before: usize,
    pub colors_after: usize,
    pub kind: StepKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Coloring {
    pub colors: Vec<u32>,
    pub n_colors: usize,
    pub seed: String,
    pub trace: Vec<RefinementStep>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

impl Coloring {
    pub fn from_colors(colors: Vec<u32>, offsets: Vec<usize>, seed: impl Into<String>) -> Coloring {
        let n_colors = colors.iter().collect::<BTreeSet<_>>().len();
        Coloring {
            colors,
            n_colors,
            seed: seed.into(),
            trace: Vec::new(),
            offsets,
        }
    }

    /// Color of vertex `v` of K_level.
    pub fn color_of(&self, level: u32, v: VertexId) -> Option<u32> {
        let base = *self.offsets.get((level as usize).checked_sub(1)?)?;
        let end = self
            .offsets
            .get(level as usize)
            .copied()
            .unwrap_or(self.colors.len());
        let i = base + v.index();
        (i < end).then(|| self.colors[i])
    }

    pub fn levels(&self) -> usize {
        self.offsets.len()
    }

    /// Text form: a header line, then `level vertex color` per vertex.
    pub fn to_text(&self) -> String {
        let mut out = format!("# coloring N={} seed={}\n", self.n_colors, self.seed);
        for (li, &base) in self.offsets.iter().enumerate() {
            let end = self
                .offsets
                .get(li + 1)
                .copied()
                .unwrap_or(self.colors.len());
            for i in base..end {
                let _ = writeln!(out, "{} {} {}", li + 1, i - base, self.colors[i]);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Coloring, TypingError> {
        let mut seed = String::new();
        let mut colors = Vec::new();
        let mut offsets = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |m: &str| TypingError::Parse {
                line: line_no,
                message: m.to_string(),
            };
            if let Some(h) = line.strip_prefix('#') {
                if let Some(s) = h.split_once("seed=") {
                    seed = s.1.to_string();
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<u64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err("expected three integers"))?;
            let [level, v, color] = f[..] else {
                return Err(err("expected three integers"));
            };
            if level as usize == offsets.len() + 1 {
                offsets.push(colors.len());
            } else if level as usize != offsets.len() {
                return Err(err("levels must appear in order"));
            }
            if v as usize != colors.len() - offsets[offsets.len() - 1] {
                return Err(err("vertices must be listed in order"));
            }
            colors.push(color as u32);
        }
        Ok(Coloring::from_colors(colors, offsets, seed))
    }
}

/// Two corner paths with the same colors and letters but different sets of
/// completions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathClash {
    pub first: usize,
    pub second: usize,
}

type PathKey = ([u32; 3], [SideLetter; 2]);
type PathValue = Vec<(u32, [SideLetter; 2])>;

fn path_key_value(p: &CornerPath, colors: &[u32]) -> (PathKey, PathValue) {
    let mut value: PathValue = p
        .completions
        .iter()
        .map(|&(w, l)| (colors[w as usize], l))
        .collect();
    value.sort_unstable();
    value.dedup();
    ((p.ends.map(|v| colors[v as usize]), p.letters), value)
}

/// Corner-path patterns read two ways, in canonical order. With none, and
/// with siblings colored apart, a relation side inside a path encoding
/// always sits on a real tile and rewrites to another real path.
pub fn find_path_clashes(colors: &[u32], tiles: &TileSet) -> Vec<PathClash> {
    let mut groups: BTreeMap<PathKey, BTreeMap<PathValue, usize>> = BTreeMap::new();
    for (i, p) in tiles.paths.iter().enumerate() {
        let (k, v) = path_key_value(p, colors);
        groups.entry(k).or_default().entry(v).or_insert(i);
    }
    let mut out = Vec::new();
    for values in groups.values() {
        let mut it = values.values();
        let first = *it.next().expect("non-empty group");
        out.extend(it.map(|&second| PathClash { first, second }));
    }
    out
}

/// Pairs of siblings sharing a color.
pub fn find_sibling_clashes(colors: &[u32], tiles: &TileSet) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (a, list) in tiles.siblings.iter().enumerate() {
        for &b in list {
            if (a as u32) < b && colors[a] == colors[b as usize] {
                out.push((a as u32, b));
            }
        }
    }
    out
}

/// Two tiles that agree on three corners and disagree on the fourth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// The corner position left unknown.
    pub position: usize,
    pub first: usize,
    pub second: usize,
}

type Key = (usize, [u32; 3], [SideLetter; 2]);
type Value = (u32, [SideLetter; 2]);

fn key_value(t: &Tile, j: usize, colors: &[u32]) -> (Key, Value) {
    let at = |k: usize| (j + k) % 4;
    let c = |k: usize| colors[t.corners[at(k)] as usize];
    (
        (j, [c(1), c(2), c(3)], [t.sides[at(1)], t.sides[at(2)]]),
        (c(0), [t.sides[at(3)], t.sides[at(0)]]),
    )
}

/// All violations of the three-determine-the-fourth property, one per
/// (position, key, differing value), in canonical order.
pub fn find_violations(colors: &[u32], tiles: &TileSet) -> Vec<Violation> {
    let mut groups: BTreeMap<Key, BTreeMap<Value, usize>> = BTreeMap::new();
    for (ti, t) in tiles.tiles.iter().enumerate() {
        for j in 0..4 {
            let (k, v) = key_value(t, j, colors);
            groups.entry(k).or_default().entry(v).or_insert(ti);
        }
    }
    let mut out = Vec::new();
    for (k, values) in groups {
        let mut it = values.values();
        let first = *it.next().expect("non-empty group");
        for &second in it {
            out.push(Violation {
                position: k.0,
                first,
                second,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DeterminismVerdict {
    pub tiles: usize,
    pub violations: Vec<Violation>,
}

impl DeterminismVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_determinism(coloring: &Coloring, tiles: &TileSet) -> DeterminismVerdict {
    DeterminismVerdict {
        tiles: tiles.tiles.len(),
        violations: find_violations(&coloring.colors, tiles),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverBudget {
    pub max_colors: usize,
    /// Recolorings tried before falling back to signature refinement.
    pub max_repairs: usize,
    /// Start from a first-fit refinement of the seed instead of the seed.
    pub first_fit: bool,
    /// Also make path encodings faithful: siblings (see `TileSet::siblings`)
    /// get distinct colors and every corner-path pattern has one completion
    /// (see `find_path_clashes`).
    pub faithful: bool,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_colors: 100_000,
            max_repairs: 20_000,
            first_fit: true,
            faithful: false,
        }
    }
}

/// Canonical renumbering: colors ordered by their first vertex.
fn renumber(colors: &mut [u32]) -> usize {
    let mut map: HashMap<u32, u32> = HashMap::new();
    for c in colors.iter_mut() {
        let next = map.len() as u32;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

const UNCOLORED: u32 = u32::MAX;

/// Live index of tile entries: key → value → contributing (tile, position).
#[derive(Default)]
struct EntryIndex {
    entries: HashMap<Key, BTreeMap<Value, Vec<(usize, usize)>>>,
    conflicts: BTreeSet<Key>,
}

impl EntryIndex {
    fn add(&mut self, k: Key, v: Value, who: (usize, usize)) {
        let values = self.entries.entry(k).or_default();
        values.entry(v).or_default().push(who);
        if values.len() > 1 {
            self.conflicts.insert(k);
        }
    }

    fn remove(&mut self, k: &Key, v: &Value, who: (usize, usize)) {
        let values = self.entries.get_mut(k).expect("entry present");
        let list = values.get_mut(v).expect("value present");
        list.retain(|&w| w != who);
        if list.is_empty() {
            values.remove(v);
        }
        if values.len() <= 1 {
            self.conflicts.remove(k);
        }
        if values.is_empty() {
            self.entries.remove(k);
        }
    }

    /// Entries that would clash with what is already indexed.
    fn clashes(&self, new: &[(Key, Value)]) -> usize {
        let mut local: HashMap<&Key, &Value> = HashMap::new();
        new.iter()
            .filter(|(k, v)| {
                let outside = self
                    .entries
                    .get(k)
                    .is_some_and(|vals| vals.keys().any(|w| w != v));
                let inside = *local.entry(k).or_insert(v) != v;
                outside || inside
            })
            .count()
    }
}

struct Solver<'a> {
    tiles: &'a TileSet,
    incident: Vec<Vec<(usize, usize)>>,
    colors: Vec<u32>,
    seed: &'a [u32],
    palette: BTreeMap<u32, Vec<u32>>,
    next_color: u32,
    index: EntryIndex,
    separate: bool,
}

impl<'a> Solver<'a> {
    fn new(tiles: &'a TileSet, seed: &'a [u32], separate: bool) -> Solver<'a> {
        let mut incident = vec![Vec::new(); tiles.vertex_count];
        for (ti, t) in tiles.tiles.iter().enumerate() {
            for (p, &v) in t.corners.iter().enumerate() {
                incident[v as usize].push((ti, p));
            }
        }
        Solver {
            tiles,
            incident,
            colors: vec![UNCOLORED; tiles.vertex_count],
            seed,
            palette: BTreeMap::new(),
            next_color: 0,
            index: EntryIndex::default(),
            separate,
        }
    }

    fn palette_size(&self) -> usize {
        self.next_color as usize
    }

    fn fresh(&mut self, class: u32) -> u32 {
        let c = self.next_color;
        self.next_color += 1;
        self.palette.entry(class).or_default().push(c);
        c
    }

    /// Tiles at `v` whose other corners are all colored.
    fn complete_tiles(&self, v: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.incident[v]
            .iter()
            .map(|&(ti, _)| ti)
            .filter(|&ti| {
                self.tiles.tiles[ti]
                    .corners
                    .iter()
                    .all(|&x| x as usize == v || self.colors[x as usize] != UNCOLORED)
            })
            .collect();
        set.into_iter().collect()
    }

    fn entries_of(&self, tiles: &[usize]) -> Vec<(Key, Value)> {
        tiles
            .iter()
            .flat_map(|&ti| (0..4).map(move |j| key_value(&self.tiles.tiles[ti], j, &self.colors)))
            .collect()
    }

    fn index_tiles(&mut self, tiles: &[usize], add: bool) {
        for &ti in tiles {
            for j in 0..4 {
                let (k, v) = key_value(&self.tiles.tiles[ti], j, &self.colors);
                if add {
                    self.index.add(k, v, (ti, j));
                } else {
                    self.index.remove(&k, &v, (ti, j));
                }
            }
        }
    }

    /// Colors `v` with the first palette color of its class that clashes
    /// with nothing, else the least clashing, else a fresh one.
    fn place(&mut self, v: usize, allow_clash: bool) -> (u32, usize) {
        let tiles = self.complete_tiles(v);
        let class = self.seed[v];
        let palette = self.palette.get(&class).cloned().unwrap_or_default();
        // Where `v` is the unknown corner of a tile whose key is already
        // indexed, only the indexed colors can avoid a clash.
        let mut forced: Option<BTreeSet<u32>> = None;
        let mut union = BTreeSet::new();
        for &ti in &tiles {
            let t = &self.tiles.tiles[ti];
            let p = t
                .corners
                .iter()
                .position(|&x| x as usize == v)
                .expect("corner");
            let (k, (_, sides)) = key_value(t, p, &self.colors);
            if let Some(values) = self.index.entries.get(&k) {
                let ok: BTreeSet<u32> = values
                    .keys()
                    .filter(|(_, s)| *s == sides)
                    .map(|&(c, _)| c)
                    .collect();
                union.extend(ok.iter().copied());
                forced = Some(match forced {
                    None => ok,
                    Some(f) => f.intersection(&ok).copied().collect(),
                });
            }
        }
        let mut candidates: Vec<u32> = match &forced {
            None => palette,
            Some(f) if !allow_clash => palette.into_iter().filter(|c| f.contains(c)).collect(),
            Some(_) => palette.into_iter().filter(|c| union.contains(c)).collect(),
        };
        if self.separate {
            let taken: BTreeSet<u32> = self.tiles.siblings[v]
                .iter()
                .map(|&u| self.colors[u as usize])
                .collect();
            candidates.retain(|c| !taken.contains(c));
        }
        let mut best: Option<(usize, u32)> = None;
        for c in candidates {
            self.colors[v] = c;
            let clash = self.index.clashes(&self.entries_of(&tiles));
            if clash == 0 {
                best = Some((0, c));
                break;
            }
            if allow_clash && best.is_none_or(|(b, _)| clash < b) {
                best = Some((clash, c));
            }
        }
        let fresh_clash = {
            self.colors[v] = self.next_color;
            self.index.clashes(&self.entries_of(&tiles))
        };
        let (clash, c) = match best {
            Some((b, c)) if b == 0 || b < fresh_clash => (b, c),
            _ => (fresh_clash, self.fresh(class)),
        };
        self.colors[v] = c;
        self.index_tiles(&tiles, true);
        (c, clash)
    }

    fn first_fit(&mut self) {
        for v in 0..self.tiles.vertex_count {
            self.place(v, false);
        }
    }

    fn start_from_seed(&mut self) {
        for v in 0..self.tiles.vertex_count {
            let class = self.seed[v];
            self.colors[v] = match self.palette.get(&class) {
                Some(p) => p[0],
                None => self.fresh(class),
            };
        }
        let all: Vec<usize> = (0..self.tiles.tiles.len()).collect();
        self.index_tiles(&all, true);
    }

    /// Picks a vertex whose recoloring can break a conflict: a key corner of
    /// a tile carrying the rarest value of the first conflicting key.
    fn repair_target(&self) -> Option<usize> {
        for k in &self.index.conflicts {
            let values = &self.index.entries[k];
            let (_, owners) = values
                .iter()
                .min_by_key(|(_, owners)| owners.len())
                .expect("conflicting key has values");
            // All contributors sharing one triple of corners cannot be
            // separated by any coloring.
            let triple = |(ti, j): (usize, usize)| {
                let t = &self.tiles.tiles[ti];
                [1, 2, 3].map(|d| t.corners[(j + d) % 4])
            };
            let first = triple(owners[0]);
            let mine = &values
                .iter()
                .find(|(_, o)| o.contains(&owners[0]))
                .expect("owner listed")
                .0;
            // A corner position where some tile with another value has a
            // different vertex; recoloring that corner separates the two.
            let others: Vec<[u32; 3]> = values
                .iter()
                .filter(|(v, _)| v != mine)
                .flat_map(|(_, o)| o.iter().map(|&w| triple(w)))
                .collect();
            if let Some(d) = (0..3).find(|&d| others.iter().any(|t| t[d] != first[d])) {
                return Some(first[d] as usize);
            }
        }
        None
    }

    fn repair(&mut self, v: usize) -> usize {
        let tiles = self.complete_tiles(v);
        self.index_tiles(&tiles, false);
        let old = self.colors[v];
        // Exclude the current color so the step always moves.
        let class = self.seed[v];
        if let Some(p) = self.palette.get_mut(&class) {
            p.retain(|&c| c != old);
        }
        let (_, clash) = self.place(v, true);
        if let Some(p) = self.palette.get_mut(&class) {
            if !p.contains(&old) {
                p.push(old);
                p.sort_unstable();
            }
        }
        clash
    }

    fn violations(&self) -> Vec<Violation> {
        find_violations(&self.colors, self.tiles)
    }
}

/// What a solver step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Seed,
    FirstFit,
    Recolor { vertex: u32 },
    Split,
    Individualize { vertex: u32 },
}

/// Context of a vertex in one tile: its position and the tile read from it.
type Context = (usize, [u32; 4], [SideLetter; 4]);
/// Context of a vertex on a corner path: its role and the path's pattern.
type Signature = (Vec<Context>, Vec<PathContext>);
type PathContext = (usize, PathKey, PathValue);

/// Finds a coloring, refining the seed partition, under which every tile
/// is determined by any three of its corners.
///
/// Vertices are first colored first-fit within their seed class. Remaining
/// conflicts are repaired by recoloring a key corner of an offending tile;
/// if repairs run out, classes involved in conflicts are split by the
/// multiset of their members' tile contexts.
pub fn solve_determinism_coloring(
    tiles: &TileSet,
    seed: &SeedPartition,
    budget: SolverBudget,
) -> Result<Coloring, TypingError> {
    let mut solver = Solver::new(tiles, &seed.classes, budget.faithful);
    let mut trace = Vec::new();
    let step = |trace: &mut Vec<RefinementStep>, kind, conflicts, before, after| {
        trace.push(RefinementStep {
            round: trace.len(),
            kind,
            conflicts,
            colors_before: before,
            colors_after: after,
        });
    };
    // Sibling separation is only enforced while placing colors.
    if budget.first_fit || budget.faithful {
        solver.first_fit();
        step(&mut trace, StepKind::FirstFit, 0, 0, solver.palette_size());
    } else {
        solver.start_from_seed();
        step(&mut trace, StepKind::Seed, 0, 0, solver.palette_size());
    }

    let mut repairs = 0;
    while repairs < budget.max_repairs && !solver.index.conflicts.is_empty() {
        if solver.palette_size() > budget.max_colors {
            return Err(TypingError::BudgetExceeded {
                budget: budget.max_colors,
                report: solver.violations(),
            });
        }
        let Some(v) = solver.repair_target() else {
            return Err(TypingError::Irreducible {
                report: solver.violations(),
            });
        };
        let before = solver.palette_size();
        let conflicts = solver.index.conflicts.len();
        solver.repair(v);
        step(
            &mut trace,
            StepKind::Recolor { vertex: v as u32 },
            conflicts,
            before,
            solver.palette_size(),
        );
        repairs += 1;
    }

    let mut colors = solver.colors;
    let mut n = renumber(&mut colors);
    let incident = solver.incident;
    let mut on_path: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tiles.vertex_count];
    if budget.faithful {
        for (i, p) in tiles.paths.iter().enumerate() {
            for (role, &v) in p.ends.iter().enumerate() {
                on_path[v as usize].push((i, role));
            }
        }
    }
    loop {
        let violations = find_violations(&colors, tiles);
        let clashes = if budget.faithful {
            find_path_clashes(&colors, tiles)
        } else {
            Vec::new()
        };
        if violations.is_empty() && clashes.is_empty() {
            break;
        }
        if n > budget.max_colors {
            return Err(TypingError::BudgetExceeded {
                budget: budget.max_colors,
                report: violations,
            });
        }
        let mut hot: BTreeSet<u32> = BTreeSet::new();
        for v in &violations {
            for ti in [v.first, v.second] {
                let t = &tiles.tiles[ti];
                for k in 1..4 {
                    hot.insert(colors[t.corners[(v.position + k) % 4] as usize]);
                }
            }
        }
        for c in &clashes {
            for i in [c.first, c.second] {
                hot.extend(tiles.paths[i].ends.map(|v| colors[v as usize]));
            }
        }
        let signature = |v: usize| -> (Vec<Context>, Vec<PathContext>) {
            let mut ctx: Vec<Context> = incident[v]
                .iter()
                .map(|&(ti, p)| {
                    let t = &tiles.tiles[ti];
                    (
                        p,
                        [0, 1, 2, 3].map(|k| colors[t.corners[(p + k) % 4] as usize]),
                        [0, 1, 2, 3].map(|k| t.sides[(p + k) % 4]),
                    )
                })
                .collect();
            ctx.sort();
            let mut paths: Vec<PathContext> = on_path[v]
                .iter()
                .map(|&(i, role)| {
                    let (k, val) = path_key_value(&tiles.paths[i], &colors);
                    (role, k, val)
                })
                .collect();
            paths.sort();
            (ctx, paths)
        };
        let mut keyed: BTreeMap<(u32, Signature), Vec<usize>> = BTreeMap::new();
        for (v, &color) in colors.iter().enumerate().take(tiles.vertex_count) {
            let sig = if hot.contains(&color) {
                signature(v)
            } else {
                Default::default()
            };
            keyed.entry((color, sig)).or_default().push(v);
        }
        let mut next = vec![0u32; tiles.vertex_count];
        for (i, members) in keyed.values().enumerate() {
            for &v in members {
                next[v] = i as u32;
            }
        }
        let mut after = renumber(&mut next);
        let mut kind = StepKind::Split;
        if after == n {
            // Stable but still conflicting: split off one known corner that
            // does not yet have a color of its own.
            let mut size: HashMap<u32, usize> = HashMap::new();
            for &c in &next {
                *size.entry(c).or_default() += 1;
            }
            let shared = |x: &usize| size[&next[*x]] > 1;
            let lone = violations
                .iter()
                .find_map(|v| {
                    [v.second, v.first].into_iter().find_map(|ti| {
                        let t = &tiles.tiles[ti];
                        (1..4)
                            .map(|k| t.corners[(v.position + k) % 4] as usize)
                            .find(shared)
                    })
                })
                .or_else(|| {
                    clashes.iter().find_map(|c| {
                        [c.second, c.first].into_iter().find_map(|i| {
                            tiles.paths[i].ends.iter().map(|&x| x as usize).find(shared)
                        })
                    })
                });
            let Some(lone) = lone else {
                return Err(TypingError::Irreducible { report: violations });
            };
            next[lone] = after as u32;
            after = renumber(&mut next);
            kind = StepKind::Individualize {
                vertex: lone as u32,
            };
        }
        step(&mut trace, kind, violations.len() + clashes.len(), n, after);
        colors = next;
        n = after;
    }

    Ok(Coloring {
        colors,
        n_colors: n,
        seed: seed.description.clone(),
        trace,
        offsets: tiles.offsets.clone(),
    })
}
