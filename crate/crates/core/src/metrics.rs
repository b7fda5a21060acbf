//! Graph distance, shortest-path bundles and their width.
//!
//! Two routes to the width of a bundle are provided. `bundle_width` works
//! over explicitly enumerated paths. `geodesic_width` is exact without
//! enumeration: every vertex of the geodesic interval lies on some shortest
//! path, so the width equals the largest diameter among the distance layers
//! of the interval.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{Complex, EdgeId, Sense, VertexId};

pub const DEFAULT_BUNDLE_CAP: usize = 100_000;
const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(VertexId, VertexId),
    #[error("vertex {0} is not in the complex")]
    UnknownVertex(VertexId),
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("paths differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("paths have different endpoints")]
    EndpointMismatch,
    #[error("bundle is empty")]
    EmptyBundle,
    #[error("enumeration cap must be at least 1")]
    ZeroCap,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// An edge path `P_0 … P_s` together with the edges it traverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub steps: Vec<(EdgeId, Sense)>,
}

impl Path {
    pub fn trivial(v: VertexId) -> Path {
        Path {
            vertices: vec![v],
            steps: Vec::new(),
        }
    }

    /// Resolves consecutive vertices to edges; fails on a non-adjacent step.
    pub fn from_vertices(c: &Complex, vertices: &[VertexId]) -> Result<Path, MetricsError> {
        let first = *vertices.first().ok_or(MetricsError::EmptyBundle)?;
        check_vertex(c, first)?;
        let mut steps = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            check_vertex(c, w[1])?;
            let e = c
                .edge_between(w[0], w[1])
                .ok_or(MetricsError::NotAdjacent(w[0], w[1]))?;
            steps.push((e, c.edge(e).sense_from(w[0])));
        }
        Ok(Path {
            vertices: vertices.to_vec(),
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self
            .vertices
            .last()
            .expect("paths have at least one vertex")
    }

    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|&(e, s)| (e, s.reversed()))
            .collect();
        Path { vertices, steps }
    }
}

fn check_vertex(c: &Complex, v: VertexId) -> Result<(), MetricsError> {
    if v.index() < c.vertex_count() {
        Ok(())
    } else {
        Err(MetricsError::UnknownVertex(v))
    }
}

/// Breadth-first distances from `src`; unreachable vertices hold `u32::MAX`.
pub fn bfs(c: &Complex, src: VertexId) -> Vec<u32> {
    let mut dist = vec![UNREACHED; c.vertex_count()];
    let mut queue = VecDeque::new();
    dist[src.index()] = 0;
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()] + 1;
        for &(w, _) in c.neighbors(v) {
            if dist[w.index()] == UNREACHED {
                dist[w.index()] = d;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn distance(c: &Complex, a: VertexId, b: VertexId) -> Result<u32, MetricsError> {
    check_vertex(c, a)?;
    check_vertex(c, b)?;
    match bfs(c, a)[b.index()] {
        UNREACHED => Err(MetricsError::Disconnected(a, b)),
        d => Ok(d),
    }
}

/// All-pairs distance table, one BFS per vertex.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    data: Vec<u16>,
}

impl DistanceTable {
    pub fn new(c: &Complex) -> Result<DistanceTable, MetricsError> {
        let n = c.vertex_count();
        let mut data = Vec::with_capacity(n * n);
        for v in c.vertex_ids() {
            for (w, d) in bfs(c, v).into_iter().enumerate() {
                if d == UNREACHED {
                    return Err(MetricsError::Disconnected(v, VertexId(w as u32)));
                }
                data.push(u16::try_from(d).expect("diameter fits in u16"));
            }
        }
        Ok(DistanceTable { n, data })
    }

    pub fn get(&self, a: VertexId, b: VertexId) -> u32 {
        self.data[a.index() * self.n + b.index()] as u32
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// The set Ω(a, b) of shortest paths, possibly cut off at a cap.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub endpoints: (VertexId, VertexId),
    pub length: u32,
    pub paths: Vec<Path>,
    pub truncated: bool,
}

/// Enumerates shortest `a → b` paths in lexicographic vertex order.
///
/// Only steps that stay on the geodesic interval are taken, so every branch
/// of the search ends in a path; the cost is linear in the output.
pub fn shortest_path_bundle(
    c: &Complex,
    a: VertexId,
    b: VertexId,
    cap: usize,
) -> Result<Bundle, MetricsError> {
    if cap == 0 {
        return Err(MetricsError::ZeroCap);
    }
    check_vertex(c, a)?;
    check_vertex(c, b)?;
    let to_b = bfs(c, b);
    let s = to_b[a.index()];
    if s == UNREACHED {
        return Err(MetricsError::Disconnected(a, b));
    }

    let mut paths = Vec::new();
    let mut truncated = false;
    let mut stack: Vec<VertexId> = vec![a];
    // Per depth, the index of the next neighbor to try.
    let mut cursor: Vec<usize> = vec![0];
    while let Some(&v) = stack.last() {
        if v == b {
            if paths.len() == cap {
                truncated = true;
                break;
            }
            paths.push(Path::from_vertices(c, &stack)?);
            stack.pop();
            cursor.pop();
            continue;
        }
        let nbrs = c.neighbors(v);
        let want = to_b[v.index()] - 1;
        let i = cursor.last_mut().expect("cursor tracks stack");
        match nbrs[*i..]
            .iter()
            .position(|&(w, _)| to_b[w.index()] == want)
        {
            Some(off) => {
                let w = nbrs[*i + off].0;
                *i += off + 1;
                stack.push(w);
                cursor.push(0);
            }
            None => {
                stack.pop();
                cursor.pop();
            }
        }
    }
    Ok(Bundle {
        endpoints: (a, b),
        length: s,
        paths,
        truncated,
    })
}

/// r(P, Q) = max_i d(P_i, Q_i).
pub fn path_distance(c: &Complex, p: &Path, q: &Path) -> Result<u32, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::LengthMismatch(p.len(), q.len()));
    }
    if p.start() != q.start() || p.end() != q.end() {
        return Err(MetricsError::EndpointMismatch);
    }
    let mut best = 0;
    for (&u, &v) in p.vertices.iter().zip(&q.vertices) {
        if u != v {
            best = best.max(distance(c, u, v)?);
        }
    }
    Ok(best)
}

/// A width value, possibly only a lower bound when the bundle was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Width {
    pub value: u32,
    pub lower_bound: bool,
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lower_bound {
            write!(f, ">= {}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// Maximum of `path_distance` over unordered pairs of enumerated paths.
pub fn bundle_width(c: &Complex, bundle: &Bundle) -> Result<Width, MetricsError> {
    if bundle.paths.is_empty() {
        return Err(MetricsError::EmptyBundle);
    }
    // Distances from each vertex that appears at some position, computed once.
    let mut rows: BTreeMap<VertexId, Vec<u32>> = BTreeMap::new();
    let mut value = 0;
    let s = bundle.length as usize;
    for i in 1..s {
        let layer: BTreeSet<VertexId> = bundle.paths.iter().map(|p| p.vertices[i]).collect();
        let layer: Vec<VertexId> = layer.into_iter().collect();
        for (k, &u) in layer.iter().enumerate() {
            if layer.len() == 1 {
                break;
            }
            let row = rows.entry(u).or_insert_with(|| bfs(c, u));
            for &v in &layer[k + 1..] {
                value = value.max(row[v.index()]);
            }
        }
    }
    Ok(Width {
        value,
        lower_bound: bundle.truncated,
    })
}

/// Distance layers of the geodesic interval between `a` and `b`, innermost
/// first endpoints excluded. Found by walking predecessors back from `b`.
fn interval_layers(
    c: &Complex,
    a: VertexId,
    b: VertexId,
    from_a: impl Fn(VertexId) -> u32,
) -> Vec<Vec<VertexId>> {
    let s = from_a(b) as usize;
    let mut layers: Vec<Vec<VertexId>> = vec![Vec::new(); s + 1];
    layers[s].push(b);
    let mut seen = BTreeSet::from([b]);
    for i in (1..=s).rev() {
        let mut next = BTreeSet::new();
        for &v in &layers[i] {
            for &(w, _) in c.neighbors(v) {
                if from_a(w) as usize == i - 1 && !seen.contains(&w) {
                    next.insert(w);
                }
            }
        }
        seen.extend(next.iter().copied());
        layers[i - 1] = next.into_iter().collect();
    }
    debug_assert_eq!(layers[0], vec![a]);
    layers
}

fn layer_width(layers: &[Vec<VertexId>], d: impl Fn(VertexId, VertexId) -> u32) -> u32 {
    let mut best = 0;
    for layer in layers {
        for (k, &u) in layer.iter().enumerate() {
            for &v in &layer[k + 1..] {
                best = best.max(d(u, v));
            }
        }
    }
    best
}

/// Exact width of Ω(a, b) without enumerating the bundle.
pub fn geodesic_width(c: &Complex, a: VertexId, b: VertexId) -> Result<u32, MetricsError> {
    check_vertex(c, a)?;
    check_vertex(c, b)?;
    let from_a = bfs(c, a);
    if from_a[b.index()] == UNREACHED {
        return Err(MetricsError::Disconnected(a, b));
    }
    let layers = interval_layers(c, a, b, |v| from_a[v.index()]);
    let mut rows: BTreeMap<VertexId, Vec<u32>> = BTreeMap::new();
    for layer in &layers {
        if layer.len() > 1 {
            for &u in &layer[..layer.len() - 1] {
                rows.insert(u, bfs(c, u));
            }
        }
    }
    Ok(layer_width(&layers, |u, v| rows[&u][v.index()]))
}

/// Same as `geodesic_width`, reading distances from a precomputed table.
pub fn geodesic_width_in(c: &Complex, table: &DistanceTable, a: VertexId, b: VertexId) -> u32 {
    let layers = interval_layers(c, a, b, |v| table.get(a, v));
    layer_width(&layers, |u, v| table.get(u, v))
}

/// How widths are obtained in the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WidthMethod {
    /// Layer diameters of the geodesic interval; never truncated.
    Exact,
    /// Pairwise over an enumerated bundle with the given cap.
    Enumerated { cap: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSpec {
    /// Complexes with at most this many vertices are checked on all pairs.
    pub exhaustive_limit: usize,
    /// Pairs drawn per larger complex.
    pub samples: usize,
    pub seed: u64,
    pub method: WidthMethod,
    /// The predicate under test: on K_n with n > `n_threshold`, pairs at
    /// distance ≥ `s_threshold` have width ≥ `k`.
    pub n_threshold: u32,
    pub s_threshold: u32,
    pub k: u32,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            exhaustive_limit: 400,
            samples: 2000,
            seed: 0x5eed,
            method: WidthMethod::Exact,
            n_threshold: 1,
            s_threshold: 4,
            k: 2,
        }
    }
}

/// Minimal observed width for one (n, s) cell, with a witness pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EllipticityRow {
    pub n: u32,
    pub s: u32,
    pub pair: (VertexId, VertexId),
    pub width: u32,
    pub truncated: bool,
    pub pairs_checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCoverage {
    pub n: u32,
    pub vertices: usize,
    pub exhaustive: bool,
    pub pairs_checked: usize,
    pub max_distance: u32,
}

/// Width of a fixed pair of initial corners traced across levels.
#[derive(Debug, Clone, Serialize)]
pub struct CornerTrace {
    pub corners: (usize, usize),
    pub widths: Vec<(u32, u32)>,
    pub non_decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub spec: SampleSpec,
    pub rows: Vec<EllipticityRow>,
    pub coverage: Vec<LevelCoverage>,
    /// Whether the configured (N, S, k) predicate held on every checked pair.
    pub verdict: bool,
    /// Smallest S for which the predicate holds with the configured N and k.
    pub observed_threshold: u32,
    /// True when no checked pair on K_n, n > N, reaches the observed threshold.
    pub vacuous: bool,
    pub monotonicity: Vec<CornerTrace>,
}

impl EllipticityReport {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "s", "pair", "width", "truncated"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.s.to_string(),
                format!("{}-{}", r.pair.0 .0, r.pair.1 .0),
                r.width.to_string(),
                r.truncated.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.spec.n_threshold,
            "S": self.spec.s_threshold,
            "k": self.spec.k,
            "verdict": self.verdict,
            "observed_threshold": self.observed_threshold,
            "vacuous": self.vacuous,
            "coverage": self.coverage,
            "monotonicity": self.monotonicity,
        })
    }
}

fn sample_pairs(nv: usize, spec: &SampleSpec, n: u32) -> (Vec<(VertexId, VertexId)>, bool) {
    if nv <= spec.exhaustive_limit {
        let mut pairs = Vec::with_capacity(nv * nv.saturating_sub(1) / 2);
        for a in 0..nv {
            for b in a + 1..nv {
                pairs.push((VertexId(a as u32), VertexId(b as u32)));
            }
        }
        return (pairs, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ u64::from(n).rotate_left(32));
    let total = nv * (nv - 1) / 2;
    let want = spec.samples.min(total);
    let mut set = BTreeSet::new();
    while set.len() < want {
        let a = rng.gen_range(0..nv);
        let b = rng.gen_range(0..nv);
        if a != b {
            set.insert((VertexId(a.min(b) as u32), VertexId(a.max(b) as u32)));
        }
    }
    (set.into_iter().collect(), false)
}

fn width_of(
    c: &Complex,
    table: Option<&DistanceTable>,
    method: WidthMethod,
    a: VertexId,
    b: VertexId,
) -> Result<Width, MetricsError> {
    match method {
        WidthMethod::Exact => Ok(Width {
            value: match table {
                Some(t) => geodesic_width_in(c, t, a, b),
                None => geodesic_width(c, a, b)?,
            },
            lower_bound: false,
        }),
        WidthMethod::Enumerated { cap } => bundle_width(c, &shortest_path_bundle(c, a, b, cap)?),
    }
}

/// Complexes up to this size get an all-pairs table.
const TABLE_LIMIT: usize = 4096;

/// Tabulates minimal bundle widths per (n, s) over `levels`, where
/// `levels[i]` is K_{i+1}.
pub fn ellipticity_probe(
    levels: &[Complex],
    spec: &SampleSpec,
) -> Result<EllipticityReport, MetricsError> {
    let mut cells: BTreeMap<(u32, u32), EllipticityRow> = BTreeMap::new();
    let mut coverage = Vec::new();
    for c in levels {
        let n = c.stage();
        let table = if c.vertex_count() <= TABLE_LIMIT {
            Some(DistanceTable::new(c)?)
        } else {
            None
        };
        let (pairs, exhaustive) = sample_pairs(c.vertex_count(), spec, n);
        let mut max_distance = 0;
        for &(a, b) in &pairs {
            let s = match &table {
                Some(t) => t.get(a, b),
                None => distance(c, a, b)?,
            };
            max_distance = max_distance.max(s);
            let w = width_of(c, table.as_ref(), spec.method, a, b)?;
            let cell = cells.entry((n, s)).or_insert(EllipticityRow {
                n,
                s,
                pair: (a, b),
                width: w.value,
                truncated: w.lower_bound,
                pairs_checked: 0,
            });
            cell.pairs_checked += 1;
            if w.value < cell.width {
                cell.pair = (a, b);
                cell.width = w.value;
                cell.truncated = w.lower_bound;
            }
        }
        coverage.push(LevelCoverage {
            n,
            vertices: c.vertex_count(),
            exhaustive,
            pairs_checked: pairs.len(),
            max_distance,
        });
    }
    let rows: Vec<EllipticityRow> = cells.into_values().collect();

    let relevant = |r: &&EllipticityRow| r.n > spec.n_threshold;
    let verdict = rows
        .iter()
        .filter(relevant)
        .all(|r| r.s < spec.s_threshold || r.width >= spec.k);
    let observed_threshold = rows
        .iter()
        .filter(relevant)
        .filter(|r| r.width < spec.k)
        .map(|r| r.s + 1)
        .max()
        .unwrap_or(1);
    let vacuous = !rows
        .iter()
        .filter(relevant)
        .any(|r| r.s >= observed_threshold);

    let mut monotonicity = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 3)] {
        let mut widths = Vec::new();
        for c in levels {
            let corners = c.initial_corners();
            widths.push((c.stage(), geodesic_width(c, corners[i], corners[j])?));
        }
        let non_decreasing = widths.windows(2).all(|w| w[0].1 <= w[1].1);
        monotonicity.push(CornerTrace {
            corners: (i, j),
            widths,
            non_decreasing,
        });
    }

    Ok(EllipticityReport {
        spec: spec.clone(),
        rows,
        coverage,
        verdict,
        observed_threshold,
        vacuous,
        monotonicity,
    })
}
