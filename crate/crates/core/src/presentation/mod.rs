//! Path words and the finite presentation.

mod file;
mod language;
mod word;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::complex::{Complex, EdgeId, FaceId, VertexId};
use crate::metrics::Path;
use crate::typing::{enumerate_edge_letters, Coloring, SideLetter, TileSet};

pub use file::{emit_presentation, load_presentation};
pub use language::{pack, unpack, AllowedLanguage, MAX_CODE, WINDOW};
pub use word::{format_word, parse_word, Letter, LetterParseError, Word};

#[derive(Debug, thiserror::Error)]
pub enum PresentationError {
    #[error("vertex {vertex} of K_{level} has no color")]
    Uncolored { level: u32, vertex: u32 },
    #[error("path is malformed: {0}")]
    BadPath(String),
    #[error("alphabet of {0} letters exceeds the packed-code limit")]
    AlphabetTooLarge(usize),
    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(Letter),
    #[error("no levels given")]
    NoLevels,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sorted letters; a letter's code is its index plus one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Alphabet {
    letters: Vec<Letter>,
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Result<Alphabet, PresentationError> {
        let letters: Vec<Letter> = letters
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if letters.len() >= MAX_CODE as usize {
            return Err(PresentationError::AlphabetTooLarge(letters.len()));
        }
        Ok(Alphabet { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn code(&self, l: Letter) -> Option<u16> {
        self.letters.binary_search(&l).ok().map(|i| i as u16 + 1)
    }

    pub fn letter(&self, code: u16) -> Option<Letter> {
        self.letters.get((code as usize).checked_sub(1)?).copied()
    }

    /// Codes of a word; letters outside the alphabet become 0, which no
    /// language member contains.
    pub fn encode(&self, w: &[Letter]) -> Vec<u16> {
        w.iter().map(|&l| self.code(l).unwrap_or(0)).collect()
    }

    pub fn decode(&self, codes: &[u16]) -> Word {
        codes
            .iter()
            .map(|&c| self.letter(c).expect("code within alphabet"))
            .collect()
    }
}

/// Where a relation was first realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Source {
    Tile { level: u32, face: FaceId },
    Edge { level: u32, edge: EdgeId },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Tile { level, face } => write!(f, "tile {level}/{}", face.0),
            Source::Edge { level, edge } => write!(f, "edge {level}/{}", edge.0),
        }
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad source {s:?}");
        let (tag, rest) = s.split_once(' ').ok_or_else(bad)?;
        let (level, id) = rest.split_once('/').ok_or_else(bad)?;
        let level: u32 = level.parse().map_err(|_| bad())?;
        let id: u32 = id.parse().map_err(|_| bad())?;
        match tag {
            "tile" => Ok(Source::Tile {
                level,
                face: FaceId(id),
            }),
            "edge" => Ok(Source::Edge {
                level,
                edge: EdgeId(id),
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RelationKind {
    /// Sides ordered so that `left < right`.
    Equivalence {
        left: Word,
        right: Word,
    },
    Zero(Word),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub source: Source,
}

impl Relation {
    pub fn equivalence(a: Word, b: Word, source: Source) -> Relation {
        let (left, right) = if a <= b { (a, b) } else { (b, a) };
        Relation {
            kind: RelationKind::Equivalence { left, right },
            source,
        }
    }

    pub fn sides(&self) -> Option<(&Word, &Word)> {
        match &self.kind {
            RelationKind::Equivalence { left, right } => Some((left, right)),
            RelationKind::Zero(_) => None,
        }
    }
}

/// How many corner-path equivalences each tile contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RelationMode {
    /// One per diagonal, read from the lower corner index: c0→c2 and c1→c3.
    #[default]
    Diagonals,
    /// Both traversal directions of both diagonals.
    BothDirections,
}

fn reversed(s: SideLetter) -> SideLetter {
    (s.0, s.1.reversed())
}

fn two_step(c: [u32; 3], a: SideLetter, b: SideLetter) -> Word {
    vec![
        Letter::Color(c[0]),
        Letter::Out(a.0, a.1),
        Letter::In(a.0, a.1),
        Letter::Color(c[1]),
        Letter::Out(b.0, b.1),
        Letter::In(b.0, b.1),
        Letter::Color(c[2]),
    ]
}

/// Color, Out, In, Color, … along `p` on `c`.
pub fn encode_path(c: &Complex, p: &Path, coloring: &Coloring) -> Result<Word, PresentationError> {
    if p.vertices.len() != p.steps.len() + 1 {
        return Err(PresentationError::BadPath(
            "vertex/step count mismatch".into(),
        ));
    }
    let color = |v: VertexId| {
        coloring
            .color_of(c.stage(), v)
            .map(Letter::Color)
            .ok_or(PresentationError::Uncolored {
                level: c.stage(),
                vertex: v.0,
            })
    };
    let mut w = Vec::with_capacity(3 * p.steps.len() + 1);
    w.push(color(p.vertices[0])?);
    for (i, &(e, sense)) in p.steps.iter().enumerate() {
        if e.index() >= c.edge_count() {
            return Err(PresentationError::BadPath(format!("unknown edge {}", e.0)));
        }
        let rec = c.edge(e);
        let (from, to) = (p.vertices[i], p.vertices[i + 1]);
        if rec.other(from) != to || rec.sense_from(from) != sense {
            return Err(PresentationError::BadPath(format!(
                "step {i} does not follow edge {}",
                e.0
            )));
        }
        w.push(Letter::Out(rec.edge_type, sense));
        w.push(Letter::In(rec.edge_type, sense));
        w.push(color(to)?);
    }
    Ok(w)
}

/// Corner-path equivalences over every unit tile, deduplicated, in canonical
/// order; each keeps the first tile realizing it.
pub fn generate_tile_relations(
    tiles: &TileSet,
    coloring: &Coloring,
    mode: RelationMode,
) -> Vec<Relation> {
    let mut seen: BTreeMap<RelationKind, Source> = BTreeMap::new();
    for t in &tiles.tiles {
        let col = t.corners.map(|v| coloring.colors[v as usize]);
        let s = t.sides;
        let source = Source::Tile {
            level: t.level,
            face: t.face,
        };
        let mut add = |a: Word, b: Word| {
            let r = Relation::equivalence(a, b, source);
            seen.entry(r.kind).or_insert(source);
        };
        // c0→c2 and c1→c3, each around both sides.
        add(
            two_step([col[0], col[1], col[2]], s[0], s[1]),
            two_step([col[0], col[3], col[2]], reversed(s[3]), reversed(s[2])),
        );
        add(
            two_step([col[1], col[2], col[3]], s[1], s[2]),
            two_step([col[1], col[0], col[3]], reversed(s[0]), reversed(s[3])),
        );
        if mode == RelationMode::BothDirections {
            add(
                two_step([col[2], col[1], col[0]], reversed(s[1]), reversed(s[0])),
                two_step([col[2], col[3], col[0]], s[2], s[3]),
            );
            add(
                two_step([col[3], col[2], col[1]], reversed(s[2]), reversed(s[1])),
                two_step([col[3], col[0], col[1]], s[3], s[0]),
            );
        }
    }
    seen.into_iter()
        .map(|(kind, source)| Relation { kind, source })
        .collect()
}

/// u→v→u over every edge, both ways round.
pub fn generate_back_and_forth(
    levels: &[Complex],
    coloring: &Coloring,
) -> Result<Vec<Relation>, PresentationError> {
    let mut seen: BTreeMap<RelationKind, Source> = BTreeMap::new();
    for c in levels {
        for e in c.edges() {
            for from in [e.tail, e.head] {
                let to = e.other(from);
                let p = Path {
                    vertices: vec![from, to, from],
                    steps: vec![(e.id, e.sense_from(from)), (e.id, e.sense_from(to))],
                };
                let w = encode_path(c, &p, coloring)?;
                seen.entry(RelationKind::Zero(w)).or_insert(Source::Edge {
                    level: c.stage(),
                    edge: e.id,
                });
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|(kind, source)| Relation { kind, source })
        .collect())
}

/// Colors and edge letters realized on `levels`.
pub fn realized_alphabet(
    levels: &[Complex],
    coloring: &Coloring,
) -> Result<Alphabet, PresentationError> {
    let mut letters: BTreeSet<Letter> = enumerate_edge_letters(levels);
    for c in levels {
        for v in c.vertex_ids() {
            let col = coloring
                .color_of(c.stage(), v)
                .ok_or(PresentationError::Uncolored {
                    level: c.stage(),
                    vertex: v.0,
                })?;
            letters.insert(Letter::Color(col));
        }
    }
    Alphabet::new(letters)
}

/// The allowed windows of walk encodings on one complex.
pub fn level_language(
    c: &Complex,
    coloring: &Coloring,
    alphabet: &Alphabet,
) -> Result<AllowedLanguage, PresentationError> {
    let code = |l: Letter| alphabet.code(l).ok_or(PresentationError::UnknownLetter(l));
    let colors: Vec<u16> = c
        .vertex_ids()
        .map(|v| {
            let col = coloring
                .color_of(c.stage(), v)
                .ok_or(PresentationError::Uncolored {
                    level: c.stage(),
                    vertex: v.0,
                })?;
            code(Letter::Color(col))
        })
        .collect::<Result<_, _>>()?;
    // Per vertex, per neighbor entry: (out, in, target color).
    let mut steps: Vec<Vec<[u16; 3]>> = Vec::with_capacity(c.vertex_count());
    for v in c.vertex_ids() {
        let mut row = Vec::new();
        for &(u, e) in c.neighbors(v) {
            let rec = c.edge(e);
            let s = rec.sense_from(v);
            row.push([
                code(Letter::Out(rec.edge_type, s))?,
                code(Letter::In(rec.edge_type, s))?,
                colors[u.index()],
            ]);
        }
        steps.push(row);
    }
    Ok(language::walk_windows(
        c,
        |v| colors[v.index()],
        |v, k| steps[v.index()][k],
    ))
}

/// How much the allowed language still grows at the reference level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub previous_level: u32,
    pub level: u32,
    pub previous_windows: usize,
    pub windows: usize,
    /// Windows first realized at the reference level.
    pub new_windows: usize,
    pub new_equivalences: usize,
    pub new_back_and_forth: usize,
}

impl Stabilization {
    pub fn stable(&self) -> bool {
        self.new_windows == 0 && self.new_equivalences == 0 && self.new_back_and_forth == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub level: u32,
    pub alphabet: Alphabet,
    pub equivalences: Vec<Relation>,
    pub back_and_forth: Vec<Relation>,
    pub allowed: AllowedLanguage,
}

impl Presentation {
    pub fn empty() -> Presentation {
        Presentation {
            level: 0,
            alphabet: Alphabet::default(),
            equivalences: Vec::new(),
            back_and_forth: Vec::new(),
            allowed: AllowedLanguage::default(),
        }
    }

    /// Presentation from K_1 … K_m with `coloring` covering them all. Also
    /// reports what K_m added over K_1 … K_{m−1}.
    pub fn build(
        levels: &[Complex],
        coloring: &Coloring,
        mode: RelationMode,
    ) -> Result<(Presentation, Stabilization), PresentationError> {
        let last = levels.last().ok_or(PresentationError::NoLevels)?;
        let alphabet = realized_alphabet(levels, coloring)?;
        let mut previous = AllowedLanguage::default();
        let mut top = AllowedLanguage::default();
        for (i, c) in levels.iter().enumerate() {
            let lang = level_language(c, coloring, &alphabet)?;
            if i + 1 == levels.len() {
                top = lang;
            } else {
                previous = previous.union(&lang);
            }
        }
        let allowed = previous.union(&top);

        let tiles = TileSet::from_levels(levels);
        let equivalences = generate_tile_relations(&tiles, coloring, mode);
        let back_and_forth = generate_back_and_forth(levels, coloring)?;
        let new_from = |rs: &[Relation]| {
            rs.iter()
                .filter(|r| match r.source {
                    Source::Tile { level, .. } | Source::Edge { level, .. } => {
                        level == last.stage()
                    }
                })
                .count()
        };
        let stabilization = Stabilization {
            previous_level: last.stage().saturating_sub(1),
            level: last.stage(),
            previous_windows: previous.len(),
            windows: allowed.len(),
            new_windows: allowed.len() - previous.len(),
            new_equivalences: new_from(&equivalences),
            new_back_and_forth: new_from(&back_and_forth),
        };
        Ok((
            Presentation {
                level: last.stage(),
                alphabet,
                equivalences,
                back_and_forth,
                allowed,
            },
            stabilization,
        ))
    }

    /// Membership of a word of length ≤ `WINDOW` in the allowed language.
    pub fn allows(&self, w: &[Letter]) -> bool {
        self.allowed.contains(&self.alphabet.encode(w))
    }

    /// Whether every factor of length ≤ `WINDOW` of `w` is allowed.
    pub fn admits(&self, w: &[Letter]) -> bool {
        let codes = self.alphabet.encode(w);
        if codes.len() <= WINDOW {
            return self.allowed.contains(&codes);
        }
        codes.windows(WINDOW).all(|f| self.allowed.contains(f))
    }

    pub fn is_back_and_forth(&self, w: &[Letter]) -> bool {
        self.back_and_forth
            .binary_search_by(|r| match &r.kind {
                RelationKind::Zero(z) => z.as_slice().cmp(w),
                RelationKind::Equivalence { .. } => std::cmp::Ordering::Less,
            })
            .is_ok()
    }
}
