//! Bounded rewriting over a presentation: zero reduction, word equality and
//! powers.
//!
//! Searches store a 128-bit fingerprint per visited word (two polynomial
//! hashes modulo 2^61 − 1, updated in O(7) per step) and a parent pointer
//! per node; words are rebuilt by replaying from the root, so memory stays
//! linear in the visit budget rather than in word length.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use serde::{Serialize, Serializer};

use crate::presentation::{format_word, Letter, Presentation, RelationKind, Word, WINDOW};

const SIDE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub max_visited: usize,
    pub max_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_visited: 1_000_000,
            max_depth: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HitKind {
    BackAndForth,
    /// The shortest factor at the position outside the allowed language.
    NotAllowed {
        length: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZeroHit {
    pub position: usize,
    pub kind: HitKind,
}

fn word_string<S: Serializer>(w: &Word, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_word(w))
}

/// The word after applying `relation` (an index into the equivalences) at
/// `position`; the first step of a trace has no relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    #[serde(serialize_with = "word_string")]
    pub word: Word,
    pub relation: Option<usize>,
    pub position: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("empty trace")]
    Empty,
    #[error("step {0}: no such relation")]
    UnknownRelation(usize),
    #[error("step {0}: neither side of the relation occurs at the position")]
    NoMatch(usize),
    #[error("step {0}: recorded word differs from the replayed one")]
    Mismatch(usize),
    #[error("final word has no zero factor")]
    NotZero,
}

impl Trace {
    /// Number of relation applications.
    pub fn depth(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn first(&self) -> Option<&Word> {
        self.steps.first().map(|s| &s.word)
    }

    pub fn last(&self) -> Option<&Word> {
        self.steps.last().map(|s| &s.word)
    }

    /// Re-apply every step and check it lands on the recorded word.
    pub fn replay(&self, p: &Presentation) -> Result<(), ReplayError> {
        let mut word = self.first().ok_or(ReplayError::Empty)?.clone();
        for (i, step) in self.steps.iter().enumerate().skip(1) {
            let r = step.relation.ok_or(ReplayError::UnknownRelation(i))?;
            let (a, b) = p
                .equivalences
                .get(r)
                .and_then(|r| r.sides())
                .ok_or(ReplayError::UnknownRelation(i))?;
            let at = step.position;
            let factor = word.get(at..at + SIDE).ok_or(ReplayError::NoMatch(i))?;
            let with = if factor == a.as_slice() {
                b
            } else if factor == b.as_slice() {
                a
            } else {
                return Err(ReplayError::NoMatch(i));
            };
            word.splice(at..at + SIDE, with.iter().copied());
            if word != step.word {
                return Err(ReplayError::Mismatch(i));
            }
        }
        Ok(())
    }

    /// One line per step: word, relation id (`-` for the start), position.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for st in &self.steps {
            let r = st.relation.map_or("-".to_string(), |r| r.to_string());
            s.push_str(&format!(
                "{}\t{}\t{}\n",
                format_word(&st.word),
                r,
                st.position
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome")]
pub enum RewriteVerdict {
    Zero {
        trace: Trace,
        hit: ZeroHit,
    },
    /// `via_zero`: both words reduce to zero; `trace` then joins nothing.
    Equal {
        trace: Trace,
        via_zero: bool,
    },
    DistinctByInvariant {
        reason: String,
    },
    /// `frontier` 0 means the whole equivalence class was explored.
    NotWithinBudget {
        frontier: usize,
        depth: usize,
        visited: usize,
    },
}

impl RewriteVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, RewriteVerdict::Zero { .. })
    }

    pub fn is_equal(&self) -> bool {
        matches!(self, RewriteVerdict::Equal { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            RewriteVerdict::Zero { .. } => "Zero",
            RewriteVerdict::Equal { .. } => "Equal",
            RewriteVerdict::DistinctByInvariant { .. } => "DistinctByInvariant",
            RewriteVerdict::NotWithinBudget { .. } => "NotWithinBudget",
        }
    }

    /// Compact JSON: outcome, depth and search size, without the trace words.
    pub fn summary_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            RewriteVerdict::Zero { trace, hit } => {
                json!({"outcome": "Zero", "depth": trace.depth(), "hit": hit})
            }
            RewriteVerdict::Equal { trace, via_zero } => {
                json!({"outcome": "Equal", "depth": trace.depth(), "via_zero": via_zero})
            }
            RewriteVerdict::DistinctByInvariant { reason } => {
                json!({"outcome": "DistinctByInvariant", "reason": reason})
            }
            RewriteVerdict::NotWithinBudget {
                frontier,
                depth,
                visited,
            } => {
                json!({"outcome": "NotWithinBudget", "frontier": frontier, "depth": depth, "visited": visited})
            }
        }
    }
}

type Side = [u16; SIDE];

#[derive(Clone, Copy)]
struct Move {
    rel: u32,
    other: Side,
}

#[derive(Clone, Copy)]
struct Node {
    parent: u32,
    rel: u32,
    pos: u32,
    other: Side,
    hash: [u64; 2],
}

const MERSENNE: u64 = (1 << 61) - 1;
const BASES: [u64; 2] = [
    0x1d8e_4e27_c47d_124f % MERSENNE,
    0x0ad3_e36b_12f7_0d39 % MERSENNE,
];

fn mul_mod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let r = (p as u64 & MERSENNE) + (p >> 61) as u64;
    if r >= MERSENNE {
        r - MERSENNE
    } else {
        r
    }
}

/// Powers of both bases for words of one length.
struct Powers([Vec<u64>; 2]);

impl Powers {
    fn new(n: usize) -> Powers {
        Powers(BASES.map(|b| {
            let mut v = Vec::with_capacity(n);
            let mut x = 1;
            for _ in 0..n {
                v.push(x);
                x = mul_mod(x, b);
            }
            v
        }))
    }

    fn hash(&self, w: &[u16]) -> [u64; 2] {
        [0, 1].map(|k| {
            w.iter()
                .zip(&self.0[k])
                .fold(0, |h, (&c, &p)| (h + mul_mod(c as u64 + 1, p)) % MERSENNE)
        })
    }

    /// Hash after replacing `old` by `new` at `pos`.
    fn update(&self, h: [u64; 2], pos: usize, old: &[u16], new: &[u16]) -> [u64; 2] {
        [0, 1].map(|k| {
            let mut x = h[k];
            for i in 0..old.len() {
                let p = self.0[k][pos + i];
                x = (x + MERSENNE - mul_mod(old[i] as u64 + 1, p)) % MERSENNE;
                x = (x + mul_mod(new[i] as u64 + 1, p)) % MERSENNE;
            }
            x
        })
    }
}

fn key(h: [u64; 2]) -> u128 {
    ((h[0] as u128) << 64) | h[1] as u128
}

/// A presentation compiled for matching.
pub struct Rewriter<'p> {
    p: &'p Presentation,
    moves: HashMap<Side, Vec<Move>>,
    back_and_forth: HashSet<Side>,
    /// Codes up to this one are colors; every relation side starts with one.
    last_color: u16,
}

/// One explored equivalence class, rooted at a word.
struct Search {
    root: Vec<u16>,
    powers: Powers,
    nodes: Vec<Node>,
    seen: HashMap<u128, u32>,
    frontier: Vec<u32>,
    depth: usize,
}

impl Search {
    fn new(root: Vec<u16>) -> Search {
        let powers = Powers::new(root.len());
        let hash = powers.hash(&root);
        let mut seen = HashMap::default();
        seen.insert(key(hash), 0);
        Search {
            root,
            powers,
            nodes: vec![Node {
                parent: u32::MAX,
                rel: u32::MAX,
                pos: 0,
                other: [0; SIDE],
                hash,
            }],
            seen,
            frontier: vec![0],
            depth: 0,
        }
    }

    fn chain(&self, mut id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while id != 0 {
            out.push(id);
            id = self.nodes[id as usize].parent;
        }
        out.reverse();
        out
    }

    fn word(&self, id: u32) -> Vec<u16> {
        let mut w = self.root.clone();
        for n in self.chain(id) {
            let n = &self.nodes[n as usize];
            w[n.pos as usize..n.pos as usize + SIDE].copy_from_slice(&n.other);
        }
        w
    }

    /// Steps root → node, spelled from the root's letters.
    fn steps(&self, id: u32, root: &[Letter], p: &Presentation) -> Vec<TraceStep> {
        let mut w = root.to_vec();
        let mut out = vec![TraceStep {
            word: w.clone(),
            relation: None,
            position: 0,
        }];
        for n in self.chain(id) {
            let n = &self.nodes[n as usize];
            let at = n.pos as usize;
            w.splice(at..at + SIDE, p.alphabet.decode(&n.other));
            out.push(TraceStep {
                word: w.clone(),
                relation: Some(n.rel as usize),
                position: at,
            });
        }
        out
    }
}

enum Expansion {
    Continue,
    Hit(u32, Option<ZeroHit>),
    OverBudget,
}

impl<'p> Rewriter<'p> {
    pub fn new(p: &'p Presentation) -> Rewriter<'p> {
        let code = |w: &Word| -> Option<Side> {
            let c = p.alphabet.encode(w);
            c.try_into().ok().filter(|s: &Side| !s.contains(&0))
        };
        let mut moves: HashMap<Side, Vec<Move>> = HashMap::default();
        for (i, r) in p.equivalences.iter().enumerate() {
            if let Some((a, b)) = r.sides() {
                if let (Some(a), Some(b)) = (code(a), code(b)) {
                    moves.entry(a).or_default().push(Move {
                        rel: i as u32,
                        other: b,
                    });
                    moves.entry(b).or_default().push(Move {
                        rel: i as u32,
                        other: a,
                    });
                }
            }
        }
        let back_and_forth = p
            .back_and_forth
            .iter()
            .filter_map(|r| match &r.kind {
                RelationKind::Zero(w) => code(w),
                RelationKind::Equivalence { .. } => None,
            })
            .collect();
        let last_color = p
            .alphabet
            .letters()
            .iter()
            .take_while(|l| l.is_color())
            .count() as u16;
        Rewriter {
            p,
            moves,
            back_and_forth,
            last_color,
        }
    }

    pub fn presentation(&self) -> &Presentation {
        self.p
    }

    fn hit_at(&self, w: &[u16], i: usize) -> Option<ZeroHit> {
        let n = w.len();
        if i + SIDE <= n {
            let side: Side = w[i..i + SIDE].try_into().unwrap();
            if self.back_and_forth.contains(&side) {
                return Some(ZeroHit {
                    position: i,
                    kind: HitKind::BackAndForth,
                });
            }
        }
        let end = (i + WINDOW).min(n);
        if self.p.allowed.contains(&w[i..end]) {
            return None;
        }
        let length = (1..=end - i)
            .find(|&l| !self.p.allowed.contains(&w[i..i + l]))
            .expect("some prefix fails");
        Some(ZeroHit {
            position: i,
            kind: HitKind::NotAllowed { length },
        })
    }

    fn scan_range(&self, w: &[u16], from: usize, to: usize) -> Option<ZeroHit> {
        (from..to.min(w.len())).find_map(|i| self.hit_at(w, i))
    }

    /// Leftmost position of a back-and-forth word or a forbidden factor.
    pub fn scan_zero(&self, w: &[Letter]) -> Option<ZeroHit> {
        let c = self.p.alphabet.encode(w);
        self.scan_range(&c, 0, c.len())
    }

    fn moves_of<'a>(&'a self, w: &'a [u16]) -> impl Iterator<Item = (usize, &'a Move)> + 'a {
        (0..(w.len() + 1).saturating_sub(SIDE))
            .filter(move |&pos| (1..=self.last_color).contains(&w[pos]))
            .flat_map(move |pos| {
                let side: Side = w[pos..pos + SIDE].try_into().unwrap();
                self.moves
                    .get(&side)
                    .into_iter()
                    .flatten()
                    .map(move |m| (pos, m))
            })
    }

    /// Every word one equivalence step away, in canonical order (position,
    /// then relation id).
    pub fn neighbors(&self, w: &[Letter]) -> Vec<Word> {
        let c = self.p.alphabet.encode(w);
        let mut out = Vec::new();
        for (pos, m) in self.moves_of(&c) {
            let mut x = w.to_vec();
            x.splice(pos..pos + SIDE, self.p.alphabet.decode(&m.other));
            if !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    /// Expand one BFS level. With `zero`, stop at the first child that
    /// scans zero; with `target`, at the first child whose fingerprint is in
    /// it.
    fn expand(
        &self,
        s: &mut Search,
        visited: &mut usize,
        budget: &SearchBudget,
        zero: bool,
        target: Option<&HashMap<u128, u32>>,
    ) -> Expansion {
        let mut next = Vec::new();
        let frontier = std::mem::take(&mut s.frontier);
        for &id in &frontier {
            let word = s.word(id);
            let hash = s.nodes[id as usize].hash;
            let mut child = word.clone();
            for (pos, m) in self.moves_of(&word) {
                let h = s.powers.update(hash, pos, &word[pos..pos + SIDE], &m.other);
                let f = key(h);
                if !s.seen.contains_key(&f) {
                    child[pos..pos + SIDE].copy_from_slice(&m.other);
                    if *visited >= budget.max_visited {
                        s.frontier = frontier;
                        return Expansion::OverBudget;
                    }
                    *visited += 1;
                    let nid = s.nodes.len() as u32;
                    s.nodes.push(Node {
                        parent: id,
                        rel: m.rel,
                        pos: pos as u32,
                        other: m.other,
                        hash: h,
                    });
                    s.seen.insert(f, nid);
                    next.push(nid);
                    if zero {
                        let from = pos.saturating_sub(WINDOW - 1);
                        if let Some(hit) = self.scan_range(&child, from, pos + SIDE) {
                            return Expansion::Hit(nid, Some(hit));
                        }
                    }
                    if target.is_some_and(|t| t.contains_key(&f)) {
                        return Expansion::Hit(nid, None);
                    }
                    child[pos..pos + SIDE].copy_from_slice(&word[pos..pos + SIDE]);
                }
            }
        }
        if !next.is_empty() {
            s.depth += 1;
        }
        s.frontier = next;
        Expansion::Continue
    }

    /// Breadth-first over equivalence steps until a word scans zero.
    pub fn reduce_to_zero(&self, w: &[Letter], budget: &SearchBudget) -> RewriteVerdict {
        let codes = self.p.alphabet.encode(w);
        if let Some(hit) = self.scan_range(&codes, 0, codes.len()) {
            return RewriteVerdict::Zero {
                trace: Trace {
                    steps: vec![TraceStep {
                        word: w.to_vec(),
                        relation: None,
                        position: 0,
                    }],
                },
                hit,
            };
        }
        let mut s = Search::new(codes);
        let mut visited = 1;
        loop {
            if s.frontier.is_empty() || s.depth >= budget.max_depth {
                return RewriteVerdict::NotWithinBudget {
                    frontier: s.frontier.len(),
                    depth: s.depth,
                    visited,
                };
            }
            match self.expand(&mut s, &mut visited, budget, true, None) {
                Expansion::Continue => {}
                Expansion::Hit(id, hit) => {
                    return RewriteVerdict::Zero {
                        trace: Trace {
                            steps: s.steps(id, w, self.p),
                        },
                        hit: hit.expect("zero search"),
                    };
                }
                Expansion::OverBudget => {
                    return RewriteVerdict::NotWithinBudget {
                        frontier: s.frontier.len(),
                        depth: s.depth,
                        visited,
                    }
                }
            }
        }
    }

    /// Two-sided search for a chain of equivalence steps joining `w` and
    /// `v`, falling back to zero-ness and length.
    pub fn words_equal(&self, w: &[Letter], v: &[Letter], budget: &SearchBudget) -> RewriteVerdict {
        if w == v {
            return RewriteVerdict::Equal {
                trace: Trace {
                    steps: vec![TraceStep {
                        word: w.to_vec(),
                        relation: None,
                        position: 0,
                    }],
                },
                via_zero: false,
            };
        }
        let mut unmet = None;
        if w.len() == v.len() {
            match self.meet(w, v, budget) {
                Ok(trace) => {
                    return RewriteVerdict::Equal {
                        trace,
                        via_zero: false,
                    }
                }
                Err(verdict) => unmet = Some(verdict),
            }
        }
        let zw = self.reduce_to_zero(w, budget);
        let zv = self.reduce_to_zero(v, budget);
        // Whole class explored, no zero in it.
        let nonzero =
            |z: &RewriteVerdict| matches!(z, RewriteVerdict::NotWithinBudget { frontier: 0, .. });
        let distinct = |reason: &str| RewriteVerdict::DistinctByInvariant {
            reason: reason.into(),
        };
        match (&zw, &zv) {
            (RewriteVerdict::Zero { trace, .. }, RewriteVerdict::Zero { .. }) => {
                RewriteVerdict::Equal {
                    trace: Trace {
                        steps: trace.steps[..1].to_vec(),
                    },
                    via_zero: true,
                }
            }
            (a, b) if w.len() != v.len() && nonzero(a) && nonzero(b) => distinct("length"),
            (a, b) if (a.is_zero() && nonzero(b)) || (nonzero(a) && b.is_zero()) => {
                distinct("exactly one word reduces to zero")
            }
            // The meeting search only rules the classes apart once it ran dry.
            (a, b) if nonzero(a) && nonzero(b) && unmet.as_ref().is_some_and(nonzero) => {
                distinct("equivalence classes differ")
            }
            _ => unmet.unwrap_or(if zw.is_zero() { zv } else { zw }),
        }
    }

    fn meet(
        &self,
        w: &[Letter],
        v: &[Letter],
        budget: &SearchBudget,
    ) -> Result<Trace, RewriteVerdict> {
        let mut a = Search::new(self.p.alphabet.encode(w));
        let mut b = Search::new(self.p.alphabet.encode(v));
        let mut visited = 2;
        loop {
            let from_a = a.frontier.len() <= b.frontier.len();
            let (left, right) = if from_a {
                (&mut a, &mut b)
            } else {
                (&mut b, &mut a)
            };
            let stuck = left.frontier.is_empty();
            if stuck || left.depth + right.depth >= budget.max_depth {
                return Err(RewriteVerdict::NotWithinBudget {
                    frontier: if stuck {
                        0
                    } else {
                        left.frontier.len() + right.frontier.len()
                    },
                    depth: left.depth + right.depth,
                    visited,
                });
            }
            match self.expand(left, &mut visited, budget, false, Some(&right.seen)) {
                Expansion::Continue => {}
                Expansion::OverBudget => {
                    return Err(RewriteVerdict::NotWithinBudget {
                        frontier: left.frontier.len() + right.frontier.len(),
                        depth: left.depth + right.depth,
                        visited,
                    })
                }
                Expansion::Hit(id, _) => {
                    let other = right.seen[&key(left.nodes[id as usize].hash)];
                    let (ia, ib) = if from_a { (id, other) } else { (other, id) };
                    return Ok(self.join(&a, ia, &b, ib, w, v));
                }
            }
        }
    }

    /// Root of `a` → meeting word → root of `b`.
    fn join(&self, a: &Search, ia: u32, b: &Search, ib: u32, w: &[Letter], v: &[Letter]) -> Trace {
        let mut steps = a.steps(ia, w, self.p);
        let back = b.steps(ib, v, self.p);
        // Undoing b's step k lands on its word k−1.
        for k in (1..back.len()).rev() {
            steps.push(TraceStep {
                word: back[k - 1].word.clone(),
                relation: back[k].relation,
                position: back[k].position,
            });
        }
        Trace { steps }
    }

    /// Replay a Zero verdict's trace and confirm its last word scans zero.
    pub fn certify_zero(&self, trace: &Trace) -> Result<(), ReplayError> {
        trace.replay(self.p)?;
        let last = trace.last().ok_or(ReplayError::Empty)?;
        self.scan_zero(last).map(|_| ()).ok_or(ReplayError::NotZero)
    }

    pub fn check_power_zero(
        &self,
        w: &[Letter],
        k: usize,
        budget: &SearchBudget,
    ) -> RewriteVerdict {
        self.reduce_to_zero(&power(w, k), budget)
    }
}

/// `w^k`. A closed path word (at least one edge, same color letter at both
/// ends) is spliced on the shared color; anything else is concatenated.
pub fn power(w: &[Letter], k: usize) -> Word {
    let splice = w.len() >= 4 && w[0].is_color() && w.first() == w.last();
    let mut out = Vec::with_capacity(w.len() * k);
    for i in 0..k {
        if splice && i > 0 {
            out.extend_from_slice(&w[1..]);
        } else {
            out.extend_from_slice(w);
        }
    }
    out
}
