//! End-to-end pipeline and the verification suites run on it.
//!
//! Each suite returns hard assertions (exact facts that gate success) and
//! soft rows (empirical observations that are only reported).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{build_sequence, BuildLimits, Complex, ComplexError, VertexId};
use crate::metrics::{
    bfs, ellipticity_probe, shortest_path_bundle, MetricsError, Path, SampleSpec,
};
use crate::presentation::{
    encode_path, format_word, Presentation, PresentationError, RelationMode, Stabilization, Word,
};
use crate::rewrite::{RewriteVerdict, Rewriter, SearchBudget};
use crate::scheme::SubdivisionScheme;
use crate::typing::{
    find_path_clashes, find_sibling_clashes, solve_determinism_coloring, verify_determinism,
    Coloring, SeedPartition, SolverBudget, TileSet, TypingError,
};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Typing(#[from] TypingError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("suite needs K_{needed}, only K_{built} is built")]
    LevelTooLow { needed: u32, built: u32 },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub level: u32,
    pub scheme: SubdivisionScheme,
    pub depth_clip: i32,
    pub mode: RelationMode,
    pub solver: SolverBudget,
    pub limits: BuildLimits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            level: 5,
            scheme: SubdivisionScheme::default(),
            depth_clip: 4,
            mode: RelationMode::default(),
            solver: SolverBudget {
                faithful: true,
                ..SolverBudget::default()
            },
            limits: BuildLimits::default(),
        }
    }
}

/// K_1 … K_n, a determinism coloring over all of them, and the presentation.
pub struct Pipeline {
    pub config: PipelineConfig,
    pub levels: Vec<Complex>,
    pub tiles: TileSet,
    pub coloring: Coloring,
    pub presentation: Presentation,
    pub stabilization: Stabilization,
}

impl Pipeline {
    pub fn build(config: PipelineConfig) -> Result<Pipeline, VerifyError> {
        let levels = build_sequence(config.level, &config.scheme, config.limits)?;
        Pipeline::from_levels(config, levels)
    }

    pub fn from_levels(
        config: PipelineConfig,
        levels: Vec<Complex>,
    ) -> Result<Pipeline, VerifyError> {
        let tiles = TileSet::from_levels(&levels);
        let seed = SeedPartition::from_labels(&levels, config.depth_clip)?;
        let coloring = solve_determinism_coloring(&tiles, &seed, config.solver)?;
        let (presentation, stabilization) = Presentation::build(&levels, &coloring, config.mode)?;
        Ok(Pipeline {
            config,
            levels,
            tiles,
            coloring,
            presentation,
            stabilization,
        })
    }

    pub fn level(&self, n: u32) -> Result<&Complex, VerifyError> {
        self.levels
            .get((n as usize).wrapping_sub(1))
            .ok_or(VerifyError::LevelTooLow {
                needed: n,
                built: self.levels.len() as u32,
            })
    }

    pub fn encode(&self, c: &Complex, p: &Path) -> Result<Word, VerifyError> {
        Ok(encode_path(c, p, &self.coloring)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Nil9,
    ShortestSurvive,
    LengthSeparate,
    Ellipticity,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Nil9,
        Suite::ShortestSurvive,
        Suite::LengthSeparate,
        Suite::Ellipticity,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Nil9 => "nil9",
            Suite::ShortestSurvive => "shortest-survive",
            Suite::LengthSeparate => "length-separate",
            Suite::Ellipticity => "ellipticity",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// Not refuted, but the search budget ran out before a verdict.
    Budget,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub hard: bool,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub assertions: Vec<Assertion>,
    /// Suite-specific tallies and witnesses.
    pub data: serde_json::Value,
}

impl SuiteReport {
    fn new(suite: Suite) -> SuiteReport {
        SuiteReport {
            suite,
            assertions: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    fn check(&mut self, name: &str, hard: bool, status: Status, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            hard,
            status,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.assertions
            .iter()
            .filter(|a| a.hard)
            .all(|a| a.status == Status::Pass)
    }

    /// 0 when every hard assertion holds, 1 on a logical failure, 2 when the
    /// only hard failures are budget exhaustion.
    pub fn exit_code(&self) -> i32 {
        let hard = self.assertions.iter().filter(|a| a.hard);
        if hard.clone().any(|a| a.status == Status::Fail) {
            1
        } else if hard.clone().any(|a| a.status == Status::Budget) {
            2
        } else {
            0
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for a in &self.assertions {
            let kind = if a.hard { "hard" } else { "soft" };
            s.push_str(&format!(
                "  [{kind}] {:?} {}: {}\n",
                a.status, a.name, a.detail
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub budget: SearchBudget,
    pub seed: u64,
    /// Level whose closed walks are powered.
    pub nil_level: u32,
    pub nil_max_cycle: usize,
    pub nil_random_strings: usize,
    pub nil_random_max_len: usize,
    /// Stop the closed-walk scan at the first refuted word.
    pub nil_stop_at_failure: bool,
    /// Level geodesics are sampled on.
    pub survive_level: u32,
    pub survive_samples: usize,
    pub survive_lengths: (u32, u32),
    /// Level whose corner bundles are checked for pairwise equality.
    pub parallel_level: u32,
    pub parallel_pairs: usize,
    pub ellipticity: SampleSpec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            budget: SearchBudget::default(),
            seed: 0x5eed,
            nil_level: 4,
            nil_max_cycle: 8,
            nil_random_strings: 1000,
            nil_random_max_len: 5,
            nil_stop_at_failure: false,
            survive_level: 5,
            survive_samples: 100,
            survive_lengths: (2, 12),
            parallel_level: 3,
            parallel_pairs: 20,
            ellipticity: SampleSpec {
                s_threshold: 22,
                ..SampleSpec::default()
            },
        }
    }
}

pub fn run_suite(
    p: &Pipeline,
    suite: Suite,
    cfg: &SuiteConfig,
) -> Result<SuiteReport, VerifyError> {
    match suite {
        Suite::Nil9 => nil9(p, cfg),
        Suite::ShortestSurvive => shortest_survive(p, cfg),
        Suite::LengthSeparate => length_separate(p, cfg),
        Suite::Ellipticity => ellipticity(p, cfg),
        Suite::Determinism => determinism(p),
    }
}

/// Closed non-backtracking walks of 1 ..= `max` edges, in canonical order.
/// Walks that backtrack contain a back-and-forth factor, and so does every
/// power, so they are left out.
pub fn closed_walks(c: &Complex, max: usize) -> Vec<Vec<VertexId>> {
    fn go(c: &Complex, max: usize, path: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let last = *path.last().expect("non-empty");
        for &(u, _) in c.neighbors(last) {
            if path.len() >= 2 && u == path[path.len() - 2] {
                continue;
            }
            path.push(u);
            if u == path[0] {
                out.push(path.clone());
            } else if path.len() <= max {
                go(c, max, path, out);
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    for v in c.vertex_ids() {
        go(c, max, &mut vec![v], &mut out);
    }
    out
}

fn status_of(v: &RewriteVerdict, want_zero: bool) -> Status {
    match (v, want_zero) {
        (RewriteVerdict::Zero { .. }, true) => Status::Pass,
        (RewriteVerdict::Zero { .. }, false) => Status::Fail,
        (RewriteVerdict::NotWithinBudget { frontier, .. }, true) if *frontier > 0 => Status::Budget,
        (_, true) => Status::Fail,
        (_, false) => Status::Pass,
    }
}

fn worst(a: Status, b: Status) -> Status {
    match (a, b) {
        (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
        (Status::Budget, _) | (_, Status::Budget) => Status::Budget,
        _ => Status::Pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NilFailure {
    pub base: String,
    pub cycle: Vec<u32>,
    pub verdict: serde_json::Value,
}

fn nil9(p: &Pipeline, cfg: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new(Suite::Nil9);
    let c = p.level(cfg.nil_level)?;
    let r = Rewriter::new(&p.presentation);

    let mut words: BTreeMap<Word, Vec<VertexId>> = BTreeMap::new();
    let walks = closed_walks(c, cfg.nil_max_cycle);
    for w in &walks {
        let path = Path::from_vertices(c, w)?;
        words
            .entry(p.encode(c, &path)?)
            .or_insert_with(|| w.clone());
    }
    let mut tally: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut status = Status::Pass;
    let mut checked = 0;
    for (w, walk) in &words {
        checked += 1;
        let v = r.check_power_zero(w, 9, &cfg.budget);
        *tally
            .entry(walk.len() - 1)
            .or_default()
            .entry(v.tag())
            .or_default() += 1;
        let s = status_of(&v, true);
        status = worst(status, s);
        if s != Status::Pass {
            failures.push(NilFailure {
                base: format_word(w),
                cycle: walk.iter().map(|v| v.0).collect(),
                verdict: v.summary_json(),
            });
            if s == Status::Fail && cfg.nil_stop_at_failure {
                break;
            }
        }
    }
    let zero: usize = tally.values().filter_map(|t| t.get("Zero")).sum();
    report.check(
        "closed walk words, 9th power is zero",
        true,
        status,
        format!(
            "{zero}/{checked} zero ({} distinct words) from {} walks of length <= {} on K_{}",
            words.len(),
            walks.len(),
            cfg.nil_max_cycle,
            cfg.nil_level
        ),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let letters = p.presentation.alphabet.letters();
    let mut random_status = Status::Pass;
    let mut random_zero = 0;
    let mut random_failures = Vec::new();
    for _ in 0..cfg.nil_random_strings {
        let len = rng.gen_range(1..=cfg.nil_random_max_len);
        let w: Word = (0..len)
            .map(|_| *letters.choose(&mut rng).expect("non-empty alphabet"))
            .collect();
        let v = r.check_power_zero(&w, 9, &cfg.budget);
        let s = status_of(&v, true);
        random_status = worst(random_status, s);
        if v.is_zero() {
            random_zero += 1;
        } else {
            random_failures.push(format_word(&w));
        }
    }
    report.check(
        "random letter strings, 9th power is zero",
        true,
        random_status,
        format!(
            "{random_zero}/{} strings of length 1..={}",
            cfg.nil_random_strings, cfg.nil_random_max_len
        ),
    );
    report.data = serde_json::json!({
        "walks": walks.len(),
        "words": words.len(),
        "checked": checked,
        "by_length": tally,
        "failures": failures,
        "random_failures": random_failures,
    });
    Ok(report)
}

/// A uniformly random next step along some geodesic, drawn from the BFS
/// layers towards `b`.
pub fn random_geodesic(
    c: &Complex,
    a: VertexId,
    b: VertexId,
    rng: &mut impl Rng,
) -> Result<Path, VerifyError> {
    let to_b = bfs(c, b);
    if to_b[a.index()] == u32::MAX {
        return Err(MetricsError::Disconnected(a, b).into());
    }
    let mut vs = vec![a];
    let mut v = a;
    while v != b {
        let d = to_b[v.index()];
        let next: Vec<VertexId> = c
            .neighbors(v)
            .iter()
            .map(|&(u, _)| u)
            .filter(|u| to_b[u.index()] + 1 == d)
            .collect();
        v = *next.choose(rng).expect("a geodesic continues");
        vs.push(v);
    }
    Ok(Path::from_vertices(c, &vs)?)
}

/// Seeded pairs at distance within `lengths`, with one random geodesic each.
pub fn sample_geodesics(
    c: &Complex,
    count: usize,
    lengths: (u32, u32),
    seed: u64,
) -> Result<Vec<Path>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.vertex_count() as u32;
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < count * 1000 {
        tries += 1;
        let a = VertexId(rng.gen_range(0..n));
        let want = rng.gen_range(lengths.0..=lengths.1);
        let d = bfs(c, a);
        let at: Vec<VertexId> = c.vertex_ids().filter(|v| d[v.index()] == want).collect();
        if let Some(&b) = at.choose(&mut rng) {
            out.push(random_geodesic(c, a, b, &mut rng)?);
        }
    }
    Ok(out)
}

fn shortest_survive(p: &Pipeline, cfg: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new(Suite::ShortestSurvive);
    let c = p.level(cfg.survive_level)?;
    let r = Rewriter::new(&p.presentation);
    let paths = sample_geodesics(c, cfg.survive_samples, cfg.survive_lengths, cfg.seed)?;
    let mut zeros = Vec::new();
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for path in &paths {
        let w = p.encode(c, path)?;
        let v = r.reduce_to_zero(&w, &cfg.budget);
        let key = match &v {
            RewriteVerdict::NotWithinBudget { frontier: 0, .. } => "class exhausted".to_string(),
            other => other.tag().to_string(),
        };
        *tally.entry(key).or_default() += 1;
        if v.is_zero() {
            zeros.push(serde_json::json!({
                "path": path.vertices.iter().map(|v| v.0).collect::<Vec<_>>(),
                "verdict": v.summary_json(),
            }));
        }
    }
    report.check(
        "sampled geodesics never reduce to zero",
        true,
        if zeros.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "{} of {} geodesics on K_{} reduced to zero ({tally:?})",
            zeros.len(),
            paths.len(),
            cfg.survive_level
        ),
    );

    let (mut bad, mut unresolved) = (0, 0);
    for rel in &p.presentation.equivalences {
        let (a, b) = rel.sides().expect("equivalence");
        match r.words_equal(a, b, &cfg.budget) {
            RewriteVerdict::Equal {
                trace,
                via_zero: false,
            } if trace.depth() == 1 => {}
            RewriteVerdict::NotWithinBudget { frontier, .. } if frontier > 0 => unresolved += 1,
            _ => bad += 1,
        }
    }
    report.check(
        "tile relation sides are equal at depth 1",
        true,
        if bad > 0 {
            Status::Fail
        } else if unresolved > 0 {
            Status::Budget
        } else {
            Status::Pass
        },
        format!(
            "{bad} of {} relations failed, {unresolved} out of budget",
            p.presentation.equivalences.len()
        ),
    );

    // Three sides of a unit tile: not shortest, expected to reduce.
    let mut three_sides = 0;
    let mut three_zero = 0;
    for f in c.unit_faces() {
        let k = f.corners;
        for start in 0..4 {
            let vs: Vec<VertexId> = (0..4).map(|i| k[(start + i) % 4]).collect();
            let w = p.encode(c, &Path::from_vertices(c, &vs)?)?;
            three_sides += 1;
            if r.reduce_to_zero(&w, &cfg.budget).is_zero() {
                three_zero += 1;
            }
        }
    }
    report.check(
        "three-side tile paths reduce to zero",
        false,
        if three_zero == three_sides {
            Status::Pass
        } else {
            Status::Fail
        },
        format!("{three_zero}/{three_sides} on K_{}", cfg.survive_level),
    );
    report.data = serde_json::json!({ "tally": tally, "zeros": zeros });
    Ok(report)
}

fn length_separate(p: &Pipeline, cfg: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new(Suite::LengthSeparate);
    let r = Rewriter::new(&p.presentation);
    let c = p.level(cfg.survive_level)?;
    let paths = sample_geodesics(c, cfg.survive_samples, cfg.survive_lengths, cfg.seed)?;
    let words: Vec<Word> = paths
        .iter()
        .map(|q| p.encode(c, q))
        .collect::<Result<_, _>>()?;
    let mut checked = 0;
    let mut status = Status::Pass;
    let mut outcomes: BTreeMap<String, usize> = BTreeMap::new();
    for pair in words.windows(2) {
        if pair[0].len() == pair[1].len() {
            continue;
        }
        checked += 1;
        let v = r.words_equal(&pair[0], &pair[1], &cfg.budget);
        *outcomes.entry(v.tag().into()).or_default() += 1;
        let ok = matches!(&v, RewriteVerdict::DistinctByInvariant { reason } if reason == "length");
        if !ok {
            status = worst(
                status,
                if v.is_equal() {
                    Status::Fail
                } else {
                    Status::Budget
                },
            );
        }
    }
    report.check(
        "geodesics of different length are distinct",
        true,
        status,
        format!(
            "{checked} consecutive sample pairs on K_{} ({outcomes:?})",
            cfg.survive_level
        ),
    );

    // Parallel geodesics between far-apart pairs on a small level.
    let c = p.level(cfg.parallel_level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9a11);
    let n = c.vertex_count() as u32;
    let mut equal = 0;
    let mut total = 0;
    let mut depths = Vec::new();
    let mut tried = BTreeSet::new();
    while total < cfg.parallel_pairs && tried.len() < 100 * cfg.parallel_pairs {
        let (a, b) = (VertexId(rng.gen_range(0..n)), VertexId(rng.gen_range(0..n)));
        if !tried.insert((a, b)) {
            continue;
        }
        let bundle = shortest_path_bundle(c, a, b, 1000)?;
        if bundle.paths.len() < 2 || bundle.length < 3 {
            continue;
        }
        total += 1;
        let first = p.encode(c, &bundle.paths[0])?;
        let last = p.encode(c, bundle.paths.last().expect("two paths"))?;
        match r.words_equal(&first, &last, &cfg.budget) {
            RewriteVerdict::Equal {
                trace,
                via_zero: false,
            } => {
                equal += 1;
                depths.push(trace.depth());
            }
            _ => depths.push(usize::MAX),
        }
    }
    report.check(
        "parallel geodesics are equal",
        false,
        if equal == total {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "{equal}/{total} extreme bundle pairs on K_{}",
            cfg.parallel_level
        ),
    );
    report.data = serde_json::json!({
        "outcomes": outcomes,
        "parallel_depths": depths.iter().map(|&d| if d == usize::MAX { -1 } else { d as i64 }).collect::<Vec<_>>(),
    });
    Ok(report)
}

fn ellipticity(p: &Pipeline, cfg: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new(Suite::Ellipticity);
    let from = 2.min(p.levels.len());
    let probe = ellipticity_probe(&p.levels[from - 1..], &cfg.ellipticity)?;
    let spec = &cfg.ellipticity;
    let low: Vec<_> = probe
        .rows
        .iter()
        .filter(|r| r.n > spec.n_threshold && r.s >= spec.s_threshold && r.width < spec.k)
        .collect();
    let reached = probe
        .rows
        .iter()
        .any(|r| r.n > spec.n_threshold && r.s >= spec.s_threshold);
    report.check(
        "width >= k beyond the threshold",
        true,
        if low.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "N={} S={} k={}: {} violating cells; observed threshold {}{}",
            spec.n_threshold,
            spec.s_threshold,
            spec.k,
            low.len(),
            probe.observed_threshold,
            if reached { "" } else { " (no pair reaches S)" }
        ),
    );
    for t in &probe.monotonicity {
        report.check(
            &format!("corner pair {:?} width non-decreasing in n", t.corners),
            false,
            if t.non_decreasing {
                Status::Pass
            } else {
                Status::Fail
            },
            format!("{:?}", t.widths),
        );
    }
    report.data = serde_json::json!({ "summary": probe.summary_json(), "csv": probe.csv_string() });
    Ok(report)
}

fn determinism(p: &Pipeline) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new(Suite::Determinism);
    let verdict = verify_determinism(&p.coloring, &p.tiles);
    report.check(
        "three corners determine the fourth",
        true,
        if verdict.passed() {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "{} tiles, {} violations, N = {}",
            verdict.tiles,
            verdict.violations.len(),
            p.coloring.n_colors
        ),
    );
    let siblings = find_sibling_clashes(&p.coloring.colors, &p.tiles);
    let paths = find_path_clashes(&p.coloring.colors, &p.tiles);
    report.check(
        "encodings are faithful",
        p.config.solver.faithful,
        if siblings.is_empty() && paths.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "{} sibling pairs share a color, {} corner-path patterns are ambiguous",
            siblings.len(),
            paths.len()
        ),
    );
    // Does adding the next level force new colors?
    let mut levels = p.levels.clone();
    let next = build_sequence(p.levels.len() as u32 + 1, &p.config.scheme, p.config.limits)?
        .pop()
        .expect("one more level");
    levels.push(next);
    let tiles = TileSet::from_levels(&levels);
    let seed = SeedPartition::from_labels(&levels, p.config.depth_clip)?;
    let extended = solve_determinism_coloring(&tiles, &seed, p.config.solver)?;
    report.check(
        "N stable when the next level is added",
        false,
        if extended.n_colors == p.coloring.n_colors {
            Status::Pass
        } else {
            Status::Fail
        },
        format!(
            "N = {} on K_1..K_{}, {} on K_1..K_{}",
            p.coloring.n_colors,
            p.levels.len(),
            extended.n_colors,
            levels.len()
        ),
    );
    report.check(
        "presentation stable at the reference level",
        false,
        if p.stabilization.stable() {
            Status::Pass
        } else {
            Status::Fail
        },
        {
            let s = &p.stabilization;
            format!(
                "K_{} adds {} of {} windows, {} equivalences, {} back-and-forth words",
                s.level, s.new_windows, s.windows, s.new_equivalences, s.new_back_and_forth
            )
        },
    );
    report.data = serde_json::json!({
        "n_colors": p.coloring.n_colors,
        "trace_steps": p.coloring.trace.len(),
        "violations": verdict.violations.iter().take(20).collect::<Vec<_>>(),
    });
    Ok(report)
}
