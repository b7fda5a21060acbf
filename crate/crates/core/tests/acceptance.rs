//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion outside `KNOWN_RED` fails.
//!
//! `QUADNIL_BLESS=1` rewrites the golden ellipticity CSV.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dfs_paths, floyd, naive_class};
use quadnil_core::complex::{build_sequence, find_pasting_sites, BuildLimits};
use quadnil_core::metrics::{ellipticity_probe, shortest_path_bundle};
use quadnil_core::presentation::{emit_presentation, unpack, RelationKind, Word, WINDOW};
use quadnil_core::rewrite::{RewriteVerdict, Rewriter, SearchBudget};
use quadnil_core::typing::verify_determinism;
use quadnil_core::verify::{run_suite, Pipeline, PipelineConfig, Status, Suite, SuiteConfig};
use quadnil_core::{subdivide, Path, SubdivisionScheme, VertexId};

/// Criteria that fail on this construction; see the README.
const KNOWN_RED: &[u32] = &[4, 5];
/// Colors of the default (faithful) coloring of K_1..K_5.
const GOLDEN_N: usize = 2122;
/// Smallest distance from which every observed bundle has width ≥ 2.
const GOLDEN_S0: u32 = 22;
const GOLDEN_CSV: &str = "tests/golden/ellipticity.csv";

type Verdict = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Verdict);

fn pipeline() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| Pipeline::build(PipelineConfig::default()).expect("K_1..K_5 pipeline"))
}

fn suite_config() -> SuiteConfig {
    let mut cfg = SuiteConfig::default();
    cfg.ellipticity.s_threshold = GOLDEN_S0;
    cfg
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn structure() -> Verdict {
    let t = Instant::now();
    let levels = build_sequence(6, &SubdivisionScheme::default(), BuildLimits::default())
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    for (i, c) in levels.iter().enumerate() {
        let want = 6usize.pow(i as u32);
        if c.core_unit_face_count() != want {
            return Err(format!(
                "K_{} core has {} faces, want {want}",
                i + 1,
                c.core_unit_face_count()
            ));
        }
    }
    for (c, want) in [(&levels[1], (11, 16, 6)), (&levels[2], (45, 80, 36))] {
        let got = (c.vertex_count(), c.edge_count(), c.unit_face_count());
        if got != want {
            return Err(format!("T_{}: {got:?}, want {want:?}", c.stage()));
        }
        // A disk: V − E + F = 1 without the outer face.
        if got.0 as i64 - got.1 as i64 + got.2 as i64 != 1 {
            return Err(format!("T_{} Euler characteristic", c.stage()));
        }
    }
    ensure(
        elapsed < Duration::from_secs(10),
        format!("6^(n-1) core faces for n = 1..6; T_2, T_3 exact; built in {elapsed:.2?}"),
    )
}

fn pasting() -> Verdict {
    let scheme = SubdivisionScheme::default();
    let levels = build_sequence(6, &scheme, BuildLimits::default()).map_err(|e| e.to_string())?;
    if !levels[1].pasting_log().is_empty() || !levels[2].pasting_log().is_empty() {
        return Err("K_2 or K_3 pasted".into());
    }
    let mut sites = Vec::new();
    for n in 4..=6usize {
        let fresh = subdivide(&levels[n - 2], &scheme);
        let s = find_pasting_sites(&fresh).map_err(|e| e.to_string())?.len();
        let built = &levels[n - 1];
        if built.vertex_count() != fresh.vertex_count() + 6 * s
            || built.edge_count() != fresh.edge_count() + 11 * s
        {
            return Err(format!("K_{n}: counts off for {s} sites"));
        }
        sites.push(s);
    }
    Ok(format!(
        "sites on K_4..K_6 = {sites:?}, +6 V / +11 E each; none on K_2, K_3"
    ))
}

fn presentation_shape() -> Verdict {
    let p = &pipeline().presentation;
    let bad_eq = p
        .equivalences
        .iter()
        .filter(|r| {
            let (a, b) = r.sides().expect("equivalence");
            a.len() != 7 || b.len() != 7 || a[0] != b[0] || a[6] != b[6]
        })
        .count();
    let bad_zero = p
        .back_and_forth
        .iter()
        .filter(|r| !matches!(&r.kind, RelationKind::Zero(w) if w.len() == 7))
        .count();
    let windows = p.allowed.windows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut not_closed = 0;
    for _ in 0..10_000 {
        let w = p
            .alphabet
            .decode(&unpack(windows[rng.gen_range(0..windows.len())]));
        let i = rng.gen_range(0..WINDOW);
        let j = rng.gen_range(i + 1..=WINDOW);
        if !p.allows(&w[i..j]) {
            not_closed += 1;
        }
    }
    ensure(
        bad_eq == 0 && bad_zero == 0 && not_closed == 0,
        format!(
            "{bad_eq}/{} bad equivalences, {bad_zero}/{} bad zero words, {not_closed}/10000 unclosed factors",
            p.equivalences.len(),
            p.back_and_forth.len()
        ),
    )
}

fn determinism_coloring() -> Verdict {
    let pl = pipeline();
    let verdict = verify_determinism(&pl.coloring, &pl.tiles);
    let report = run_suite(pl, Suite::Determinism, &suite_config()).map_err(|e| e.to_string())?;
    let stable = report
        .assertions
        .iter()
        .find(|a| a.name.starts_with("N stable"))
        .expect("stability row");
    let detail = format!(
        "{} tiles, {} violations, N = {} (golden {GOLDEN_N}); {}",
        verdict.tiles,
        verdict.violations.len(),
        pl.coloring.n_colors,
        stable.detail
    );
    ensure(
        verdict.passed() && pl.coloring.n_colors == GOLDEN_N && stable.status == Status::Pass,
        detail,
    )
}

fn nilpotency() -> Verdict {
    let t = Instant::now();
    let cfg = SuiteConfig {
        nil_stop_at_failure: true,
        ..suite_config()
    };
    let report = run_suite(pipeline(), Suite::Nil9, &cfg).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let mut detail: Vec<String> = report
        .assertions
        .iter()
        .map(|a| format!("{:?} {}", a.status, a.detail))
        .collect();
    if let Some(f) = report.data["failures"].as_array().and_then(|f| f.last()) {
        detail.push(format!("witness cycle {} -> {}", f["cycle"], f["verdict"]));
    }
    detail.push(format!("{elapsed:.1?}"));
    ensure(
        report.passed() && elapsed < Duration::from_secs(300),
        detail.join("; "),
    )
}

fn geodesic_survival() -> Verdict {
    let report = run_suite(pipeline(), Suite::ShortestSurvive, &suite_config())
        .map_err(|e| e.to_string())?;
    let detail = report
        .assertions
        .iter()
        .filter(|a| a.hard)
        .map(|a| format!("{:?} {}", a.status, a.detail))
        .collect::<Vec<_>>()
        .join("; ");
    ensure(report.passed(), detail)
}

fn ellipticity() -> Verdict {
    let report =
        run_suite(pipeline(), Suite::Ellipticity, &suite_config()).map_err(|e| e.to_string())?;
    let csv = report.data["csv"].as_str().expect("csv").to_string();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(GOLDEN_CSV);
    if std::env::var_os("QUADNIL_BLESS").is_some() {
        std::fs::write(&path, &csv).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read_to_string(&path).map_err(|e| format!("{GOLDEN_CSV}: {e}"))?;
    let hard = &report.assertions[0];
    let soft_fail = report
        .assertions
        .iter()
        .filter(|a| !a.hard && a.status != Status::Pass)
        .count();
    ensure(
        hard.status == Status::Pass && csv == golden,
        format!(
            "{}; CSV {} golden; {soft_fail} soft monotonicity rows fail",
            hard.detail,
            if csv == golden {
                "matches"
            } else {
                "differs from"
            }
        ),
    )
}

fn oracles() -> Verdict {
    let pl = pipeline();
    let mut pairs = 0;
    for c in pl.levels.iter().filter(|c| c.edge_count() <= 100) {
        let fw = floyd(c);
        for a in 0..c.vertex_count() {
            for b in 0..c.vertex_count() {
                let bundle =
                    shortest_path_bundle(c, VertexId(a as u32), VertexId(b as u32), 1_000_000)
                        .map_err(|e| e.to_string())?;
                let ours: BTreeSet<Vec<u32>> = bundle
                    .paths
                    .iter()
                    .map(|p| p.vertices.iter().map(|v| v.0).collect())
                    .collect();
                if bundle.truncated || ours != dfs_paths(c, &fw, a, b, fw[a][b]) {
                    return Err(format!("bundle {a}->{b} on K_{}", c.stage()));
                }
                pairs += 1;
            }
        }
    }

    // Walk words of ≤ 4 edges on K_1..K_3, a quarter with one letter changed.
    let p = &pl.presentation;
    let r = Rewriter::new(p);
    let fixture: Vec<_> = p.alphabet.letters().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut words = 0;
    for c in &pl.levels[..3] {
        for _ in 0..300 {
            let mut vs = vec![VertexId(rng.gen_range(0..c.vertex_count() as u32))];
            for _ in 0..rng.gen_range(0..=4) {
                let nb = c.neighbors(*vs.last().expect("non-empty"));
                vs.push(nb[rng.gen_range(0..nb.len())].0);
            }
            let path = Path::from_vertices(c, &vs).map_err(|e| e.to_string())?;
            let mut w: Word = pl.encode(c, &path).map_err(|e| e.to_string())?;
            if rng.gen_bool(0.25) {
                let i = rng.gen_range(0..w.len());
                w[i] = fixture[rng.gen_range(0..fixture.len())];
            }
            let (size, zero) = naive_class(p, &w);
            let agree = match r.reduce_to_zero(&w, &SearchBudget::default()) {
                RewriteVerdict::Zero { .. } => zero,
                RewriteVerdict::NotWithinBudget {
                    frontier: 0,
                    visited,
                    ..
                } => !zero && visited == size,
                _ => false,
            };
            if !agree {
                return Err(format!("rewriting disagrees on {w:?}"));
            }
            words += 1;
        }
    }
    Ok(format!(
        "{pairs} bundles on complexes with <= 100 edges; {words} words of <= 13 letters"
    ))
}

fn reproducibility() -> Verdict {
    let config = || PipelineConfig {
        level: 4,
        ..PipelineConfig::default()
    };
    let run = || -> Result<(Vec<String>, Vec<u8>, String, String), String> {
        let pl = Pipeline::build(config()).map_err(|e| e.to_string())?;
        let dumps = pl.levels.iter().map(|c| c.canonical_dump()).collect();
        let mut file = Vec::new();
        emit_presentation(&pl.presentation, &mut file).map_err(|e| e.to_string())?;
        let probe = ellipticity_probe(&pl.levels[1..], &suite_config().ellipticity)
            .map_err(|e| e.to_string())?;
        let cfg = SuiteConfig {
            survive_level: 4,
            survive_samples: 20,
            ..suite_config()
        };
        let report = run_suite(&pl, Suite::ShortestSurvive, &cfg).map_err(|e| e.to_string())?;
        let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
        Ok((dumps, file, probe.csv_string(), json))
    };
    let (a, b) = (run()?, run()?);
    ensure(
        a == b,
        format!(
            "dumps {}, presentation {}, ellipticity CSV {}, suite JSON {}",
            same(a.0 == b.0),
            same(a.1 == b.1),
            same(a.2 == b.2),
            same(a.3 == b.3)
        ),
    )
}

fn same(eq: bool) -> &'static str {
    if eq {
        "identical"
    } else {
        "DIFFER"
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "structural exactness", structure),
        (2, "pasting arithmetic", pasting),
        (3, "presentation shape", presentation_shape),
        (4, "determinism coloring", determinism_coloring),
        (5, "nilpotency x^9 = 0", nilpotency),
        (6, "geodesic survival", geodesic_survival),
        (7, "ellipticity probe", ellipticity),
        (8, "oracle equivalence", oracles),
        (9, "build determinism", reproducibility),
    ];
    let mut unexpected = Vec::new();
    for (n, name, check) in criteria {
        let t = Instant::now();
        let verdict =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let known = if verdict.is_err() && KNOWN_RED.contains(&n) {
            " [known red]"
        } else {
            ""
        };
        println!(
            "criterion {n} {name}: {tag}{known} ({:.1?}) {detail}",
            t.elapsed()
        );
        if verdict.is_err() && !KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
