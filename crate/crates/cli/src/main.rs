use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quadnil_core::presentation::{emit_presentation, RelationMode};
use quadnil_core::rewrite::SearchBudget;
use quadnil_core::typing::TypingError;
use quadnil_core::verify::{run_suite, Pipeline, PipelineConfig, Suite, SuiteConfig, VerifyError};
use quadnil_core::{
    build_sequence_with_stats, BuildLimits, ComplexError, LevelStats, SubdivisionScheme,
};

#[derive(Parser, Debug)]
#[command(
    name = "quadnil",
    version,
    about = "Quad-tile complexes and their path semigroup"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Highest level n; K_1 … K_n are built.
    #[arg(long, global = true, env = "QUADNIL_LEVEL", default_value_t = 5)]
    level: u32,
    /// Subdivision scheme table; the built-in scheme when absent.
    #[arg(long, global = true, env = "QUADNIL_SCHEME")]
    scheme: Option<PathBuf>,
    #[arg(long, global = true, env = "QUADNIL_DEPTH_CLIP", default_value_t = 4)]
    depth_clip: i32,
    /// Words visited per rewriting search.
    #[arg(
        long,
        global = true,
        env = "QUADNIL_BUDGET_VISITED",
        default_value_t = 1_000_000
    )]
    budget_visited: usize,
    /// Rewriting steps per search.
    #[arg(
        long,
        global = true,
        env = "QUADNIL_BUDGET_DEPTH",
        default_value_t = 64
    )]
    budget_depth: usize,
    /// Sampling seed.
    #[arg(long, global = true, env = "QUADNIL_SEED", default_value_t = 0x5eed)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = "QUADNIL_OUT", default_value = "out")]
    out: PathBuf,
    /// Report format.
    #[arg(long, global = true, env = "QUADNIL_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Which corner-path equivalences each tile contributes.
    #[arg(long, global = true, env = "QUADNIL_MODE", value_enum, default_value_t = Mode::Diagonals)]
    mode: Mode,
    /// Faithful colorings also separate siblings and corner-path patterns.
    #[arg(long, global = true, env = "QUADNIL_COLORING", value_enum, default_value_t = ColoringKind::Faithful)]
    coloring: ColoringKind,
    /// Vertex cap per level.
    #[arg(
        long,
        global = true,
        env = "QUADNIL_MAX_VERTICES",
        default_value_t = 2_000_000
    )]
    max_vertices: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build K_1 … K_n, write canonical dumps and a stats table.
    Build,
    /// Derive the coloring and presentation, write both files.
    Present,
    /// Run one verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// nil9, shortest-survive, length-separate, ellipticity or determinism.
    suite: String,
    /// Longest closed walk powered by nil9.
    #[arg(long, env = "QUADNIL_MAX_CYCLE", default_value_t = 8)]
    max_cycle: usize,
    /// Stop nil9 at the first refuted word.
    #[arg(long, env = "QUADNIL_STOP_AT_FAILURE")]
    stop_at_failure: bool,
    /// Geodesics sampled by shortest-survive and length-separate.
    #[arg(long, env = "QUADNIL_SAMPLES", default_value_t = 100)]
    samples: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Diagonals,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ColoringKind {
    Faithful,
    Plain,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Logical(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Logical(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("quadnil: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = pipeline_config(&cli.run)?;
    fs::create_dir_all(&cli.run.out)?;
    match &cli.command {
        Command::Build => cmd_build(&cli.run, &cfg),
        Command::Present => cmd_present(&cli.run, cfg),
        Command::Verify(v) => cmd_verify(&cli.run, cfg, v),
    }
}

fn pipeline_config(a: &RunArgs) -> Result<PipelineConfig, CliError> {
    if a.level == 0 {
        return Err(CliError::Config("--level must be at least 1".into()));
    }
    if a.depth_clip < 1 {
        return Err(CliError::Config("--depth-clip must be at least 1".into()));
    }
    let scheme = match &a.scheme {
        None => SubdivisionScheme::default(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            SubdivisionScheme::parse(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    let mut cfg = PipelineConfig {
        level: a.level,
        scheme,
        depth_clip: a.depth_clip,
        mode: match a.mode {
            Mode::Diagonals => RelationMode::Diagonals,
            Mode::Both => RelationMode::BothDirections,
        },
        limits: BuildLimits {
            max_vertices: a.max_vertices,
        },
        ..PipelineConfig::default()
    };
    cfg.solver.faithful = matches!(a.coloring, ColoringKind::Faithful);
    Ok(cfg)
}

fn cmd_build(a: &RunArgs, cfg: &PipelineConfig) -> Result<u8, CliError> {
    match build_sequence_with_stats(cfg.level, &cfg.scheme, cfg.limits) {
        Ok((levels, stats)) => {
            for c in &levels {
                let path = a.out.join(format!("k{}.dump", c.stage()));
                fs::write(path, c.canonical_dump())?;
            }
            report_stats(a, &stats)?;
            Ok(0)
        }
        Err(ComplexError::CapExceeded {
            level,
            vertices,
            cap,
            partial,
        }) => {
            report_stats(a, &partial)?;
            Err(CliError::Logical(format!(
                "level {level} has {vertices} vertices, over the cap of {cap}"
            )))
        }
        Err(e) => Err(CliError::Config(e.to_string())),
    }
}

fn report_stats(a: &RunArgs, stats: &[LevelStats]) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:>5} {:>9} {:>9} {:>9} {:>7}",
        "level", "vertices", "edges", "faces", "pasted"
    )?;
    for s in stats {
        writeln!(
            out,
            "{:>5} {:>9} {:>9} {:>9} {:>7}",
            s.level, s.vertices, s.edges, s.faces, s.pasting_sites
        )?;
    }
    write_rows(
        &a.out.join(format!("stats.{}", a.format.ext())),
        a.format,
        stats,
    )
}

fn write_rows<T: Serialize>(path: &Path, format: Format, rows: &[T]) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            fs::write(path, text)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn build_pipeline(a: &RunArgs, cfg: PipelineConfig) -> Result<Pipeline, CliError> {
    Pipeline::build(cfg).map_err(|e| match e {
        VerifyError::Typing(TypingError::Irreducible { ref report })
        | VerifyError::Typing(TypingError::BudgetExceeded { ref report, .. }) => {
            let path = a.out.join("violations.json");
            let dumped = serde_json::to_string_pretty(report)
                .map_err(CliError::from)
                .and_then(|t| fs::write(&path, t + "\n").map_err(CliError::from));
            if let Err(d) = dumped {
                return d;
            }
            eprintln!("violations written to {}", path.display());
            match e {
                VerifyError::Typing(TypingError::BudgetExceeded { .. }) => {
                    CliError::Budget(e.to_string())
                }
                _ => CliError::Logical(e.to_string()),
            }
        }
        VerifyError::Complex(ComplexError::CapExceeded { .. }) => CliError::Logical(e.to_string()),
        VerifyError::Typing(TypingError::BadClip)
        | VerifyError::Complex(_)
        | VerifyError::LevelTooLow { .. }
        | VerifyError::UnknownSuite(_) => CliError::Config(e.to_string()),
        _ => CliError::Logical(e.to_string()),
    })
}

#[derive(Serialize)]
struct PresentSummary {
    level: u32,
    colors: u32,
    alphabet: usize,
    equivalences: usize,
    back_and_forth: usize,
    windows: usize,
    new_windows: usize,
    new_equivalences: usize,
    new_back_and_forth: usize,
}

fn cmd_present(a: &RunArgs, cfg: PipelineConfig) -> Result<u8, CliError> {
    let p = build_pipeline(a, cfg)?;
    let mut file = io::BufWriter::new(fs::File::create(a.out.join("presentation.txt"))?);
    emit_presentation(&p.presentation, &mut file)?;
    file.flush()?;
    fs::write(a.out.join("coloring.txt"), p.coloring.to_text())?;
    let s = &p.stabilization;
    let summary = PresentSummary {
        level: p.presentation.level,
        colors: p.coloring.n_colors as u32,
        alphabet: p.presentation.alphabet.len(),
        equivalences: p.presentation.equivalences.len(),
        back_and_forth: p.presentation.back_and_forth.len(),
        windows: p.presentation.allowed.len(),
        new_windows: s.new_windows,
        new_equivalences: s.new_equivalences,
        new_back_and_forth: s.new_back_and_forth,
    };
    println!("colors N        {}", summary.colors);
    println!("alphabet        {}", summary.alphabet);
    println!("equivalences    {}", summary.equivalences);
    println!("back-and-forth  {}", summary.back_and_forth);
    println!("windows         {}", summary.windows);
    println!(
        "new at K_{}: {} windows, {} equivalences, {} back-and-forth",
        s.level, s.new_windows, s.new_equivalences, s.new_back_and_forth
    );
    write_rows(
        &a.out.join(format!("present.{}", a.format.ext())),
        a.format,
        &[summary],
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct AssertionRow<'a> {
    suite: &'a str,
    assertion: &'a str,
    hard: bool,
    status: String,
    detail: &'a str,
}

fn cmd_verify(a: &RunArgs, cfg: PipelineConfig, v: &VerifyArgs) -> Result<u8, CliError> {
    let suite: Suite = v
        .suite
        .parse()
        .map_err(|e: VerifyError| CliError::Config(e.to_string()))?;
    let n = cfg.level;
    let p = build_pipeline(a, cfg)?;
    let defaults = SuiteConfig::default();
    let mut sc = SuiteConfig {
        budget: SearchBudget {
            max_visited: a.budget_visited,
            max_depth: a.budget_depth,
        },
        seed: a.seed,
        nil_level: defaults.nil_level.min(n),
        nil_max_cycle: v.max_cycle,
        nil_stop_at_failure: v.stop_at_failure,
        survive_level: defaults.survive_level.min(n),
        survive_samples: v.samples,
        parallel_level: defaults.parallel_level.min(n),
        ..defaults
    };
    sc.ellipticity.seed = a.seed;
    let report = run_suite(&p, suite, &sc).map_err(|e| CliError::Logical(e.to_string()))?;
    print!("{}", report.to_text());
    let path = a.out.join(format!("verify-{}.{}", suite, a.format.ext()));
    match a.format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report)? + "\n";
            fs::write(path, text)?;
        }
        Format::Csv => {
            let rows: Vec<AssertionRow> = report
                .assertions
                .iter()
                .map(|x| AssertionRow {
                    suite: suite.name(),
                    assertion: &x.name,
                    hard: x.hard,
                    status: format!("{:?}", x.status),
                    detail: &x.detail,
                })
                .collect();
            write_rows(&path, a.format, &rows)?;
        }
    }
    Ok(report.exit_code() as u8)
}
