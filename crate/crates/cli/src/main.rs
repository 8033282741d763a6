//! `critters`: play, check and analyse levels from the command line.
//!
//! Exit status is 0 on success, 1 when input is invalid or a check fails,
//! and 2 on usage errors (bad flags, missing files).

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use critters_core::blocklang::{parse_ast, TestStmt};
use critters_core::diagnostic::has_errors;
use critters_core::engine::{simulate, verify_timeline, Setup, TimeBonusConfig};
use critters_core::levels::{builtin_level, parse_level, validate_level, Level, LevelKind};
use critters_core::mutation::{
    first_divergence, generate_mutants, solve_min_test, Divergence, Operator, SolveBounds, DEFAULT_SOLVE_BUDGET,
};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "critters", version, about = "Play, check and analyse Critters levels")]
struct Cli {
    /// Output style; json is canonical (sorted keys, no whitespace).
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a level with a set of tests and print the scoreboard.
    Run {
        /// Built-in level id or level file.
        #[arg(long)]
        level: String,
        /// Setup file: `{"portals":[..]}` / `{"signposts":[..]}`, or a bare
        /// test array for the first signpost of a loop level.
        #[arg(long)]
        tests: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        setup_seconds: f64,
        /// Write the event timeline (canonical JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a level file and report every problem found.
    Validate {
        level: String,
    },
    /// List a level's mutants, or generate new ones from its program.
    Mutants {
        #[arg(long)]
        level: String,
        #[arg(long)]
        generate: bool,
        /// Comma-separated operators to generate with (default: all).
        #[arg(long, value_delimiter = ',')]
        operators: Vec<Operator>,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Search for the smallest test that catches every mutant and no healthy critter.
    Solve {
        #[arg(long)]
        level: String,
        #[arg(long, default_value_t = 2)]
        max_assertions: usize,
        #[arg(long, default_value_t = 1)]
        max_depth: usize,
        #[arg(long, default_value_t = DEFAULT_SOLVE_BUDGET)]
        budget: u64,
    },
    /// Check that a timeline is exactly what the engine produces.
    Replay {
        #[arg(long)]
        level: String,
        #[arg(long)]
        tests: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        timeline: PathBuf,
    },
    /// Start the HTTP game server.
    Serve {
        /// Defaults to $PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
        /// Defaults to $DATA_DIR, then ./data.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Defaults to $ADMIN_TOKEN.
        #[arg(long)]
        admin_token: Option<String>,
    },
}

enum Failure {
    /// Exit 2.
    Usage(String),
    /// Exit 1.
    Invalid(String),
    /// Exit 1, with a report that still belongs on stdout.
    Report(String),
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// A level by file path, else by built-in id.
fn load(spec: &str) -> Result<Level, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        let text = read(path)?;
        return parse_level(&text).map_err(|e| Failure::Invalid(format!("{spec}: {e}")));
    }
    builtin_level(spec)
        .cloned()
        .ok_or_else(|| Failure::Usage(format!("no level file or built-in level named `{spec}`")))
}

/// Loads a level and refuses to go on if it has errors.
fn load_valid(spec: &str) -> Result<Level, Failure> {
    let level = load(spec)?;
    let diags = validate_level(&level);
    if has_errors(&diags) {
        let lines: Vec<String> = diags.iter().filter(|d| d.is_error()).map(ToString::to_string).collect();
        return Err(Failure::Invalid(lines.join("\n")));
    }
    Ok(level)
}

fn load_setup(level: &Level, path: &Path) -> Result<Setup, Failure> {
    let text = read(path)?;
    let bad = |e: critters_core::blocklang::AstError| Failure::Invalid(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('[') {
        if level.kind == LevelKind::Base {
            return Err(Failure::Invalid(format!(
                "{}: base levels need portal placements, not a bare test",
                path.display()
            )));
        }
        return Ok(Setup::signpost(parse_ast::<Vec<TestStmt>>(&text).map_err(bad)?));
    }
    parse_ast(&text).map_err(bad)
}

fn canonical<T: Serialize + ?Sized>(value: &T) -> String {
    critters_core::canonical::to_string(value)
}

fn run(format: Format, level: &str, tests: &Path, seed: u64, setup_seconds: f64, out: Option<&Path>) -> Outcome {
    let level = load_valid(level)?;
    let setup = load_setup(&level, tests)?;
    let run = simulate(&level, &setup, seed).map_err(|e| Failure::Invalid(e.to_string()))?;
    let score = run.score(setup_seconds, &TimeBonusConfig::default());
    if let Some(out) = out {
        let mut text = run.timeline.to_canonical_json();
        text.push('\n');
        std::fs::write(out, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(match format {
        Format::Text => score.to_table(),
        Format::Json => canonical(&json!({ "result": run.result, "score": score })),
    })
}

fn validate(format: Format, spec: &str) -> Outcome {
    let level = load(spec)?;
    let diags = validate_level(&level);
    let ok = !has_errors(&diags);
    let text = match format {
        Format::Text => {
            let mut lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
            let errors = diags.iter().filter(|d| d.is_error()).count();
            let warnings = diags.len() - errors;
            lines.push(if ok {
                format!("{}: ok ({warnings} warning(s))", level.id)
            } else {
                format!("{}: {errors} error(s), {warnings} warning(s)", level.id)
            });
            lines.join("\n")
        }
        Format::Json => canonical(&json!({ "level": level.id, "valid": ok, "diagnostics": diags })),
    };
    if ok {
        Ok(text)
    } else {
        Err(Failure::Report(text))
    }
}

fn divergence_text(d: Option<Divergence>) -> String {
    match d {
        Some(Divergence::Round(r)) => format!("round {r}"),
        Some(Divergence::Tile(t)) => format!("tile {t}"),
        None => "never".into(),
    }
}

fn mutants(format: Format, spec: &str, generate: bool, operators: &[Operator], limit: usize) -> Outcome {
    let level = load_valid(spec)?;
    if generate {
        let ops = if operators.is_empty() { &Operator::ALL[..] } else { operators };
        let catalog = generate_mutants(&level.program, &level.schema, ops, limit);
        return Ok(match format {
            Format::Text => catalog.mutants.iter().map(|m| format!("{}\t{}", m.id, m.hint)).collect::<Vec<_>>().join("\n"),
            Format::Json => catalog.to_json(),
        });
    }
    let mut rows = Vec::new();
    for m in &level.mutants {
        let at = first_divergence(&level, m).map_err(|e| Failure::Invalid(e.to_string()))?;
        rows.push((m, at));
    }
    Ok(match format {
        Format::Text => rows
            .iter()
            .map(|(m, at)| format!("{}\t{}\t{}", m.id, divergence_text(*at), m.hint))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => canonical(
            &rows
                .iter()
                .map(|(m, at)| json!({ "id": m.id, "hint": m.hint, "edits": m.edits, "firstDivergence": at }))
                .collect::<Vec<_>>(),
        ),
    })
}

fn solve(spec: &str, bounds: SolveBounds, budget: u64) -> Outcome {
    let level = load_valid(spec)?;
    match solve_min_test(&level, bounds, budget) {
        Ok(Some(setup)) => Ok(match (level.kind, setup.signposts.as_slice()) {
            (LevelKind::Loop, [only]) if only.signpost == 0 => canonical(&only.test),
            _ => canonical(&setup),
        }),
        Ok(None) => Err(Failure::Invalid(format!(
            "no adequate test with at most {} assertion(s) and if-depth {}",
            bounds.max_assertions, bounds.max_if_depth
        ))),
        Err(e) => Err(Failure::Invalid(e.to_string())),
    }
}

fn replay(level: &str, tests: &Path, seed: u64, timeline: &Path) -> Outcome {
    let level = load_valid(level)?;
    let setup = load_setup(&level, tests)?;
    let claimed = read(timeline)?;
    if verify_timeline(&level, &setup, seed, &claimed) {
        Ok("timeline verified".into())
    } else {
        Err(Failure::Invalid("timeline does not match the simulation".into()))
    }
}

fn serve(port: Option<u16>, data: Option<PathBuf>, admin_token: Option<String>) -> Outcome {
    let mut config = critters_service::Config::from_env();
    if let Some(data) = data {
        config.data_dir = data;
    }
    if admin_token.is_some() {
        config.admin_token = admin_token;
    }
    let port = match port {
        Some(p) => p,
        None => match std::env::var("PORT") {
            Ok(p) => p.parse().map_err(|_| Failure::Usage(format!("PORT is not a port number: {p}")))?,
            Err(_) => 8080,
        },
    };
    let state = critters_service::AppState::open(config).map_err(|e| Failure::Invalid(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Invalid(e.to_string()))?;
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    eprintln!("listening on {addr}");
    runtime
        .block_on(critters_service::serve(state, addr))
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(String::new())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let outcome = match cli.command {
        Command::Run { level, tests, seed, setup_seconds, out } => {
            run(format, &level, &tests, seed, setup_seconds, out.as_deref())
        }
        Command::Validate { level } => validate(format, &level),
        Command::Mutants { level, generate, operators, limit } => mutants(format, &level, generate, &operators, limit),
        Command::Solve { level, max_assertions, max_depth, budget } => {
            solve(&level, SolveBounds::new(max_assertions, max_depth), budget)
        }
        Command::Replay { level, tests, seed, timeline } => replay(&level, &tests, seed, &timeline),
        Command::Serve { port, data, admin_token } => serve(port, data, admin_token),
    };
    let print = |text: &str| {
        if !text.is_empty() {
            // a closed pipe (`| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{}", text.trim_end_matches('\n'));
        }
    };
    match outcome {
        Ok(text) => {
            print(&text);
            ExitCode::SUCCESS
        }
        Err(Failure::Report(text)) => {
            print(&text);
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
