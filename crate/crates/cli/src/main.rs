//! `codewire` command line: wire a file, evaluate a corpus, or explain a
//! session trace.
//!
//! Exit codes: 0 on success (complete wiring), 2 when the recommendation is
//! partial, 1 on any error including usage errors.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use codewire::agent::TraceRecord;
use codewire::eval::{emit_report, evaluate, load_corpus, summary_line, EvalOptions, ReportFormat};
use codewire::llm::{ChatModel, HttpChatModel};
use codewire::syntax::StubLibrary;
use codewire::wire::{trace_to_string, wire_file, EngineMode, WireOptions};
use codewire::{Error, Result};

use config::{Overrides, Settings};

#[derive(Parser)]
#[command(
    name = "codewire",
    version,
    about = "Wire unresolved identifiers in a pasted code region to elements of the surrounding context"
)]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct EngineFlags {
    /// Recommendation engine: agent, deterministic, or naive.
    #[arg(long)]
    mode: Option<String>,
    /// Model name for agent/naive modes.
    #[arg(long)]
    model: Option<String>,
    /// Chat-completions endpoint URL.
    #[arg(long)]
    endpoint: Option<String>,
    /// Completion queries per recommendation (self-consistency voting).
    #[arg(long)]
    votes: Option<u32>,
    /// Model decision budget per session.
    #[arg(long = "max-iter")]
    max_iter: Option<u32>,
    /// Stub library file (platform class signatures).
    #[arg(long)]
    stubs: Option<PathBuf>,
    /// Write the session trace (one JSON record per step) to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Wire one target file containing a <start>/<end> region.
    Wire {
        target: PathBuf,
        /// Directory of sibling .java files to index.
        #[arg(long)]
        project: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
        /// Rewrite the target file instead of only printing the diff.
        #[arg(long = "in-place")]
        in_place: bool,
        /// Machine-readable JSON output.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a corpus directory (cases.jsonl plus source files).
    Eval {
        corpus: PathBuf,
        #[command(flatten)]
        engine: EngineFlags,
        /// Independent runs per case in model modes.
        #[arg(long)]
        runs: Option<u32>,
        /// Directory for report.json and report.csv (defaults to the corpus).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the full JSON report to standard output.
        #[arg(long)]
        json: bool,
    },
    /// Render a session trace file as a readable narrative.
    Explain {
        trace: PathBuf,
        /// Print the parsed records as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors; the contract here is 1
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Wire {
            target,
            project,
            engine,
            in_place,
            json,
        } => {
            let settings = resolve(cli.config.as_deref(), &engine, in_place, json, None)?;
            cmd_wire(&target, project.as_deref(), &settings)
        }
        Command::Eval {
            corpus,
            engine,
            runs,
            out,
            json,
        } => {
            let settings = resolve(cli.config.as_deref(), &engine, false, json, runs)?;
            cmd_eval(&corpus, out.as_deref(), &settings)
        }
        Command::Explain { trace, json } => cmd_explain(&trace, json),
    }
}

fn resolve(
    config: Option<&std::path::Path>,
    engine: &EngineFlags,
    in_place: bool,
    json: bool,
    runs: Option<u32>,
) -> Result<Settings> {
    let overrides = Overrides {
        mode: engine.mode.clone(),
        model: engine.model.clone(),
        endpoint: engine.endpoint.clone(),
        votes: engine.votes,
        max_iter: engine.max_iter,
        runs,
        stubs: engine.stubs.clone(),
        trace: engine.trace.clone(),
        in_place,
        json,
    };
    config::resolve(config, &overrides)
}

fn build_model(settings: &Settings) -> Result<Option<Box<dyn ChatModel>>> {
    match settings.mode {
        EngineMode::Deterministic => Ok(None),
        _ => Ok(Some(Box::new(HttpChatModel::new(settings.model.clone())?))),
    }
}

fn wire_options(settings: &Settings) -> WireOptions {
    WireOptions {
        mode: settings.mode,
        max_iterations: settings.max_iterations,
        votes: settings.model.votes,
        weights: settings.weights,
        backoff: std::time::Duration::from_millis(settings.model.retry_backoff_ms),
    }
}

fn cmd_wire(
    target: &std::path::Path,
    project: Option<&std::path::Path>,
    settings: &Settings,
) -> Result<ExitCode> {
    let model = build_model(settings)?;
    let outcome = wire_file(
        target,
        project,
        settings.stubs.as_deref(),
        &wire_options(settings),
        model.as_deref(),
    )?;

    if let Some(path) = &settings.trace {
        std::fs::write(path, trace_to_string(&outcome.trace))
            .map_err(|e| Error::Input(format!("cannot write trace {}: {e}", path.display())))?;
    }
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    if !outcome.residual_unresolved.is_empty() {
        eprintln!(
            "warning: still unresolved after the edit: {}",
            outcome.residual_unresolved.join(", ")
        );
    }

    if settings.json {
        let payload = serde_json::json!({
            "complete": outcome.recommendation.complete,
            "degraded": outcome.degraded,
            "pairs": outcome.recommendation.pairs.iter().map(|p| {
                serde_json::json!({
                    "unresolved": p.element.name,
                    "chosen": p.chosen.name,
                    "confidence": p.confidence,
                    "references": p.element.references.len(),
                })
            }).collect::<Vec<_>>(),
            "residual_unresolved": outcome.residual_unresolved,
            "diff": outcome.diff,
            "tokens_in": outcome.ledger.tokens_in(),
            "tokens_out": outcome.ledger.tokens_out(),
            "ms": outcome.ledger.total_ms(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).unwrap_or_default()
        );
    } else {
        print!("{}", outcome.diff);
    }

    if settings.in_place {
        std::fs::write(target, &outcome.new_text)
            .map_err(|e| Error::Input(format!("cannot rewrite {}: {e}", target.display())))?;
    }

    Ok(if outcome.recommendation.complete {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_eval(
    corpus_root: &std::path::Path,
    out: Option<&std::path::Path>,
    settings: &Settings,
) -> Result<ExitCode> {
    let corpus = load_corpus(corpus_root)?;
    for rejected in &corpus.rejected {
        eprintln!(
            "warning: case {} rejected: {}",
            rejected.id, rejected.reason
        );
    }

    let model = build_model(settings)?;
    let stubs = settings
        .stubs
        .as_deref()
        .map(StubLibrary::load)
        .transpose()?;
    let opts = EvalOptions {
        mode: settings.mode,
        runs: settings.runs,
        wire: wire_options(settings),
        stubs,
    };
    let report = evaluate(&corpus.cases, &opts, model.as_deref());

    let out_dir = out.unwrap_or(corpus_root);
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    emit_report(&report, ReportFormat::Json, &out_dir.join("report.json"))?;
    emit_report(&report, ReportFormat::Csv, &out_dir.join("report.csv"))?;

    if settings.json {
        println!(
            "{}",
            codewire::eval::render_report(&report, ReportFormat::Json)
        );
    }
    println!("{}", summary_line(&report));
    Ok(ExitCode::SUCCESS)
}

fn cmd_explain(trace_path: &std::path::Path, json: bool) -> Result<ExitCode> {
    let text = std::fs::read_to_string(trace_path)
        .map_err(|e| Error::Input(format!("cannot read trace {}: {e}", trace_path.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord = serde_json::from_str(line).map_err(|e| {
            Error::Input(format!(
                "trace line {}: not a trace record: {e}",
                lineno + 1
            ))
        })?;
        records.push(record);
    }

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&records).unwrap_or_default()
        );
        return Ok(ExitCode::SUCCESS);
    }

    let mut tokens_in = 0u64;
    let mut tokens_out = 0u64;
    let mut ms = 0u64;
    for (i, r) in records.iter().enumerate() {
        println!(
            "[{} {}] state={} action={} tokens={}/{} ms={}",
            r.record,
            i + 1,
            r.state,
            r.action,
            r.tokens_in,
            r.tokens_out,
            r.ms
        );
        if !r.thought.is_empty() {
            println!("  thought: {}", r.thought);
        }
        if r.action_input != serde_json::json!({}) {
            println!("  input: {}", r.action_input);
        }
        if !r.observation_digest.is_empty() {
            println!("  observation digest: {}", r.observation_digest);
        }
        tokens_in += r.tokens_in;
        tokens_out += r.tokens_out;
        ms += r.ms;
    }
    println!(
        "totals: {} records, tokens {}/{} ({} total), {} ms",
        records.len(),
        tokens_in,
        tokens_out,
        tokens_in + tokens_out,
        ms
    );
    Ok(ExitCode::SUCCESS)
}
