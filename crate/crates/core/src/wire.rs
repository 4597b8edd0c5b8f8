//! End-to-end pipeline: markers to recommendation to applied edits.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::agent::{init_session, render_trace, RunOptions, TraceRecord};
use crate::collect::{Candidate, CandidateKind};
use crate::complete::{Recommendation, ScoreWeights, WiringPair};
use crate::edit::{apply_edits, plan_edits, EditScript};
use crate::error::{Error, Result};
use crate::llm::{complete_with_retries, CallPurpose, ChatMessage, ChatModel, Ledger};
use crate::locate::{extract_region, identify_unresolved_elements, AdaptationRegion};
use crate::syntax::{
    build_symbol_table, parse_unit, SourceUnit, StubLibrary, SymbolTable, TypeRef,
};

/// How recommendations are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineMode {
    /// Tool-driven model loop with the deterministic completer as fallback.
    Agent,
    /// No model: fixed exploration policy plus the scoring completer.
    Deterministic,
    /// Baseline: hand the whole class (markers kept) to the model in one
    /// shot and take its pairs verbatim.
    Naive,
}

impl std::str::FromStr for EngineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<EngineMode> {
        match s {
            "agent" => Ok(EngineMode::Agent),
            "deterministic" => Ok(EngineMode::Deterministic),
            "naive" => Ok(EngineMode::Naive),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected agent, deterministic, or naive)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WireOptions {
    pub mode: EngineMode,
    pub max_iterations: u32,
    pub votes: u32,
    pub weights: ScoreWeights,
    pub backoff: Duration,
}

impl Default for WireOptions {
    fn default() -> Self {
        WireOptions {
            mode: EngineMode::Deterministic,
            max_iterations: 2,
            votes: 5,
            weights: ScoreWeights::default(),
            backoff: Duration::from_millis(250),
        }
    }
}

/// Parsed and indexed inputs for one wiring instance.
pub struct WiringTask {
    /// Target text as given, markers included.
    pub original_text: String,
    pub unit: SourceUnit,
    pub project_units: Vec<SourceUnit>,
    pub table: SymbolTable,
    pub region: AdaptationRegion,
    pub stubs: Option<StubLibrary>,
}

impl WiringTask {
    pub fn prepare(
        target_text: &str,
        target_path: &str,
        project_files: &[(String, String)],
        stubs: Option<StubLibrary>,
    ) -> Result<WiringTask> {
        let (stripped, span) = extract_region(target_text)?;
        let unit = parse_unit(&stripped, target_path);
        let project_units: Vec<SourceUnit> = project_files
            .iter()
            .map(|(path, text)| parse_unit(text, path))
            .collect();
        let table = build_symbol_table(&unit, &project_units, stubs.as_ref());
        let region = AdaptationRegion::locate(&unit, span)?;
        Ok(WiringTask {
            original_text: target_text.to_string(),
            unit,
            project_units,
            table,
            region,
            stubs,
        })
    }
}

/// Read `*.java` files under a project directory, excluding the target file.
pub fn discover_project_files(
    project_dir: &Path,
    target: Option<&Path>,
) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let target = target.and_then(|t| t.canonicalize().ok());
    for entry in walkdir::WalkDir::new(project_dir)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
    {
        if !entry.file_type().is_file()
            || entry.path().extension().and_then(|e| e.to_str()) != Some("java")
        {
            continue;
        }
        if let Some(t) = &target {
            if entry.path().canonicalize().ok().as_deref() == Some(t) {
                continue;
            }
        }
        let bytes = std::fs::read(entry.path())
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", entry.path().display())))?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::Input(format!("{} is not UTF-8: {e}", entry.path().display())))?;
        out.push((entry.path().display().to_string(), text));
    }
    Ok(out)
}

/// Read one source file as UTF-8.
pub fn read_source(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    String::from_utf8(bytes)
        .map_err(|e| Error::Input(format!("{} is not UTF-8: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct WireOutcome {
    pub recommendation: Recommendation,
    pub new_text: String,
    pub diff: String,
    pub trace: Vec<TraceRecord>,
    pub ledger: Ledger,
    pub degraded: bool,
    /// Mapped element names that still fail to resolve after the edit; empty
    /// on a sound run.
    pub residual_unresolved: Vec<String>,
    /// Member-call substitutions may need imports the edit does not add.
    pub warnings: Vec<String>,
}

/// Run the pipeline on a prepared task.
pub fn run_task(
    task: &WiringTask,
    opts: &WireOptions,
    model: Option<&dyn ChatModel>,
) -> Result<WireOutcome> {
    let run_opts = RunOptions {
        votes: opts.votes,
        weights: opts.weights,
        backoff: opts.backoff,
    };

    let (recommendation, trace, ledger, degraded) = match opts.mode {
        EngineMode::Deterministic => {
            let mut session =
                init_session(&task.unit, &task.table, &task.region, opts.max_iterations);
            let rec = session.run_deterministic(&opts.weights);
            (rec, session.trace, session.ledger, session.degraded)
        }
        EngineMode::Agent => {
            let model = model
                .ok_or_else(|| Error::Config("agent mode needs a configured model".to_string()))?;
            let mut session =
                init_session(&task.unit, &task.table, &task.region, opts.max_iterations);
            let rec = session.run(model, &run_opts);
            (rec, session.trace, session.ledger, session.degraded)
        }
        EngineMode::Naive => {
            let model = model
                .ok_or_else(|| Error::Config("naive mode needs a configured model".to_string()))?;
            naive_wire(task, model, opts)?
        }
    };

    let script = plan_edits(&task.unit, &recommendation)?;
    let outcome = apply_edits(&task.unit, &script)?;
    let residual_unresolved = verify_resolution(task, &script, &outcome.text, &recommendation);
    let warnings = recommendation
        .pairs
        .iter()
        .filter(|p| p.chosen.kind == CandidateKind::MemberCall)
        .map(|p| {
            format!(
                "substituted `{}` with `{}`; an import for {} may be needed",
                p.element.name,
                p.chosen.name,
                p.chosen
                    .member
                    .as_ref()
                    .map(|m| m.class_name.as_str())
                    .unwrap_or("its class")
            )
        })
        .collect();

    Ok(WireOutcome {
        recommendation,
        new_text: outcome.text,
        diff: outcome.diff,
        trace,
        ledger,
        degraded,
        residual_unresolved,
        warnings,
    })
}

/// Convenience entry: prepare and run against files on disk.
pub fn wire_file(
    target: &Path,
    project_dir: Option<&Path>,
    stubs_path: Option<&Path>,
    opts: &WireOptions,
    model: Option<&dyn ChatModel>,
) -> Result<WireOutcome> {
    let target_text = read_source(target)?;
    let project_files = match project_dir {
        Some(dir) => discover_project_files(dir, Some(target))?,
        None => Vec::new(),
    };
    let stubs = stubs_path.map(StubLibrary::load).transpose()?;
    let task = WiringTask::prepare(
        &target_text,
        &target.display().to_string(),
        &project_files,
        stubs,
    )?;
    run_task(&task, opts, model)
}

/// Re-parse the edited text and re-run the locator over the relocated
/// region; names the recommendation mapped must no longer be unresolved.
fn verify_resolution(
    task: &WiringTask,
    script: &EditScript,
    new_text: &str,
    rec: &Recommendation,
) -> Vec<String> {
    let mapped: std::collections::BTreeSet<&str> =
        rec.pairs.iter().map(|p| p.element.name.as_str()).collect();
    if mapped.is_empty() {
        return Vec::new();
    }
    let new_unit = parse_unit(new_text, &task.unit.path);
    let new_table = build_symbol_table(&new_unit, &task.project_units, task.stubs.as_ref());
    let new_span = script.map_span(task.region.span);
    let Ok(new_region) = AdaptationRegion::locate(&new_unit, new_span) else {
        return mapped.iter().map(|s| s.to_string()).collect();
    };
    identify_unresolved_elements(&new_unit, &new_table, &new_region)
        .into_iter()
        .filter(|e| mapped.contains(e.name.as_str()))
        .map(|e| e.name)
        .collect()
}

const NAIVE_PROMPT: &str = "\
You are a senior Java development engineer. The class below contains a pasted \
code region delimited by the control tokens <start> and <end>. Some elements \
inside that region do not resolve in this context. Identify every unresolved \
element and, for each one, the existing context element that should replace \
it. Reply with a single JSON object of the form \
{\"wirings\": {\"<unresolved>\": \"<replacement>\"}} and no other text.";

/// Whole-class single-shot baseline. The model sees the original text with
/// markers; its answers are taken verbatim (no candidate validation).
fn naive_wire(
    task: &WiringTask,
    model: &dyn ChatModel,
    opts: &WireOptions,
) -> Result<(Recommendation, Vec<TraceRecord>, Ledger, bool)> {
    let prompt = format!("{NAIVE_PROMPT}\n\n{}", task.original_text);
    let messages = [ChatMessage::user(prompt)];
    let mut ledger = Ledger::default();
    let exchange = complete_with_retries(model, &messages, opts.backoff)?;
    ledger.record(CallPurpose::Naive, &exchange);

    let elements = identify_unresolved_elements(&task.unit, &task.table, &task.region);
    let answers = crate::complete::parse_wirings(&exchange.response).unwrap_or_default();

    let mut pairs = Vec::new();
    let mut complete = true;
    for element in elements {
        match answers.get(&element.name) {
            Some(answer) => pairs.push(WiringPair {
                chosen: synthetic_candidate(answer),
                element,
                confidence: 1.0,
                supporting_facts: Vec::new(),
            }),
            None => complete = false,
        }
    }

    let trace = vec![TraceRecord {
        record: "naive".to_string(),
        state: "naive".to_string(),
        prompt_hash: String::new(),
        thought: String::new(),
        action: "naive_whole_class".to_string(),
        action_input: serde_json::json!({}),
        observation_digest: String::new(),
        tokens_in: exchange.tokens_in,
        tokens_out: exchange.tokens_out,
        ms: exchange.latency_ms,
    }];
    Ok((Recommendation { pairs, complete }, trace, ledger, false))
}

fn synthetic_candidate(name: &str) -> Candidate {
    Candidate {
        name: name.trim().to_string(),
        kind: if name.contains('(') {
            CandidateKind::MemberCall
        } else {
            CandidateKind::Field
        },
        type_ref: TypeRef::named("var"),
        decl_span: None,
        usage_count: 0,
        distance_to_region: None,
        member: None,
    }
}

/// Serialize a trace to its file form.
pub fn trace_to_string(trace: &[TraceRecord]) -> String {
    let mut s = render_trace(trace);
    if !s.is_empty() {
        s.push('\n');
    }
    s
}
