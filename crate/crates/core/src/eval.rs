//! Corpus runner and exact-match metrics.
//!
//! Counting is per pair: every ground-truth pair is one case. A pair counts
//! toward #Rec when the engine produced a chosen name for it and toward #EM
//! when that name string-equals the expected one. Pairs the engine left
//! unmapped reduce recall but never precision. In model modes each case runs
//! five times and the per-pair majority answer is scored; token and time
//! figures are per-run means so they stay comparable across modes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complete::normalize_vote;
use crate::error::{Error, Result};
use crate::llm::ChatModel;
use crate::locate::extract_region;
use crate::syntax::StubLibrary;
use crate::wire::{run_task, EngineMode, WireOptions, WiringTask};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthPair {
    pub unresolved: String,
    pub expected: String,
}

#[derive(Debug, Clone, Deserialize)]
struct RawCase {
    id: String,
    #[serde(default)]
    files: Vec<String>,
    target: String,
    ground_truth: Vec<GroundTruthPair>,
}

/// One corpus entry, loaded and validated.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub id: String,
    pub files: Vec<PathBuf>,
    pub target: PathBuf,
    pub target_text: String,
    pub ground_truth: Vec<GroundTruthPair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectedCase {
    pub id: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct LoadedCorpus {
    pub cases: Vec<CorpusCase>,
    pub rejected: Vec<RejectedCase>,
}

/// Load `cases.jsonl` under `root`. Schema or marker violations reject the
/// offending case with a reason; the remaining cases still load.
pub fn load_corpus(root: &Path) -> Result<LoadedCorpus> {
    let manifest = root.join("cases.jsonl");
    let text = std::fs::read_to_string(&manifest)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", manifest.display())))?;

    let mut cases = Vec::new();
    let mut rejected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawCase = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RejectedCase {
                    id: format!("line {}", lineno + 1),
                    reason: format!("schema violation: {e}"),
                });
                continue;
            }
        };
        match validate_case(root, raw) {
            Ok(case) => cases.push(case),
            Err((id, reason)) => rejected.push(RejectedCase { id, reason }),
        }
    }
    Ok(LoadedCorpus { cases, rejected })
}

fn validate_case(root: &Path, raw: RawCase) -> std::result::Result<CorpusCase, (String, String)> {
    let fail = |reason: String| (raw.id.clone(), reason);
    if raw.id.is_empty() || raw.id.contains(',') || raw.id.contains('"') {
        return Err(fail(
            "id must be non-empty without commas or quotes".to_string(),
        ));
    }
    let target = root.join(&raw.target);
    let target_text = std::fs::read_to_string(&target)
        .map_err(|e| fail(format!("cannot read target {}: {e}", target.display())))?;
    if let Err(e) = extract_region(&target_text) {
        return Err(fail(format!("marker violation: {e}")));
    }
    let mut unresolved_seen = std::collections::BTreeSet::new();
    let mut expected_seen = std::collections::BTreeSet::new();
    for pair in &raw.ground_truth {
        if !unresolved_seen.insert(pair.unresolved.clone()) {
            return Err(fail(format!(
                "duplicate unresolved name `{}` breaks injectivity",
                pair.unresolved
            )));
        }
        if !expected_seen.insert(pair.expected.clone()) {
            return Err(fail(format!(
                "duplicate expected name `{}` breaks injectivity",
                pair.expected
            )));
        }
    }
    let files: Vec<PathBuf> = raw.files.iter().map(|f| root.join(f)).collect();
    for f in &files {
        if !f.is_file() {
            return Err(fail(format!("missing project file {}", f.display())));
        }
    }
    Ok(CorpusCase {
        id: raw.id,
        files,
        target,
        target_text,
        ground_truth: raw.ground_truth,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub pairs: usize,
    pub rec: usize,
    pub em: usize,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub total_tokens: u64,
    pub ms: u64,
    pub degraded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    pub recommendations: usize,
    pub exact_matches: usize,
    /// EM / Rec as a percentage; null when no recommendation was made.
    pub em_precision: Option<f64>,
    /// EM / Total as a percentage; null on an empty corpus.
    pub em_recall: Option<f64>,
    pub per_case: Vec<CaseRecord>,
}

/// Percentages from raw counts.
pub fn compute_metrics(em: usize, rec: usize, total: usize) -> (Option<f64>, Option<f64>) {
    let precision = (rec > 0).then(|| 100.0 * em as f64 / rec as f64);
    let recall = (total > 0).then(|| 100.0 * em as f64 / total as f64);
    (precision, recall)
}

pub fn summary_line(report: &MetricsReport) -> String {
    let fmt = |v: Option<f64>| match v {
        Some(p) => format!("{p:.1}%"),
        None => "n/a".to_string(),
    };
    format!(
        "EM={} Rec={} Total={} P={} R={}",
        report.exact_matches,
        report.recommendations,
        report.total,
        fmt(report.em_precision),
        fmt(report.em_recall)
    )
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub mode: EngineMode,
    /// Independent runs per case in model modes (deterministic always 1).
    pub runs: u32,
    pub wire: WireOptions,
    pub stubs: Option<StubLibrary>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mode: EngineMode::Deterministic,
            runs: 5,
            wire: WireOptions::default(),
            stubs: None,
        }
    }
}

/// Evaluate the corpus. Engine failures on a case score it as
/// no-recommendation and never abort the sweep.
pub fn evaluate(
    cases: &[CorpusCase],
    opts: &EvalOptions,
    model: Option<&dyn ChatModel>,
) -> MetricsReport {
    let mut per_case = Vec::new();
    let mut total = 0usize;
    let mut recommendations = 0usize;
    let mut exact_matches = 0usize;

    for case in cases {
        let record = evaluate_case(case, opts, model);
        total += record.pairs;
        recommendations += record.rec;
        exact_matches += record.em;
        per_case.push(record);
    }

    let (em_precision, em_recall) = compute_metrics(exact_matches, recommendations, total);
    MetricsReport {
        total,
        recommendations,
        exact_matches,
        em_precision,
        em_recall,
        per_case,
    }
}

fn evaluate_case(
    case: &CorpusCase,
    opts: &EvalOptions,
    model: Option<&dyn ChatModel>,
) -> CaseRecord {
    let runs = match opts.mode {
        EngineMode::Deterministic => 1,
        _ => opts.runs.max(1),
    };
    let mut wire_opts = opts.wire.clone();
    wire_opts.mode = opts.mode;

    // per ground-truth pair: votes over the runs' answers
    let mut votes: BTreeMap<&str, BTreeMap<String, (usize, usize, String)>> = BTreeMap::new();
    let mut tokens_in = 0u64;
    let mut tokens_out = 0u64;
    let mut ms = 0u64;
    let mut degraded = false;
    let mut completed_runs = 0u64;

    let project_files: Vec<(String, String)> = case
        .files
        .iter()
        .filter_map(|p| {
            std::fs::read_to_string(p)
                .ok()
                .map(|text| (p.display().to_string(), text))
        })
        .collect();

    for run_idx in 0..runs {
        let task = match WiringTask::prepare(
            &case.target_text,
            &case.target.display().to_string(),
            &project_files,
            opts.stubs.clone(),
        ) {
            Ok(t) => t,
            Err(_) => break, // validated at load; treat as engine failure
        };
        match run_task(&task, &wire_opts, model) {
            Ok(outcome) => {
                completed_runs += 1;
                tokens_in += outcome.ledger.tokens_in();
                tokens_out += outcome.ledger.tokens_out();
                ms += outcome.ledger.total_ms();
                degraded |= outcome.degraded;
                for pair in &case.ground_truth {
                    if let Some(chosen) = outcome.recommendation.chosen_for(&pair.unresolved) {
                        let entry = votes
                            .entry(pair.unresolved.as_str())
                            .or_default()
                            .entry(normalize_vote(chosen))
                            .or_insert((0, run_idx as usize, chosen.to_string()));
                        entry.0 += 1;
                    }
                }
            }
            Err(_) => {
                degraded = true;
            }
        }
    }

    let mut rec = 0usize;
    let mut em = 0usize;
    for pair in &case.ground_truth {
        let Some(tally) = votes.get(pair.unresolved.as_str()) else {
            continue;
        };
        // majority answer; ties resolved by earliest run
        let winner = tally
            .iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(_, (_, _, raw))| raw.clone());
        if let Some(chosen) = winner {
            rec += 1;
            if chosen == pair.expected {
                em += 1;
            }
        }
    }

    let divisor = completed_runs.max(1);
    CaseRecord {
        id: case.id.clone(),
        pairs: case.ground_truth.len(),
        rec,
        em,
        tokens_in: tokens_in / divisor,
        tokens_out: tokens_out / divisor,
        total_tokens: (tokens_in + tokens_out) / divisor,
        ms: ms / divisor,
        degraded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Render the report: JSON carries everything; CSV is one row per case for
/// distribution plotting.
pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).unwrap_or_default(),
        ReportFormat::Csv => {
            let mut out =
                String::from("id,pairs,rec,em,tokens_in,tokens_out,total_tokens,ms,degraded\n");
            for c in &report.per_case {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    c.id,
                    c.pairs,
                    c.rec,
                    c.em,
                    c.tokens_in,
                    c.tokens_out,
                    c.total_tokens,
                    c.ms,
                    c.degraded
                ));
            }
            out
        }
    }
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report, format))
        .map_err(|e| Error::Input(format!("cannot write report {}: {e}", path.display())))
}
