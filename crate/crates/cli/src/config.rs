//! Settings resolution: command-line flags take precedence over the config
//! file, which takes precedence over built-in defaults. The environment
//! overrides nothing except the API key itself, whose variable name is part
//! of the configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use codewire::complete::ScoreWeights;
use codewire::llm::ModelConfig;
use codewire::wire::EngineMode;
use codewire::{Error, Result};

#[derive(Debug, Clone)]
pub struct Settings {
    pub mode: EngineMode,
    pub model: ModelConfig,
    pub max_iterations: u32,
    pub runs: u32,
    pub weights: ScoreWeights,
    pub stubs: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub in_place: bool,
    pub json: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            mode: EngineMode::Deterministic,
            model: ModelConfig::default(),
            max_iterations: 2,
            runs: 5,
            weights: ScoreWeights::default(),
            stubs: None,
            trace: None,
            in_place: false,
            json: false,
        }
    }
}

/// Optional per-flag overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub model: Option<String>,
    pub endpoint: Option<String>,
    pub votes: Option<u32>,
    pub max_iter: Option<u32>,
    pub runs: Option<u32>,
    pub stubs: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub in_place: bool,
    pub json: bool,
}

/// One flat `key = value` per line; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!(
            "config key `{key}`: bad boolean `{other}`"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("config key `{key}`: bad number `{value}`")))
}

pub fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<Settings> {
    let mut settings = Settings::default();

    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        apply_file(&mut settings, &parse_config_file(&text)?)?;
    }
    apply_overrides(&mut settings, overrides)?;
    Ok(settings)
}

fn apply_file(s: &mut Settings, map: &BTreeMap<String, String>) -> Result<()> {
    for (key, value) in map {
        match key.as_str() {
            "mode" => s.mode = value.parse()?,
            "endpoint" => s.model.endpoint = value.clone(),
            "model" => s.model.model = value.clone(),
            "api_key_env" => s.model.api_key_env = value.clone(),
            "temperature" => s.model.temperature = parse_num(key, value)?,
            "max_output_tokens" => s.model.max_output_tokens = parse_num(key, value)?,
            "timeout_secs" => s.model.timeout_secs = parse_num(key, value)?,
            "retry_backoff_ms" => s.model.retry_backoff_ms = parse_num(key, value)?,
            "votes" => s.model.votes = parse_num(key, value)?,
            "max_iterations" => s.max_iterations = parse_num(key, value)?,
            "runs" => s.runs = parse_num(key, value)?,
            "stubs" => s.stubs = Some(PathBuf::from(value)),
            "trace" => s.trace = Some(PathBuf::from(value)),
            "in_place" => s.in_place = parse_bool(key, value)?,
            "json" => s.json = parse_bool(key, value)?,
            "w_similarity" => s.weights.similarity = parse_num(key, value)?,
            "w_unused" => s.weights.unused = parse_num(key, value)?,
            "w_identical_call" => s.weights.identical_call = parse_num(key, value)?,
            "w_proximity" => s.weights.proximity = parse_num(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key `{other}`")));
            }
        }
    }
    Ok(())
}

fn apply_overrides(s: &mut Settings, o: &Overrides) -> Result<()> {
    if let Some(mode) = &o.mode {
        s.mode = mode.parse()?;
    }
    if let Some(model) = &o.model {
        s.model.model = model.clone();
    }
    if let Some(endpoint) = &o.endpoint {
        s.model.endpoint = endpoint.clone();
    }
    if let Some(votes) = o.votes {
        if votes == 0 {
            return Err(Error::Config("--votes must be at least 1".to_string()));
        }
        s.model.votes = votes;
    }
    if let Some(max_iter) = o.max_iter {
        if max_iter == 0 {
            return Err(Error::Config("--max-iter must be at least 1".to_string()));
        }
        s.max_iterations = max_iter;
    }
    if let Some(runs) = o.runs {
        s.runs = runs;
    }
    if let Some(stubs) = &o.stubs {
        s.stubs = Some(stubs.clone());
    }
    if let Some(trace) = &o.trace {
        s.trace = Some(trace.clone());
    }
    s.in_place |= o.in_place;
    s.json |= o.json;
    Ok(())
}
