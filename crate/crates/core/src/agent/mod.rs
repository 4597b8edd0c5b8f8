//! Agent core: the three-state machine, dynamic prompt, toolkit dispatch,
//! tool memory, and the pilot loop that drives a chat model (or a scripted
//! stand-in) from located elements to a final recommendation.

mod prompt;
mod session;
mod tools;

pub use prompt::PromptDocument;
pub use session::render_trace;
pub use session::{
    init_session, AgentSession, ElementFacts, Fact, GatheredFacts, RunOptions, TraceRecord,
};
pub(crate) use tools::repair_json_candidates;
pub use tools::{parse_action, tool_names_for, tool_spec, Action, ParamSpec, ToolSpec, TOOLS};

use serde::{Deserialize, Serialize};

/// Control states over tool availability. `Initial` runs the locator and the
/// baseline collectors automatically; `InsufficientContext` is the
/// exploration loop; `SufficientContext` only completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentState {
    Initial,
    InsufficientContext,
    SufficientContext,
}

impl std::fmt::Display for AgentState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentState::Initial => write!(f, "initial"),
            AgentState::InsufficientContext => write!(f, "insufficient-context"),
            AgentState::SufficientContext => write!(f, "sufficient-context"),
        }
    }
}

/// Model-call budget. Each model decision request consumes one iteration;
/// the completion call is excluded. Exhaustion forces the sufficient state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_iterations: u32,
    pub iterations_used: u32,
}

impl Budget {
    pub fn new(max_iterations: u32) -> Budget {
        Budget {
            max_iterations: max_iterations.max(1),
            iterations_used: 0,
        }
    }

    pub fn exhausted(&self) -> bool {
        self.iterations_used >= self.max_iterations
    }

    /// Consume one iteration; false when the budget is already spent.
    pub fn try_consume(&mut self) -> bool {
        if self.exhausted() {
            return false;
        }
        self.iterations_used += 1;
        true
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(2)
    }
}

/// One parsed-and-dispatched model action with its observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInvocation {
    pub thought: String,
    pub action: String,
    pub action_input: serde_json::Value,
    pub observation: String,
    pub ok: bool,
    /// True when the observation was replayed from tool memory instead of
    /// re-executing.
    pub replayed: bool,
}

/// Memory of executed (action, canonicalized input) pairs and their
/// observations; repeats replay instead of re-executing.
#[derive(Debug, Clone, Default)]
pub struct ToolMemory {
    entries: std::collections::BTreeMap<String, String>,
}

impl ToolMemory {
    pub fn key(action: &str, input: &serde_json::Value) -> String {
        format!("{action}\u{1}{}", canonical_json(input))
    }

    pub fn lookup(&self, action: &str, input: &serde_json::Value) -> Option<&String> {
        self.entries.get(&Self::key(action, input))
    }

    pub fn store(&mut self, action: &str, input: &serde_json::Value, observation: String) {
        self.entries.insert(Self::key(action, input), observation);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// JSON serialization with object keys sorted at every level, so memory keys
/// do not depend on argument order.
pub fn canonical_json(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let inner: Vec<String> = keys
                .into_iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        serde_json::to_string(k).unwrap_or_default(),
                        canonical_json(&map[k])
                    )
                })
                .collect();
            format!("{{{}}}", inner.join(","))
        }
        serde_json::Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", inner.join(","))
        }
        other => serde_json::to_string(other).unwrap_or_default(),
    }
}
