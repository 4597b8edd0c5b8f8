//! Agent session: gathered facts, tool dispatch, and the pilot loop.

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::prompt::PromptDocument;
use super::tools::{parse_action, tool_spec};
use super::{AgentState, Budget, ToolInvocation, ToolMemory};
use crate::collect::{self, Candidate, MemberUse, RoleHint, SimilarityScore};
use crate::complete::{deterministic_complete, execute_completion, Recommendation, ScoreWeights};
use crate::error::Error;
use crate::llm::{complete_with_retries, CallPurpose, ChatMessage, ChatModel, Ledger};
use crate::locate::{
    identify_unresolved_elements, AdaptationRegion, ElementKind, UnresolvedElement,
};
use crate::syntax::{SourceUnit, SymbolTable, TypeRef};

/// One recorded piece of gathered information, referenced by id from
/// recommendation provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fact {
    pub id: usize,
    pub tool: String,
    pub element: Option<String>,
    pub summary: String,
}

/// Facts tied to a single unresolved element.
#[derive(Debug, Clone)]
pub struct ElementFacts {
    pub element: UnresolvedElement,
    pub hint: RoleHint,
    /// Candidates beyond the available variables (member calls etc.).
    pub extra_candidates: Vec<Candidate>,
    /// Candidate names backed by an identical-call observation.
    pub identical_receivers: BTreeSet<String>,
    /// Ids of facts that mention this element.
    pub supporting: Vec<usize>,
}

/// Everything the session has learned so far.
#[derive(Debug, Clone, Default)]
pub struct GatheredFacts {
    pub available: Vec<Candidate>,
    pub elements: Vec<ElementFacts>,
    pub facts: Vec<Fact>,
}

impl GatheredFacts {
    pub fn add_fact(&mut self, tool: &str, element: Option<&str>, summary: String) -> usize {
        let id = self.facts.len() + 1;
        self.facts.push(Fact {
            id,
            tool: tool.to_string(),
            element: element.map(str::to_string),
            summary,
        });
        if let Some(name) = element {
            if let Some(ef) = self.element_mut(name) {
                ef.supporting.push(id);
            }
        }
        id
    }

    pub fn element(&self, name: &str) -> Option<&ElementFacts> {
        self.elements.iter().find(|e| e.element.name == name)
    }

    pub fn element_mut(&mut self, name: &str) -> Option<&mut ElementFacts> {
        self.elements.iter_mut().find(|e| e.element.name == name)
    }

    /// Candidate pool for one element: every available variable plus the
    /// element's extra candidates, deduplicated by render name.
    pub fn pool(&self, ef: &ElementFacts) -> Vec<Candidate> {
        let mut out = self.available.clone();
        for extra in &ef.extra_candidates {
            if !out.iter().any(|c| c.name == extra.name) {
                out.push(extra.clone());
            }
        }
        out
    }

    /// Type-filtered pool: reserve semantics against the element's expected
    /// type; the full pool when no expected type is known.
    pub fn compatible_pool(&self, ef: &ElementFacts) -> Vec<Candidate> {
        let pool = self.pool(ef);
        match &ef.hint.expected_type {
            Some(expected) => collect::reserve_type_compatible_ones(&pool, expected),
            None => pool,
        }
    }

    /// Sufficiency for one element: the expected type is known and some
    /// gathered candidate matches it with a known type. Opaque types never
    /// count, so exploration is not cut short by unknowns.
    pub fn strictly_satisfied(&self, ef: &ElementFacts) -> bool {
        let Some(expected) = &ef.hint.expected_type else {
            return false;
        };
        self.pool(ef)
            .iter()
            .any(|c| collect::strictly_compatible(&c.type_ref, expected))
    }

    pub fn all_strictly_satisfied(&self) -> bool {
        self.elements.iter().all(|ef| self.strictly_satisfied(ef))
    }
}

/// One line of the session trace file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub record: String,
    pub state: String,
    pub prompt_hash: String,
    pub thought: String,
    pub action: String,
    pub action_input: Value,
    pub observation_digest: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub ms: u64,
}

/// Knobs for the pilot loop and the completer.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub votes: u32,
    pub weights: ScoreWeights,
    pub backoff: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            votes: 5,
            weights: ScoreWeights::default(),
            backoff: Duration::from_millis(250),
        }
    }
}

pub struct AgentSession<'a> {
    pub unit: &'a SourceUnit,
    pub table: &'a SymbolTable,
    pub region: &'a AdaptationRegion,
    pub state: AgentState,
    pub facts: GatheredFacts,
    pub prompt: PromptDocument,
    pub memory: ToolMemory,
    pub budget: Budget,
    pub ledger: Ledger,
    pub trace: Vec<TraceRecord>,
    pub degraded: bool,
    /// Executed (not replayed) toolkit actions with the state at dispatch.
    pub executed_log: Vec<(String, AgentState)>,
    completion_requested: bool,
    malformed_streak: u32,
}

fn digest16(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hex::encode(&hash[..8])
}

/// Start a session: run the locator and the four initialization collectors
/// without any model call, then enter the exploration state (or go straight
/// to sufficient when the gathered facts already pin every element down).
pub fn init_session<'a>(
    unit: &'a SourceUnit,
    table: &'a SymbolTable,
    region: &'a AdaptationRegion,
    max_iterations: u32,
) -> AgentSession<'a> {
    let mut session = AgentSession {
        unit,
        table,
        region,
        state: AgentState::Initial,
        facts: GatheredFacts::default(),
        prompt: PromptDocument::new(AgentState::Initial),
        memory: ToolMemory::default(),
        budget: Budget::new(max_iterations),
        ledger: Ledger::default(),
        trace: Vec::new(),
        degraded: false,
        executed_log: Vec::new(),
        completion_requested: false,
        malformed_streak: 0,
    };

    let elements = identify_unresolved_elements(unit, table, region);
    session.facts.elements = elements
        .into_iter()
        .map(|element| ElementFacts {
            element,
            hint: RoleHint::default(),
            extra_candidates: Vec::new(),
            identical_receivers: BTreeSet::new(),
            supporting: Vec::new(),
        })
        .collect();

    session.auto_invoke("identify_unresolved_elements", serde_json::json!({}));

    if session.facts.elements.is_empty() {
        session.state = AgentState::SufficientContext;
        session.prompt.set_state(session.state);
        return session;
    }

    session.auto_invoke("get_available_variables", serde_json::json!({}));
    session.auto_invoke("get_unused_variables", serde_json::json!({}));
    let names: Vec<String> = session
        .facts
        .elements
        .iter()
        .map(|e| e.element.name.clone())
        .collect();
    for name in names {
        session.auto_invoke("is_argument", serde_json::json!({ "element": name }));
        session.auto_invoke("is_receiver", serde_json::json!({ "element": name }));
    }

    session.state = if session.facts.all_strictly_satisfied() {
        AgentState::SufficientContext
    } else {
        AgentState::InsufficientContext
    };
    session.prompt.set_state(session.state);
    session
}

impl<'a> AgentSession<'a> {
    pub fn completion_requested(&self) -> bool {
        self.completion_requested
    }

    /// Record a completion call in the ledger and trace.
    pub fn record_completion_call(&mut self, exchange: &crate::llm::ChatExchange) {
        self.ledger.record(CallPurpose::Completion, exchange);
        self.trace.push(TraceRecord {
            record: "completion".to_string(),
            state: self.state.to_string(),
            prompt_hash: digest16(
                &exchange
                    .request
                    .iter()
                    .map(|m| m.content.as_str())
                    .collect::<String>(),
            ),
            thought: String::new(),
            action: "execute_completion".to_string(),
            action_input: serde_json::json!({}),
            observation_digest: digest16(&exchange.response),
            tokens_in: exchange.tokens_in,
            tokens_out: exchange.tokens_out,
            ms: exchange.latency_ms,
        });
    }

    fn auto_invoke(&mut self, action: &str, input: Value) {
        self.invoke_tool("automatic initialization".to_string(), action, input, None);
    }

    /// Parse one raw model reply and dispatch the action it carries.
    pub fn step(
        &mut self,
        model_output: &str,
        cost: Option<(u64, u64, u64)>,
    ) -> crate::Result<ToolInvocation> {
        match parse_action(model_output) {
            Ok(action) => {
                Ok(self.invoke_tool(action.thought, &action.action, action.action_input, cost))
            }
            Err(e) => {
                let (tokens_in, tokens_out, ms) = cost.unwrap_or_default();
                self.trace.push(TraceRecord {
                    record: "step".to_string(),
                    state: self.state.to_string(),
                    prompt_hash: digest16(&self.prompt.render()),
                    thought: String::new(),
                    action: "(malformed)".to_string(),
                    action_input: Value::String(model_output.chars().take(120).collect::<String>()),
                    observation_digest: digest16(model_output),
                    tokens_in,
                    tokens_out,
                    ms,
                });
                Err(e)
            }
        }
    }

    /// Dispatch one action through the toolkit: memory replay, availability
    /// and argument validation, isolated execution, observation recording.
    pub fn invoke_tool(
        &mut self,
        thought: String,
        action: &str,
        input: Value,
        cost: Option<(u64, u64, u64)>,
    ) -> ToolInvocation {
        let state_at_dispatch = self.state;
        let mut replayed = false;

        let (observation, ok) = if tool_spec(action).is_none() {
            (
                format!(
                    "unknown tool `{action}`; tools available in this state: {}",
                    super::tool_names_for(self.state).join(", ")
                ),
                false,
            )
        } else if let Some(prior) = self.memory.lookup(action, &input) {
            replayed = true;
            (prior.clone(), true)
        } else if action == "execute_completion" {
            self.completion_requested = true;
            (
                "completion requested; the completer runs next".to_string(),
                true,
            )
        } else if !tool_spec(action)
            .map(|s| s.states.contains(&self.state))
            .unwrap_or(false)
        {
            (
                format!(
                    "tool `{action}` is not available in state {}; available: {}",
                    self.state,
                    super::tool_names_for(self.state).join(", ")
                ),
                false,
            )
        } else if let Some(missing) = self.missing_required_params(action, &input) {
            (missing, false)
        } else {
            // isolated execution: a tool failure or panic becomes an
            // observation, never a crash of the session
            let outcome =
                std::panic::catch_unwind(AssertUnwindSafe(|| self.execute(action, &input)));
            let (obs, ok) = match outcome {
                Ok(Ok(obs)) => (obs, true),
                Ok(Err(e)) => (format!("error: {e}"), false),
                Err(_) => (
                    "internal error: tool execution panicked; state preserved".to_string(),
                    false,
                ),
            };
            self.memory.store(action, &input, obs.clone());
            self.executed_log
                .push((action.to_string(), state_at_dispatch));
            (obs, ok)
        };

        let invocation = ToolInvocation {
            thought,
            action: action.to_string(),
            action_input: input,
            observation,
            ok,
            replayed,
        };
        self.push_gathered(&invocation);
        let (tokens_in, tokens_out, ms) = cost.unwrap_or_default();
        self.trace.push(TraceRecord {
            record: if cost.is_some() { "step" } else { "auto" }.to_string(),
            state: state_at_dispatch.to_string(),
            prompt_hash: digest16(&self.prompt.render()),
            thought: invocation.thought.clone(),
            action: invocation.action.clone(),
            action_input: invocation.action_input.clone(),
            observation_digest: digest16(&invocation.observation),
            tokens_in,
            tokens_out,
            ms,
        });
        invocation
    }

    fn push_gathered(&mut self, invocation: &ToolInvocation) {
        self.prompt.push_gathered(format!(
            "Thought: {}\nAction: {}\nAction input: {}\nObservation: {}{}",
            invocation.thought,
            invocation.action,
            invocation.action_input,
            if invocation.replayed {
                "(replayed) "
            } else {
                ""
            },
            invocation.observation
        ));
    }

    fn missing_required_params(&self, action: &str, input: &Value) -> Option<String> {
        let spec = tool_spec(action)?;
        let obj = input.as_object();
        for param in spec.params.iter().filter(|p| p.required) {
            let present = obj
                .map(|m| m.get(param.name).map(|v| !v.is_null()).unwrap_or(false))
                .unwrap_or(false);
            if !present {
                return Some(format!(
                    "missing required argument `{}` for `{}`: {}",
                    param.name, action, param.description
                ));
            }
        }
        None
    }

    /// State transition: the model selected completion, the budget ran out,
    /// or every element already has a known-type-compatible candidate.
    pub fn transition(&self) -> AgentState {
        if self.completion_requested || self.budget.exhausted() {
            return AgentState::SufficientContext;
        }
        if !self.facts.elements.is_empty() && self.facts.all_strictly_satisfied() {
            return AgentState::SufficientContext;
        }
        match self.state {
            AgentState::Initial => AgentState::InsufficientContext,
            s => s,
        }
    }

    fn set_state(&mut self, state: AgentState) {
        if self.state != state {
            self.state = state;
            self.prompt.set_state(state);
        }
    }

    /// The pilot loop: render prompt, ask the model, dispatch, transition;
    /// then run the completer once. Transport failures degrade to the
    /// deterministic completer after bounded retries.
    pub fn run(&mut self, model: &dyn ChatModel, opts: &RunOptions) -> Recommendation {
        if self.facts.elements.is_empty() {
            return Recommendation::empty();
        }

        while self.state != AgentState::SufficientContext {
            if !self.budget.try_consume() {
                self.set_state(AgentState::SufficientContext);
                break;
            }
            let rendered = self.prompt.render();
            let messages = [ChatMessage::user(rendered)];
            let exchange = match complete_with_retries(model, &messages, opts.backoff) {
                Ok(e) => e,
                Err(_) => {
                    self.degraded = true;
                    break;
                }
            };
            self.ledger.record(CallPurpose::Decision, &exchange);
            let cost = Some((exchange.tokens_in, exchange.tokens_out, exchange.latency_ms));
            match self.step(&exchange.response, cost) {
                Ok(_) => self.malformed_streak = 0,
                Err(_) => {
                    self.malformed_streak += 1;
                    if self.malformed_streak > 2 {
                        self.set_state(AgentState::SufficientContext);
                        break;
                    }
                }
            }
            let next = self.transition();
            self.set_state(next);
        }

        if self.degraded {
            return deterministic_complete(self, &opts.weights);
        }
        self.set_state(AgentState::SufficientContext);
        match execute_completion(self, model, opts) {
            Ok(rec) => rec,
            Err(_) => {
                self.degraded = true;
                deterministic_complete(self, &opts.weights)
            }
        }
    }

    /// Offline driver: a fixed exploration policy over the same toolkit,
    /// then the deterministic completer. No model calls.
    pub fn run_deterministic(&mut self, weights: &ScoreWeights) -> Recommendation {
        if self.facts.elements.is_empty() {
            return Recommendation::empty();
        }
        if self.state == AgentState::InsufficientContext {
            let elements: Vec<(String, Vec<MemberUse>, Option<TypeRef>)> = self
                .facts
                .elements
                .iter()
                .map(|ef| {
                    (
                        ef.element.name.clone(),
                        ef.hint.invoked_members.clone(),
                        ef.hint.expected_type.clone(),
                    )
                })
                .collect();
            for (name, members, expected) in elements {
                for member in members {
                    self.invoke_tool(
                        "deterministic exploration".to_string(),
                        "retrieve_identical_function_call",
                        serde_json::json!({ "member": member.name, "arity": member.arity }),
                        None,
                    );
                }
                if let Some(expected) = expected {
                    self.invoke_tool(
                        "deterministic exploration".to_string(),
                        "reserve_type_compatible_ones",
                        serde_json::json!({ "element": name }),
                        None,
                    );
                    let satisfied = self
                        .facts
                        .element(&name)
                        .map(|ef| self.facts.strictly_satisfied(ef))
                        .unwrap_or(false);
                    if !satisfied && expected.known {
                        self.invoke_tool(
                            "deterministic exploration".to_string(),
                            "get_method_names",
                            serde_json::json!({
                                "class_name": expected.simple_name(),
                                "element": name
                            }),
                            None,
                        );
                    }
                }
                self.invoke_tool(
                    "deterministic exploration".to_string(),
                    "sort_by_literal_similarity",
                    serde_json::json!({ "element": name }),
                    None,
                );
            }
        }
        self.set_state(AgentState::SufficientContext);
        deterministic_complete(self, weights)
    }

    // ---- tool implementations ------------------------------------------

    fn execute(&mut self, action: &str, input: &Value) -> crate::Result<String> {
        match action {
            "identify_unresolved_elements" => Ok(self.obs_locator()),
            "get_available_variables" => Ok(self.obs_available()),
            "get_unused_variables" => Ok(self.obs_unused()),
            "is_argument" => self.obs_is_argument(input),
            "is_receiver" => self.obs_is_receiver(input),
            "retrieve_identical_function_call" => self.obs_identical_call(input),
            "reserve_type_compatible_ones" => self.obs_reserve(input),
            "sort_by_literal_similarity" => self.obs_similarity(input),
            "get_method_names" => self.obs_method_names(input),
            other => Err(Error::UnknownTool(other.to_string())),
        }
    }

    fn element_index(&self, input: &Value) -> Result<usize, String> {
        let names: Vec<&str> = self
            .facts
            .elements
            .iter()
            .map(|e| e.element.name.as_str())
            .collect();
        match input.get("element").and_then(Value::as_str) {
            Some(name) => self
                .facts
                .elements
                .iter()
                .position(|e| e.element.name == name)
                .ok_or_else(|| {
                    format!(
                        "no unresolved element named `{name}`; elements: {}",
                        names.join(", ")
                    )
                }),
            None if self.facts.elements.len() == 1 => Ok(0),
            None => Err(format!(
                "argument `element` is needed when several elements exist: {}",
                names.join(", ")
            )),
        }
    }

    fn fmt_candidate(c: &Candidate) -> String {
        match c.kind {
            collect::CandidateKind::MemberCall => {
                format!("{}: {} (member call)", c.name, c.type_ref)
            }
            kind => format!(
                "{}: {} ({kind}, {} usage{})",
                c.name,
                c.type_ref,
                c.usage_count,
                if c.usage_count == 1 { "" } else { "s" }
            ),
        }
    }

    fn obs_locator(&mut self) -> String {
        let method = self.region.enclosing_method(self.unit);
        let method_text = self.unit.snippet(method.span);
        let start_line = self.unit.line_col(self.region.span.start).line;
        let end_line = self
            .unit
            .line_col(self.region.span.end.max(self.region.span.start))
            .line;

        if self.facts.elements.is_empty() {
            let summary = "every name in the region resolves; nothing to wire".to_string();
            self.facts
                .add_fact("identify_unresolved_elements", None, summary.clone());
            return summary;
        }

        let mut lines = Vec::new();
        for ef in &self.facts.elements {
            let kind = match ef.element.kind {
                ElementKind::Identifier => "identifier",
                ElementKind::ReceiverExpression => "receiver expression",
            };
            let at: Vec<String> = ef
                .element
                .references
                .iter()
                .map(|s| format!("line {}", self.unit.line_col(s.start).line))
                .collect();
            lines.push(format!(
                "- `{}` ({kind}), {} reference{} at {}",
                ef.element.name,
                ef.element.references.len(),
                if ef.element.references.len() == 1 {
                    ""
                } else {
                    "s"
                },
                at.join(", ")
            ));
        }
        let summary = format!(
            "{} unresolved element{} in the region (lines {start_line}-{end_line}):\n{}",
            self.facts.elements.len(),
            if self.facts.elements.len() == 1 {
                ""
            } else {
                "s"
            },
            lines.join("\n")
        );
        self.facts
            .add_fact("identify_unresolved_elements", None, summary.clone());
        format!("enclosing method:\n{method_text}\n\n{summary}")
    }

    fn obs_available(&mut self) -> String {
        let available = collect::get_available_variables(self.unit, self.table, self.region);
        self.facts.available = available;
        let obs = if self.facts.available.is_empty() {
            "no variables are visible before the region".to_string()
        } else {
            format!(
                "{} variable{} visible before the region:\n{}",
                self.facts.available.len(),
                if self.facts.available.len() == 1 {
                    " is"
                } else {
                    "s are"
                },
                self.facts
                    .available
                    .iter()
                    .map(|c| format!("- {}", Self::fmt_candidate(c)))
                    .collect::<Vec<_>>()
                    .join("\n")
            )
        };
        self.facts
            .add_fact("get_available_variables", None, obs.clone());
        obs
    }

    fn obs_unused(&mut self) -> String {
        let unused: Vec<&Candidate> = self
            .facts
            .available
            .iter()
            .filter(|c| c.usage_count == 0)
            .collect();
        let obs = if unused.is_empty() {
            "every visible variable already has references in the context".to_string()
        } else {
            format!(
                "unused variables (no reference in the visible context): {}",
                unused
                    .iter()
                    .map(|c| format!("{}: {}", c.name, c.type_ref))
                    .collect::<Vec<_>>()
                    .join("; ")
            )
        };
        self.facts
            .add_fact("get_unused_variables", None, obs.clone());
        obs
    }

    fn obs_is_argument(&mut self, input: &Value) -> crate::Result<String> {
        let idx = match self.element_index(input) {
            Ok(i) => i,
            Err(msg) => return Ok(msg),
        };
        let element = self.facts.elements[idx].element.clone();
        let hint = collect::is_argument(self.unit, self.table, &element);
        let obs = if hint.is_argument {
            match (&hint.expected_type, &hint.formal_parameter_name) {
                (Some(ty), Some(formal)) => format!(
                    "`{}` is a method argument; the matching formal parameter `{formal}` has type {ty}, so the expected type is {ty}",
                    element.name
                ),
                (Some(ty), None) => format!(
                    "`{}` is a method argument with expected type {ty}",
                    element.name
                ),
                _ => format!(
                    "`{}` is a method argument, but the callee signature is unknown; no expected type inferred",
                    element.name
                ),
            }
        } else {
            format!(
                "`{}` is not an argument of any method invocation",
                element.name
            )
        };
        let merged = self.facts.elements[idx].hint.clone().merge(hint);
        self.facts.elements[idx].hint = merged;
        self.facts
            .add_fact("is_argument", Some(&element.name), obs.clone());
        Ok(obs)
    }

    fn obs_is_receiver(&mut self, input: &Value) -> crate::Result<String> {
        let idx = match self.element_index(input) {
            Ok(i) => i,
            Err(msg) => return Ok(msg),
        };
        let element = self.facts.elements[idx].element.clone();
        let hint = collect::is_receiver(self.unit, &element);
        let obs = if hint.is_receiver {
            format!(
                "`{}` is a receiver; invoked members: {}",
                element.name,
                hint.invoked_members
                    .iter()
                    .map(|m| format!(
                        "{} ({} arg{})",
                        m.name,
                        m.arity,
                        if m.arity == 1 { "" } else { "s" }
                    ))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        } else {
            format!(
                "`{}` is not the receiver of any method invocation",
                element.name
            )
        };
        let merged = self.facts.elements[idx].hint.clone().merge(hint);
        self.facts.elements[idx].hint = merged;
        self.facts
            .add_fact("is_receiver", Some(&element.name), obs.clone());
        Ok(obs)
    }

    fn obs_identical_call(&mut self, input: &Value) -> crate::Result<String> {
        let member_name = input
            .get("member")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        let arity = input
            .get("arity")
            .and_then(Value::as_u64)
            .map(|a| a as usize)
            .or_else(|| {
                self.facts
                    .elements
                    .iter()
                    .flat_map(|e| e.hint.invoked_members.iter())
                    .find(|m| m.name == member_name)
                    .map(|m| m.arity)
            });
        let Some(arity) = arity else {
            return Ok(format!(
                "no recorded call of `{member_name}` to take the arity from; pass `arity` or run is_receiver first"
            ));
        };
        let member = MemberUse {
            name: member_name.clone(),
            arity,
        };
        let found =
            collect::retrieve_identical_function_call(self.unit, self.table, self.region, &member);

        // attribute the evidence to the elements that invoke this member
        let mut attributed: Vec<usize> = self
            .facts
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.hint.invoked_members.iter().any(|m| m.name == member.name))
            .map(|(i, _)| i)
            .collect();
        if attributed.is_empty() && self.facts.elements.len() == 1 {
            attributed.push(0);
        }
        for idx in &attributed {
            for c in &found {
                self.facts.elements[*idx]
                    .identical_receivers
                    .insert(c.name.clone());
            }
        }

        let obs = if found.is_empty() {
            format!("no other receiver of {member_name}/{arity} in the file")
        } else {
            format!(
                "context receivers of {member_name}/{arity}: {}",
                found
                    .iter()
                    .map(Self::fmt_candidate)
                    .collect::<Vec<_>>()
                    .join("; ")
            )
        };
        let element_name = attributed
            .first()
            .map(|i| self.facts.elements[*i].element.name.clone());
        self.facts.add_fact(
            "retrieve_identical_function_call",
            element_name.as_deref(),
            obs.clone(),
        );
        Ok(obs)
    }

    fn obs_reserve(&mut self, input: &Value) -> crate::Result<String> {
        let idx = match self.element_index(input) {
            Ok(i) => i,
            Err(msg) => return Ok(msg),
        };
        let ef = &self.facts.elements[idx];
        let name = ef.element.name.clone();
        let obs = match ef.hint.expected_type.clone() {
            None => format!(
                "`{name}` has no inferred expected type; every gathered candidate stays eligible"
            ),
            Some(expected) => {
                let kept = collect::reserve_type_compatible_ones(&self.facts.pool(ef), &expected);
                if kept.is_empty() {
                    format!(
                        "no gathered candidate is type-compatible with {expected}; consider get_method_names on class {}",
                        expected.simple_name()
                    )
                } else {
                    format!(
                        "type-compatible candidates for `{name}` (expected {expected}): {}",
                        kept.iter()
                            .map(Self::fmt_candidate)
                            .collect::<Vec<_>>()
                            .join("; ")
                    )
                }
            }
        };
        self.facts
            .add_fact("reserve_type_compatible_ones", Some(&name), obs.clone());
        Ok(obs)
    }

    fn obs_similarity(&mut self, input: &Value) -> crate::Result<String> {
        let idx = match self.element_index(input) {
            Ok(i) => i,
            Err(msg) => return Ok(msg),
        };
        let ef = &self.facts.elements[idx];
        let name = ef.element.name.clone();
        let target = input
            .get("target")
            .and_then(Value::as_str)
            .unwrap_or(&name)
            .to_string();
        let ranked: Vec<SimilarityScore> =
            collect::sort_by_literal_similarity(&self.facts.pool(ef), &target);
        let obs = if ranked.is_empty() {
            format!("no candidates to rank against `{target}`")
        } else {
            format!(
                "similarity to `{target}` (edit distance, best first): {}",
                ranked
                    .iter()
                    .map(|s| format!("{} ({})", s.candidate.name, s.levenshtein))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        self.facts
            .add_fact("sort_by_literal_similarity", Some(&name), obs.clone());
        Ok(obs)
    }

    fn obs_method_names(&mut self, input: &Value) -> crate::Result<String> {
        let class_name = input
            .get("class_name")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        let idx = match self.element_index(input) {
            Ok(i) => i,
            Err(msg) => return Ok(msg),
        };
        let name = self.facts.elements[idx].element.name.clone();
        let Some(expected) = self.facts.elements[idx].hint.expected_type.clone() else {
            return Ok(format!(
                "no expected type recorded for `{name}`; run is_argument first"
            ));
        };
        let found =
            collect::get_method_names(self.unit, self.table, self.region, &class_name, &expected)?;
        for c in &found {
            if !self.facts.elements[idx]
                .extra_candidates
                .iter()
                .any(|e| e.name == c.name)
            {
                self.facts.elements[idx].extra_candidates.push(c.clone());
            }
        }
        let obs = if found.is_empty() {
            format!("class {class_name} has no zero-argument member returning {expected}")
        } else {
            format!(
                "members of {class_name} returning {expected}: {}",
                found
                    .iter()
                    .map(|c| {
                        let is_static = c
                            .member
                            .as_ref()
                            .map(|m| m.member.is_static)
                            .unwrap_or(false);
                        format!("{}{}", c.name, if is_static { " (static)" } else { "" })
                    })
                    .collect::<Vec<_>>()
                    .join("; ")
            )
        };
        self.facts
            .add_fact("get_method_names", Some(&name), obs.clone());
        Ok(obs)
    }
}

/// Serialize the trace as one JSON record per line.
pub fn render_trace(trace: &[TraceRecord]) -> String {
    trace
        .iter()
        .map(|r| serde_json::to_string(r).unwrap_or_default())
        .collect::<Vec<_>>()
        .join("\n")
}
