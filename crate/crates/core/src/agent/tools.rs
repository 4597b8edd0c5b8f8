//! Toolkit registry and model-output parsing.

use serde_json::Value;

use super::AgentState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub required: bool,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    pub states: &'static [AgentState],
}

const ELEMENT_PARAM: ParamSpec = ParamSpec {
    name: "element",
    required: false,
    description: "name of the unresolved element (defaults to the only one)",
};

/// The agent toolkit: locator, eight collectors, and the completer.
pub const TOOLS: &[ToolSpec] = &[
    ToolSpec {
        name: "identify_unresolved_elements",
        description: "Analyze resolution failures to identify the unresolved \
                      elements and every reference to them. Runs automatically.",
        params: &[],
        states: &[AgentState::Initial],
    },
    ToolSpec {
        name: "get_available_variables",
        description: "List the variables visible at the region: class fields, \
                      method parameters, and locals declared before it.",
        params: &[],
        states: &[AgentState::Initial],
    },
    ToolSpec {
        name: "get_unused_variables",
        description: "List visible variables with no reference anywhere in \
                      the surrounding context.",
        params: &[],
        states: &[AgentState::Initial],
    },
    ToolSpec {
        name: "is_argument",
        description: "Judge whether the unresolved element is an argument of \
                      a method invocation; a known callee yields the expected \
                      type and formal parameter name.",
        params: &[ELEMENT_PARAM],
        states: &[AgentState::Initial],
    },
    ToolSpec {
        name: "is_receiver",
        description: "Judge whether the unresolved element is the receiver of \
                      method invocations; reports the invoked members.",
        params: &[ELEMENT_PARAM],
        states: &[AgentState::Initial],
    },
    ToolSpec {
        name: "retrieve_identical_function_call",
        description: "Find context variables that receive an identical member \
                      call elsewhere in the file.",
        params: &[
            ParamSpec {
                name: "member",
                required: true,
                description: "the invoked member name to search for",
            },
            ParamSpec {
                name: "arity",
                required: false,
                description: "argument count (defaults to the recorded call)",
            },
        ],
        states: &[AgentState::InsufficientContext],
    },
    ToolSpec {
        name: "reserve_type_compatible_ones",
        description: "Keep only candidates type-compatible with the \
                      unresolved element's expected type.",
        params: &[ELEMENT_PARAM],
        states: &[AgentState::InsufficientContext],
    },
    ToolSpec {
        name: "sort_by_literal_similarity",
        description: "Rank the candidates by edit distance to the unresolved \
                      element's name.",
        params: &[
            ELEMENT_PARAM,
            ParamSpec {
                name: "target",
                required: false,
                description: "text to compare against (defaults to the element name)",
            },
        ],
        states: &[AgentState::InsufficientContext],
    },
    ToolSpec {
        name: "get_method_names",
        description: "List zero-argument members of the given class whose \
                      return type matches the element's expected type.",
        params: &[
            ParamSpec {
                name: "class_name",
                required: true,
                description: "class to search",
            },
            ELEMENT_PARAM,
        ],
        states: &[AgentState::InsufficientContext],
    },
    ToolSpec {
        name: "execute_completion",
        description: "Infill the unresolved elements with the gathered \
                      context and emit the final wiring.",
        params: &[],
        states: &[AgentState::SufficientContext],
    },
];

pub fn tool_spec(name: &str) -> Option<&'static ToolSpec> {
    TOOLS.iter().find(|t| t.name == name)
}

pub fn tool_names_for(state: AgentState) -> Vec<&'static str> {
    TOOLS
        .iter()
        .filter(|t| t.states.contains(&state))
        .map(|t| t.name)
        .collect()
}

/// A parsed model decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub thought: String,
    pub action: String,
    pub action_input: Value,
}

/// Parse a model reply into an action, repairing common damage: fenced code
/// blocks, prose around the object, and trailing commas.
pub fn parse_action(raw: &str) -> Result<Action> {
    for candidate in repair_json_candidates(raw) {
        if let Ok(value) = serde_json::from_str::<Value>(&candidate) {
            if let Some(action) = action_from_value(value) {
                return Ok(action);
            }
        }
    }
    Err(Error::MalformedAction(format!(
        "no action object found in model output: {}",
        raw.chars().take(120).collect::<String>()
    )))
}

fn action_from_value(value: Value) -> Option<Action> {
    let obj = value.as_object()?;
    let action = obj.get("action")?.as_str()?.trim().to_string();
    if action.is_empty() {
        return None;
    }
    let thought = obj
        .get("thought")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let action_input = match obj.get("action_input") {
        None | Some(Value::Null) => Value::Object(serde_json::Map::new()),
        Some(Value::Object(m)) => Value::Object(m.clone()),
        Some(Value::String(s)) => {
            // a bare string argument lands under a neutral key so the
            // per-tool validation can explain what was expected
            serde_json::json!({ "value": s })
        }
        Some(other) => serde_json::json!({ "value": other }),
    };
    Some(Action {
        thought,
        action,
        action_input,
    })
}

pub(crate) fn repair_json_candidates(raw: &str) -> Vec<String> {
    fn push(candidates: &mut Vec<String>, s: String) {
        let t = s.trim().to_string();
        if !t.is_empty() && !candidates.contains(&t) {
            candidates.push(t);
        }
    }

    let mut candidates = Vec::new();
    push(&mut candidates, raw.to_string());
    for fenced in extract_fenced(raw) {
        push(&mut candidates, fenced);
    }
    let snapshot = candidates.clone();
    for base in &snapshot {
        if let Some(obj) = first_balanced_object(base) {
            push(&mut candidates, obj);
        }
    }
    let snapshot = candidates.clone();
    for base in &snapshot {
        push(&mut candidates, strip_trailing_commas(base));
    }
    candidates
}

fn extract_fenced(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = raw;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // skip the optional language tag line
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                out.push(body[..close].to_string());
                rest = &body[close + 3..];
            }
            None => {
                out.push(body.to_string());
                break;
            }
        }
    }
    out
}

/// First `{ ... }` run with balanced braces, tracked outside string literals.
fn first_balanced_object(raw: &str) -> Option<String> {
    let bytes = raw.as_bytes();
    let start = raw.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(raw[start..=i].to_string());
                }
            }
            _ => {}
        }
    }
    None
}

/// Drop commas that directly precede a closing brace or bracket.
fn strip_trailing_commas(raw: &str) -> String {
    let bytes = raw.as_bytes();
    let mut out = String::with_capacity(raw.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            out.push(b as char);
            i += 1;
            continue;
        }
        if b == b'"' {
            in_string = true;
            out.push('"');
            i += 1;
            continue;
        }
        if b == b',' {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j] as char).is_whitespace() {
                j += 1;
            }
            if j < bytes.len() && (bytes[j] == b'}' || bytes[j] == b']') {
                i += 1; // skip the comma
                continue;
            }
        }
        out.push(b as char);
        i += 1;
    }
    out
}
