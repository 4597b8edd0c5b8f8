//! The dynamically updated prompt document.
//!
//! Static sections (role, goals, guidelines, output format) never change;
//! the state description and available-tools sections track the state
//! machine; gathered information is append-only.

use super::{tool_names_for, tool_spec, AgentState};

const ROLE: &str = "\
You are a senior Java development engineer. A pasted code region references \
elements that do not resolve against the surrounding file. Your task is \
variable-level code integration: wire every unresolved element to an existing \
element of the context (a local variable, parameter, field, or a method-call \
expression). Decide autonomously; user intervention is never available.";

const GOALS: &str = "\
1. Analyze context: judge whether the gathered information already determines a valid substitution for every unresolved element.
2. Collect more context: if not, invoke the most informative tool from the toolkit below.
3. Suggest a substitution: once the context suffices, run the completion to recommend one existing context element per unresolved element.";

const GUIDELINES: &str = "\
- The tool budget is limited; pick each next step for maximum information gain.
- The basic principle: a recommended context element must be type-compatible with its unresolved element.
- Prefer the minimal necessary context; widening the context costs latency, so stretch carefully.
- When no visible variable fits, extend the search scope beyond the current class; the right wiring is then more likely a method-call expression than a plain variable.";

const OUTPUT_FORMAT: &str = "\
Reply with a single JSON object and nothing else. It must carry exactly three \
fields: \"thought\" (your reasoning so far), \"action\" (the name of one \
available tool), and \"action_input\" (a JSON object with the tool's \
arguments, {} when none).";

/// Ordered prompt sections; renders as the concatenation Role, Goals,
/// Guidelines, State, Available Tools, Gathered Information, Output Format.
#[derive(Debug, Clone)]
pub struct PromptDocument {
    state_description: String,
    available_tools: String,
    gathered: Vec<String>,
}

impl PromptDocument {
    pub fn new(state: AgentState) -> PromptDocument {
        let mut doc = PromptDocument {
            state_description: String::new(),
            available_tools: String::new(),
            gathered: Vec::new(),
        };
        doc.set_state(state);
        doc
    }

    /// Refresh the two state-dependent sections.
    pub fn set_state(&mut self, state: AgentState) {
        self.state_description = describe_state(state);
        self.available_tools = render_tools(state);
    }

    /// Append one block to the gathered-information section. Append-only.
    pub fn push_gathered(&mut self, block: String) {
        self.gathered.push(block);
    }

    pub fn gathered_len(&self) -> usize {
        self.gathered.iter().map(String::len).sum()
    }

    pub fn render(&self) -> String {
        let gathered = if self.gathered.is_empty() {
            "(nothing gathered yet)".to_string()
        } else {
            self.gathered.join("\n\n")
        };
        format!(
            "# Role\n{ROLE}\n\n# Goals\n{GOALS}\n\n# Guidelines\n{GUIDELINES}\n\n\
             # Current State\n{}\n\n# Available Tools\n{}\n\n\
             # Gathered Information\n{gathered}\n\n# Output Format\n{OUTPUT_FORMAT}\n",
            self.state_description, self.available_tools
        )
    }
}

fn describe_state(state: AgentState) -> String {
    match state {
        AgentState::Initial => "State: initial. The locator and the baseline collectors run \
             automatically; their results appear under Gathered Information."
            .to_string(),
        AgentState::InsufficientContext => {
            "State: insufficient context. The gathered information does not yet \
             pin down a type-compatible wiring for every unresolved element. \
             Invoke one of the available tools to gather more. If you judge \
             the gathered information sufficient after all, respond with \
             action \"execute_completion\" instead."
                .to_string()
        }
        AgentState::SufficientContext => {
            "State: sufficient context. Produce the final wiring now by \
             selecting action \"execute_completion\"."
                .to_string()
        }
    }
}

fn render_tools(state: AgentState) -> String {
    let mut out = String::new();
    for name in tool_names_for(state) {
        let spec = tool_spec(name).expect("registered tool");
        out.push_str(&format!("- {}: {}", spec.name, spec.description));
        if !spec.params.is_empty() {
            let params: Vec<String> = spec
                .params
                .iter()
                .map(|p| {
                    format!(
                        "{}{}: {}",
                        p.name,
                        if p.required { " (required)" } else { "" },
                        p.description
                    )
                })
                .collect();
            out.push_str(&format!(" Arguments: {}", params.join("; ")));
        }
        out.push('\n');
    }
    if out.is_empty() {
        out.push_str("(no tools available)\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_render_in_fixed_order() {
        let doc = PromptDocument::new(AgentState::InsufficientContext);
        let text = doc.render();
        let order = [
            "# Role",
            "# Goals",
            "# Guidelines",
            "# Current State",
            "# Available Tools",
            "# Gathered Information",
            "# Output Format",
        ];
        let mut last = 0;
        for header in order {
            let pos = text
                .find(header)
                .unwrap_or_else(|| panic!("missing {header}"));
            assert!(pos > last || last == 0, "{header} out of order");
            last = pos;
        }
    }

    #[test]
    fn guidelines_cover_the_four_directives() {
        let text = PromptDocument::new(AgentState::Initial).render();
        assert!(text.contains("budget is limited"));
        assert!(text.contains("type-compatible"));
        assert!(text.contains("minimal necessary context"));
        assert!(text.contains("beyond the current class"));
    }

    #[test]
    fn tools_section_tracks_state() {
        let mut doc = PromptDocument::new(AgentState::Initial);
        let initial = doc.render();
        assert!(initial.contains("get_available_variables"));
        assert!(!initial.contains("- sort_by_literal_similarity"));
        doc.set_state(AgentState::InsufficientContext);
        let insufficient = doc.render();
        assert!(insufficient.contains("- sort_by_literal_similarity"));
        assert!(!insufficient.contains("- get_available_variables"));
        doc.set_state(AgentState::SufficientContext);
        let sufficient = doc.render();
        assert!(sufficient.contains("- execute_completion"));
        assert!(!sufficient.contains("- get_method_names"));
    }

    #[test]
    fn gathered_is_append_only_in_render() {
        let mut doc = PromptDocument::new(AgentState::Initial);
        let before = doc.gathered_len();
        doc.push_gathered("Observation: first".to_string());
        doc.push_gathered("Observation: second".to_string());
        assert!(doc.gathered_len() > before);
        let text = doc.render();
        let first = text.find("Observation: first").unwrap();
        let second = text.find("Observation: second").unwrap();
        assert!(first < second);
    }
}
