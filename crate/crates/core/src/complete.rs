//! Completion: turn gathered facts into the final injective mapping, either
//! by querying the model with an infill prompt and majority-voting the
//! replies, or through a deterministic scoring fallback that needs no model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::{repair_json_candidates, AgentSession, ElementFacts, GatheredFacts};
use crate::collect::Candidate;
use crate::error::{Error, Result};
use crate::levenshtein;
use crate::llm::{complete_with_retries, ChatMessage, ChatModel};
use crate::locate::UnresolvedElement;

/// Placeholder token standing in for each unresolved reference.
pub const INFILL_TOKEN: &str = "<Infill>";

/// Weights of the deterministic candidate score. All term values live in
/// [0, 1] and the default weights sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub similarity: f64,
    pub unused: f64,
    pub identical_call: f64,
    pub proximity: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            similarity: 0.5,
            unused: 0.2,
            identical_call: 0.2,
            proximity: 0.1,
        }
    }
}

/// One wired element with its chosen context element.
#[derive(Debug, Clone, Serialize)]
pub struct WiringPair {
    pub element: UnresolvedElement,
    pub chosen: Candidate,
    pub confidence: f64,
    pub supporting_facts: Vec<usize>,
}

/// The final injective mapping. `complete` is false when some element got no
/// recommendation (no candidates left), which counts against recall only.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Recommendation {
    pub pairs: Vec<WiringPair>,
    pub complete: bool,
}

impl Recommendation {
    pub fn empty() -> Recommendation {
        Recommendation {
            pairs: Vec::new(),
            complete: true,
        }
    }

    pub fn chosen_for(&self, element: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|p| p.element.name == element)
            .map(|p| p.chosen.name.as_str())
    }
}

/// The region rendered with one `<Infill>` per unresolved reference, plus
/// grouping metadata saying which placeholders share one element.
#[derive(Debug, Clone, Serialize)]
pub struct InfillPrompt {
    /// Enclosing method text with every unresolved reference replaced.
    pub infilled: String,
    pub groups: Vec<PlaceholderGroup>,
    /// Full prompt sent to the model.
    pub rendered: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceholderGroup {
    pub element: String,
    /// 1-based placeholder positions in order of appearance.
    pub placeholder_indices: Vec<usize>,
}

/// Build the infill prompt from the session's gathered facts.
pub fn build_infill_prompt(session: &AgentSession<'_>) -> InfillPrompt {
    let method = session.region.enclosing_method(session.unit);
    let method_text = session.unit.snippet(method.span);
    let base = method.span.start;

    // all references in order of appearance, tagged with their element
    let mut refs: Vec<(crate::syntax::Span, usize)> = Vec::new();
    for (i, ef) in session.facts.elements.iter().enumerate() {
        for span in &ef.element.references {
            refs.push((*span, i));
        }
    }
    refs.sort_by_key(|(s, _)| *s);

    let mut groups: Vec<PlaceholderGroup> = session
        .facts
        .elements
        .iter()
        .map(|ef| PlaceholderGroup {
            element: ef.element.name.clone(),
            placeholder_indices: Vec::new(),
        })
        .collect();
    for (idx, (_, element_idx)) in refs.iter().enumerate() {
        groups[*element_idx].placeholder_indices.push(idx + 1);
    }

    let mut infilled = method_text.to_string();
    for (span, _) in refs.iter().rev() {
        let lo = span.start - base;
        let hi = span.end - base;
        infilled.replace_range(lo..hi, INFILL_TOKEN);
    }

    let group_lines: Vec<String> = groups
        .iter()
        .map(|g| {
            format!(
                "- element `{}` owns placeholder{} {}",
                g.element,
                if g.placeholder_indices.len() == 1 {
                    ""
                } else {
                    "s"
                },
                g.placeholder_indices
                    .iter()
                    .map(|i| format!("#{i}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    let element_names: Vec<String> = groups
        .iter()
        .map(|g| format!("\"{}\"", g.element))
        .collect();

    let rendered = format!(
        "{}\n# Completion\nEvery occurrence of an unresolved element below is replaced by \
         the placeholder token {INFILL_TOKEN} (placeholders are numbered in order of \
         appearance; all placeholders of one group take the same replacement):\n\n\
         {infilled}\n\nPlaceholder groups:\n{}\n\nChoose the replacement for each group \
         strictly from the context elements listed in the gathered information. Reply \
         with a single JSON object of the form {{\"wirings\": {{{}}}}} mapping each \
         element name to its replacement expression. No other text.",
        session.prompt.render(),
        group_lines.join("\n"),
        element_names
            .iter()
            .map(|n| format!("{n}: \"...\""))
            .collect::<Vec<_>>()
            .join(", ")
    );

    InfillPrompt {
        infilled,
        groups,
        rendered,
    }
}

/// Strip all whitespace; the key replies are voted and validated under.
pub fn normalize_vote(name: &str) -> String {
    name.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Pull an element-to-replacement map out of one model reply. Accepts a
/// `wirings` object, a `wirings` array of pair objects, or a bare object of
/// string entries.
pub fn parse_wirings(raw: &str) -> Option<BTreeMap<String, String>> {
    for candidate in repair_json_candidates(raw) {
        let Ok(value) = serde_json::from_str::<Value>(&candidate) else {
            continue;
        };
        let Some(obj) = value.as_object() else {
            continue;
        };
        let mut out = BTreeMap::new();
        match obj.get("wirings") {
            Some(Value::Object(map)) => {
                for (k, v) in map {
                    if let Some(s) = v.as_str() {
                        out.insert(k.clone(), s.to_string());
                    }
                }
            }
            Some(Value::Array(items)) => {
                for item in items {
                    let Some(pair) = item.as_object() else {
                        continue;
                    };
                    let key = ["unresolved", "element", "name"]
                        .iter()
                        .find_map(|k| pair.get(*k).and_then(Value::as_str));
                    let val = ["replacement", "chosen", "context_element", "wired"]
                        .iter()
                        .find_map(|k| pair.get(*k).and_then(Value::as_str));
                    if let (Some(k), Some(v)) = (key, val) {
                        out.insert(k.to_string(), v.to_string());
                    }
                }
            }
            _ => {
                for (k, v) in obj {
                    if matches!(k.as_str(), "thought" | "action" | "action_input") {
                        continue;
                    }
                    if let Some(s) = v.as_str() {
                        out.insert(k.clone(), s.to_string());
                    }
                }
            }
        }
        if !out.is_empty() {
            return Some(out);
        }
    }
    None
}

/// Candidate score: weighted sum of literal similarity, unusedness,
/// identical-call support, and declaration proximity.
fn score_candidate(
    candidate: &Candidate,
    element: &UnresolvedElement,
    ef: &ElementFacts,
    weights: &ScoreWeights,
    max_distance: usize,
) -> f64 {
    let similarity = 1.0 - levenshtein::normalized_case_insensitive(&candidate.name, &element.name);
    let unused = if candidate.is_variable() && candidate.usage_count == 0 {
        1.0
    } else {
        0.0
    };
    let identical = if ef.identical_receivers.contains(&candidate.name) {
        1.0
    } else {
        0.0
    };
    let proximity = match candidate.distance_to_region {
        None => 0.0,
        Some(d) if max_distance == 0 => {
            if d == 0 {
                1.0
            } else {
                0.0
            }
        }
        Some(d) => 1.0 - (d as f64 / max_distance as f64),
    };
    (weights.similarity * similarity
        + weights.unused * unused
        + weights.identical_call * identical
        + weights.proximity * proximity)
        .clamp(0.0, 1.0)
}

/// Score and rank an element's candidate pool, best first. Ties fall back to
/// the collector tie-break: distance to region ascending, then name.
pub fn ranked_candidates(
    facts: &GatheredFacts,
    ef: &ElementFacts,
    weights: &ScoreWeights,
) -> Vec<(Candidate, f64)> {
    let max_distance = facts
        .available
        .iter()
        .filter_map(|c| c.distance_to_region)
        .max()
        .unwrap_or(0);
    let mut scored: Vec<(Candidate, f64)> = facts
        .compatible_pool(ef)
        .into_iter()
        .map(|c| {
            let s = score_candidate(&c, &ef.element, ef, weights, max_distance);
            (c, s)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| cmp_distance(a.0.distance_to_region, b.0.distance_to_region))
            .then_with(|| a.0.name.cmp(&b.0.name))
    });
    scored
}

fn cmp_distance(a: Option<usize>, b: Option<usize>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

/// Injectivity-preserving assignment over per-element preference lists
/// (name, confidence). Elements with higher top confidence assign first and
/// keep their best option; later elements take their next-best name not
/// already taken. For up to eight elements the greedy pass is refined to the
/// exhaustive total-score optimum (ties stay with the greedy choice), so two
/// elements whose preferences interlock still end up at the best overall
/// wiring. Returns the chosen preference index per element.
pub fn assign_injective(prefs: &[Vec<(String, f64)>]) -> Vec<Option<usize>> {
    let greedy = greedy_pass(prefs);
    if prefs.len() > 8 {
        return greedy;
    }

    // in any optimum each element can be served from its top-n entries by
    // confidence (n elements occupy at most n-1 of them otherwise), so the
    // search space prunes to n branches per element
    let keep = prefs.len();
    let pruned: Vec<Vec<(usize, &str, f64)>> = prefs
        .iter()
        .map(|list| {
            let mut indexed: Vec<(usize, &str, f64)> = list
                .iter()
                .enumerate()
                .map(|(i, (name, score))| (i, name.as_str(), *score))
                .collect();
            indexed.sort_by(|a, b| {
                b.2.partial_cmp(&a.2)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            indexed.truncate(keep);
            // original preference order decides ties during the search
            indexed.sort_by_key(|(i, _, _)| *i);
            indexed
        })
        .collect();

    // elements in confidence order, candidates in preference order: the
    // first assignment reaching the maximum total is the greedy-most one
    let order = element_order(prefs);
    let mut best = greedy.clone();
    let mut best_total = assignment_total(prefs, &greedy);
    let mut current: Vec<Option<usize>> = vec![None; prefs.len()];

    // optimistic bound on what the elements from a given depth can add
    let mut suffix_max = vec![0.0f64; order.len() + 1];
    for d in (0..order.len()).rev() {
        let top = pruned[order[d]]
            .iter()
            .map(|(_, _, s)| *s)
            .fold(0.0f64, f64::max);
        suffix_max[d] = suffix_max[d + 1] + top;
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs<'p>(
        pruned: &'p [Vec<(usize, &'p str, f64)>],
        order: &[usize],
        suffix_max: &[f64],
        depth: usize,
        current: &mut Vec<Option<usize>>,
        taken: &mut Vec<&'p str>,
        total: f64,
        best: &mut Vec<Option<usize>>,
        best_total: &mut f64,
    ) {
        if total + suffix_max[depth] <= *best_total + 1e-12 {
            return;
        }
        if depth == order.len() {
            if total > *best_total + 1e-12 {
                *best_total = total;
                *best = current.clone();
            }
            return;
        }
        let element = order[depth];
        for (pref_idx, name, score) in &pruned[element] {
            if taken.contains(name) {
                continue;
            }
            taken.push(name);
            current[element] = Some(*pref_idx);
            dfs(
                pruned,
                order,
                suffix_max,
                depth + 1,
                current,
                taken,
                total + score,
                best,
                best_total,
            );
            current[element] = None;
            taken.pop();
        }
        // a shared pool can make leaving this element unmapped the better
        // overall wiring
        dfs(
            pruned,
            order,
            suffix_max,
            depth + 1,
            current,
            taken,
            total,
            best,
            best_total,
        );
    }

    let mut taken_names: Vec<&str> = Vec::new();
    dfs(
        &pruned,
        &order,
        &suffix_max,
        0,
        &mut current,
        &mut taken_names,
        0.0,
        &mut best,
        &mut best_total,
    );
    best
}

fn element_order(prefs: &[Vec<(String, f64)>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..prefs.len()).collect();
    order.sort_by(|&a, &b| {
        let ca = prefs[a].first().map(|p| p.1).unwrap_or(f64::MIN);
        let cb = prefs[b].first().map(|p| p.1).unwrap_or(f64::MIN);
        cb.partial_cmp(&ca)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

fn greedy_pass(prefs: &[Vec<(String, f64)>]) -> Vec<Option<usize>> {
    let mut taken: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut chosen: Vec<Option<usize>> = vec![None; prefs.len()];
    for idx in element_order(prefs) {
        for (pref_idx, (name, _)) in prefs[idx].iter().enumerate() {
            if !taken.contains(name) {
                taken.insert(name.clone());
                chosen[idx] = Some(pref_idx);
                break;
            }
        }
    }
    chosen
}

fn assignment_total(prefs: &[Vec<(String, f64)>], chosen: &[Option<usize>]) -> f64 {
    chosen
        .iter()
        .enumerate()
        .filter_map(|(e, c)| c.map(|p| prefs[e][p].1))
        .sum()
}

fn supporting_facts_for(facts: &GatheredFacts, element: &str) -> Vec<usize> {
    facts
        .facts
        .iter()
        .filter(|f| f.element.is_none() || f.element.as_deref() == Some(element))
        .map(|f| f.id)
        .collect()
}

/// Deterministic completion: score every candidate per element and assign
/// greedily under injectivity. Elements with empty pools are omitted and the
/// recommendation is marked incomplete.
pub fn deterministic_complete(
    session: &mut AgentSession<'_>,
    weights: &ScoreWeights,
) -> Recommendation {
    let facts = &session.facts;
    let prefs: Vec<Vec<(String, f64)>> = facts
        .elements
        .iter()
        .map(|ef| {
            ranked_candidates(facts, ef, weights)
                .into_iter()
                .map(|(c, s)| (c.name, s))
                .collect()
        })
        .collect();
    let chosen = assign_injective(&prefs);

    let mut pairs = Vec::new();
    let mut complete = true;
    for (i, ef) in facts.elements.iter().enumerate() {
        let ranked = ranked_candidates(facts, ef, weights);
        match chosen[i].and_then(|p| ranked.into_iter().nth(p)) {
            Some((candidate, score)) => pairs.push(WiringPair {
                element: ef.element.clone(),
                chosen: candidate,
                confidence: score,
                supporting_facts: supporting_facts_for(facts, &ef.element.name),
            }),
            None => complete = false,
        }
    }
    Recommendation { pairs, complete }
}

/// Model completion with self-consistency voting: query `votes` times,
/// majority-vote per element on the whitespace-stripped replacement, validate
/// winners against gathered candidates (out-of-vocabulary answers demote to
/// the deterministic ranking), and enforce injectivity greedily.
pub fn execute_completion(
    session: &mut AgentSession<'_>,
    model: &dyn ChatModel,
    opts: &crate::agent::RunOptions,
) -> Result<Recommendation> {
    let infill = build_infill_prompt(session);
    let messages = [ChatMessage::user(infill.rendered.clone())];
    let votes = opts.votes.max(1);

    let mut replies: Vec<String> = Vec::new();
    let mut last_err: Option<Error> = None;
    for _ in 0..votes {
        match complete_with_retries(model, &messages, opts.backoff) {
            Ok(exchange) => {
                session.record_completion_call(&exchange);
                replies.push(exchange.response);
            }
            Err(e) => last_err = Some(e),
        }
    }
    if replies.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Transport("no completion reply".to_string())));
    }

    let parsed: Vec<BTreeMap<String, String>> =
        replies.iter().filter_map(|r| parse_wirings(r)).collect();

    let facts = &session.facts;
    let mut prefs: Vec<Vec<(String, f64)>> = Vec::new();
    let mut render_by_key: Vec<BTreeMap<String, Candidate>> = Vec::new();

    for ef in &facts.elements {
        // candidate renders keyed by normalized form for validation
        let mut renders: BTreeMap<String, Candidate> = BTreeMap::new();
        for c in facts.pool(ef) {
            renders.insert(normalize_vote(&c.name), c);
        }

        // vote tally for this element, keyed by normalized replacement
        let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new(); // key -> (votes, first_seen)
        for (order, reply) in parsed.iter().enumerate() {
            if let Some(answer) = reply.get(&ef.element.name) {
                let key = normalize_vote(answer);
                let entry = counts.entry(key).or_insert((0, order));
                entry.0 += 1;
            }
        }

        let deterministic = ranked_candidates(facts, ef, &opts.weights);
        let rank_of = |key: &str| -> usize {
            deterministic
                .iter()
                .position(|(c, _)| normalize_vote(&c.name) == key)
                .unwrap_or(usize::MAX)
        };

        // validated vote keys ordered by votes desc, deterministic rank asc,
        // first-seen asc
        let mut voted: Vec<(String, usize, usize)> = counts
            .into_iter()
            .filter(|(key, _)| renders.contains_key(key))
            .map(|(key, (n, seen))| (key, n, seen))
            .collect();
        voted.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| rank_of(&a.0).cmp(&rank_of(&b.0)))
                .then(a.2.cmp(&b.2))
        });

        let total = parsed.len().max(1) as f64;
        let mut pref: Vec<(String, f64)> = Vec::new();
        for (key, n, _) in &voted {
            let render = renders[key].name.clone();
            pref.push((render, *n as f64 / total));
        }
        for (c, score) in &deterministic {
            if !pref.iter().any(|(name, _)| name == &c.name) {
                pref.push((c.name.clone(), *score));
            }
        }
        prefs.push(pref);
        render_by_key.push(renders);
    }

    let chosen = assign_injective(&prefs);
    let mut pairs = Vec::new();
    let mut complete = true;
    for (i, ef) in facts.elements.iter().enumerate() {
        match chosen[i] {
            Some(p) => {
                let (name, confidence) = prefs[i][p].clone();
                let candidate = facts
                    .pool(ef)
                    .into_iter()
                    .find(|c| c.name == name)
                    .or_else(|| render_by_key[i].get(&normalize_vote(&name)).cloned());
                match candidate {
                    Some(candidate) => pairs.push(WiringPair {
                        element: ef.element.clone(),
                        chosen: candidate,
                        confidence,
                        supporting_facts: supporting_facts_for(facts, &ef.element.name),
                    }),
                    None => complete = false,
                }
            }
            None => complete = false,
        }
    }
    Ok(Recommendation { pairs, complete })
}
