//! Locate the adaptation region and the unresolved elements inside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{SourceUnit, Span, SymbolTable, SyntaxKind, SyntaxNode};

/// Control tokens delimiting the pasted region inside a target file.
pub const START_MARKER: &str = "<start>";
pub const END_MARKER: &str = "<end>";

/// Remove the one `<start>`/`<end>` pair from `text`, returning the stripped
/// text and the byte span the region occupies in it.
pub fn extract_region(text: &str) -> Result<(String, Span)> {
    let starts: Vec<usize> = match_indices(text, START_MARKER);
    let ends: Vec<usize> = match_indices(text, END_MARKER);
    if starts.len() != 1 || ends.len() != 1 {
        return Err(Error::Marker(format!(
            "expected exactly one {START_MARKER}/{END_MARKER} pair, found {} and {}",
            starts.len(),
            ends.len()
        )));
    }
    let (start_idx, end_idx) = (starts[0], ends[0]);
    if end_idx < start_idx + START_MARKER.len() {
        return Err(Error::Marker(format!(
            "{END_MARKER} appears before {START_MARKER}"
        )));
    }
    let mut stripped = String::with_capacity(text.len());
    stripped.push_str(&text[..start_idx]);
    stripped.push_str(&text[start_idx + START_MARKER.len()..end_idx]);
    stripped.push_str(&text[end_idx + END_MARKER.len()..]);
    let region = Span::new(start_idx, end_idx - START_MARKER.len());
    Ok((stripped, region))
}

fn match_indices(text: &str, needle: &str) -> Vec<usize> {
    text.match_indices(needle).map(|(i, _)| i).collect()
}

/// The marked pasted-code region, pinned to its enclosing method.
#[derive(Debug, Clone)]
pub struct AdaptationRegion {
    pub span: Span,
    method_span: Span,
}

impl AdaptationRegion {
    /// Validate that `span` sits inside a method body of `unit`.
    pub fn locate(unit: &SourceUnit, span: Span) -> Result<AdaptationRegion> {
        let method = unit.method_containing(span).ok_or_else(|| {
            Error::Input("adaptation region is not inside a method body".to_string())
        })?;
        let body = method
            .children
            .iter()
            .rev()
            .find(|c| c.kind == SyntaxKind::Block)
            .ok_or_else(|| Error::Input("enclosing method has no body".to_string()))?;
        if !body.span.contains_span(span) {
            return Err(Error::Input(
                "adaptation region is not inside the method body".to_string(),
            ));
        }
        Ok(AdaptationRegion {
            span,
            method_span: method.span,
        })
    }

    pub fn enclosing_method<'u>(&self, unit: &'u SourceUnit) -> &'u SyntaxNode {
        unit.method_containing(self.method_span)
            .expect("region method disappeared from unit")
    }

    /// Offset before which context is visible: everything preceding the
    /// region inside the method, plus class-level declarations.
    pub fn context_end(&self) -> usize {
        self.span.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    Identifier,
    ReceiverExpression,
}

/// A name in the region that fails resolution, with every reference span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedElement {
    pub name: String,
    pub kind: ElementKind,
    pub references: Vec<Span>,
}

impl UnresolvedElement {
    pub fn first_reference(&self) -> Span {
        self.references[0]
    }
}

/// Identify every distinct unresolved name inside the region.
///
/// Literals resolve trivially and never appear; names present in the class
/// index (including stubs) are known static receivers, not wiring targets;
/// `this`/`super` are keywords. Runs automatically at session start.
pub fn identify_unresolved_elements(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
) -> Vec<UnresolvedElement> {
    let mut order: Vec<String> = Vec::new();
    let mut refs: std::collections::BTreeMap<String, Vec<Span>> = std::collections::BTreeMap::new();
    let mut receiver_names: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();

    unit.root.walk_with_ancestors(&mut |node, ancestors| {
        if node.kind != SyntaxKind::Identifier || !region.span.contains_span(node.span) {
            return;
        }
        let Some(name) = node.name.as_deref() else {
            return;
        };
        if name == "this" || name == "super" {
            return;
        }
        if table.resolve_at(name, node.span.start).is_some() {
            return;
        }
        if table.class(name).is_some() {
            return;
        }
        if !refs.contains_key(name) {
            order.push(name.to_string());
        }
        refs.entry(name.to_string()).or_default().push(node.span);

        if let Some(parent) = ancestors.last() {
            if parent.kind == SyntaxKind::MethodInvocation
                && parent.receiver().map(|r| r.span) == Some(node.span)
            {
                receiver_names.insert(name.to_string());
            }
        }
    });

    order
        .into_iter()
        .map(|name| {
            let mut references = refs.remove(&name).unwrap_or_default();
            references.sort();
            let kind = if receiver_names.contains(&name) {
                ElementKind::ReceiverExpression
            } else {
                ElementKind::Identifier
            };
            UnresolvedElement {
                name,
                kind,
                references,
            }
        })
        .collect()
}
