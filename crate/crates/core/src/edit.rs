//! Span-based source editing: apply a recommendation by replacing every
//! reference of each wired element, and emit a unified diff.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use similar::TextDiff;

use crate::complete::Recommendation;
use crate::error::{Error, Result};
use crate::syntax::{SourceUnit, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub span: Span,
    pub replacement: String,
}

/// Replacements sorted descending by start offset, pinned to the text they
/// were planned against by a content hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EditScript {
    pub edits: Vec<Edit>,
    pub base_hash: String,
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One replacement per reference span of each mapped element. Spans must not
/// overlap; an overlap means the locator broke its own grouping invariant.
pub fn plan_edits(unit: &SourceUnit, rec: &Recommendation) -> Result<EditScript> {
    let mut edits: Vec<Edit> = Vec::new();
    for pair in &rec.pairs {
        for span in &pair.element.references {
            edits.push(Edit {
                span: *span,
                replacement: pair.chosen.name.clone(),
            });
        }
    }
    edits.sort_by_key(|e| std::cmp::Reverse(e.span.start));
    for window in edits.windows(2) {
        // descending order: window[1] precedes window[0] in the text
        if window[1].span.end > window[0].span.start {
            return Err(Error::Internal(format!(
                "overlapping reference spans {:?} and {:?}",
                window[1].span, window[0].span
            )));
        }
    }
    Ok(EditScript {
        edits,
        base_hash: text_hash(&unit.text),
    })
}

#[derive(Debug, Clone)]
pub struct EditOutcome {
    pub text: String,
    pub diff: String,
}

/// Apply the script (descending offsets, so spans never need recomputation)
/// and render a unified diff with three lines of context.
pub fn apply_edits(unit: &SourceUnit, script: &EditScript) -> Result<EditOutcome> {
    let actual = text_hash(&unit.text);
    if actual != script.base_hash {
        return Err(Error::StaleEdit {
            expected: script.base_hash.clone(),
            actual,
        });
    }
    let mut text = unit.text.clone();
    for edit in &script.edits {
        text.replace_range(edit.span.start..edit.span.end, &edit.replacement);
    }
    let diff = unified_diff(&unit.path, &unit.text, &text);
    Ok(EditOutcome { text, diff })
}

pub fn unified_diff(path: &str, old: &str, new: &str) -> String {
    if old == new {
        return String::new();
    }
    TextDiff::from_lines(old, new)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{path}"), &format!("b/{path}"))
        .to_string()
}

impl EditScript {
    /// Map an offset of the base text onto the edited text. Offsets inside a
    /// replaced span map to its start.
    pub fn map_offset(&self, offset: usize) -> usize {
        let mut delta: isize = 0;
        // ascending order for cumulative shifts
        for edit in self.edits.iter().rev() {
            if edit.span.end <= offset {
                delta += edit.replacement.len() as isize - edit.span.len() as isize;
            } else if edit.span.start < offset {
                // inside the replaced span
                return (edit.span.start as isize + delta) as usize;
            } else {
                break;
            }
        }
        (offset as isize + delta) as usize
    }

    /// Map a span of the base text onto the edited text.
    pub fn map_span(&self, span: Span) -> Span {
        let start = self.map_offset(span.start);
        let end = self.map_offset(span.end);
        Span::new(start, end.max(start))
    }
}
