//! Collector toolkit: gather and filter candidate context elements around
//! the adaptation region.
//!
//! All collectors are pure functions over the parsed unit and symbol table.
//! The visible context is the code preceding the region inside its method,
//! plus class-level declarations and the rest of the file outside the
//! enclosing method; nothing inside or after the region counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levenshtein;
use crate::locate::{AdaptationRegion, UnresolvedElement};
use crate::syntax::{
    Binding, BindingKind, MemberSig, SourceUnit, Span, SymbolTable, SyntaxKind, TypeRef,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CandidateKind {
    Local,
    Parameter,
    Field,
    MemberCall,
}

impl std::fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CandidateKind::Local => write!(f, "local"),
            CandidateKind::Parameter => write!(f, "parameter"),
            CandidateKind::Field => write!(f, "field"),
            CandidateKind::MemberCall => write!(f, "member call"),
        }
    }
}

/// Owning class and signature behind a member-call candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRef {
    pub class_name: String,
    pub member: MemberSig,
}

/// One context element that could replace an unresolved element.
///
/// `name` is the render form used for substitution: a plain variable name, or
/// a full call expression like `Charset.defaultCharset()` for member calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub kind: CandidateKind,
    pub type_ref: TypeRef,
    pub decl_span: Option<Span>,
    pub usage_count: usize,
    pub distance_to_region: Option<usize>,
    pub member: Option<MemberRef>,
}

impl Candidate {
    pub fn is_variable(&self) -> bool {
        self.kind != CandidateKind::MemberCall
    }
}

/// Member invoked on an element reference, with call arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberUse {
    pub name: String,
    pub arity: usize,
}

/// Syntactic role of an unresolved element in its region.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleHint {
    pub is_argument: bool,
    pub expected_type: Option<TypeRef>,
    pub formal_parameter_name: Option<String>,
    pub is_receiver: bool,
    /// Members invoked on the element, first in source order is primary.
    pub invoked_members: Vec<MemberUse>,
}

impl RoleHint {
    pub fn primary_member(&self) -> Option<&MemberUse> {
        self.invoked_members.first()
    }

    pub fn merge(mut self, other: RoleHint) -> RoleHint {
        self.is_argument |= other.is_argument;
        if self.expected_type.is_none() {
            self.expected_type = other.expected_type;
        }
        if self.formal_parameter_name.is_none() {
            self.formal_parameter_name = other.formal_parameter_name;
        }
        self.is_receiver |= other.is_receiver;
        if self.invoked_members.is_empty() {
            self.invoked_members = other.invoked_members;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub candidate: Candidate,
    pub levenshtein: usize,
    pub normalized: f64,
}

/// Whether an offset is inside the visible context for the region: not in
/// the region itself and not after it within the enclosing method.
fn in_visible_context(region: &AdaptationRegion, unit: &SourceUnit, span: Span) -> bool {
    if region.span.overlaps(span) {
        return false;
    }
    let method = region.enclosing_method(unit);
    if method.span.contains_span(span) && span.start >= region.span.start {
        return false;
    }
    true
}

/// References to `binding` in the visible context. Reads and writes both
/// count; the declaration itself does not.
pub fn usage_count(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
    binding: &Binding,
) -> usize {
    let mut count = 0;
    for node in unit.root.preorder() {
        if node.kind != SyntaxKind::Identifier || node.name.as_deref() != Some(&binding.name) {
            continue;
        }
        if !in_visible_context(region, unit, node.span) {
            continue;
        }
        if let Some(resolved) = table.resolve_at(&binding.name, node.span.start) {
            if resolved.decl_span == binding.decl_span {
                count += 1;
            }
        }
    }
    count
}

fn candidate_from_binding(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
    binding: &Binding,
) -> Candidate {
    let kind = match binding.kind {
        BindingKind::Local => CandidateKind::Local,
        BindingKind::Parameter => CandidateKind::Parameter,
        BindingKind::Field => CandidateKind::Field,
    };
    Candidate {
        name: binding.name.clone(),
        kind,
        type_ref: binding.type_ref.clone(),
        decl_span: Some(binding.decl_span),
        usage_count: usage_count(unit, table, region, binding),
        distance_to_region: Some(region.span.start.abs_diff(binding.decl_span.start)),
        member: None,
    }
}

/// All class fields, enclosing-method parameters, and locals declared before
/// the region and still in scope there. Sorted by kind (local, parameter,
/// field), then distance to the region, then name.
pub fn get_available_variables(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::new();
    let mut seen: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut scope = Some(table.scope_at(region.span.start));
    while let Some(id) = scope {
        let s = table.scope(id);
        for binding in s.bindings.iter().rev() {
            if seen.contains(&binding.name) {
                continue; // shadowed by an inner binding
            }
            if binding.kind == BindingKind::Local && binding.decl_span.end > region.span.start {
                continue;
            }
            seen.insert(binding.name.clone());
            out.push(candidate_from_binding(unit, table, region, binding));
        }
        scope = s.parent;
    }
    out.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.distance_to_region.cmp(&b.distance_to_region))
            .then(a.name.cmp(&b.name))
    });
    out
}

/// Available variables with zero detected references in the visible context.
pub fn get_unused_variables(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
) -> Vec<Candidate> {
    get_available_variables(unit, table, region)
        .into_iter()
        .filter(|c| c.usage_count == 0)
        .collect()
}

/// Does any reference of the element sit in an argument slot of a call with
/// a known callee? The innermost call owns a nested reference, and a known
/// formal parameter supplies the expected type and its name.
pub fn is_argument(
    unit: &SourceUnit,
    table: &SymbolTable,
    element: &UnresolvedElement,
) -> RoleHint {
    let mut hint = RoleHint::default();
    let mut best_known = false;

    unit.root.walk_with_ancestors(&mut |node, ancestors| {
        if best_known {
            return;
        }
        let Some(parent) = ancestors.last() else {
            return;
        };
        if node.kind != SyntaxKind::Identifier
            || node.name.as_deref() != Some(&element.name)
            || !element.references.contains(&node.span)
        {
            return;
        }
        let (is_arg, callee) = match parent.kind {
            SyntaxKind::MethodInvocation => {
                let in_args = parent.invocation_args().iter().any(|a| a.span == node.span);
                if !in_args {
                    return;
                }
                let index = parent
                    .invocation_args()
                    .iter()
                    .position(|a| a.span == node.span)
                    .unwrap();
                (
                    true,
                    resolve_callee(unit, table, ancestors, parent).map(|m| (m, index)),
                )
            }
            SyntaxKind::ObjectCreation => {
                let in_args = parent.children.iter().any(|a| a.span == node.span);
                if !in_args {
                    return;
                }
                // constructor signatures are not indexed
                (true, None)
            }
            _ => return,
        };
        if is_arg {
            hint.is_argument = true;
            if let Some((member, index)) = callee {
                if let Some(formal) = member.params.get(index) {
                    hint.expected_type = Some(TypeRef {
                        name: formal.type_name.clone(),
                        generics: None,
                        known: table.is_known_type(&formal.type_name),
                    });
                    hint.formal_parameter_name = formal.name.clone();
                    best_known = true;
                }
            }
        }
    });
    hint
}

/// Resolve the member signature a call refers to.
///
/// Typed receivers and static class receivers go through the class index.
/// Unqualified calls look in the enclosing class. When the receiver itself is
/// unresolvable (it may be another unresolved element), a member with a
/// matching name and arity that exists in exactly one indexed class is taken
/// as the callee.
fn resolve_callee(
    unit: &SourceUnit,
    table: &SymbolTable,
    ancestors: &[&crate::syntax::SyntaxNode],
    call: &crate::syntax::SyntaxNode,
) -> Option<MemberSig> {
    let member_name = call.name.as_deref()?;
    let arity = call.invocation_args().len();
    let find = |class_name: &str| -> Option<MemberSig> {
        table
            .class(class_name)?
            .members
            .iter()
            .find(|m| m.name == member_name && m.arity() == arity)
            .cloned()
    };

    match call.receiver() {
        Some(recv) if recv.kind == SyntaxKind::Identifier => {
            let recv_name = recv.name.as_deref()?;
            if let Some(binding) = table.resolve_at(recv_name, recv.span.start) {
                if let Some(m) = find(&binding.type_ref.name) {
                    return Some(m);
                }
                return None;
            }
            if table.class(recv_name).is_some() {
                return find(recv_name);
            }
            unique_member(table, member_name, arity)
        }
        Some(_) => unique_member(table, member_name, arity),
        None => {
            let class = ancestors
                .iter()
                .rev()
                .find(|a| a.kind == SyntaxKind::ClassDecl)
                .copied()
                .or_else(|| {
                    unit.root
                        .preorder()
                        .filter(|n| n.kind == SyntaxKind::ClassDecl)
                        .find(|n| n.span.contains_span(call.span))
                })?;
            let class_name = class.name.as_deref()?;
            find(class_name).or_else(|| unique_member(table, member_name, arity))
        }
    }
}

fn unique_member(table: &SymbolTable, name: &str, arity: usize) -> Option<MemberSig> {
    let mut found: Option<MemberSig> = None;
    for class in table.classes() {
        for member in &class.members {
            if member.name == name && member.arity() == arity {
                if found.is_some() {
                    return None; // ambiguous
                }
                found = Some(member.clone());
            }
        }
    }
    found
}

/// Members invoked with the element as receiver, first in source order is
/// primary.
pub fn is_receiver(unit: &SourceUnit, element: &UnresolvedElement) -> RoleHint {
    let mut hint = RoleHint::default();
    let mut ordered: Vec<(usize, MemberUse)> = Vec::new();

    unit.root.walk_with_ancestors(&mut |node, ancestors| {
        let Some(parent) = ancestors.last() else {
            return;
        };
        if node.kind != SyntaxKind::Identifier
            || node.name.as_deref() != Some(&element.name)
            || !element.references.contains(&node.span)
        {
            return;
        }
        if parent.kind == SyntaxKind::MethodInvocation
            && parent.receiver().map(|r| r.span) == Some(node.span)
        {
            if let Some(member) = parent.name.clone() {
                let use_ = MemberUse {
                    name: member,
                    arity: parent.invocation_args().len(),
                };
                if !ordered.iter().any(|(_, m)| *m == use_) {
                    ordered.push((node.span.start, use_));
                }
            }
        }
    });

    ordered.sort_by_key(|(pos, _)| *pos);
    hint.is_receiver = !ordered.is_empty();
    hint.invoked_members = ordered.into_iter().map(|(_, m)| m).collect();
    hint
}

/// Context variables that appear as receivers of a call to the same member
/// (matched on name and arity) elsewhere in the file, in call-site order.
pub fn retrieve_identical_function_call(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
    member: &MemberUse,
) -> Vec<Candidate> {
    let available = get_available_variables(unit, table, region);
    let mut out: Vec<Candidate> = Vec::new();
    for node in unit.root.preorder() {
        if node.kind != SyntaxKind::MethodInvocation
            || node.name.as_deref() != Some(&member.name)
            || node.invocation_args().len() != member.arity
        {
            continue;
        }
        if !in_visible_context(region, unit, node.span) {
            continue;
        }
        let Some(recv) = node.receiver() else {
            continue;
        };
        if recv.kind != SyntaxKind::Identifier {
            continue;
        }
        let Some(recv_name) = recv.name.as_deref() else {
            continue;
        };
        let Some(binding) = table.resolve_at(recv_name, recv.span.start) else {
            continue;
        };
        if let Some(candidate) = available
            .iter()
            .find(|c| c.decl_span == Some(binding.decl_span))
        {
            if !out.iter().any(|c| c.name == candidate.name) {
                out.push(candidate.clone());
            }
        }
    }
    out
}

/// Keep candidates whose type name matches the expected type. Candidates or
/// expectations with unknown (opaque) types are presumed compatible and kept.
/// Output is a subsequence of the input.
pub fn reserve_type_compatible_ones(
    candidates: &[Candidate],
    expected: &TypeRef,
) -> Vec<Candidate> {
    candidates
        .iter()
        .filter(|c| type_compatible(&c.type_ref, expected))
        .cloned()
        .collect()
}

pub fn type_compatible(candidate: &TypeRef, expected: &TypeRef) -> bool {
    if !candidate.known || !expected.known {
        return true;
    }
    candidate.same_name(expected)
}

/// Strict compatibility used by the sufficiency rule: both sides known and
/// names matching, so opaque types never end an exploration early.
pub fn strictly_compatible(candidate: &TypeRef, expected: &TypeRef) -> bool {
    candidate.known && expected.known && candidate.same_name(expected)
}

/// Rank candidates by case-insensitive edit distance to `target`, ascending;
/// ties by distance to the region, then name.
pub fn sort_by_literal_similarity(candidates: &[Candidate], target: &str) -> Vec<SimilarityScore> {
    let mut scored: Vec<SimilarityScore> = candidates
        .iter()
        .map(|c| SimilarityScore {
            levenshtein: levenshtein::distance_case_insensitive(&c.name, target),
            normalized: levenshtein::normalized_case_insensitive(&c.name, target),
            candidate: c.clone(),
        })
        .collect();
    scored.sort_by(|a, b| {
        a.levenshtein
            .cmp(&b.levenshtein)
            .then(cmp_distance(
                a.candidate.distance_to_region,
                b.candidate.distance_to_region,
            ))
            .then(a.candidate.name.cmp(&b.candidate.name))
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

/// Member-call candidates of `class_name` whose return type matches the
/// expected type. Only zero-parameter members render as callable
/// substitutions: statics as `Class.member()`, instance members as
/// `recv.member()` through an in-scope receiver of that class.
pub fn get_method_names(
    unit: &SourceUnit,
    table: &SymbolTable,
    region: &AdaptationRegion,
    class_name: &str,
    expected: &TypeRef,
) -> Result<Vec<Candidate>> {
    let entry = table
        .class(class_name)
        .ok_or_else(|| Error::UnknownClass(class_name.to_string()))?;
    let available = get_available_variables(unit, table, region);
    let receiver = available.iter().find(|c| {
        c.is_variable() && {
            let simple = c.type_ref.simple_name();
            simple == class_name || simple == entry.name
        }
    });

    let mut out = Vec::new();
    for member in &entry.members {
        let ret = TypeRef {
            name: member.return_type.clone(),
            generics: None,
            known: table.is_known_type(&member.return_type),
        };
        if !ret.same_name(expected) || member.arity() != 0 {
            continue;
        }
        let render = if member.is_static {
            format!("{}.{}()", entry.name, member.name)
        } else if let Some(recv) = receiver {
            format!("{}.{}()", recv.name, member.name)
        } else {
            continue;
        };
        out.push(Candidate {
            name: render,
            kind: CandidateKind::MemberCall,
            type_ref: ret,
            decl_span: None,
            usage_count: 0,
            distance_to_region: None,
            member: Some(MemberRef {
                class_name: entry.name.clone(),
                member: member.clone(),
            }),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locate::{extract_region, identify_unresolved_elements};
    use crate::syntax::{build_symbol_table, parse_unit, StubLibrary};

    fn setup(text: &str, stubs: &str) -> (SourceUnit, SymbolTable, AdaptationRegion) {
        let (stripped, span) = extract_region(text).unwrap();
        let unit = parse_unit(&stripped, "Test.java");
        let stubs = if stubs.is_empty() {
            None
        } else {
            Some(StubLibrary::parse(stubs).unwrap())
        };
        let table = build_symbol_table(&unit, &[], stubs.as_ref());
        let region = AdaptationRegion::locate(&unit, span).unwrap();
        (unit, table, region)
    }

    fn element(
        unit: &SourceUnit,
        table: &SymbolTable,
        region: &AdaptationRegion,
        name: &str,
    ) -> UnresolvedElement {
        identify_unresolved_elements(unit, table, region)
            .into_iter()
            .find(|e| e.name == name)
            .unwrap_or_else(|| panic!("element {name} not found"))
    }

    #[test]
    fn available_includes_fields_params_and_prior_locals() {
        let text = r#"
class TagManager {
    private List<Tag> mTags;
    public void addTag(Tag tag) {
        String label = "x";
        // <start>
        list.add(tag);
        // <end>
        int after = 1;
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let names: Vec<String> = get_available_variables(&unit, &table, &region)
            .into_iter()
            .map(|c| c.name)
            .collect();
        assert_eq!(names, vec!["label", "tag", "mTags"]);
    }

    #[test]
    fn empty_context_yields_no_candidates() {
        let text = "class A { void m() { \n// <start>\n use(x);\n // <end>\n } }";
        let (unit, table, region) = setup(text, "");
        assert!(get_available_variables(&unit, &table, &region).is_empty());
    }

    #[test]
    fn local_declared_after_region_excluded() {
        let text = r#"
class A {
    void m() {
        int before = 1;
        // <start>
        use(x);
        // <end>
        int after = 2;
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let names: Vec<String> = get_available_variables(&unit, &table, &region)
            .into_iter()
            .map(|c| c.name)
            .collect();
        assert!(names.contains(&"before".to_string()));
        assert!(!names.contains(&"after".to_string()));
    }

    #[test]
    fn unused_variable_detection() {
        let text = r#"
class A {
    void m() {
        int a = 0;
        int readOnce = 1;
        int b = 0;
        use(readOnce);
        b = 5;
        // <start>
        use(x);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let unused: Vec<String> = get_unused_variables(&unit, &table, &region)
            .into_iter()
            .map(|c| c.name)
            .collect();
        assert!(
            unused.contains(&"a".to_string()),
            "never-mentioned is unused"
        );
        assert!(!unused.contains(&"readOnce".to_string()), "read counts");
        assert!(!unused.contains(&"b".to_string()), "write counts too");
    }

    #[test]
    fn argument_with_known_formal_infers_type_and_name() {
        let text = r#"
class ContentWriter {
    public void write(String content) {
        // <start>
        byte[] data = content.getBytes(encoding);
        // <end>
    }
}
"#;
        let stubs = "String#getBytes(Charset)->byte[]\nCharset#defaultCharset()->Charset,static\n";
        let (unit, table, region) = setup(text, stubs);
        let enc = element(&unit, &table, &region, "encoding");
        let hint = is_argument(&unit, &table, &enc);
        assert!(hint.is_argument);
        let expected = hint.expected_type.unwrap();
        assert_eq!(expected.name, "Charset");
        assert!(expected.known);
    }

    #[test]
    fn assignment_only_element_is_not_argument() {
        let text = r#"
class A {
    void m() {
        // <start>
        int v = ghost;
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let ghost = element(&unit, &table, &region, "ghost");
        let hint = is_argument(&unit, &table, &ghost);
        assert!(!hint.is_argument);
        assert!(hint.expected_type.is_none());
    }

    #[test]
    fn nested_call_reports_innermost_formal() {
        let text = r#"
class A {
    void f(String s) { }
    void g(int v) { }
    void m() {
        // <start>
        f(g(x));
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let x = element(&unit, &table, &region, "x");
        let hint = is_argument(&unit, &table, &x);
        assert!(hint.is_argument);
        assert_eq!(hint.expected_type.unwrap().name, "int");
        assert_eq!(hint.formal_parameter_name.as_deref(), Some("v"));
    }

    #[test]
    fn unknown_callee_still_flags_argument_without_type() {
        let text = r#"
class A {
    void m() {
        // <start>
        helperDoesNotExist(x);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let x = element(&unit, &table, &region, "x");
        let hint = is_argument(&unit, &table, &x);
        assert!(hint.is_argument);
        assert!(hint.expected_type.is_none());
    }

    #[test]
    fn receiver_detection_collects_members_in_order() {
        let text = r#"
class A {
    void m(List<Tag> t) {
        // <start>
        list.clear();
        list.addAll(t);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let list = element(&unit, &table, &region, "list");
        let hint = is_receiver(&unit, &list);
        assert!(hint.is_receiver);
        let members: Vec<&str> = hint
            .invoked_members
            .iter()
            .map(|m| m.name.as_str())
            .collect();
        assert_eq!(members, vec!["clear", "addAll"]);
        assert_eq!(hint.primary_member().unwrap().name, "clear");
        assert_eq!(hint.invoked_members[1].arity, 1);
    }

    #[test]
    fn argument_only_element_is_not_receiver() {
        let text = r#"
class A {
    void use(int x) { }
    void m() {
        // <start>
        use(ghost);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let ghost = element(&unit, &table, &region, "ghost");
        let hint = is_receiver(&unit, &ghost);
        assert!(!hint.is_receiver);
        assert!(hint.invoked_members.is_empty());
    }

    #[test]
    fn identical_call_finds_context_receivers() {
        let text = r#"
class CommentList {
    private ListView listView;
    private ListView sideView;
    private void reset() {
        listView.setSelection(0);
        sideView.setSelection(1);
    }
    public void restore(int target) {
        // <start>
        list.setSelection(target);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let found = retrieve_identical_function_call(
            &unit,
            &table,
            &region,
            &MemberUse {
                name: "setSelection".into(),
                arity: 1,
            },
        );
        let names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["listView", "sideView"]);
    }

    #[test]
    fn identical_call_without_match_is_empty() {
        let text = r#"
class A {
    void m() {
        // <start>
        list.setSelection(0);
        // <end>
    }
}
"#;
        let (unit, table, region) = setup(text, "");
        let found = retrieve_identical_function_call(
            &unit,
            &table,
            &region,
            &MemberUse {
                name: "setSelection".into(),
                arity: 1,
            },
        );
        assert!(found.is_empty());
    }

    #[test]
    fn type_filter_keeps_matches_and_opaque() {
        let mk = |name: &str, ty: &str, known: bool| Candidate {
            name: name.into(),
            kind: CandidateKind::Local,
            type_ref: TypeRef {
                name: ty.into(),
                generics: None,
                known,
            },
            decl_span: None,
            usage_count: 0,
            distance_to_region: Some(0),
            member: None,
        };
        let cands = vec![
            mk("s", "String", true),
            mk("n", "int", true),
            mk("t", "String", true),
            mk("o", "Opaque", false),
        ];
        let expected = TypeRef {
            name: "String".into(),
            generics: None,
            known: true,
        };
        let kept = reserve_type_compatible_ones(&cands, &expected);
        let names: Vec<&str> = kept.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["s", "t", "o"]);
        assert!(reserve_type_compatible_ones(&[], &expected).is_empty());
    }

    #[test]
    fn similarity_ranks_identical_first() {
        let mk = |name: &str, dist: usize| Candidate {
            name: name.into(),
            kind: CandidateKind::Local,
            type_ref: TypeRef::named("var"),
            decl_span: None,
            usage_count: 0,
            distance_to_region: Some(dist),
            member: None,
        };
        let cands = vec![mk("other", 5), mk("Target", 9), mk("targets", 1)];
        let ranked = sort_by_literal_similarity(&cands, "target");
        assert_eq!(ranked[0].candidate.name, "Target");
        assert_eq!(ranked[0].levenshtein, 0);
        assert_eq!(ranked[1].candidate.name, "targets");
    }

    #[test]
    fn method_names_via_stub_class() {
        let text = r#"
class ContentWriter {
    public void write(String content) {
        // <start>
        byte[] data = content.getBytes(encoding);
        // <end>
    }
}
"#;
        let stubs = "String#getBytes(Charset)->byte[]\nCharset#defaultCharset()->Charset,static\nCharset#forName(String)->Charset,static\n";
        let (unit, table, region) = setup(text, stubs);
        let expected = TypeRef {
            name: "Charset".into(),
            generics: None,
            known: true,
        };
        let found = get_method_names(&unit, &table, &region, "Charset", &expected).unwrap();
        let names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        // forName takes a parameter, so it cannot render as a substitution
        assert_eq!(names, vec!["Charset.defaultCharset()"]);
        assert_eq!(found[0].kind, CandidateKind::MemberCall);
    }

    #[test]
    fn method_names_instance_member_needs_receiver() {
        let text = r#"
class A {
    void m(Config base) {
        // <start>
        use(cfg);
        // <end>
    }
}
"#;
        let stubs = "Config#std()->Config,static\nConfig#copy()->Config\nConfig#size()->int\n";
        let (unit, table, region) = setup(text, stubs);
        let expected = TypeRef {
            name: "Config".into(),
            generics: None,
            known: true,
        };
        let found = get_method_names(&unit, &table, &region, "Config", &expected).unwrap();
        let names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["Config.std()", "base.copy()"]);
    }

    #[test]
    fn method_names_without_receiver_keeps_statics_only() {
        let text = "class A { void m() { \n// <start>\n use(cfg);\n // <end>\n } }";
        let stubs = "Config#std()->Config,static\nConfig#copy()->Config\n";
        let (unit, table, region) = setup(text, stubs);
        let expected = TypeRef {
            name: "Config".into(),
            generics: None,
            known: true,
        };
        let found = get_method_names(&unit, &table, &region, "Config", &expected).unwrap();
        let names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["Config.std()"]);
    }

    #[test]
    fn unknown_class_is_an_error() {
        let text = "class A { void m() { \n// <start>\n use(cfg);\n // <end>\n } }";
        let (unit, table, region) = setup(text, "");
        let expected = TypeRef::named("Ghost");
        let err = get_method_names(&unit, &table, &region, "Ghost", &expected).unwrap_err();
        assert!(matches!(err, Error::UnknownClass(_)));
    }
}
