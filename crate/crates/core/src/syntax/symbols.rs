//! Scope tree, symbol table, and class member index.
//!
//! Type knowledge comes in three tiers: classes declared in the analyzed
//! unit, classes indexed from sibling project files, and entries from an
//! optional stub library standing in for platform classes. Everything else is
//! an opaque external type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{Diagnostic, Severity, SourceUnit, Span, SyntaxKind, SyntaxNode, TypeRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScopeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeKind {
    Unit,
    Class,
    Method,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingKind {
    Local,
    Parameter,
    Field,
}

impl std::fmt::Display for BindingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BindingKind::Local => write!(f, "local"),
            BindingKind::Parameter => write!(f, "parameter"),
            BindingKind::Field => write!(f, "field"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub kind: BindingKind,
    pub decl_span: Span,
    pub type_ref: TypeRef,
    pub scope: ScopeId,
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub id: ScopeId,
    pub parent: Option<ScopeId>,
    pub kind: ScopeKind,
    pub span: Span,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSig {
    pub type_name: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberSig {
    pub name: String,
    pub params: Vec<ParamSig>,
    pub return_type: String,
    pub is_static: bool,
}

impl MemberSig {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassOrigin {
    Unit,
    Project,
    Stub,
}

#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub name: String,
    pub origin: ClassOrigin,
    pub members: Vec<MemberSig>,
}

/// Stub library: desk-scale substitute for an IDE's platform-class index.
///
/// Line-oriented text, one signature per line:
/// `ClassName#methodName(paramType,...)->ReturnType[,static]`.
/// Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, Default)]
pub struct StubLibrary {
    pub classes: BTreeMap<String, Vec<MemberSig>>,
}

impl StubLibrary {
    pub fn parse(text: &str) -> Result<StubLibrary> {
        let mut classes: BTreeMap<String, Vec<MemberSig>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = parse_stub_line(line).ok_or_else(|| {
                Error::Input(format!(
                    "stub library line {}: cannot parse `{line}`",
                    lineno + 1
                ))
            })?;
            classes.entry(entry.0).or_default().push(entry.1);
        }
        Ok(StubLibrary { classes })
    }

    pub fn load(path: &std::path::Path) -> Result<StubLibrary> {
        let bytes = std::fs::read(path).map_err(|e| {
            Error::Input(format!("cannot read stub library {}: {e}", path.display()))
        })?;
        let text = String::from_utf8(bytes).map_err(|e| {
            Error::Input(format!("stub library {} is not UTF-8: {e}", path.display()))
        })?;
        StubLibrary::parse(&text)
    }
}

fn parse_stub_line(line: &str) -> Option<(String, MemberSig)> {
    let (class_name, rest) = line.split_once('#')?;
    let (method_name, rest) = rest.split_once('(')?;
    let (params_raw, rest) = rest.split_once(')')?;
    let rest = rest.strip_prefix("->")?;
    let (return_type, is_static) = match rest.strip_suffix(",static") {
        Some(r) => (r, true),
        None => (rest, false),
    };
    if class_name.trim().is_empty()
        || method_name.trim().is_empty()
        || return_type.trim().is_empty()
    {
        return None;
    }
    let params = params_raw
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| ParamSig {
            type_name: p.to_string(),
            name: None,
        })
        .collect();
    Some((
        class_name.trim().to_string(),
        MemberSig {
            name: method_name.trim().to_string(),
            params,
            return_type: return_type.trim().to_string(),
            is_static,
        },
    ))
}

const PRIMITIVES: &[&str] = &[
    "int", "long", "short", "byte", "char", "boolean", "float", "double", "void", "String",
];

/// Scope tree plus class member index for one analyzed unit.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    scopes: Vec<Scope>,
    class_index: BTreeMap<String, ClassEntry>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SymbolTable {
    pub fn scope(&self, id: ScopeId) -> &Scope {
        &self.scopes[id.0]
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn class(&self, name: &str) -> Option<&ClassEntry> {
        self.class_index
            .get(name)
            .or_else(|| self.class_index.get(simple_name(name)))
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassEntry> {
        self.class_index.values()
    }

    /// Whether a type name resolves against the unit, project index, stubs,
    /// or the primitive types.
    pub fn is_known_type(&self, name: &str) -> bool {
        let base = name.trim_end_matches("[]");
        PRIMITIVES.contains(&base) || self.class(base).is_some()
    }

    /// Resolve a raw parsed type reference against the index.
    pub fn resolve_type(&self, ty: &TypeRef) -> TypeRef {
        TypeRef {
            name: ty.name.clone(),
            generics: ty.generics.clone(),
            known: self.is_known_type(&ty.name),
        }
    }

    /// Innermost scope whose span contains the offset.
    pub fn scope_at(&self, offset: usize) -> ScopeId {
        let mut best = ScopeId(0);
        let mut best_len = usize::MAX;
        for scope in &self.scopes {
            if scope.span.contains(offset) || (scope.kind == ScopeKind::Unit) {
                let len = scope.span.len();
                if scope.span.contains(offset) && len <= best_len {
                    best = scope.id;
                    best_len = len;
                }
            }
        }
        best
    }

    /// Innermost visible binding for `name` at `position`: locals only after
    /// their declaration ends, parameters and fields position-independent.
    pub fn resolve_at(&self, name: &str, position: usize) -> Option<&Binding> {
        self.resolve_from(self.scope_at(position), name, position)
    }

    pub fn resolve_from(&self, scope: ScopeId, name: &str, position: usize) -> Option<&Binding> {
        let mut current = Some(scope);
        while let Some(id) = current {
            let scope = self.scope(id);
            // reversed: within one scope the last declaration wins
            for binding in scope.bindings.iter().rev() {
                if binding.name != name {
                    continue;
                }
                if binding.kind == BindingKind::Local && binding.decl_span.end > position {
                    continue;
                }
                return Some(binding);
            }
            current = scope.parent;
        }
        None
    }

    /// Scope of the innermost method declaration containing the offset.
    pub fn method_scope_at(&self, offset: usize) -> Option<ScopeId> {
        let mut current = Some(self.scope_at(offset));
        while let Some(id) = current {
            if self.scope(id).kind == ScopeKind::Method {
                return Some(id);
            }
            current = self.scope(id).parent;
        }
        None
    }

    /// Whether `ancestor` is on the parent chain of `scope` (inclusive).
    pub fn scope_within(&self, scope: ScopeId, ancestor: ScopeId) -> bool {
        let mut current = Some(scope);
        while let Some(id) = current {
            if id == ancestor {
                return true;
            }
            current = self.scope(id).parent;
        }
        false
    }
}

fn simple_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

/// Build scopes, bindings, and the class index for `unit`, indexing classes
/// from `project_files` and merging `stubs` last so stub entries never shadow
/// project declarations.
pub fn build_symbol_table(
    unit: &SourceUnit,
    project_files: &[SourceUnit],
    stubs: Option<&StubLibrary>,
) -> SymbolTable {
    let mut builder = Builder {
        scopes: vec![Scope {
            id: ScopeId(0),
            parent: None,
            kind: ScopeKind::Unit,
            span: Span::new(0, unit.text.len()),
            bindings: Vec::new(),
        }],
        diagnostics: Vec::new(),
    };
    builder.walk(&unit.root, ScopeId(0));

    let mut class_index = BTreeMap::new();
    index_classes(&unit.root, ClassOrigin::Unit, &mut class_index);
    for file in project_files {
        index_classes(&file.root, ClassOrigin::Project, &mut class_index);
    }
    if let Some(stubs) = stubs {
        for (class, members) in &stubs.classes {
            let entry = class_index
                .entry(class.clone())
                .or_insert_with(|| ClassEntry {
                    name: class.clone(),
                    origin: ClassOrigin::Stub,
                    members: Vec::new(),
                });
            for member in members {
                let declared = entry
                    .members
                    .iter()
                    .any(|m| m.name == member.name && m.arity() == member.arity());
                if !declared {
                    entry.members.push(member.clone());
                }
            }
        }
    }

    let mut table = SymbolTable {
        scopes: builder.scopes,
        class_index,
        diagnostics: builder.diagnostics,
    };
    // resolve binding types now that the full index exists
    let known: Vec<bool> = table
        .scopes
        .iter()
        .flat_map(|s| s.bindings.iter())
        .map(|b| table.is_known_type(&b.type_ref.name))
        .collect();
    let mut i = 0;
    for scope in &mut table.scopes {
        for binding in &mut scope.bindings {
            binding.type_ref.known = known[i];
            i += 1;
        }
    }
    table
}

struct Builder {
    scopes: Vec<Scope>,
    diagnostics: Vec<Diagnostic>,
}

impl Builder {
    fn push_scope(&mut self, parent: ScopeId, kind: ScopeKind, span: Span) -> ScopeId {
        let id = ScopeId(self.scopes.len());
        self.scopes.push(Scope {
            id,
            parent: Some(parent),
            kind,
            span,
            bindings: Vec::new(),
        });
        id
    }

    fn bind(&mut self, scope: ScopeId, node: &SyntaxNode, kind: BindingKind) {
        let Some(name) = node.name.clone() else {
            return;
        };
        let decl_span = node.name_span.unwrap_or(node.span);
        let type_ref = node
            .type_ref
            .clone()
            .unwrap_or_else(|| TypeRef::named("var"));
        let duplicate = self.scopes[scope.0].bindings.iter().any(|b| b.name == name);
        if duplicate {
            self.diagnostics.push(Diagnostic {
                span: decl_span,
                message: format!("duplicate declaration of `{name}`; last one wins"),
                severity: Severity::Warning,
            });
        }
        self.scopes[scope.0].bindings.push(Binding {
            name,
            kind,
            decl_span,
            type_ref,
            scope,
        });
    }

    fn walk(&mut self, node: &SyntaxNode, scope: ScopeId) {
        match node.kind {
            SyntaxKind::ClassDecl => {
                let class_scope = self.push_scope(scope, ScopeKind::Class, node.span);
                for child in &node.children {
                    self.walk(child, class_scope);
                }
            }
            SyntaxKind::FieldDecl => {
                self.bind(scope, node, BindingKind::Field);
                for child in &node.children {
                    self.walk(child, scope);
                }
            }
            SyntaxKind::MethodDecl => {
                let method_scope = self.push_scope(scope, ScopeKind::Method, node.span);
                for child in &node.children {
                    match child.kind {
                        SyntaxKind::Parameter => {
                            self.bind(method_scope, child, BindingKind::Parameter)
                        }
                        _ => self.walk(child, method_scope),
                    }
                }
            }
            SyntaxKind::Block => {
                let block_scope = self.push_scope(scope, ScopeKind::Block, node.span);
                for child in &node.children {
                    self.walk(child, block_scope);
                }
            }
            SyntaxKind::LocalVarDecl => {
                self.bind(scope, node, BindingKind::Local);
                for child in &node.children {
                    self.walk(child, scope);
                }
            }
            SyntaxKind::For => {
                // loop variable lives in a scope covering the whole statement
                let for_scope = self.push_scope(scope, ScopeKind::Block, node.span);
                for child in &node.children {
                    self.walk(child, for_scope);
                }
            }
            SyntaxKind::Try => {
                let try_scope = self.push_scope(scope, ScopeKind::Block, node.span);
                let mut pending_param: Option<&SyntaxNode> = None;
                for child in &node.children {
                    match child.kind {
                        SyntaxKind::Parameter => pending_param = Some(child),
                        SyntaxKind::Block => {
                            // a catch parameter is visible only inside the
                            // catch block that follows it
                            if let Some(param) = pending_param.take() {
                                let catch_scope = self.push_scope(
                                    try_scope,
                                    ScopeKind::Block,
                                    Span::new(param.span.start, child.span.end),
                                );
                                self.bind(catch_scope, param, BindingKind::Parameter);
                                for stmt in &child.children {
                                    self.walk(stmt, catch_scope);
                                }
                            } else {
                                self.walk(child, try_scope);
                            }
                        }
                        _ => self.walk(child, try_scope),
                    }
                }
            }
            _ => {
                for child in &node.children {
                    self.walk(child, scope);
                }
            }
        }
    }
}

fn index_classes(root: &SyntaxNode, origin: ClassOrigin, index: &mut BTreeMap<String, ClassEntry>) {
    for node in root.preorder() {
        if node.kind != SyntaxKind::ClassDecl {
            continue;
        }
        let Some(class_name) = node.name.clone() else {
            continue;
        };
        let mut members = Vec::new();
        for member in &node.children {
            if member.kind != SyntaxKind::MethodDecl {
                continue;
            }
            let Some(name) = member.name.clone() else {
                continue;
            };
            if name == class_name {
                continue; // constructors are not member methods
            }
            let params = member
                .children
                .iter()
                .filter(|c| c.kind == SyntaxKind::Parameter)
                .map(|p| ParamSig {
                    type_name: p
                        .type_ref
                        .as_ref()
                        .map(|t| t.name.clone())
                        .unwrap_or_else(|| "var".to_string()),
                    name: p.name.clone(),
                })
                .collect();
            members.push(MemberSig {
                name,
                params,
                return_type: member
                    .type_ref
                    .as_ref()
                    .map(|t| t.name.clone())
                    .unwrap_or_else(|| "void".to_string()),
                is_static: member.is_static,
            });
        }
        match index.get_mut(&class_name) {
            Some(entry) if origin == ClassOrigin::Project && entry.origin == ClassOrigin::Unit => {
                // the analyzed unit wins over a same-named project class
            }
            Some(entry) => {
                entry.members.extend(members);
            }
            None => {
                index.insert(
                    class_name.clone(),
                    ClassEntry {
                        name: class_name,
                        origin,
                        members,
                    },
                );
            }
        }
    }
}

/// All identifier reference spans for `name` whose resolution lands in the
/// given scope, or that fail to resolve from inside it. Source order.
pub fn references_of(
    unit: &SourceUnit,
    table: &SymbolTable,
    name: &str,
    scope: ScopeId,
) -> Vec<Span> {
    let mut spans = Vec::new();
    for node in unit.root.preorder() {
        if node.kind != SyntaxKind::Identifier || node.name.as_deref() != Some(name) {
            continue;
        }
        let position = node.span.start;
        match table.resolve_at(name, position) {
            Some(binding) => {
                if binding.scope == scope {
                    spans.push(node.span);
                }
            }
            None => {
                if table.scope_within(table.scope_at(position), scope) {
                    spans.push(node.span);
                }
            }
        }
    }
    spans.sort();
    spans
}
