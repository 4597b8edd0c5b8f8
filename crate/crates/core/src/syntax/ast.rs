//! Positioned syntax tree for the analyzed Java-like source subset.

use serde::{Deserialize, Serialize};

/// Half-open byte range into a source unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "span start must not exceed end");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, offset: usize) -> bool {
        offset >= self.start && offset < self.end
    }

    pub fn contains_span(&self, other: Span) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// 1-based line/column pair derived from byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCol {
    pub line: u32,
    pub col: u32,
}

/// Node kinds of the analyzed subset.
///
/// `OtherExpr` covers compound expressions (binary/unary operators, ternaries,
/// casts, array accesses) whose operator structure is not modeled; their
/// operand subexpressions appear as ordered children so reference and
/// argument analyses still see every identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntaxKind {
    CompilationUnit,
    Import,
    ClassDecl,
    FieldDecl,
    MethodDecl,
    Parameter,
    LocalVarDecl,
    Block,
    If,
    For,
    While,
    Try,
    Return,
    ExprStmt,
    Assignment,
    MethodInvocation,
    FieldAccess,
    Identifier,
    Literal,
    ObjectCreation,
    OtherExpr,
    ErrorRecovery,
}

impl std::fmt::Display for SyntaxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Reference to a type as written in source.
///
/// `name` is the base name with generic arguments stripped; `generics` keeps
/// the raw argument text unresolved. `known` is false as parsed and becomes
/// true once the symbol table finds the name among unit-declared classes, the
/// project index, the stub library, or the primitive types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRef {
    pub name: String,
    pub generics: Option<String>,
    pub known: bool,
}

impl TypeRef {
    pub fn named(name: impl Into<String>) -> Self {
        TypeRef {
            name: name.into(),
            generics: None,
            known: false,
        }
    }

    /// Last segment of a possibly qualified name.
    pub fn simple_name(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }

    /// Type-name equality used everywhere type compatibility is checked:
    /// full names equal, or simple names equal (so `java.nio.charset.Charset`
    /// matches `Charset`). Generic arguments are ignored.
    pub fn same_name(&self, other: &TypeRef) -> bool {
        self.name == other.name || self.simple_name() == other.simple_name()
    }
}

impl std::fmt::Display for TypeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.generics {
            Some(g) => write!(f, "{}<{}>", self.name, g),
            None => write!(f, "{}", self.name),
        }
    }
}

/// One node of the syntax tree.
///
/// Children are ordered by source position and nested within the parent span.
/// `name` holds declared names (classes, methods, fields, locals, parameters)
/// and referenced names (identifiers, invoked members, accessed fields);
/// `name_span` is where that name sits in the source. For `MethodInvocation`
/// and `FieldAccess`, the receiver (when present) is the single child whose
/// span ends before `name_span` starts; remaining children are arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: SyntaxKind,
    pub span: Span,
    pub name: Option<String>,
    pub name_span: Option<Span>,
    pub type_ref: Option<TypeRef>,
    /// `static` modifier on member declarations.
    pub is_static: bool,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    pub fn new(kind: SyntaxKind, span: Span) -> Self {
        SyntaxNode {
            kind,
            span,
            name: None,
            name_span: None,
            type_ref: None,
            is_static: false,
            children: Vec::new(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Receiver expression of a `MethodInvocation` or `FieldAccess`.
    pub fn receiver(&self) -> Option<&SyntaxNode> {
        if !matches!(
            self.kind,
            SyntaxKind::MethodInvocation | SyntaxKind::FieldAccess
        ) {
            return None;
        }
        let name_span = self.name_span?;
        self.children
            .first()
            .filter(|c| c.span.end <= name_span.start)
    }

    /// Argument expressions of a `MethodInvocation` (children minus receiver).
    pub fn invocation_args(&self) -> &[SyntaxNode] {
        if self.kind != SyntaxKind::MethodInvocation {
            return &[];
        }
        match self.receiver() {
            Some(_) => &self.children[1..],
            None => &self.children[..],
        }
    }

    /// Preorder traversal over this node and all descendants.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    /// Preorder walk that also exposes the ancestor chain (outermost first).
    pub fn walk_with_ancestors<'a>(
        &'a self,
        f: &mut impl FnMut(&'a SyntaxNode, &[&'a SyntaxNode]),
    ) {
        fn go<'a>(
            node: &'a SyntaxNode,
            ancestors: &mut Vec<&'a SyntaxNode>,
            f: &mut impl FnMut(&'a SyntaxNode, &[&'a SyntaxNode]),
        ) {
            f(node, ancestors);
            ancestors.push(node);
            for child in &node.children {
                go(child, ancestors, f);
            }
            ancestors.pop();
        }
        go(self, &mut Vec::new(), f);
    }

    /// Innermost descendant of the given kind whose span contains `span`.
    pub fn innermost_containing(&self, span: Span, kind: SyntaxKind) -> Option<&SyntaxNode> {
        let mut found = None;
        for node in self.preorder() {
            if node.kind == kind && node.span.contains_span(span) {
                found = Some(node);
            }
        }
        found
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a SyntaxNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a SyntaxNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// A recorded parse or binding problem. Parsing never aborts; problems are
/// collected here instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
    pub severity: Severity,
}

/// A parsed source file: full text, syntax tree, and diagnostics.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub root: SyntaxNode,
    pub diagnostics: Vec<Diagnostic>,
    line_starts: Vec<usize>,
}

impl SourceUnit {
    pub(crate) fn assemble(
        path: String,
        text: String,
        root: SyntaxNode,
        diagnostics: Vec<Diagnostic>,
    ) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        SourceUnit {
            path,
            text,
            root,
            diagnostics,
            line_starts,
        }
    }

    /// 1-based line/column of a byte offset.
    pub fn line_col(&self, offset: usize) -> LineCol {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        LineCol {
            line: line as u32 + 1,
            col: (offset - self.line_starts[line]) as u32 + 1,
        }
    }

    pub fn snippet(&self, span: Span) -> &str {
        &self.text[span.start.min(self.text.len())..span.end.min(self.text.len())]
    }

    /// Innermost method declaration whose span contains `span`.
    pub fn method_containing(&self, span: Span) -> Option<&SyntaxNode> {
        self.root.innermost_containing(span, SyntaxKind::MethodDecl)
    }

    /// All `ErrorRecovery` spans in the unit.
    pub fn recovery_spans(&self) -> Vec<Span> {
        self.root
            .preorder()
            .filter(|n| n.kind == SyntaxKind::ErrorRecovery)
            .map(|n| n.span)
            .collect()
    }
}
