//! Syntax frontend: lexer, error-tolerant parser, scopes, and symbol table
//! for the analyzed Java-like subset.

pub mod ast;
pub mod lexer;
mod parser;
pub mod symbols;

pub use ast::{Diagnostic, LineCol, Severity, SourceUnit, Span, SyntaxKind, SyntaxNode, TypeRef};
pub use parser::parse_unit;
pub use symbols::{
    build_symbol_table, references_of, Binding, BindingKind, ClassEntry, ClassOrigin, MemberSig,
    ParamSig, Scope, ScopeId, ScopeKind, StubLibrary, SymbolTable,
};
