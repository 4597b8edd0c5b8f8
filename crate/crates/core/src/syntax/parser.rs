//! Error-tolerant recursive-descent parser for the analyzed Java-like subset.
//!
//! Parsing never aborts: constructs outside the subset and outright garbage
//! are absorbed into `ErrorRecovery` nodes that skip to the next statement
//! boundary, so scopes and references around the breakage stay analyzable.

use super::ast::{Diagnostic, Severity, SourceUnit, Span, SyntaxKind, SyntaxNode, TypeRef};
use super::lexer::{lex, Keyword, Token, TokenKind};

/// Parse one source unit. The unit may be a whole class file or a bare
/// method/field sequence, which gets wrapped in a synthetic class named
/// `Snippet` so scope analysis has a class context either way.
pub fn parse_unit(text: &str, path: &str) -> SourceUnit {
    let lexed = lex(text);
    let mut parser = Parser {
        text,
        tokens: lexed.tokens,
        pos: 0,
        diagnostics: lexed.diagnostics,
    };
    let root = parser.compilation_unit();
    SourceUnit::assemble(path.to_string(), text.to_string(), root, parser.diagnostics)
}

struct Parser<'t> {
    text: &'t str,
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Token {
        self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn nth(&self, n: usize) -> Token {
        self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().is_eof()
    }

    fn advance(&mut self) -> Token {
        let t = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.peek().is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn token_text(&self, t: Token) -> &'t str {
        &self.text[t.span.start..t.span.end]
    }

    fn error(&mut self, span: Span, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            span,
            message: message.into(),
            severity: Severity::Error,
        });
    }

    fn warn(&mut self, span: Span, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            span,
            message: message.into(),
            severity: Severity::Warning,
        });
    }

    // ---- compilation unit ----------------------------------------------

    fn compilation_unit(&mut self) -> SyntaxNode {
        let mut root = SyntaxNode::new(SyntaxKind::CompilationUnit, Span::new(0, self.text.len()));
        let mut stray = Vec::new();

        while !self.at_eof() {
            let before = self.pos;
            let t = self.peek();
            match t.kind {
                TokenKind::Keyword(Keyword::Package) | TokenKind::Keyword(Keyword::Import) => {
                    root.children.push(self.directive());
                }
                _ => {
                    self.skip_annotations();
                    let mark = self.pos;
                    self.skip_modifiers();
                    if self.peek().is_keyword(Keyword::Class)
                        || self.peek().is_keyword(Keyword::Interface)
                    {
                        self.pos = mark;
                        root.children.push(self.class_decl());
                    } else if self.peek().is_keyword(Keyword::Enum) {
                        self.pos = mark;
                        root.children.push(self.opaque_braced("enum declaration"));
                    } else {
                        // bare member outside a class: collect into a
                        // synthetic wrapper so method-only input parses
                        self.pos = mark;
                        match self.class_member(None) {
                            Some(member) => stray.extend(member),
                            None => {
                                let rec = self.recover_statement();
                                stray.push(rec);
                            }
                        }
                    }
                }
            }
            if self.pos == before {
                // token fits no production and recovery stopped before it
                // (e.g. a stray closing brace): consume it as garbage
                let tok = self.advance();
                self.error(tok.span, "stray token at top level");
                stray.push(SyntaxNode::new(SyntaxKind::ErrorRecovery, tok.span));
            }
        }

        if !stray.is_empty() {
            let span = Span::new(
                stray.first().unwrap().span.start,
                stray.last().unwrap().span.end,
            );
            let mut wrapper = SyntaxNode::new(SyntaxKind::ClassDecl, span);
            wrapper.name = Some("Snippet".to_string());
            wrapper.children = stray;
            root.children.push(wrapper);
            root.children.sort_by_key(|c| c.span.start);
        }
        root
    }

    fn directive(&mut self) -> SyntaxNode {
        let start = self.peek().span.start;
        self.advance(); // package | import
        self.eat_keyword(Keyword::Static);
        let mut name = String::new();
        loop {
            let t = self.peek();
            match t.kind {
                TokenKind::Ident | TokenKind::Keyword(_) => {
                    name.push_str(self.token_text(t));
                    self.advance();
                }
                TokenKind::Punct(".") => {
                    name.push('.');
                    self.advance();
                }
                TokenKind::Punct("*") => {
                    name.push('*');
                    self.advance();
                }
                _ => break,
            }
        }
        let end = if self.peek().is_punct(";") {
            let t = self.advance();
            t.span.end
        } else {
            self.peek().span.start
        };
        let mut node = SyntaxNode::new(SyntaxKind::Import, Span::new(start, end));
        node.name = Some(name);
        node
    }

    fn skip_annotations(&mut self) {
        while self.peek().is_punct("@") {
            self.advance();
            if matches!(self.peek().kind, TokenKind::Ident | TokenKind::Keyword(_)) {
                self.advance();
                while self.eat_punct(".") {
                    if matches!(self.peek().kind, TokenKind::Ident) {
                        self.advance();
                    }
                }
                if self.peek().is_punct("(") {
                    self.skip_balanced("(", ")");
                }
            } else {
                // lone `@` is garbage, put it back for recovery
                self.pos -= 1;
                break;
            }
        }
    }

    fn skip_modifiers(&mut self) -> bool {
        let mut is_static = false;
        loop {
            self.skip_annotations();
            match self.peek().kind {
                TokenKind::Keyword(kw) if kw.is_modifier() => {
                    if kw == Keyword::Static {
                        is_static = true;
                    }
                    self.advance();
                }
                _ => break,
            }
        }
        is_static
    }

    /// Consume a balanced token run starting at the current `open` punct.
    fn skip_balanced(&mut self, open: &str, close: &str) -> Span {
        let start = self.peek().span.start;
        let mut depth = 0usize;
        let mut end = start;
        while !self.at_eof() {
            let t = self.peek();
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    end = t.span.end;
                    self.advance();
                    break;
                }
            }
            end = t.span.end;
            self.advance();
        }
        Span::new(start, end)
    }

    fn opaque_braced(&mut self, what: &str) -> SyntaxNode {
        let start = self.peek().span.start;
        while !self.at_eof() && !self.peek().is_punct("{") {
            self.advance();
        }
        let span = if self.peek().is_punct("{") {
            let body = self.skip_balanced("{", "}");
            Span::new(start, body.end)
        } else {
            Span::new(start, self.peek().span.start)
        };
        self.warn(
            span,
            format!("{what} is outside the analyzed subset; skipped"),
        );
        SyntaxNode::new(SyntaxKind::ErrorRecovery, span)
    }

    // ---- class declarations ---------------------------------------------

    fn class_decl(&mut self) -> SyntaxNode {
        let start = self.peek().span.start;
        self.skip_modifiers();
        self.advance(); // class | interface
        let (name, name_span) = if self.peek().kind == TokenKind::Ident {
            let t = self.advance();
            (Some(self.token_text(t).to_string()), Some(t.span))
        } else {
            (None, None)
        };
        if self.peek().is_punct("<") {
            self.try_generics();
        }
        while self.eat_keyword(Keyword::Extends) || self.eat_keyword(Keyword::Implements) {
            loop {
                self.parse_type();
                if !self.eat_punct(",") {
                    break;
                }
            }
        }

        let mut node = SyntaxNode::new(SyntaxKind::ClassDecl, Span::new(start, start));
        node.name = name;
        node.name_span = name_span;

        if self.eat_punct("{") {
            while !self.at_eof() && !self.peek().is_punct("}") {
                match self.class_member(node.name.as_deref()) {
                    Some(members) => node.children.extend(members),
                    None => {
                        let rec = self.recover_statement();
                        node.children.push(rec);
                    }
                }
            }
            let end = if self.peek().is_punct("}") {
                self.advance().span.end
            } else {
                self.peek().span.start
            };
            node.span = Span::new(start, end);
        } else {
            self.error(
                Span::new(start, self.peek().span.start),
                "expected class body",
            );
            node.span = Span::new(start, self.peek().span.start);
        }
        node
    }

    /// One class member, possibly expanding to several nodes (a field
    /// declaration with multiple declarators yields one node per name).
    fn class_member(&mut self, class_name: Option<&str>) -> Option<Vec<SyntaxNode>> {
        self.skip_annotations();
        let start = self.peek().span.start;
        let is_static = self.skip_modifiers();

        let t = self.peek();
        if t.is_keyword(Keyword::Class) || t.is_keyword(Keyword::Interface) {
            // nested classes are outside the subset
            return Some(vec![self.opaque_braced("nested type declaration")]);
        }
        if t.is_keyword(Keyword::Enum) {
            return Some(vec![self.opaque_braced("enum declaration")]);
        }
        if t.is_punct("{") {
            // instance/static initializer
            return Some(vec![self.block()]);
        }
        if t.is_punct(";") {
            self.advance();
            return Some(vec![]);
        }

        // constructor: bare class name followed by `(`
        if t.kind == TokenKind::Ident
            && Some(self.token_text(t)) == class_name
            && self.nth(1).is_punct("(")
        {
            let name_tok = self.advance();
            return Some(vec![self.method_rest(
                start,
                self.token_text(name_tok).to_string(),
                name_tok.span,
                TypeRef::named("void"),
                is_static,
            )?]);
        }

        if self.peek().is_punct("<") {
            self.try_generics(); // method type parameters
        }
        let ty = self.parse_type()?;
        let name_tok = self.peek();
        if name_tok.kind != TokenKind::Ident {
            return None;
        }
        let name = self.token_text(name_tok).to_string();
        self.advance();

        if self.peek().is_punct("(") {
            Some(vec![self.method_rest(
                start,
                name,
                name_tok.span,
                ty,
                is_static,
            )?])
        } else {
            self.field_rest(start, name, name_tok.span, ty, is_static)
        }
    }

    fn method_rest(
        &mut self,
        start: usize,
        name: String,
        name_span: Span,
        return_type: TypeRef,
        is_static: bool,
    ) -> Option<SyntaxNode> {
        let mut node = SyntaxNode::new(SyntaxKind::MethodDecl, Span::new(start, start));
        node.name = Some(name);
        node.name_span = Some(name_span);
        node.type_ref = Some(return_type);

        self.eat_punct("(");
        while !self.at_eof() && !self.peek().is_punct(")") {
            match self.parameter() {
                Some(p) => node.children.push(p),
                None => {
                    // skip to next parameter boundary
                    while !self.at_eof() && !self.peek().is_punct(",") && !self.peek().is_punct(")")
                    {
                        self.advance();
                    }
                }
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.eat_punct(")");

        if self.eat_keyword(Keyword::Throws) {
            loop {
                self.parse_type();
                if !self.eat_punct(",") {
                    break;
                }
            }
        }

        node.is_static = is_static;
        let end = if self.peek().is_punct("{") {
            let body = self.block();
            let end = body.span.end;
            node.children.push(body);
            end
        } else if self.peek().is_punct(";") {
            self.advance().span.end
        } else {
            self.error(
                Span::new(start, self.peek().span.start),
                "expected method body or `;`",
            );
            self.peek().span.start
        };
        node.span = Span::new(start, end);
        Some(node)
    }

    fn field_rest(
        &mut self,
        start: usize,
        first_name: String,
        first_name_span: Span,
        ty: TypeRef,
        is_static: bool,
    ) -> Option<Vec<SyntaxNode>> {
        let mut nodes = Vec::new();
        let mut name = first_name;
        let mut name_span = first_name_span;
        let mut decl_start = start;
        loop {
            // trailing array dims on the declarator: `int buf[]`
            while self.peek().is_punct("[") {
                self.advance();
                if !self.eat_punct("]") {
                    break;
                }
            }
            let mut node =
                SyntaxNode::new(SyntaxKind::FieldDecl, Span::new(decl_start, name_span.end));
            node.name = Some(name.clone());
            node.name_span = Some(name_span);
            node.type_ref = Some(ty.clone());
            node.is_static = is_static;
            if self.eat_punct("=") {
                if let Some(init) = self.initializer() {
                    node.span = Span::new(decl_start, init.span.end);
                    node.children.push(init);
                }
            }
            nodes.push(node);

            if self.eat_punct(",") {
                let t = self.peek();
                if t.kind == TokenKind::Ident {
                    self.advance();
                    name = self.token_text(t).to_string();
                    name_span = t.span;
                    decl_start = t.span.start;
                    continue;
                }
            }
            break;
        }
        if self.peek().is_punct(";") {
            let end = self.advance().span.end;
            if let Some(last) = nodes.last_mut() {
                last.span = Span::new(last.span.start, end);
            }
        }
        Some(nodes)
    }

    fn parameter(&mut self) -> Option<SyntaxNode> {
        self.skip_annotations();
        let start = self.peek().span.start;
        self.eat_keyword(Keyword::Final);
        let ty = self.parse_type()?;
        self.eat_punct("..."); // varargs
        let t = self.peek();
        if t.kind != TokenKind::Ident {
            return None;
        }
        self.advance();
        let mut node = SyntaxNode::new(SyntaxKind::Parameter, Span::new(start, t.span.end));
        node.name = Some(self.token_text(t).to_string());
        node.name_span = Some(t.span);
        node.type_ref = Some(ty);
        Some(node)
    }

    // ---- types ------------------------------------------------------------

    /// Parse a type reference; returns None without consuming a partial type
    /// when the tokens cannot be one.
    fn parse_type(&mut self) -> Option<TypeRef> {
        let mark = self.pos;
        let t = self.peek();
        let mut name = match t.kind {
            TokenKind::Keyword(kw) if kw.is_primitive_type() || kw == Keyword::Void => {
                self.advance();
                self.token_text(t).to_string()
            }
            TokenKind::Ident => {
                self.advance();
                let mut n = self.token_text(t).to_string();
                while self.peek().is_punct(".") && self.nth(1).kind == TokenKind::Ident {
                    self.advance();
                    let seg = self.advance();
                    n.push('.');
                    n.push_str(self.token_text(seg));
                }
                n
            }
            _ => return None,
        };

        // a `<` that fails the balanced scan was an operator, not generics
        let generics = if self.peek().is_punct("<") {
            self.try_generics()
        } else {
            None
        };

        // array dims
        let mut dims = 0;
        while self.peek().is_punct("[") && self.nth(1).is_punct("]") {
            self.advance();
            self.advance();
            dims += 1;
        }
        for _ in 0..dims {
            name.push_str("[]");
        }

        if name.is_empty() {
            self.pos = mark;
            return None;
        }
        Some(TypeRef {
            name,
            generics,
            known: false,
        })
    }

    /// Attempt to consume a balanced generic-argument run starting at `<`.
    /// `>>` and `>>>` tokens close two and three levels. Returns the raw text
    /// between the angle brackets, or None (nothing consumed) when the run is
    /// not generics.
    fn try_generics(&mut self) -> Option<String> {
        let mark = self.pos;
        let open = self.peek();
        if !open.is_punct("<") {
            return None;
        }
        self.advance();
        let content_start = self.peek().span.start;
        let mut depth: isize = 1;
        let mut content_end = content_start;
        while !self.at_eof() {
            let t = self.peek();
            let closers: isize = match t.kind {
                TokenKind::Punct("<") => {
                    depth += 1;
                    0
                }
                TokenKind::Punct(">") => 1,
                TokenKind::Punct(">>") => 2,
                TokenKind::Punct(">>>") => 3,
                TokenKind::Ident
                | TokenKind::Punct(",")
                | TokenKind::Punct(".")
                | TokenKind::Punct("?")
                | TokenKind::Punct("[")
                | TokenKind::Punct("]")
                | TokenKind::Keyword(Keyword::Extends)
                | TokenKind::Keyword(Keyword::Super) => 0,
                TokenKind::Keyword(kw) if kw.is_primitive_type() => 0,
                _ => {
                    self.pos = mark;
                    return None;
                }
            };
            if closers >= depth {
                // the closers that balance inner levels stay in the raw text
                content_end = t.span.start + (depth as usize - 1);
                depth = 0;
                self.advance();
                break;
            }
            depth -= closers;
            content_end = t.span.end;
            self.advance();
        }
        if depth > 0 {
            self.pos = mark;
            return None;
        }
        Some(self.text[content_start..content_end].trim().to_string())
    }

    // ---- statements ---------------------------------------------------------

    fn block(&mut self) -> SyntaxNode {
        let start = self.peek().span.start;
        let mut node = SyntaxNode::new(SyntaxKind::Block, Span::new(start, start));
        self.eat_punct("{");
        while !self.at_eof() && !self.peek().is_punct("}") {
            let before = self.pos;
            if let Some(stmts) = self.statement() {
                node.children.extend(stmts);
            } else {
                node.children.push(self.recover_statement());
            }
            if self.pos == before {
                // never loop without progress
                let rec = self.recover_statement();
                node.children.push(rec);
                if self.pos == before {
                    self.advance();
                }
            }
        }
        let end = if self.peek().is_punct("}") {
            self.advance().span.end
        } else {
            self.error(
                Span::new(start, self.peek().span.start),
                "unterminated block",
            );
            self.peek().span.start
        };
        node.span = Span::new(start, end);
        node
    }

    /// One statement; a local declaration with several declarators expands to
    /// several nodes. None means the tokens at point form no statement.
    fn statement(&mut self) -> Option<Vec<SyntaxNode>> {
        let t = self.peek();
        match t.kind {
            TokenKind::Punct("{") => Some(vec![self.block()]),
            TokenKind::Punct(";") => {
                self.advance();
                Some(vec![])
            }
            TokenKind::Keyword(Keyword::If) => Some(vec![self.if_statement()]),
            TokenKind::Keyword(Keyword::For) => Some(vec![self.for_statement()]),
            TokenKind::Keyword(Keyword::While) => Some(vec![self.while_statement()]),
            TokenKind::Keyword(Keyword::Do) => Some(vec![self.do_statement()]),
            TokenKind::Keyword(Keyword::Try) => Some(vec![self.try_statement()]),
            TokenKind::Keyword(Keyword::Return) => Some(vec![self.return_statement()]),
            TokenKind::Keyword(Keyword::Throw) => {
                let start = self.advance().span.start;
                let expr = self.expression()?;
                let end = self.end_of_statement(expr.span.end);
                let mut node = SyntaxNode::new(SyntaxKind::ExprStmt, Span::new(start, end));
                node.children.push(expr);
                Some(vec![node])
            }
            TokenKind::Keyword(Keyword::Break) | TokenKind::Keyword(Keyword::Continue) => {
                self.advance();
                if self.peek().kind == TokenKind::Ident {
                    self.advance(); // label
                }
                self.eat_punct(";");
                Some(vec![])
            }
            TokenKind::Keyword(Keyword::Switch) => {
                Some(vec![self.opaque_braced("switch statement")])
            }
            TokenKind::Keyword(Keyword::Synchronized) => {
                Some(vec![self.opaque_braced("synchronized statement")])
            }
            TokenKind::Punct("@") => None, // annotations cannot start a statement
            _ => {
                if let Some(decl) = self.try_local_decl() {
                    return Some(decl);
                }
                let expr = self.expression()?;
                let end = self.end_of_statement(expr.span.end);
                if expr.kind == SyntaxKind::Assignment {
                    let mut node = expr;
                    node.span = Span::new(node.span.start, end);
                    Some(vec![node])
                } else {
                    let mut node =
                        SyntaxNode::new(SyntaxKind::ExprStmt, Span::new(expr.span.start, end));
                    node.children.push(expr);
                    Some(vec![node])
                }
            }
        }
    }

    fn end_of_statement(&mut self, fallback: usize) -> usize {
        if self.peek().is_punct(";") {
            self.advance().span.end
        } else {
            self.error(
                Span::new(fallback, self.peek().span.start.max(fallback)),
                "expected `;`",
            );
            fallback
        }
    }

    /// Probe for `final? Type name (= init)? (, name (= init)?)* ;`.
    fn try_local_decl(&mut self) -> Option<Vec<SyntaxNode>> {
        let mark = self.pos;
        let start = self.peek().span.start;
        self.eat_keyword(Keyword::Final);
        let ty = match self.parse_type() {
            Some(t) => t,
            None => {
                self.pos = mark;
                return None;
            }
        };
        let name_tok = self.peek();
        if name_tok.kind != TokenKind::Ident {
            self.pos = mark;
            return None;
        }
        let after = self.nth(1);
        if !(after.is_punct("=")
            || after.is_punct(";")
            || after.is_punct(",")
            || after.is_punct("["))
        {
            self.pos = mark;
            return None;
        }
        self.advance();

        let mut nodes = Vec::new();
        let mut name = self.token_text(name_tok).to_string();
        let mut name_span = name_tok.span;
        let mut decl_start = start;
        loop {
            while self.peek().is_punct("[") {
                self.advance();
                if !self.eat_punct("]") {
                    break;
                }
            }
            let mut node = SyntaxNode::new(
                SyntaxKind::LocalVarDecl,
                Span::new(decl_start, name_span.end),
            );
            node.name = Some(name.clone());
            node.name_span = Some(name_span);
            node.type_ref = Some(ty.clone());
            if self.eat_punct("=") {
                if let Some(init) = self.initializer() {
                    node.span = Span::new(decl_start, init.span.end);
                    node.children.push(init);
                }
            }
            nodes.push(node);

            if self.eat_punct(",") {
                let t = self.peek();
                if t.kind == TokenKind::Ident {
                    self.advance();
                    name = self.token_text(t).to_string();
                    name_span = t.span;
                    decl_start = t.span.start;
                    continue;
                }
            }
            break;
        }
        if self.peek().is_punct(";") {
            let end = self.advance().span.end;
            if let Some(last) = nodes.last_mut() {
                last.span = Span::new(last.span.start, end);
            }
        }
        Some(nodes)
    }

    fn if_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // if
        let mut node = SyntaxNode::new(SyntaxKind::If, Span::new(start, start));
        if self.eat_punct("(") {
            if let Some(cond) = self.expression() {
                node.children.push(cond);
            }
            self.eat_punct(")");
        }
        let mut end = self.peek().span.start;
        if let Some(then) = self.statement() {
            if let Some(last) = then.last() {
                end = last.span.end;
            }
            node.children.extend(then);
        }
        if self.eat_keyword(Keyword::Else) {
            if let Some(els) = self.statement() {
                if let Some(last) = els.last() {
                    end = last.span.end;
                }
                node.children.extend(els);
            }
        }
        node.span = Span::new(start, end);
        node
    }

    fn while_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // while
        let mut node = SyntaxNode::new(SyntaxKind::While, Span::new(start, start));
        if self.eat_punct("(") {
            if let Some(cond) = self.expression() {
                node.children.push(cond);
            }
            self.eat_punct(")");
        }
        let mut end = self.peek().span.start;
        if let Some(body) = self.statement() {
            if let Some(last) = body.last() {
                end = last.span.end;
            }
            node.children.extend(body);
        }
        node.span = Span::new(start, end);
        node
    }

    // do-while is represented as a While node (same loop shape for analyses)
    fn do_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // do
        let mut node = SyntaxNode::new(SyntaxKind::While, Span::new(start, start));
        if let Some(body) = self.statement() {
            node.children.extend(body);
        }
        self.eat_keyword(Keyword::While);
        if self.eat_punct("(") {
            if let Some(cond) = self.expression() {
                node.children.push(cond);
            }
            self.eat_punct(")");
        }
        let end = if self.peek().is_punct(";") {
            self.advance().span.end
        } else {
            self.peek().span.start
        };
        node.span = Span::new(start, end);
        node
    }

    fn for_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // for
        let mut node = SyntaxNode::new(SyntaxKind::For, Span::new(start, start));
        if self.eat_punct("(") {
            // for-each probe: Type name : expr
            let mark = self.pos;
            let mut foreach = false;
            self.eat_keyword(Keyword::Final);
            if let Some(ty) = self.parse_type() {
                let t = self.peek();
                if t.kind == TokenKind::Ident && self.nth(1).is_punct(":") {
                    self.advance();
                    self.advance(); // `:`
                    let mut var = SyntaxNode::new(
                        SyntaxKind::LocalVarDecl,
                        Span::new(mark_span(self, mark), t.span.end),
                    );
                    var.name = Some(self.token_text(t).to_string());
                    var.name_span = Some(t.span);
                    var.type_ref = Some(ty);
                    node.children.push(var);
                    if let Some(iter) = self.expression() {
                        node.children.push(iter);
                    }
                    foreach = true;
                }
            }
            if !foreach {
                self.pos = mark;
                // classic: init? ; cond? ; update?
                if !self.peek().is_punct(";") {
                    if let Some(decl) = self.try_local_decl() {
                        node.children.extend(decl);
                    } else if let Some(e) = self.expression() {
                        node.children.push(e);
                        self.eat_punct(";");
                    }
                } else {
                    self.advance();
                }
                if !self.peek().is_punct(";") {
                    if let Some(cond) = self.expression() {
                        node.children.push(cond);
                    }
                }
                self.eat_punct(";");
                if !self.peek().is_punct(")") {
                    if let Some(update) = self.expression() {
                        node.children.push(update);
                    }
                }
            }
            self.eat_punct(")");
        }
        let mut end = self.peek().span.start;
        if let Some(body) = self.statement() {
            if let Some(last) = body.last() {
                end = last.span.end;
            }
            node.children.extend(body);
        }
        node.span = Span::new(start, end);
        node
    }

    fn try_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // try
        let mut node = SyntaxNode::new(SyntaxKind::Try, Span::new(start, start));
        if self.peek().is_punct("(") {
            // try-with-resources
            self.advance();
            while !self.at_eof() && !self.peek().is_punct(")") {
                if let Some(decl) = self.try_local_decl() {
                    node.children.extend(decl);
                } else if self.expression().is_none() {
                    self.advance();
                }
                self.eat_punct(";");
            }
            self.eat_punct(")");
        }
        let body = self.block();
        let mut end = body.span.end;
        node.children.push(body);
        while self.eat_keyword(Keyword::Catch) {
            self.eat_punct("(");
            // multi-catch `A | B e` keeps the first type
            if let Some(mut param) = self.parameter() {
                while self.eat_punct("|") {
                    self.parse_type();
                    if self.peek().kind == TokenKind::Ident {
                        let t = self.advance();
                        param.name = Some(self.token_text(t).to_string());
                        param.name_span = Some(t.span);
                        param.span = Span::new(param.span.start, t.span.end);
                    }
                }
                node.children.push(param);
            }
            self.eat_punct(")");
            let catch_body = self.block();
            end = catch_body.span.end;
            node.children.push(catch_body);
        }
        if self.eat_keyword(Keyword::Finally) {
            let fin = self.block();
            end = fin.span.end;
            node.children.push(fin);
        }
        node.span = Span::new(start, end);
        node
    }

    fn return_statement(&mut self) -> SyntaxNode {
        let start = self.advance().span.start; // return
        let mut node = SyntaxNode::new(SyntaxKind::Return, Span::new(start, start));
        let end = if self.peek().is_punct(";") {
            self.advance().span.end
        } else {
            match self.expression() {
                Some(expr) => {
                    let e = self.end_of_statement(expr.span.end);
                    node.children.push(expr);
                    e
                }
                None => self.end_of_statement(start),
            }
        };
        node.span = Span::new(start, end);
        node
    }

    /// Skip unparsable tokens up to the next statement boundary: consume
    /// through `;`, stop before `}`, or stop once a token that can start a
    /// statement follows at least one skipped token.
    fn recover_statement(&mut self) -> SyntaxNode {
        let start = self.peek().span.start;
        let mut end = start;
        let mut skipped = 0usize;
        while !self.at_eof() {
            let t = self.peek();
            if t.is_punct("}") {
                break;
            }
            if t.is_punct(";") {
                end = t.span.end;
                self.advance();
                break;
            }
            if skipped > 0 && can_start_statement(t) {
                break;
            }
            if t.is_punct("{") {
                let s = self.skip_balanced("{", "}");
                end = s.end;
                skipped += 1;
                continue;
            }
            if t.is_punct("(") {
                let s = self.skip_balanced("(", ")");
                end = s.end;
                skipped += 1;
                continue;
            }
            end = t.span.end;
            self.advance();
            skipped += 1;
        }
        let span = Span::new(start, end.max(start));
        self.error(span, "unparsable code skipped");
        SyntaxNode::new(SyntaxKind::ErrorRecovery, span)
    }

    // ---- expressions -----------------------------------------------------

    fn expression(&mut self) -> Option<SyntaxNode> {
        self.assignment()
    }

    fn assignment(&mut self) -> Option<SyntaxNode> {
        let lhs = self.ternary()?;
        let t = self.peek();
        let is_assign = matches!(
            t.kind,
            TokenKind::Punct("=")
                | TokenKind::Punct("+=")
                | TokenKind::Punct("-=")
                | TokenKind::Punct("*=")
                | TokenKind::Punct("/=")
                | TokenKind::Punct("%=")
                | TokenKind::Punct("&=")
                | TokenKind::Punct("|=")
                | TokenKind::Punct("^=")
                | TokenKind::Punct("<<=")
                | TokenKind::Punct(">>=")
                | TokenKind::Punct(">>>=")
        );
        if !is_assign {
            return Some(lhs);
        }
        let op_pos = self.pos;
        self.advance();
        let Some(rhs) = self.assignment() else {
            // keep the parsed lhs; the statement layer reports the leftover
            self.pos = op_pos;
            return Some(lhs);
        };
        let mut node = SyntaxNode::new(
            SyntaxKind::Assignment,
            Span::new(lhs.span.start, rhs.span.end),
        );
        node.children.push(lhs);
        node.children.push(rhs);
        Some(node)
    }

    fn ternary(&mut self) -> Option<SyntaxNode> {
        let cond = self.binary(0)?;
        if !self.peek().is_punct("?") {
            return Some(cond);
        }
        let op_pos = self.pos;
        self.advance();
        let branches = (|p: &mut Self| {
            let then = p.expression()?;
            p.eat_punct(":");
            let els = p.ternary()?;
            Some((then, els))
        })(self);
        let Some((then, els)) = branches else {
            self.pos = op_pos;
            return Some(cond);
        };
        let mut node = SyntaxNode::new(
            SyntaxKind::OtherExpr,
            Span::new(cond.span.start, els.span.end),
        );
        node.children.push(cond);
        node.children.push(then);
        node.children.push(els);
        Some(node)
    }

    fn binary(&mut self, min_level: u8) -> Option<SyntaxNode> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            let level = match t.kind {
                TokenKind::Punct("||") => 1,
                TokenKind::Punct("&&") => 2,
                TokenKind::Punct("|") => 3,
                TokenKind::Punct("^") => 4,
                TokenKind::Punct("&") => 5,
                TokenKind::Punct("==") | TokenKind::Punct("!=") => 6,
                TokenKind::Punct("<")
                | TokenKind::Punct(">")
                | TokenKind::Punct("<=")
                | TokenKind::Punct(">=") => 7,
                TokenKind::Keyword(Keyword::Instanceof) => 7,
                TokenKind::Punct("<<") | TokenKind::Punct(">>") | TokenKind::Punct(">>>") => 8,
                TokenKind::Punct("+") | TokenKind::Punct("-") => 9,
                TokenKind::Punct("*") | TokenKind::Punct("/") | TokenKind::Punct("%") => 10,
                _ => 0,
            };
            if level == 0 || level < min_level {
                return Some(lhs);
            }
            if t.is_keyword(Keyword::Instanceof) {
                self.advance();
                let ty = self.parse_type();
                let mut node = SyntaxNode::new(
                    SyntaxKind::OtherExpr,
                    Span::new(lhs.span.start, self.prev_end(lhs.span.end)),
                );
                node.type_ref = ty;
                node.children.push(lhs);
                lhs = node;
                continue;
            }
            let op_pos = self.pos;
            self.advance();
            let Some(rhs) = self.binary(level + 1) else {
                self.pos = op_pos;
                return Some(lhs);
            };
            let mut node = SyntaxNode::new(
                SyntaxKind::OtherExpr,
                Span::new(lhs.span.start, rhs.span.end),
            );
            node.children.push(lhs);
            node.children.push(rhs);
            lhs = node;
        }
    }

    fn prev_end(&self, fallback: usize) -> usize {
        if self.pos == 0 {
            return fallback;
        }
        self.tokens[self.pos - 1].span.end.max(fallback)
    }

    fn unary(&mut self) -> Option<SyntaxNode> {
        let t = self.peek();
        match t.kind {
            TokenKind::Punct("+")
            | TokenKind::Punct("-")
            | TokenKind::Punct("!")
            | TokenKind::Punct("~")
            | TokenKind::Punct("++")
            | TokenKind::Punct("--") => {
                let start = self.advance().span.start;
                let operand = self.unary()?;
                let mut node =
                    SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(start, operand.span.end));
                node.children.push(operand);
                Some(node)
            }
            TokenKind::Punct("(") => {
                if let Some(node) = self.try_cast() {
                    return Some(node);
                }
                self.postfix()
            }
            _ => self.postfix(),
        }
    }

    /// `(Type) operand`, taken only when the parenthesized run parses fully
    /// as a type and an operand follows.
    fn try_cast(&mut self) -> Option<SyntaxNode> {
        let mark = self.pos;
        let start = self.peek().span.start;
        self.advance(); // (
        let ty = match self.parse_type() {
            Some(t) => t,
            None => {
                self.pos = mark;
                return None;
            }
        };
        if !self.peek().is_punct(")") {
            self.pos = mark;
            return None;
        }
        self.advance();
        let next = self.peek();
        let operand_follows = matches!(
            next.kind,
            TokenKind::Ident
                | TokenKind::Number
                | TokenKind::Str
                | TokenKind::CharLit
                | TokenKind::Punct("(")
                | TokenKind::Keyword(Keyword::New)
                | TokenKind::Keyword(Keyword::This)
                | TokenKind::Keyword(Keyword::Super)
        ) && !next.is_punct(")");
        if !operand_follows {
            self.pos = mark;
            return None;
        }
        let operand = match self.unary() {
            Some(o) => o,
            None => {
                self.pos = mark;
                return None;
            }
        };
        let mut node = SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(start, operand.span.end));
        node.type_ref = Some(ty);
        node.children.push(operand);
        Some(node)
    }

    fn postfix(&mut self) -> Option<SyntaxNode> {
        let mut node = self.primary()?;
        loop {
            let t = self.peek();
            match t.kind {
                TokenKind::Punct(".") => {
                    let name_tok = self.nth(1);
                    if name_tok.kind == TokenKind::Ident
                        || name_tok.is_keyword(Keyword::This)
                        || name_tok.is_keyword(Keyword::Class)
                    {
                        self.advance(); // .
                        self.advance(); // name
                        let name = self.token_text(name_tok).to_string();
                        if self.peek().is_punct("(") {
                            let args = self.argument_list();
                            let end = self.prev_end(name_tok.span.end);
                            let mut call = SyntaxNode::new(
                                SyntaxKind::MethodInvocation,
                                Span::new(node.span.start, end),
                            );
                            call.name = Some(name);
                            call.name_span = Some(name_tok.span);
                            call.children.push(node);
                            call.children.extend(args);
                            node = call;
                        } else {
                            let mut access = SyntaxNode::new(
                                SyntaxKind::FieldAccess,
                                Span::new(node.span.start, name_tok.span.end),
                            );
                            access.name = Some(name);
                            access.name_span = Some(name_tok.span);
                            access.children.push(node);
                            node = access;
                        }
                    } else {
                        return Some(node);
                    }
                }
                TokenKind::Punct("[") => {
                    self.advance();
                    let index = self.expression();
                    let end = if self.peek().is_punct("]") {
                        self.advance().span.end
                    } else {
                        self.peek().span.start
                    };
                    let mut access =
                        SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(node.span.start, end));
                    access.children.push(node);
                    if let Some(ix) = index {
                        access.children.push(ix);
                    }
                    node = access;
                }
                TokenKind::Punct("++") | TokenKind::Punct("--") => {
                    let end = self.advance().span.end;
                    let mut post =
                        SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(node.span.start, end));
                    post.children.push(node);
                    node = post;
                }
                TokenKind::Punct("::") => {
                    self.advance();
                    let end = if matches!(
                        self.peek().kind,
                        TokenKind::Ident | TokenKind::Keyword(Keyword::New)
                    ) {
                        self.advance().span.end
                    } else {
                        self.peek().span.start
                    };
                    let mut mref =
                        SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(node.span.start, end));
                    mref.children.push(node);
                    node = mref;
                }
                _ => return Some(node),
            }
        }
    }

    fn argument_list(&mut self) -> Vec<SyntaxNode> {
        let mut args = Vec::new();
        self.eat_punct("(");
        while !self.at_eof() && !self.peek().is_punct(")") {
            match self.expression() {
                Some(arg) => args.push(arg),
                None => {
                    while !self.at_eof() && !self.peek().is_punct(",") && !self.peek().is_punct(")")
                    {
                        self.advance();
                    }
                }
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.eat_punct(")");
        args
    }

    fn initializer(&mut self) -> Option<SyntaxNode> {
        if self.peek().is_punct("{") {
            // array initializer: element expressions as children
            let start = self.advance().span.start;
            let mut node = SyntaxNode::new(SyntaxKind::OtherExpr, Span::new(start, start));
            while !self.at_eof() && !self.peek().is_punct("}") {
                match self.initializer() {
                    Some(e) => node.children.push(e),
                    None => {
                        self.advance();
                    }
                }
                if !self.eat_punct(",") {
                    break;
                }
            }
            let end = if self.peek().is_punct("}") {
                self.advance().span.end
            } else {
                self.peek().span.start
            };
            node.span = Span::new(start, end);
            Some(node)
        } else {
            self.expression()
        }
    }

    fn primary(&mut self) -> Option<SyntaxNode> {
        // lambda probes: `x -> ...` and `(params) -> ...` are opaque
        if let Some(node) = self.try_lambda() {
            return Some(node);
        }
        let t = self.peek();
        match t.kind {
            TokenKind::Number | TokenKind::Str | TokenKind::CharLit => {
                self.advance();
                let mut node = SyntaxNode::new(SyntaxKind::Literal, t.span);
                node.name = Some(self.token_text(t).to_string());
                Some(node)
            }
            TokenKind::Keyword(Keyword::True)
            | TokenKind::Keyword(Keyword::False)
            | TokenKind::Keyword(Keyword::Null) => {
                self.advance();
                let mut node = SyntaxNode::new(SyntaxKind::Literal, t.span);
                node.name = Some(self.token_text(t).to_string());
                Some(node)
            }
            TokenKind::Keyword(Keyword::This) | TokenKind::Keyword(Keyword::Super) => {
                self.advance();
                let mut node = SyntaxNode::new(SyntaxKind::Identifier, t.span);
                node.name = Some(self.token_text(t).to_string());
                node.name_span = Some(t.span);
                Some(node)
            }
            TokenKind::Ident => {
                self.advance();
                if self.peek().is_punct("(") {
                    // unqualified call: callee name is not a value reference
                    let args = self.argument_list();
                    let end = self.prev_end(t.span.end);
                    let mut call =
                        SyntaxNode::new(SyntaxKind::MethodInvocation, Span::new(t.span.start, end));
                    call.name = Some(self.token_text(t).to_string());
                    call.name_span = Some(t.span);
                    call.children.extend(args);
                    Some(call)
                } else {
                    let mut node = SyntaxNode::new(SyntaxKind::Identifier, t.span);
                    node.name = Some(self.token_text(t).to_string());
                    node.name_span = Some(t.span);
                    Some(node)
                }
            }
            TokenKind::Punct("(") => {
                // parenthesized expression is transparent
                self.advance();
                let inner = self.expression()?;
                self.eat_punct(")");
                Some(inner)
            }
            TokenKind::Keyword(Keyword::New) => self.object_creation(),
            TokenKind::Keyword(kw) if kw.is_primitive_type() => {
                // e.g. `int.class`; treat as an identifier-ish literal
                self.advance();
                let mut node = SyntaxNode::new(SyntaxKind::Literal, t.span);
                node.name = Some(self.token_text(t).to_string());
                Some(node)
            }
            _ => None,
        }
    }

    fn try_lambda(&mut self) -> Option<SyntaxNode> {
        let t = self.peek();
        let start = t.span.start;
        let is_lambda = if t.kind == TokenKind::Ident && self.nth(1).is_punct("->") {
            true
        } else if t.is_punct("(") {
            // scan ahead for `) ->`
            let mut i = self.pos;
            let mut depth = 0usize;
            let mut found = false;
            while i < self.tokens.len() {
                let tok = self.tokens[i];
                if tok.is_punct("(") {
                    depth += 1;
                } else if tok.is_punct(")") {
                    depth -= 1;
                    if depth == 0 {
                        found = i + 1 < self.tokens.len() && self.tokens[i + 1].is_punct("->");
                        break;
                    }
                } else if tok.is_eof() || tok.is_punct(";") || tok.is_punct("{") {
                    break;
                }
                i += 1;
            }
            found
        } else {
            false
        };
        if !is_lambda {
            return None;
        }

        // consume parameters and arrow
        if t.is_punct("(") {
            self.skip_balanced("(", ")");
        } else {
            self.advance();
        }
        self.eat_punct("->");
        // consume the body without interpreting it
        let end = if self.peek().is_punct("{") {
            self.skip_balanced("{", "}").end
        } else {
            let mut depth = 0usize;
            let mut end = self.peek().span.start;
            while !self.at_eof() {
                let tok = self.peek();
                if tok.is_punct("(") || tok.is_punct("[") {
                    depth += 1;
                } else if tok.is_punct(")") || tok.is_punct("]") {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                } else if (tok.is_punct(",") || tok.is_punct(";")) && depth == 0 {
                    break;
                }
                end = tok.span.end;
                self.advance();
            }
            end
        };
        let span = Span::new(start, end);
        self.warn(
            span,
            "lambda expression is outside the analyzed subset; skipped",
        );
        Some(SyntaxNode::new(SyntaxKind::ErrorRecovery, span))
    }

    fn object_creation(&mut self) -> Option<SyntaxNode> {
        let start = self.advance().span.start; // new
        let ty = self.parse_type()?;
        let mut node = SyntaxNode::new(SyntaxKind::ObjectCreation, Span::new(start, start));
        node.type_ref = Some(ty);
        let mut end;
        if self.peek().is_punct("(") {
            let args = self.argument_list();
            end = self.prev_end(start);
            node.children.extend(args);
            if self.peek().is_punct("{") {
                // anonymous class body is outside the subset
                let body = self.skip_balanced("{", "}");
                self.warn(
                    body,
                    "anonymous class body is outside the analyzed subset; skipped",
                );
                node.children
                    .push(SyntaxNode::new(SyntaxKind::ErrorRecovery, body));
                end = body.end;
            }
        } else if self.peek().is_punct("[") {
            while self.peek().is_punct("[") {
                self.advance();
                if !self.peek().is_punct("]") {
                    if let Some(dim) = self.expression() {
                        node.children.push(dim);
                    }
                }
                self.eat_punct("]");
            }
            end = self.prev_end(start);
            if self.peek().is_punct("{") {
                if let Some(init) = self.initializer() {
                    end = init.span.end;
                    node.children.push(init);
                }
            }
        } else {
            end = self.prev_end(start);
        }
        node.span = Span::new(start, end);
        Some(node)
    }
}

fn can_start_statement(t: Token) -> bool {
    match t.kind {
        TokenKind::Ident | TokenKind::Number | TokenKind::Str | TokenKind::CharLit => true,
        TokenKind::Punct("(") | TokenKind::Punct("{") | TokenKind::Punct(";") => true,
        TokenKind::Punct("++") | TokenKind::Punct("--") => true,
        TokenKind::Keyword(kw) => {
            kw.is_primitive_type()
                || matches!(
                    kw,
                    Keyword::If
                        | Keyword::Else
                        | Keyword::For
                        | Keyword::While
                        | Keyword::Do
                        | Keyword::Try
                        | Keyword::Return
                        | Keyword::Throw
                        | Keyword::Break
                        | Keyword::Continue
                        | Keyword::New
                        | Keyword::This
                        | Keyword::Super
                        | Keyword::Final
                        | Keyword::Switch
                        | Keyword::Synchronized
                )
        }
        _ => false,
    }
}

fn mark_span(p: &Parser<'_>, mark: usize) -> usize {
    p.tokens[mark.min(p.tokens.len() - 1)].span.start
}
