//! Full-fidelity lexer: every byte of the input lands in exactly one token's
//! full span (leading trivia attached), so token spans tile the source text.

use super::ast::{Diagnostic, Severity, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Class,
    Interface,
    Enum,
    Import,
    Package,
    Extends,
    Implements,
    Throws,
    Public,
    Private,
    Protected,
    Static,
    Final,
    Abstract,
    Native,
    Synchronized,
    Transient,
    Volatile,
    Strictfp,
    If,
    Else,
    For,
    While,
    Do,
    Switch,
    Case,
    Default,
    Break,
    Continue,
    Return,
    Try,
    Catch,
    Finally,
    Throw,
    New,
    This,
    Super,
    True,
    False,
    Null,
    Instanceof,
    Void,
    Int,
    Long,
    Short,
    Byte,
    Char,
    Boolean,
    Float,
    Double,
}

impl Keyword {
    fn lookup(text: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match text {
            "class" => Class,
            "interface" => Interface,
            "enum" => Enum,
            "import" => Import,
            "package" => Package,
            "extends" => Extends,
            "implements" => Implements,
            "throws" => Throws,
            "public" => Public,
            "private" => Private,
            "protected" => Protected,
            "static" => Static,
            "final" => Final,
            "abstract" => Abstract,
            "native" => Native,
            "synchronized" => Synchronized,
            "transient" => Transient,
            "volatile" => Volatile,
            "strictfp" => Strictfp,
            "if" => If,
            "else" => Else,
            "for" => For,
            "while" => While,
            "do" => Do,
            "switch" => Switch,
            "case" => Case,
            "default" => Default,
            "break" => Break,
            "continue" => Continue,
            "return" => Return,
            "try" => Try,
            "catch" => Catch,
            "finally" => Finally,
            "throw" => Throw,
            "new" => New,
            "this" => This,
            "super" => Super,
            "true" => True,
            "false" => False,
            "null" => Null,
            "instanceof" => Instanceof,
            "void" => Void,
            "int" => Int,
            "long" => Long,
            "short" => Short,
            "byte" => Byte,
            "char" => Char,
            "boolean" => Boolean,
            "float" => Float,
            "double" => Double,
            _ => return None,
        })
    }

    pub fn is_primitive_type(self) -> bool {
        use Keyword::*;
        matches!(
            self,
            Int | Long | Short | Byte | Char | Boolean | Float | Double
        )
    }

    pub fn is_modifier(self) -> bool {
        use Keyword::*;
        matches!(
            self,
            Public
                | Private
                | Protected
                | Static
                | Final
                | Abstract
                | Native
                | Synchronized
                | Transient
                | Volatile
                | Strictfp
                | Default
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword(Keyword),
    Number,
    Str,
    CharLit,
    Punct(&'static str),
    Unknown,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Core span, excluding leading trivia.
    pub span: Span,
    /// Start of the leading trivia run attached to this token.
    pub full_start: usize,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punct(q) if q == p)
    }

    pub fn is_keyword(&self, kw: Keyword) -> bool {
        self.kind == TokenKind::Keyword(kw)
    }

    pub fn is_eof(&self) -> bool {
        self.kind == TokenKind::Eof
    }
}

const PUNCTS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "->", "::", "<<", ">>", "(", ")", "{", "}", "[", "]", ";", ",",
    ".", "@", "?", ":", "=", "<", ">", "+", "-", "*", "/", "%", "!", "&", "|", "^", "~",
];

pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Tokenize the whole text. Never fails: bytes that fit no token class come
/// out as `Unknown` tokens for the parser's error recovery to absorb.
pub fn lex(text: &str) -> LexOutput {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pos = 0usize;

    while pos <= bytes.len() {
        let full_start = pos;
        pos = skip_trivia(bytes, pos);
        if pos >= bytes.len() {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: Span::new(bytes.len(), bytes.len()),
                full_start,
            });
            break;
        }

        let start = pos;
        let b = bytes[pos];
        let kind = if b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80 {
            pos = scan_word(text, pos);
            match Keyword::lookup(&text[start..pos]) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident,
            }
        } else if b.is_ascii_digit() {
            pos = scan_number(bytes, pos);
            TokenKind::Number
        } else if b == b'"' {
            let (end, closed) = scan_quoted(bytes, pos, b'"');
            pos = end;
            if !closed {
                diagnostics.push(Diagnostic {
                    span: Span::new(start, end),
                    message: "unterminated string literal".to_string(),
                    severity: Severity::Error,
                });
            }
            TokenKind::Str
        } else if b == b'\'' {
            let (end, closed) = scan_quoted(bytes, pos, b'\'');
            pos = end;
            if !closed {
                diagnostics.push(Diagnostic {
                    span: Span::new(start, end),
                    message: "unterminated character literal".to_string(),
                    severity: Severity::Error,
                });
            }
            TokenKind::CharLit
        } else if let Some(p) = match_punct(&text[pos..]) {
            pos += p.len();
            TokenKind::Punct(p)
        } else {
            pos += utf8_len(b);
            TokenKind::Unknown
        };

        tokens.push(Token {
            kind,
            span: Span::new(start, pos),
            full_start,
        });
    }

    LexOutput {
        tokens,
        diagnostics,
    }
}

fn utf8_len(first: u8) -> usize {
    match first {
        b if b >= 0xf0 => 4,
        b if b >= 0xe0 => 3,
        b if b >= 0xc0 => 2,
        _ => 1,
    }
}

fn skip_trivia(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() {
        match bytes[pos] {
            b if b.is_ascii_whitespace() => pos += 1,
            b'/' if pos + 1 < bytes.len() && bytes[pos + 1] == b'/' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b'/' if pos + 1 < bytes.len() && bytes[pos + 1] == b'*' => {
                pos += 2;
                while pos < bytes.len() {
                    if bytes[pos] == b'*' && pos + 1 < bytes.len() && bytes[pos + 1] == b'/' {
                        pos += 2;
                        break;
                    }
                    pos += 1;
                }
            }
            _ => break,
        }
    }
    pos
}

fn scan_word(text: &str, start: usize) -> usize {
    let bytes = text.as_bytes();
    let mut pos = start;
    while pos < bytes.len() {
        let b = bytes[pos];
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'$' {
            pos += 1;
        } else if b >= 0x80 {
            pos += utf8_len(b);
        } else {
            break;
        }
    }
    pos
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut pos = start;
    // hex / binary prefix
    if bytes[pos] == b'0'
        && pos + 1 < bytes.len()
        && matches!(bytes[pos + 1], b'x' | b'X' | b'b' | b'B')
    {
        pos += 2;
        while pos < bytes.len() && (bytes[pos].is_ascii_hexdigit() || bytes[pos] == b'_') {
            pos += 1;
        }
        if pos < bytes.len() && matches!(bytes[pos], b'l' | b'L') {
            pos += 1;
        }
        return pos;
    }
    while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
        pos += 1;
    }
    // fraction only when a digit follows the dot, so `1.size()` stays a call
    if pos + 1 < bytes.len() && bytes[pos] == b'.' && bytes[pos + 1].is_ascii_digit() {
        pos += 1;
        while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
            pos += 1;
        }
    }
    if pos < bytes.len() && matches!(bytes[pos], b'e' | b'E') {
        let mut p = pos + 1;
        if p < bytes.len() && matches!(bytes[p], b'+' | b'-') {
            p += 1;
        }
        if p < bytes.len() && bytes[p].is_ascii_digit() {
            pos = p;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
        }
    }
    if pos < bytes.len() && matches!(bytes[pos], b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
        pos += 1;
    }
    pos
}

fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> (usize, bool) {
    let mut pos = start + 1;
    while pos < bytes.len() {
        match bytes[pos] {
            b'\\' => pos = (pos + 2).min(bytes.len()),
            b'\n' => return (pos, false),
            b if b == quote => return (pos + 1, true),
            _ => pos += 1,
        }
    }
    (pos, false)
}

fn match_punct(rest: &str) -> Option<&'static str> {
    PUNCTS.iter().copied().find(|p| rest.starts_with(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn token_texts(text: &str) -> Vec<String> {
        lex(text)
            .tokens
            .iter()
            .filter(|t| !t.is_eof())
            .map(|t| text[t.span.start..t.span.end].to_string())
            .collect()
    }

    #[test]
    fn tokens_tile_the_source() {
        let text = "class A { /* c */ void m() { int x = 1; } } // tail";
        let out = lex(text);
        let mut rebuilt = String::new();
        for t in &out.tokens {
            rebuilt.push_str(&text[t.full_start..t.span.end]);
        }
        assert_eq!(rebuilt, text);
        assert_eq!(out.tokens.last().unwrap().kind, TokenKind::Eof);
    }

    #[test]
    fn keywords_and_identifiers_split() {
        let toks = token_texts("classy class forx for");
        assert_eq!(toks, vec!["classy", "class", "forx", "for"]);
        let out = lex("classy class");
        assert_eq!(out.tokens[0].kind, TokenKind::Ident);
        assert_eq!(out.tokens[1].kind, TokenKind::Keyword(Keyword::Class));
    }

    #[test]
    fn longest_punct_wins() {
        let out = lex(">>>= >>> >= >");
        let kinds: Vec<_> = out
            .tokens
            .iter()
            .filter_map(|t| match t.kind {
                TokenKind::Punct(p) => Some(p),
                _ => None,
            })
            .collect();
        assert_eq!(kinds, vec![">>>=", ">>>", ">=", ">"]);
    }

    #[test]
    fn number_dot_call_not_a_float() {
        let toks = token_texts("1.size 2.5");
        assert_eq!(toks, vec!["1", ".", "size", "2.5"]);
    }

    #[test]
    fn unterminated_string_reports_diagnostic() {
        let out = lex("String s = \"abc\nint x;");
        assert_eq!(out.diagnostics.len(), 1);
        assert!(out.diagnostics[0].message.contains("unterminated"));
    }

    #[test]
    fn garbage_bytes_become_unknown_tokens() {
        let out = lex("int x; ### int y;");
        let unknown = out
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Unknown)
            .count();
        assert_eq!(unknown, 3);
    }
}
