//! Tokenizer and diagnostics shared by the architecture (`.spvizmodel`) and
//! visualization (`.spviz`) languages.
//!
//! Both languages are whitespace-insensitive, use `//` line comments and share
//! one identifier rule: a letter followed by letters, digits, `_` or `.`.
//! Qualified references such as `OSGi.Bundle.Dependency` therefore lex as a
//! single identifier and are split by the consumers.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based line/column position into a source text. Columns count characters,
/// not bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A value annotated with the position it was read from.
///
/// Positions do not take part in equality or ordering, so two models parsed
/// from differently formatted texts compare equal when their content agrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Located<T> {
    pub value: T,
    pub pos: Pos,
}

impl<T> Located<T> {
    pub fn new(value: T, pos: Pos) -> Self {
        Self { value, pos }
    }

    /// Wraps a value built programmatically rather than parsed.
    pub fn synthetic(value: T) -> Self {
        Self { value, pos: Pos::default() }
    }
}

impl<T: PartialEq> PartialEq for Located<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Eq> Eq for Located<T> {}

impl Located<String> {
    pub fn as_str(&self) -> &str {
        &self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
}

impl Diagnostic {
    pub fn error(pos: Pos, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, message: message.into(), line: pos.line, column: pos.column }
    }

    pub fn warning(pos: Pos, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, message: message.into(), line: pos.line, column: pos.column }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    /// Formats as `file:line:col: severity: message`.
    pub fn render(&self, file: &str) -> String {
        format!("{}:{}:{}: {}: {}", file, self.line, self.column, self.severity, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    Gt,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::Gt => f.write_str("`>`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic()
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

/// Splits `text` into tokens. Lexical errors are reported and the offending
/// character skipped, so the returned stream always ends with `Eof`.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos::new(line, column);
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    diags.push(Diagnostic::error(pos, "unexpected character `/`"));
                }
            }
            '{' => {
                bump!();
                tokens.push(Token { kind: TokenKind::LBrace, pos });
            }
            '}' => {
                bump!();
                tokens.push(Token { kind: TokenKind::RBrace, pos });
            }
            '>' => {
                bump!();
                tokens.push(Token { kind: TokenKind::Gt, pos });
            }
            '"' => {
                bump!();
                let mut value = String::new();
                let mut closed = false;
                while let Some(c) = bump!() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match bump!() {
                            Some(e @ ('"' | '\\')) => value.push(e),
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some(other) => {
                                value.push('\\');
                                value.push(other);
                            }
                            None => break,
                        },
                        '\n' => break,
                        c => value.push(c),
                    }
                }
                if closed {
                    tokens.push(Token { kind: TokenKind::Str(value), pos });
                } else {
                    diags.push(Diagnostic::error(pos, "unterminated string literal"));
                }
            }
            c if is_ident_start(c) => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_continue(c) {
                        break;
                    }
                    ident.push(c);
                    bump!();
                }
                tokens.push(Token { kind: TokenKind::Ident(ident), pos });
            }
            other => {
                bump!();
                diags.push(Diagnostic::error(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, pos: Pos::new(line, column) });
    (tokens, diags)
}

/// Marker for an aborted parse; the reason has already been pushed as a
/// diagnostic.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Abort;

pub(crate) type PResult<T> = Result<T, Abort>;

/// One-token-lookahead cursor over a token stream, shared by both parsers.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    index: usize,
    pub diags: Vec<Diagnostic>,
}

impl Cursor {
    pub fn new(text: &str) -> Self {
        let (tokens, diags) = tokenize(text);
        Self { tokens, index: 0, diags }
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.index]
    }

    pub fn peek_nth(&self, n: usize) -> &Token {
        let last = self.tokens.len() - 1;
        &self.tokens[(self.index + n).min(last)]
    }

    pub fn advance(&mut self) -> Token {
        let token = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        token
    }

    pub fn at_keyword(&self, keyword: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == keyword)
    }

    pub fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    pub fn fail<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let token = self.peek().clone();
        self.diags.push(Diagnostic::error(token.pos, format!("{}, found {}", message.into(), token.kind)));
        Err(Abort)
    }

    pub fn expect_keyword(&mut self, keyword: &str) -> PResult<Pos> {
        if self.at_keyword(keyword) {
            Ok(self.advance().pos)
        } else {
            self.fail(format!("expected `{keyword}`"))
        }
    }

    pub fn expect(&mut self, kind: TokenKind) -> PResult<Pos> {
        if self.at(&kind) {
            Ok(self.advance().pos)
        } else {
            self.fail(format!("expected {kind}"))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> PResult<Located<String>> {
        if let TokenKind::Ident(_) = &self.peek().kind {
            let token = self.advance();
            match token.kind {
                TokenKind::Ident(s) => Ok(Located::new(s, token.pos)),
                _ => unreachable!(),
            }
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    pub fn expect_string(&mut self, what: &str) -> PResult<Located<String>> {
        if let TokenKind::Str(_) = &self.peek().kind {
            let token = self.advance();
            match token.kind {
                TokenKind::Str(s) => Ok(Located::new(s, token.pos)),
                _ => unreachable!(),
            }
        } else {
            self.fail(format!("expected {what}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).0.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_qualified_names_as_one_identifier() {
        assert_eq!(
            kinds("connect OSGi.Bundle.Dependency"),
            vec![
                TokenKind::Ident("connect".into()),
                TokenKind::Ident("OSGi.Bundle.Dependency".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn chains_need_no_whitespace() {
        assert_eq!(
            kinds("A>B > C"),
            vec![
                TokenKind::Ident("A".into()),
                TokenKind::Gt,
                TokenKind::Ident("B".into()),
                TokenKind::Gt,
                TokenKind::Ident("C".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let (tokens, diags) = tokenize("// header\n  Foo { // trailing\n}");
        assert!(diags.is_empty());
        assert_eq!(tokens[0].pos, Pos::new(2, 3));
        assert_eq!(tokens[1].pos, Pos::new(2, 7));
        assert_eq!(tokens[2].pos, Pos::new(3, 1));
    }

    #[test]
    fn strings_and_errors() {
        let (tokens, diags) = tokenize("import \"a\\\"b.spvizmodel\" $");
        assert_eq!(tokens[1].kind, TokenKind::Str("a\"b.spvizmodel".into()));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].pos(), Pos::new(1, 26));

        let (_, diags) = tokenize("\"open");
        assert_eq!(diags[0].message, "unterminated string literal");
    }

    #[test]
    fn identifiers_start_with_a_letter() {
        let (tokens, diags) = tokenize("9lives");
        assert_eq!(diags.len(), 1);
        assert_eq!(tokens[0].kind, TokenKind::Ident("lives".into()));
    }
}
