use formalism_core::tensor::C64;

use crate::diagnostic::Diagnostic;

pub const KEYWORDS: &[&str] = &[
    "space",
    "dim",
    "alias",
    "state",
    "on",
    "measure",
    "in",
    "basis",
    "as",
    "via",
    "collapse",
    "relative",
    "prepare",
    "given",
    "record",
    "statements",
    "alphabet",
    "query",
    "prob",
    "joint",
    "conditional",
    "compare",
    "recorded",
    "expect",
    "table",
    "value",
    "tol",
];

/// Keywords that can open a statement; the parser resynchronizes on them.
pub const STATEMENT_KEYWORDS: &[&str] = &["space", "alias", "state", "measure", "prepare", "record", "query", "expect"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Number,
    Operator,
    String,
    Punct,
    Ket,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Ident => "identifier",
            TokenKind::Number => "number",
            TokenKind::Operator => "operator",
            TokenKind::String => "string",
            TokenKind::Punct => "punctuation",
            TokenKind::Ket => "ket",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
    /// Character offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.is(TokenKind::Keyword, kw)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.is(TokenKind::Punct, p)
    }

    /// Decoded text of a string token, the inside of a ket token, the
    /// lexeme otherwise.
    pub fn text(&self) -> String {
        match self.kind {
            TokenKind::String => unescape(&self.lexeme),
            TokenKind::Ket => self.lexeme[1..self.lexeme.len() - 1].to_string(),
            _ => self.lexeme.clone(),
        }
    }
}

/// A `#` comment, kept so the formatter can reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub line: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Tokens, or every lexical error found.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let lexed = lex(source);
    if lexed.diagnostics.is_empty() {
        Ok(lexed.tokens)
    } else {
        Err(lexed.diagnostics)
    }
}

/// Lexes the whole input, skipping bad characters so later errors are
/// reported too.
pub fn lex(source: &str) -> Lexed {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        out: Lexed::default(),
    };
    lx.run();
    lx.out
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    out: Lexed,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn text(&self, start: usize) -> String {
        self.chars[start..self.pos].iter().collect()
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize, column: usize) {
        let lexeme = self.text(start);
        self.out.tokens.push(Token {
            kind,
            lexeme,
            line,
            column,
            offset: start,
        });
    }

    fn error(&mut self, msg: impl Into<String>, line: usize, column: usize) {
        self.out.diagnostics.push(Diagnostic::error(msg, line, column));
    }

    fn previous_is_value(&self) -> bool {
        match self.out.tokens.last() {
            Some(t) => matches!(t.kind, TokenKind::Number | TokenKind::Ident | TokenKind::Ket | TokenKind::String)
                || t.is_punct(")"),
            None => false,
        }
    }

    fn starts_sqrt(&self, k: usize) -> bool {
        let want = ['s', 'q', 'r', 't', '('];
        want.iter().enumerate().all(|(i, c)| self.peek(k + i) == Some(*c))
    }

    fn starts_atom(&self, k: usize) -> bool {
        match self.peek(k) {
            Some(c) if c.is_ascii_digit() => true,
            Some('.') => self.peek(k + 1).is_some_and(|c| c.is_ascii_digit()),
            Some('s') => self.starts_sqrt(k),
            _ => false,
        }
    }

    fn run(&mut self) {
        while let Some(c) = self.peek(0) {
            let (start, line, column) = (self.pos, self.line, self.column);
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while self.peek(0).is_some_and(|c| c != '\n') {
                    self.bump();
                }
                let text = self.text(start).trim_end().to_string();
                self.out.comments.push(Comment {
                    text,
                    line,
                    offset: start,
                });
            } else if self.starts_atom(0) || (c == '-' && !self.previous_is_value() && self.starts_atom(1)) {
                self.number(start, line, column);
            } else if is_ident_start(c) {
                while self.peek(0).is_some_and(is_ident_continue) {
                    self.bump();
                }
                let word = self.text(start);
                let kind = if KEYWORDS.contains(&word.as_str()) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                };
                self.push(kind, start, line, column);
            } else if c == '|' {
                self.ket(start, line, column);
            } else if c == '"' {
                self.string(start, line, column);
            } else if c == '-' && self.peek(1) == Some('>') {
                self.bump();
                self.bump();
                self.push(TokenKind::Operator, start, line, column);
            } else if matches!(c, '=' | '+' | '-' | '/') {
                self.bump();
                self.push(TokenKind::Operator, start, line, column);
            } else if matches!(c, '{' | '}' | '(' | ')' | ',' | ':' | ';') {
                self.bump();
                self.push(TokenKind::Punct, start, line, column);
            } else {
                self.bump();
                self.error(format!("illegal character `{}`", c.escape_debug()), line, column);
            }
        }
    }

    fn digits(&mut self) -> bool {
        let mut any = false;
        while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            any = true;
        }
        any
    }

    fn decimal(&mut self) -> bool {
        let int = self.digits();
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.digits();
        } else if !int {
            return false;
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let k = if matches!(self.peek(1), Some('+' | '-')) { 2 } else { 1 };
            if self.peek(k).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..k {
                    self.bump();
                }
                self.digits();
            }
        }
        true
    }

    fn atom(&mut self) -> Result<(), &'static str> {
        if self.starts_sqrt(0) {
            for _ in 0..5 {
                self.bump();
            }
            if !self.decimal() {
                return Err("expected a number inside `sqrt(`");
            }
            if self.peek(0) == Some('/') {
                self.bump();
                if !self.decimal() {
                    return Err("expected a denominator inside `sqrt(`");
                }
            }
            if self.peek(0) != Some(')') {
                return Err("expected `)` to close `sqrt(`");
            }
            self.bump();
            Ok(())
        } else if self.decimal() {
            Ok(())
        } else {
            Err("expected a number")
        }
    }

    fn number(&mut self, start: usize, line: usize, column: usize) {
        if self.peek(0) == Some('-') {
            self.bump();
        }
        let mut result = self.atom();
        if result.is_ok() && self.peek(0) == Some('/') && self.starts_atom(1) {
            self.bump();
            result = self.atom();
        }
        if let Err(msg) = result {
            self.error(msg, line, column);
            return;
        }
        if self.peek(0) == Some('i') && !self.peek(1).is_some_and(is_ident_continue) {
            self.bump();
        }
        self.push(TokenKind::Number, start, line, column);
    }

    fn ket(&mut self, start: usize, line: usize, column: usize) {
        self.bump();
        while self.peek(0).is_some_and(|c| is_ident_continue(c) || c == ',') {
            self.bump();
        }
        if self.peek(0) == Some('>') && self.pos > start + 1 {
            self.bump();
            self.push(TokenKind::Ket, start, line, column);
        } else {
            self.error("unterminated ket; expected `|digits>` or `|alias>`", line, column);
        }
    }

    fn string(&mut self, start: usize, line: usize, column: usize) {
        self.bump();
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    self.error("unterminated string", line, column);
                    return;
                }
                Some('\\') => {
                    self.bump();
                    if matches!(self.peek(0), Some('"' | '\\')) {
                        self.bump();
                    } else {
                        let (l, c) = (self.line, self.column);
                        self.error("unknown escape; only `\\\"` and `\\\\` are allowed", l, c);
                    }
                }
                Some('"') => {
                    self.bump();
                    self.push(TokenKind::String, start, line, column);
                    return;
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
    }
}

fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Quotes `s` as a string literal.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Value of a number lexeme: `[-] atom [/ atom] [i]` where an atom is a
/// decimal or `sqrt(decimal [/ decimal])`.
pub fn number_value(lexeme: &str) -> Option<C64> {
    let (neg, rest) = match lexeme.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, lexeme),
    };
    let (imag, rest) = match rest.strip_suffix('i') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    let (num, den) = split_fraction(rest);
    let mut v = atom_value(num)?;
    if let Some(d) = den {
        v /= atom_value(d)?;
    }
    if neg {
        v = -v;
    }
    if !v.is_finite() {
        return None;
    }
    Some(if imag { C64::new(0.0, v) } else { C64::new(v, 0.0) })
}

/// Splits on the `/` that is not inside `sqrt(...)`.
fn split_fraction(s: &str) -> (&str, Option<&str>) {
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => return (&s[..i], Some(&s[i + 1..])),
            _ => {}
        }
    }
    (s, None)
}

fn atom_value(s: &str) -> Option<f64> {
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let (n, d) = split_fraction(inner);
        let mut v: f64 = n.parse().ok()?;
        if let Some(d) = d {
            v /= d.parse::<f64>().ok()?;
        }
        Some(v.sqrt())
    } else {
        s.parse().ok()
    }
}

/// A lexeme is symbolic when it is more than a plain signed decimal.
pub fn is_symbolic(lexeme: &str) -> bool {
    lexeme.contains(['/', 's', 'i'])
}
