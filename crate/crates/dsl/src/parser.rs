use formalism_core::scenarios::Mode;

use crate::ast::*;
use crate::diagnostic::Diagnostic;
use crate::lexer::{lex, number_value, Comment, Token, TokenKind, STATEMENT_KEYWORDS};

type PResult<T> = Result<T, ()>;

/// Parses a token stream. Comments are not part of the stream, so the
/// result carries none; use [`parse_source`] to keep them.
pub fn parse(tokens: &[Token]) -> Result<ScenarioAst, Vec<Diagnostic>> {
    parse_with_comments(tokens, &[])
}

/// Lexes and parses, attaching each comment to the statement after it.
/// Lexical errors are reported first, then syntax errors.
pub fn parse_source(source: &str) -> Result<ScenarioAst, Vec<Diagnostic>> {
    let lexed = lex(source);
    match parse_with_comments(&lexed.tokens, &lexed.comments) {
        Ok(ast) if lexed.diagnostics.is_empty() => Ok(ast),
        Ok(_) => Err(lexed.diagnostics),
        Err(mut d) => {
            let mut all = lexed.diagnostics;
            all.append(&mut d);
            Err(all)
        }
    }
}

pub fn parse_with_comments(tokens: &[Token], comments: &[Comment]) -> Result<ScenarioAst, Vec<Diagnostic>> {
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let mut declarations = Vec::new();
    while p.pos < tokens.len() {
        let start = p.pos;
        match p.statement() {
            Ok(statement) => {
                let t = &tokens[start];
                declarations.push(Declaration {
                    comments: Vec::new(),
                    statement,
                    span: span_of(t),
                });
            }
            Err(()) => p.recover(start),
        }
    }
    if !p.diags.is_empty() {
        return Err(p.diags);
    }
    let mut ast = ScenarioAst {
        declarations,
        trailing_comments: Vec::new(),
    };
    for c in comments {
        match ast.declarations.iter_mut().find(|d| d.span.offset > c.offset) {
            Some(d) => d.comments.push(c.text.clone()),
            None => ast.trailing_comments.push(c.text.clone()),
        }
    }
    Ok(ast)
}

fn span_of(t: &Token) -> Span {
    Span {
        line: t.line,
        column: t.column,
        offset: t.offset,
    }
}

fn name_of(t: &Token) -> Name {
    Name {
        text: t.text(),
        span: span_of(t),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + k)
    }

    fn advance(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos)?;
        self.pos += 1;
        Some(t)
    }

    /// Position of the current token. When that token starts a later line,
    /// or there is none, the position just past the previous token.
    fn here(&self) -> (usize, usize) {
        let prev = self.pos.checked_sub(1).and_then(|i| self.tokens.get(i));
        let end_of = |t: &Token| (t.line, t.column + t.lexeme.chars().count());
        match (self.peek(), prev) {
            (Some(t), Some(p)) if t.line > p.line => end_of(p),
            (Some(t), _) => (t.line, t.column),
            (None, Some(p)) => end_of(p),
            (None, None) => (1, 1),
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!("{} `{}`", t.kind.as_str(), t.lexeme),
            None => "end of input".to_string(),
        }
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let (line, column) = self.here();
        let msg = format!("expected {expected}, found {}", self.found());
        self.diags.push(Diagnostic::error(msg, line, column));
        Err(())
    }

    fn fail_with<T>(&mut self, message: String, hint: Option<&str>) -> PResult<T> {
        let (line, column) = self.here();
        let mut d = Diagnostic::error(message, line, column);
        if let Some(h) = hint {
            d = d.with_hint(h);
        }
        self.diags.push(d);
        Err(())
    }

    fn not_a_statement<T>(&mut self, t: &Token) -> PResult<T> {
        let msg = format!("expected a statement, found {} `{}`", t.kind.as_str(), t.lexeme);
        self.diags.push(
            Diagnostic::error(msg, t.line, t.column)
                .with_hint("statements start with space, alias, state, measure, prepare, record, query or expect"),
        );
        Err(())
    }

    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.pos += 1;
        }
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && STATEMENT_KEYWORDS.contains(&t.lexeme.as_str()) {
                break;
            }
            self.pos += 1;
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_operator(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is(TokenKind::Operator, op))
    }

    fn at_statement_start(&self) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && STATEMENT_KEYWORDS.contains(&t.lexeme.as_str()))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.fail(&format!("`{p}`"))
        }
    }

    fn operator(&mut self, op: &str) -> PResult<()> {
        if self.at_operator(op) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("`{op}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok(name_of(t))
            }
            _ => self.fail(what),
        }
    }

    /// An outcome label: an identifier or a number such as `0`.
    fn label(&mut self) -> PResult<Name> {
        match self.peek() {
            Some(t) if matches!(t.kind, TokenKind::Ident | TokenKind::Number) => {
                self.pos += 1;
                Ok(name_of(t))
            }
            _ => self.fail("an outcome label"),
        }
    }

    fn number(&mut self) -> PResult<Number> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Number => match number_value(&t.lexeme) {
                Some(value) => {
                    self.pos += 1;
                    Ok(Number {
                        lexeme: t.lexeme.clone(),
                        value,
                        span: span_of(t),
                    })
                }
                None => self.fail_with(format!("number `{}` is not finite", t.lexeme), None),
            },
            _ => self.fail("a number"),
        }
    }

    fn int(&mut self) -> PResult<Int> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Number => match t.lexeme.parse::<usize>() {
                Ok(value) => {
                    self.pos += 1;
                    Ok(Int {
                        value,
                        span: span_of(t),
                    })
                }
                Err(_) => self.fail_with(
                    format!("expected a whole number, found `{}`", t.lexeme),
                    Some("dimensions are written as plain integers, e.g. `dim 2`"),
                ),
            },
            _ => self.fail("a dimension"),
        }
    }

    fn string(&mut self) -> PResult<StringLit> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::String => {
                self.pos += 1;
                Ok(StringLit {
                    value: t.text(),
                    span: span_of(t),
                })
            }
            _ => self.fail("a string"),
        }
    }

    fn name_list(&mut self) -> PResult<Vec<Name>> {
        let mut names = vec![self.ident("a factor label")?];
        while self.eat_punct(",") {
            names.push(self.ident("a factor label")?);
        }
        Ok(names)
    }

    fn mode(&mut self) -> PResult<Option<Mode>> {
        if !self.eat_keyword("via") {
            return Ok(None);
        }
        if self.eat_keyword("collapse") {
            Ok(Some(Mode::Collapse))
        } else if self.eat_keyword("relative") {
            Ok(Some(Mode::Relative))
        } else {
            self.fail("`collapse` or `relative`")
        }
    }

    fn alias_name(&mut self) -> PResult<Option<Name>> {
        if self.eat_keyword("as") {
            Ok(Some(self.ident("a name after `as`")?))
        } else {
            Ok(None)
        }
    }

    fn term(&mut self, negated: bool) -> PResult<Term> {
        let coefficient = if self.peek().is_some_and(|t| t.kind == TokenKind::Number) {
            Some(self.number()?)
        } else {
            None
        };
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ket => {
                self.pos += 1;
                Ok(Term {
                    negated,
                    coefficient,
                    ket: name_of(t),
                })
            }
            _ if coefficient.is_some() => self.fail("a ket after the coefficient"),
            _ => self.fail("a ket such as `|0>`"),
        }
    }

    fn ket_expr(&mut self) -> PResult<KetExpr> {
        let (line, column) = self.here();
        let offset = self.peek().map_or(0, |t| t.offset);
        let lead = if self.at_operator("-") {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut terms = vec![self.term(lead)?];
        loop {
            if self.at_operator("+") {
                self.pos += 1;
                terms.push(self.term(false)?);
            } else if self.at_operator("-") {
                self.pos += 1;
                terms.push(self.term(true)?);
            } else {
                break;
            }
        }
        Ok(KetExpr {
            terms,
            span: Span { line, column, offset },
        })
    }

    /// `{ item , item ... }`; running into a new statement or the end of
    /// input reports an unterminated list.
    fn braced<T>(&mut self, what: &str, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.punct("{")?;
        let mut items = Vec::new();
        loop {
            if self.eat_punct("}") {
                if items.is_empty() {
                    return self.fail_with(format!("empty {what}"), None);
                }
                return Ok(items);
            }
            if self.peek().is_none() || self.at_statement_start() {
                return self.fail_with(format!("unterminated {what}; expected `}}`"), None);
            }
            items.push(item(self)?);
            if !self.eat_punct(",") && !self.at_punct("}") {
                if self.peek().is_none() || self.at_statement_start() {
                    return self.fail_with(format!("unterminated {what}; expected `}}`"), None);
                }
                return self.fail("`,` or `}`");
            }
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let Some(t) = self.peek() else {
            return self.fail("a statement");
        };
        if t.kind != TokenKind::Keyword {
            return self.not_a_statement(t);
        }
        match t.lexeme.as_str() {
            "space" => {
                self.advance();
                let name = self.ident("a factor label")?;
                self.keyword("dim")?;
                let dim = self.int()?;
                Ok(Statement::Space { name, dim })
            }
            "alias" => {
                self.advance();
                let name = self.ident("an alias name")?;
                self.operator("=")?;
                let vector = self.ket_expr()?;
                self.keyword("on")?;
                let on = self.name_list()?;
                Ok(Statement::Alias { name, vector, on })
            }
            "state" => {
                self.advance();
                let name = self.ident("a state name")?;
                self.operator("=")?;
                let vector = self.ket_expr()?;
                Ok(Statement::State { name, vector })
            }
            "measure" => self.measure(),
            "prepare" => {
                self.advance();
                let factor = self.ident("a factor label")?;
                self.keyword("dim")?;
                let dim = self.int()?;
                self.keyword("given")?;
                let control = self.ident("an actor")?;
                let branches = self.braced("branch list", |p| {
                    let label = p.label()?;
                    p.operator("->")?;
                    Ok((label, p.ket_expr()?))
                })?;
                Ok(Statement::Prepare {
                    factor,
                    dim,
                    control,
                    branches,
                })
            }
            "record" => {
                self.advance();
                let actor = self.ident("an actor")?;
                self.keyword("statements")?;
                let statements = self.braced("statement list", |p| {
                    let label = p.label()?;
                    p.operator("->")?;
                    Ok((label, p.string()?))
                })?;
                let register = self.alias_name()?;
                let alphabet = if self.eat_keyword("alphabet") {
                    Some(self.braced("alphabet", |p| p.string())?)
                } else {
                    None
                };
                Ok(Statement::Record {
                    actor,
                    statements,
                    register,
                    alphabet,
                })
            }
            "query" => self.query(),
            "expect" => self.expect(),
            _ => self.not_a_statement(t),
        }
    }

    fn measure(&mut self) -> PResult<Statement> {
        self.advance();
        let actor = self.ident("an actor name")?;
        self.keyword("on")?;
        let on = self.name_list()?;
        if !(self.at_keyword("in") && self.peek_at(1).is_some_and(|t| t.is_keyword("basis"))) {
            return self.fail_with(
                format!("expected `in basis`, found {}", self.found()),
                Some("e.g. `measure F on S in basis { u: |0>, d: |1> }`"),
            );
        }
        self.pos += 2;
        let basis = self.braced("basis list", |p| {
            let labelled = p
                .peek()
                .is_some_and(|t| matches!(t.kind, TokenKind::Ident | TokenKind::Number))
                && p.peek_at(1).is_some_and(|t| t.is_punct(":"));
            let label = if labelled {
                let l = p.label()?;
                p.pos += 1;
                Some(l)
            } else {
                None
            };
            Ok(BasisEntry {
                label,
                vector: p.ket_expr()?,
            })
        })?;
        let memory = self.alias_name()?;
        let mode = self.mode()?;
        Ok(Statement::Measure {
            actor,
            on,
            basis,
            memory,
            mode,
        })
    }

    fn query(&mut self) -> PResult<Statement> {
        self.advance();
        let query = if self.eat_keyword("prob") {
            if self.peek().is_some_and(|t| t.kind == TokenKind::Ident) {
                let actor = self.ident("an actor")?;
                let outcome = self.label()?;
                QueryAst::Prob { actor, outcome }
            } else {
                let vector = self.ket_expr()?;
                self.keyword("on")?;
                QueryAst::ProbKet {
                    vector,
                    on: self.name_list()?,
                }
            }
        } else if self.eat_keyword("joint") {
            let rows = self.ident("an actor")?;
            let columns = self.ident("an actor")?;
            QueryAst::Joint { rows, columns }
        } else if self.eat_keyword("conditional") {
            let target = self.ident("an actor")?;
            self.keyword("given")?;
            let given = self.ident("an actor")?;
            let mode = self.mode()?;
            let recorded = self.eat_keyword("recorded");
            QueryAst::Conditional {
                target,
                given,
                mode,
                recorded,
            }
        } else if self.eat_keyword("compare") {
            let target = self.ident("an actor")?;
            self.keyword("given")?;
            let given = self.ident("an actor")?;
            QueryAst::Compare { target, given }
        } else {
            return self.fail("`prob`, `joint`, `conditional` or `compare`");
        };
        let name = self.alias_name()?;
        Ok(Statement::Query { query, name })
    }

    fn expect(&mut self) -> PResult<Statement> {
        self.advance();
        let body_kind = if self.eat_keyword("table") {
            true
        } else if self.eat_keyword("value") {
            false
        } else {
            return self.fail("`table` or `value`");
        };
        let query = self.ident("a query name")?;
        let body = if body_kind {
            self.punct("{")?;
            let mut rows = Vec::new();
            loop {
                if self.eat_punct("}") {
                    break;
                }
                if self.peek().is_none() || self.at_statement_start() {
                    return self.fail_with("unterminated table; expected `}`".into(), None);
                }
                let label = self.label()?;
                self.punct(":")?;
                let mut values = vec![self.number()?];
                while self.eat_punct(",") {
                    values.push(self.number()?);
                }
                rows.push(ExpectRow { label, values });
                if !self.eat_punct(";") && !self.at_punct("}") {
                    return self.fail("`;` or `}`");
                }
            }
            if rows.is_empty() {
                return self.fail_with("empty table".into(), None);
            }
            ExpectBody::Table(rows)
        } else {
            ExpectBody::Value(self.number()?)
        };
        let tol = if self.eat_keyword("tol") {
            Some(self.number()?)
        } else {
            None
        };
        Ok(Statement::Expect { query, body, tol })
    }
}
