use formalism_core::scenarios::Mode;
use formalism_core::tensor::C64;

use crate::lexer::is_symbolic;

/// Start of a node in the source. Spans never take part in equality, so
/// trees parsed from differently laid out sources compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Number {
    pub lexeme: String,
    pub value: C64,
    pub span: Span,
}

impl PartialEq for Number {
    fn eq(&self, other: &Number) -> bool {
        let (a, b) = (is_symbolic(&self.lexeme), is_symbolic(&other.lexeme));
        a == b && self.value == other.value && (!a || self.lexeme == other.lexeme)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Int {
    pub value: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringLit {
    pub value: String,
    pub span: Span,
}

/// `[-] [coefficient] |ket>`; `ket` holds the text between the bars.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub negated: bool,
    pub coefficient: Option<Number>,
    pub ket: Name,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KetExpr {
    pub terms: Vec<Term>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisEntry {
    pub label: Option<Name>,
    pub vector: KetExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryAst {
    Prob { actor: Name, outcome: Name },
    ProbKet { vector: KetExpr, on: Vec<Name> },
    Joint { rows: Name, columns: Name },
    Conditional {
        target: Name,
        given: Name,
        mode: Option<Mode>,
        recorded: bool,
    },
    Compare { target: Name, given: Name },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectRow {
    pub label: Name,
    pub values: Vec<Number>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectBody {
    Table(Vec<ExpectRow>),
    Value(Number),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Space {
        name: Name,
        dim: Int,
    },
    Alias {
        name: Name,
        vector: KetExpr,
        on: Vec<Name>,
    },
    State {
        name: Name,
        vector: KetExpr,
    },
    Measure {
        actor: Name,
        on: Vec<Name>,
        basis: Vec<BasisEntry>,
        memory: Option<Name>,
        mode: Option<Mode>,
    },
    Prepare {
        factor: Name,
        dim: Int,
        control: Name,
        branches: Vec<(Name, KetExpr)>,
    },
    Record {
        actor: Name,
        statements: Vec<(Name, StringLit)>,
        register: Option<Name>,
        alphabet: Option<Vec<StringLit>>,
    },
    Query {
        query: QueryAst,
        name: Option<Name>,
    },
    Expect {
        query: Name,
        body: ExpectBody,
        tol: Option<Number>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    /// Comment lines that precede the statement, `#` included.
    pub comments: Vec<String>,
    pub statement: Statement,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioAst {
    pub declarations: Vec<Declaration>,
    pub trailing_comments: Vec<String>,
}

impl ScenarioAst {
    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.declarations.iter().map(|d| &d.statement)
    }

    pub fn count(&self, pred: impl Fn(&Statement) -> bool) -> usize {
        self.statements().filter(|s| pred(s)).count()
    }

    pub fn spaces(&self) -> usize {
        self.count(|s| matches!(s, Statement::Space { .. }))
    }

    pub fn states(&self) -> usize {
        self.count(|s| matches!(s, Statement::State { .. }))
    }

    pub fn events(&self) -> usize {
        self.count(|s| matches!(s, Statement::Measure { .. }))
    }

    pub fn queries(&self) -> usize {
        self.count(|s| matches!(s, Statement::Query { .. }))
    }
}
