//! A line-oriented language for measurement scenarios.
//!
//! ```text
//! space S dim 2
//! state phi = 1/sqrt(2)|0> + 1/sqrt(2)|1>
//! measure F on S in basis { u: |0>, d: |1> }
//! measure W on S, F in basis { p: 1/sqrt(2)|00> + 1/sqrt(2)|11>, m: 1/sqrt(2)|00> - 1/sqrt(2)|11> }
//! query conditional W given F via collapse as rule
//! expect table rule { u: 0.5, 0.5; d: 0.5, 0.5 }
//! ```
//!
//! [`parse_source`] turns text into a [`ScenarioAst`], [`elaborate`] checks
//! it and builds a [`Scenario`](formalism_core::scenarios::Scenario), and
//! [`format()`] prints an AST back in canonical form.

pub mod ast;
pub mod diagnostic;
pub mod elaborate;
pub mod format;
pub mod lexer;
pub mod parser;

pub use ast::ScenarioAst;
pub use diagnostic::{Diagnostic, Severity};
pub use elaborate::{elaborate, elaborate_named, load, LITERAL_TOL, MAX_DIM};
pub use format::format;
pub use lexer::{lex, tokenize, Token, TokenKind};
pub use parser::{parse, parse_source};
