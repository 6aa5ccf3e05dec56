use formalism_core::scenarios::Mode;

use crate::ast::*;
use crate::lexer::{escape, is_symbolic};

/// Canonical text: one declaration per line, single spaces, comments on
/// their own lines above the statement they precede.
pub fn format(ast: &ScenarioAst) -> String {
    let mut out = String::new();
    for d in &ast.declarations {
        for c in &d.comments {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&statement(&d.statement));
        out.push('\n');
    }
    for c in &ast.trailing_comments {
        out.push_str(c);
        out.push('\n');
    }
    out
}

/// Symbolic lexemes verbatim, plain decimals in shortest round-trip form.
pub fn number(n: &Number) -> String {
    if is_symbolic(&n.lexeme) {
        n.lexeme.clone()
    } else {
        format!("{}", n.value.re)
    }
}

pub fn ket_expr(e: &KetExpr) -> String {
    let mut s = String::new();
    for (i, t) in e.terms.iter().enumerate() {
        match (i, t.negated) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        if let Some(c) = &t.coefficient {
            s.push_str(&number(c));
        }
        s.push('|');
        s.push_str(&t.ket.text);
        s.push('>');
    }
    s
}

fn names(list: &[Name]) -> String {
    list.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(", ")
}

fn mode(m: &Option<Mode>) -> String {
    match m {
        Some(m) => format!(" via {}", m.as_str()),
        None => String::new(),
    }
}

fn as_name(n: &Option<Name>) -> String {
    match n {
        Some(n) => format!(" as {}", n.text),
        None => String::new(),
    }
}

pub fn statement(s: &Statement) -> String {
    match s {
        Statement::Space { name, dim } => format!("space {} dim {}", name.text, dim.value),
        Statement::Alias { name, vector, on } => {
            format!("alias {} = {} on {}", name.text, ket_expr(vector), names(on))
        }
        Statement::State { name, vector } => format!("state {} = {}", name.text, ket_expr(vector)),
        Statement::Measure {
            actor,
            on,
            basis,
            memory,
            mode: m,
        } => {
            let entries: Vec<String> = basis
                .iter()
                .map(|b| match &b.label {
                    Some(l) => format!("{}: {}", l.text, ket_expr(&b.vector)),
                    None => ket_expr(&b.vector),
                })
                .collect();
            format!(
                "measure {} on {} in basis {{ {} }}{}{}",
                actor.text,
                names(on),
                entries.join(", "),
                as_name(memory),
                mode(m)
            )
        }
        Statement::Prepare {
            factor,
            dim,
            control,
            branches,
        } => {
            let entries: Vec<String> = branches
                .iter()
                .map(|(l, v)| format!("{} -> {}", l.text, ket_expr(v)))
                .collect();
            format!(
                "prepare {} dim {} given {} {{ {} }}",
                factor.text,
                dim.value,
                control.text,
                entries.join(", ")
            )
        }
        Statement::Record {
            actor,
            statements,
            register,
            alphabet,
        } => {
            let entries: Vec<String> = statements
                .iter()
                .map(|(l, s)| format!("{} -> {}", l.text, escape(&s.value)))
                .collect();
            let mut out = format!(
                "record {} statements {{ {} }}{}",
                actor.text,
                entries.join(", "),
                as_name(register)
            );
            if let Some(a) = alphabet {
                let symbols: Vec<String> = a.iter().map(|s| escape(&s.value)).collect();
                out.push_str(&format!(" alphabet {{ {} }}", symbols.join(", ")));
            }
            out
        }
        Statement::Query { query, name } => {
            let body = match query {
                QueryAst::Prob { actor, outcome } => format!("prob {} {}", actor.text, outcome.text),
                QueryAst::ProbKet { vector, on } => format!("prob {} on {}", ket_expr(vector), names(on)),
                QueryAst::Joint { rows, columns } => format!("joint {} {}", rows.text, columns.text),
                QueryAst::Conditional {
                    target,
                    given,
                    mode: m,
                    recorded,
                } => format!(
                    "conditional {} given {}{}{}",
                    target.text,
                    given.text,
                    mode(m),
                    if *recorded { " recorded" } else { "" }
                ),
                QueryAst::Compare { target, given } => format!("compare {} given {}", target.text, given.text),
            };
            format!("query {body}{}", as_name(name))
        }
        Statement::Expect { query, body, tol } => {
            let mut out = match body {
                ExpectBody::Table(rows) => {
                    let rows: Vec<String> = rows
                        .iter()
                        .map(|r| {
                            let v: Vec<String> = r.values.iter().map(number).collect();
                            format!("{}: {}", r.label.text, v.join(", "))
                        })
                        .collect();
                    format!("expect table {} {{ {} }}", query.text, rows.join("; "))
                }
                ExpectBody::Value(v) => format!("expect value {} {}", query.text, number(v)),
            };
            if let Some(t) = tol {
                out.push_str(&format!(" tol {}", number(t)));
            }
            out
        }
    }
}
