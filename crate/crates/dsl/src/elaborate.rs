use std::collections::HashMap;

use formalism_core::formalisms::{ClassicalRegister, ObserverMemory, ProbabilityTable, ProjectiveMeasurement};
use formalism_core::scenarios::{
    ConditionalPreparation, EventMeasurement, Expectation, MeasurementEvent, Mode, Query, QueryKind, Record, Scenario,
    Step,
};
use formalism_core::tensor::{gram_matrix, inner_product, Ket, SpaceLayout, StateVector, C64};

use crate::ast::*;
use crate::diagnostic::Diagnostic;
use crate::format::ket_expr;
use crate::parser::parse_source;

/// Tolerance on literal amplitudes: norms and basis overlaps.
pub const LITERAL_TOL: f64 = 1e-8;
/// Largest total dimension a scenario may reach.
pub const MAX_DIM: usize = 4096;
const ALIAS_DEPTH: usize = 16;

/// Parses and elaborates `source`; the scenario takes `name`.
pub fn load(source: &str, name: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let ast = parse_source(source)?;
    elaborate_named(&ast, name)
}

pub fn elaborate(ast: &ScenarioAst) -> Result<Scenario, Vec<Diagnostic>> {
    elaborate_named(ast, "scenario")
}

pub fn elaborate_named(ast: &ScenarioAst, name: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let mut e = Elaborator::default();
    let scenario = e.run(ast, name);
    match scenario {
        Some(s) if e.diags.is_empty() => Ok(s),
        _ => {
            e.diags.sort_by_key(|d| (d.line, d.column));
            Err(e.diags)
        }
    }
}

struct Actor {
    outcomes: Vec<String>,
    /// Outcomes as written, without completion labels.
    declared: Vec<String>,
    recorded: bool,
}

struct Alias<'a> {
    on: Vec<String>,
    vector: &'a KetExpr,
}

#[derive(Default)]
struct Elaborator<'a> {
    diags: Vec<Diagnostic>,
    aliases: HashMap<String, Alias<'a>>,
    actors: HashMap<String, Actor>,
}

fn err_at(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(msg, span.line.max(1), span.column.max(1))
}

fn describe(layout: &SpaceLayout) -> String {
    let parts: Vec<String> = layout.factors().iter().map(|f| format!("{} (dim {})", f.label, f.dim)).collect();
    parts.join(", ")
}

fn orthonormalize(vectors: &[Ket]) -> Option<Vec<StateVector>> {
    let mut out: Vec<Ket> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let overlap = inner_product(u, &w).ok()?;
                w = w.add(&u.scale(-overlap)).ok()?;
            }
        }
        out.push(w.normalize().ok()?.into_ket());
    }
    out.into_iter().map(|k| StateVector::from_ket(k).ok()).collect()
}

impl<'a> Elaborator<'a> {
    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(err_at(span, msg));
    }

    fn run(&mut self, ast: &'a ScenarioAst, name: &str) -> Option<Scenario> {
        let mut factors: Vec<(String, usize)> = Vec::new();
        let mut records: HashMap<String, &'a Statement> = HashMap::new();
        for stmt in ast.statements() {
            match stmt {
                Statement::Space { name, dim } => {
                    if factors.iter().any(|(l, _)| *l == name.text) {
                        self.error(name.span, format!("factor `{}` declared twice", name.text));
                    } else if dim.value == 0 {
                        self.error(dim.span, "dimension must be positive");
                    } else {
                        factors.push((name.text.clone(), dim.value));
                    }
                }
                Statement::Alias { name, vector, on } => {
                    if self.aliases.contains_key(&name.text) {
                        self.error(name.span, format!("alias `{}` declared twice", name.text));
                    } else {
                        let on = on.iter().map(|n| n.text.clone()).collect();
                        self.aliases.insert(name.text.clone(), Alias { on, vector });
                    }
                }
                Statement::Record { actor, .. } => {
                    let previous = records.insert(actor.text.clone(), stmt);
                    if previous.is_some() {
                        self.error(actor.span, format!("second record for `{}`", actor.text));
                    }
                }
                _ => {}
            }
        }
        if factors.is_empty() {
            self.error(Span::default(), "no `space` declaration");
            return None;
        }
        let mut layout = match SpaceLayout::new(factors.iter().map(|(l, d)| (l.as_str(), *d))) {
            Ok(l) if l.dim() <= MAX_DIM => l,
            Ok(l) => {
                self.error(Span::default(), format!("state space of dimension {} exceeds {MAX_DIM}", l.dim()));
                return None;
            }
            Err(e) => {
                self.error(Span::default(), e.to_string());
                return None;
            }
        };
        let states: Vec<(&Name, &KetExpr)> = ast
            .statements()
            .filter_map(|s| match s {
                Statement::State { name, vector } => Some((name, vector)),
                _ => None,
            })
            .collect();
        let initial = match states.as_slice() {
            [] => {
                self.error(Span::default(), "no `state` declaration");
                None
            }
            [(_, v)] => self.normalized(v, &layout, "state"),
            [_, (second, _), ..] => {
                self.error(second.span, "only one `state` declaration is allowed");
                None
            }
        };

        let mut steps = Vec::new();
        for stmt in ast.statements() {
            match stmt {
                Statement::Measure { .. } => {
                    let record = match stmt {
                        Statement::Measure { actor, .. } => records.remove(&actor.text),
                        _ => None,
                    };
                    if let Some(step) = self.measure(stmt, record, &mut layout) {
                        steps.push(step);
                    }
                }
                Statement::Prepare { .. } => {
                    if let Some(step) = self.prepare(stmt, &mut layout) {
                        steps.push(step);
                    }
                }
                _ => {}
            }
        }
        let mut orphans: Vec<&Statement> = records.into_values().collect();
        orphans.sort_by_key(|s| match s {
            Statement::Record { actor, .. } => actor.span.offset,
            _ => 0,
        });
        for s in orphans {
            if let Statement::Record { actor, .. } = s {
                self.error(actor.span, format!("unknown actor {}", actor.text));
            }
        }

        let mut queries: Vec<(Query, Option<&Name>)> = Vec::new();
        for stmt in ast.statements() {
            if let Statement::Query { query, name } = stmt {
                if let Some(n) = name {
                    if queries.iter().any(|(q, _)| q.name.as_deref() == Some(n.text.as_str())) {
                        self.error(n.span, format!("query name `{}` used twice", n.text));
                        continue;
                    }
                }
                if let Some(kind) = self.query(query, &layout) {
                    let mut q = Query::new(kind);
                    q.name = name.as_ref().map(|n| n.text.clone());
                    queries.push((q, name.as_ref()));
                }
            }
        }
        let mut expected: Vec<String> = Vec::new();
        for stmt in ast.statements() {
            if let Statement::Expect { query, body, tol } = stmt {
                let Some((q, _)) = queries.iter_mut().find(|(q, _)| q.name.as_deref() == Some(query.text.as_str()))
                else {
                    self.error(query.span, format!("no query named `{}`", query.text));
                    continue;
                };
                if expected.contains(&query.text) {
                    self.error(query.span, format!("second expectation for `{}`", query.text));
                    continue;
                }
                expected.push(query.text.clone());
                let kind = q.kind.clone();
                if let Some(e) = self.expectation(&kind, query, body) {
                    q.expected = Some(e);
                }
                if let Some(t) = tol {
                    if t.value.im != 0.0 || t.value.re <= 0.0 {
                        self.error(t.span, "tolerance must be a positive real number");
                    } else {
                        q.tolerance = Some(t.value.re);
                    }
                }
            }
        }

        let initial = initial?;
        if !self.diags.is_empty() {
            return None;
        }
        let mut s = Scenario::new(name, initial);
        s.steps = steps;
        s.queries = queries.into_iter().map(|(q, _)| q).collect();
        if let Err(e) = s.validate() {
            self.error(Span::default(), e.to_string());
            return None;
        }
        Some(s)
    }

    /// Sum of the terms of `e` as a vector over `ctx`.
    fn resolve(&mut self, e: &KetExpr, ctx: &SpaceLayout, depth: usize) -> Option<Ket> {
        let mut amps = vec![C64::new(0.0, 0.0); ctx.dim()];
        for t in &e.terms {
            let mut c = t.coefficient.as_ref().map_or(C64::new(1.0, 0.0), |n| n.value);
            if t.negated {
                c = -c;
            }
            let text = &t.ket.text;
            if text.starts_with(|ch: char| ch.is_ascii_digit() || ch == ',') {
                let digits: Option<Vec<usize>> = if text.contains(',') {
                    text.split(',').map(|d| d.parse().ok()).collect()
                } else {
                    text.chars().map(|ch| ch.to_digit(10).map(|d| d as usize)).collect()
                };
                let dims = ctx.dims();
                let fits = digits
                    .as_ref()
                    .is_some_and(|d| d.len() == dims.len() && d.iter().zip(&dims).all(|(i, n)| i < n));
                if !fits {
                    self.error(
                        t.ket.span,
                        format!("ket |{text}> does not fit the factors {}", describe(ctx)),
                    );
                    return None;
                }
                let index = digits.unwrap().iter().zip(&dims).fold(0, |acc, (i, n)| acc * n + i);
                amps[index] += c;
            } else {
                let Some(alias) = self.aliases.get(text.as_str()) else {
                    self.error(t.ket.span, format!("unknown label `{text}`"));
                    return None;
                };
                let labels: Vec<&str> = ctx.labels().collect();
                if alias.on != labels {
                    let msg = format!("alias `{text}` lives on {}, not on {}", alias.on.join(", "), labels.join(", "));
                    self.error(t.ket.span, msg);
                    return None;
                }
                if depth >= ALIAS_DEPTH {
                    self.error(t.ket.span, format!("alias `{text}` refers to itself"));
                    return None;
                }
                let vector = alias.vector;
                let v = self.resolve(vector, ctx, depth + 1)?;
                for (a, x) in amps.iter_mut().zip(v.amplitudes().iter()) {
                    *a += c * x;
                }
            }
        }
        match Ket::new(ctx.clone(), amps) {
            Ok(k) => Some(k),
            Err(err) => {
                self.error(e.span, err.to_string());
                None
            }
        }
    }

    /// A state that must already be normalized up to the literal tolerance.
    fn normalized(&mut self, e: &KetExpr, ctx: &SpaceLayout, what: &str) -> Option<StateVector> {
        let k = self.resolve(e, ctx, 0)?;
        let norm = k.norm();
        if (norm - 1.0).abs() > LITERAL_TOL {
            self.diags.push(
                err_at(e.span, format!("amplitude normalization failure: {what} has norm {norm}"))
                    .with_hint("squared moduli of the amplitudes must sum to 1"),
            );
            return None;
        }
        let k = if (norm - 1.0).abs() > 1e-13 { k.normalize().ok()?.into_ket() } else { k };
        StateVector::from_ket(k).ok()
    }

    fn factors(&mut self, names: &[Name], layout: &SpaceLayout) -> Option<SpaceLayout> {
        let mut ok = true;
        for (i, n) in names.iter().enumerate() {
            if !layout.contains(&n.text) {
                self.error(n.span, format!("unknown label `{}`", n.text));
                ok = false;
            } else if names[..i].iter().any(|m| m.text == n.text) {
                self.error(n.span, format!("factor `{}` listed twice", n.text));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        let labels: Vec<&str> = names.iter().map(|n| n.text.as_str()).collect();
        layout.select(&labels).ok()
    }

    fn extend(&mut self, layout: &mut SpaceLayout, extra: &SpaceLayout, span: Span) -> bool {
        match layout.concat(extra) {
            Ok(l) if l.dim() <= MAX_DIM => {
                *layout = l;
                true
            }
            Ok(l) => {
                self.error(span, format!("state space of dimension {} exceeds {MAX_DIM}", l.dim()));
                false
            }
            Err(e) => {
                self.error(span, e.to_string());
                false
            }
        }
    }

    fn measure(&mut self, stmt: &Statement, record: Option<&Statement>, layout: &mut SpaceLayout) -> Option<Step> {
        let Statement::Measure {
            actor,
            on,
            basis,
            memory,
            mode,
        } = stmt
        else {
            return None;
        };
        if self.actors.contains_key(&actor.text) {
            self.error(actor.span, format!("duplicate actor `{}`", actor.text));
            return None;
        }
        let ctx = self.factors(on, layout)?;
        let labelled = basis.iter().filter(|b| b.label.is_some()).count();
        if labelled != 0 && labelled != basis.len() {
            self.error(actor.span, "label every basis vector or none of them");
            return None;
        }
        let labels: Vec<String> = basis
            .iter()
            .enumerate()
            .map(|(i, b)| b.label.as_ref().map_or_else(|| i.to_string(), |l| l.text.clone()))
            .collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                let span = basis[i].label.as_ref().map_or(actor.span, |n| n.span);
                self.error(span, format!("outcome `{l}` appears twice"));
                return None;
            }
        }
        if basis.len() > ctx.dim() {
            self.error(
                actor.span,
                format!("{} basis vectors for a space of dimension {}", basis.len(), ctx.dim()),
            );
            return None;
        }
        let mut vectors = Vec::new();
        for b in basis {
            vectors.push(self.resolve(&b.vector, &ctx, 0)?);
        }
        let gram = gram_matrix(&vectors).ok()?;
        let mut worst: Option<(f64, usize, usize)> = None;
        for i in 0..vectors.len() {
            for j in i..vectors.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (gram[(i, j)] - C64::new(target, 0.0)).norm();
                if dev > LITERAL_TOL && worst.is_none_or(|(w, _, _)| dev > w) {
                    worst = Some((dev, i, j));
                }
            }
        }
        if let Some((_, i, j)) = worst {
            let msg = if i == j {
                format!(
                    "non-orthonormal basis: vector `{}` has norm {}",
                    labels[i],
                    gram[(i, i)].re.sqrt()
                )
            } else {
                format!(
                    "non-orthonormal basis: vectors `{}` and `{}` overlap (|<{}|{}>| = {})",
                    labels[i],
                    labels[j],
                    labels[i],
                    labels[j],
                    gram[(i, j)].norm()
                )
            };
            self.diags.push(err_at(basis[j].vector.span, msg));
            return None;
        }
        let states = if formalism_core::tensor::orthonormality_deviation(&gram) > 1e-12 {
            orthonormalize(&vectors)?
        } else {
            vectors.into_iter().map(|k| StateVector::from_ket(k).ok()).collect::<Option<Vec<_>>>()?
        };
        let built = ProjectiveMeasurement::new(labels.iter().cloned().zip(states).collect())
            .and_then(|m| m.completed());
        let measurement = match built {
            Ok(m) => m,
            Err(e) => {
                self.error(actor.span, e.to_string());
                return None;
            }
        };
        let outcomes = measurement.labels();
        let mem_name = memory.as_ref().unwrap_or(actor);
        if layout.contains(&mem_name.text) {
            self.error(mem_name.span, format!("memory `{}` would reuse an existing factor", mem_name.text));
            return None;
        }
        let memory = match ObserverMemory::for_outcomes(&actor.text, &mem_name.text, &outcomes) {
            Ok(m) => m,
            Err(e) => {
                self.error(mem_name.span, e.to_string());
                return None;
            }
        };
        if !self.extend(layout, memory.layout(), mem_name.span) {
            return None;
        }
        let record = match record {
            Some(r) => Some(self.record(r, &labels, &outcomes, layout)?),
            None => None,
        };
        self.actors.insert(
            actor.text.clone(),
            Actor {
                outcomes,
                declared: labels,
                recorded: record.is_some(),
            },
        );
        Some(Step::Measure(MeasurementEvent {
            actor: actor.text.clone(),
            measurement: EventMeasurement::Projective(measurement),
            memory,
            mode: mode.unwrap_or(Mode::Relative),
            record,
        }))
    }

    /// Completion outcomes never fire in a well-posed scenario; they are
    /// written as the first symbol of the alphabet.
    fn record(
        &mut self,
        stmt: &Statement,
        declared: &[String],
        outcomes: &[String],
        layout: &mut SpaceLayout,
    ) -> Option<Record> {
        let Statement::Record {
            actor,
            statements,
            register,
            alphabet,
        } = stmt
        else {
            return None;
        };
        let mut map: Vec<(String, String)> = Vec::new();
        for (label, s) in statements {
            if !declared.contains(&label.text) {
                self.error(label.span, format!("`{}` is not an outcome of {}", label.text, actor.text));
                return None;
            }
            if map.iter().any(|(l, _)| *l == label.text) {
                self.error(label.span, format!("outcome `{}` recorded twice", label.text));
                return None;
            }
            map.push((label.text.clone(), s.value.clone()));
        }
        if let Some(missing) = declared.iter().find(|d| !map.iter().any(|(l, _)| l == *d)) {
            self.error(actor.span, format!("no statement for outcome `{missing}` of {}", actor.text));
            return None;
        }
        let symbols: Vec<String> = match alphabet {
            Some(a) => {
                let symbols: Vec<String> = a.iter().map(|s| s.value.clone()).collect();
                for (label, s) in statements {
                    if !symbols.contains(&s.value) {
                        self.error(s.span, format!("statement \"{}\" for `{}` is not in the alphabet", s.value, label.text));
                        return None;
                    }
                }
                symbols
            }
            None => {
                let mut symbols: Vec<String> = Vec::new();
                for (_, s) in &map {
                    if !symbols.contains(s) {
                        symbols.push(s.clone());
                    }
                }
                symbols
            }
        };
        for o in outcomes {
            if !map.iter().any(|(l, _)| l == o) {
                map.push((o.clone(), symbols[0].clone()));
            }
        }
        let reg_name = register
            .as_ref()
            .map_or_else(|| format!("R_{}", actor.text), |n| n.text.clone());
        let span = register.as_ref().map_or(actor.span, |n| n.span);
        if layout.contains(&reg_name) {
            self.error(span, format!("register `{reg_name}` would reuse an existing factor"));
            return None;
        }
        let reg = match ClassicalRegister::from_statements(&reg_name, &symbols) {
            Ok(r) => r,
            Err(e) => {
                self.error(span, e.to_string());
                return None;
            }
        };
        if !self.extend(layout, reg.layout(), span) {
            return None;
        }
        Some(Record {
            register: reg,
            statements: map,
        })
    }

    fn prepare(&mut self, stmt: &Statement, layout: &mut SpaceLayout) -> Option<Step> {
        let Statement::Prepare {
            factor,
            dim,
            control,
            branches,
        } = stmt
        else {
            return None;
        };
        if dim.value == 0 {
            self.error(dim.span, "dimension must be positive");
            return None;
        }
        if layout.contains(&factor.text) {
            self.error(factor.span, format!("factor `{}` already exists", factor.text));
            return None;
        }
        let Some(actor) = self.actors.get(&control.text) else {
            self.error(control.span, format!("unknown actor {}", control.text));
            return None;
        };
        let declared = actor.declared.clone();
        let ctx = match SpaceLayout::single(factor.text.clone(), dim.value) {
            Ok(l) => l,
            Err(e) => {
                self.error(factor.span, e.to_string());
                return None;
            }
        };
        let mut out: Vec<(String, StateVector)> = Vec::new();
        for (label, v) in branches {
            if !declared.contains(&label.text) {
                self.error(label.span, format!("`{}` is not an outcome of {}", label.text, control.text));
                return None;
            }
            if out.iter().any(|(l, _)| *l == label.text) {
                self.error(label.span, format!("branch `{}` given twice", label.text));
                return None;
            }
            out.push((label.text.clone(), self.normalized(v, &ctx, "branch")?));
        }
        if !self.extend(layout, &ctx, factor.span) {
            return None;
        }
        Some(Step::Prepare(ConditionalPreparation {
            control: control.text.clone(),
            factor: factor.text.clone(),
            branches: out,
        }))
    }

    fn known_actor(&mut self, n: &Name) -> bool {
        if self.actors.contains_key(&n.text) {
            true
        } else {
            self.error(n.span, format!("unknown actor {}", n.text));
            false
        }
    }

    fn query(&mut self, q: &QueryAst, layout: &SpaceLayout) -> Option<QueryKind> {
        match q {
            QueryAst::Prob { actor, outcome } => {
                if !self.known_actor(actor) {
                    return None;
                }
                if !self.actors[&actor.text].outcomes.contains(&outcome.text) {
                    self.error(outcome.span, format!("`{}` is not an outcome of {}", outcome.text, actor.text));
                    return None;
                }
                Some(QueryKind::OutcomeProb {
                    actor: actor.text.clone(),
                    outcome: outcome.text.clone(),
                })
            }
            QueryAst::ProbKet { vector, on } => {
                let ctx = self.factors(on, layout)?;
                let v = self.normalized(vector, &ctx, "projection vector")?;
                Some(QueryKind::Projection {
                    label: ket_expr(vector),
                    vector: v,
                })
            }
            QueryAst::Joint { rows, columns } => {
                let (a, b) = (self.known_actor(rows), self.known_actor(columns));
                (a && b).then(|| QueryKind::Joint {
                    rows: rows.text.clone(),
                    columns: columns.text.clone(),
                })
            }
            QueryAst::Conditional {
                target,
                given,
                mode,
                recorded,
            } => {
                let (a, b) = (self.known_actor(target), self.known_actor(given));
                if !(a && b) {
                    return None;
                }
                if *recorded && !self.actors[&given.text].recorded {
                    self.error(given.span, format!("{} keeps no record", given.text));
                    return None;
                }
                Some(QueryKind::Conditional {
                    given: given.text.clone(),
                    target: target.text.clone(),
                    mode: *mode,
                    recorded: *recorded,
                })
            }
            QueryAst::Compare { target, given } => {
                let (a, b) = (self.known_actor(target), self.known_actor(given));
                (a && b).then(|| QueryKind::Compare {
                    given: given.text.clone(),
                    target: target.text.clone(),
                })
            }
        }
    }

    fn real(&mut self, n: &Number) -> Option<f64> {
        if n.value.im != 0.0 {
            self.error(n.span, "probabilities must be real");
            None
        } else {
            Some(n.value.re)
        }
    }

    fn expectation(&mut self, kind: &QueryKind, query: &Name, body: &ExpectBody) -> Option<Expectation> {
        let (rows_actor, cols_actor, joint) = match (kind, body) {
            (QueryKind::Compare { .. }, _) => {
                self.error(query.span, "a compare query takes no expectation");
                return None;
            }
            (QueryKind::OutcomeProb { .. } | QueryKind::Projection { .. }, ExpectBody::Value(v)) => {
                return self.real(v).map(Expectation::Scalar);
            }
            (QueryKind::Joint { rows, columns }, ExpectBody::Table(_)) => (rows, columns, true),
            (QueryKind::Conditional { given, target, .. }, ExpectBody::Table(_)) => (given, target, false),
            (_, ExpectBody::Table(_)) => {
                self.error(query.span, format!("`{}` yields a number; use `expect value`", query.text));
                return None;
            }
            (_, ExpectBody::Value(_)) => {
                self.error(query.span, format!("`{}` yields a table; use `expect table`", query.text));
                return None;
            }
        };
        let ExpectBody::Table(rows) = body else {
            return None;
        };
        let row_outcomes = self.actors[rows_actor].outcomes.clone();
        let col_outcomes = self.actors[cols_actor].outcomes.clone();
        let width = rows[0].values.len();
        let mut labels = Vec::new();
        let mut entries = Vec::new();
        for r in rows {
            if !row_outcomes.contains(&r.label.text) {
                self.error(r.label.span, format!("`{}` is not an outcome of {rows_actor}", r.label.text));
                return None;
            }
            if labels.contains(&r.label.text) {
                self.error(r.label.span, format!("row `{}` given twice", r.label.text));
                return None;
            }
            if r.values.len() != width || width > col_outcomes.len() {
                self.error(
                    r.label.span,
                    format!(
                        "row `{}` has {} values; rows need the same width, at most {}",
                        r.label.text,
                        r.values.len(),
                        col_outcomes.len()
                    ),
                );
                return None;
            }
            labels.push(r.label.text.clone());
            let mut values = Vec::new();
            for v in &r.values {
                values.push(self.real(v)?);
            }
            entries.push(values);
        }
        let columns = col_outcomes[..width].to_vec();
        let table = if joint {
            ProbabilityTable::joint(labels, columns, entries)
        } else {
            ProbabilityTable::conditional(labels, columns, entries.into_iter().map(Some).collect())
        };
        match table {
            Ok(t) => Some(Expectation::Table(t)),
            Err(e) => {
                self.error(query.span, e.to_string());
                None
            }
        }
    }
}
