use super::{
    ConditionalPreparation, EventMeasurement, Expectation, MeasurementEvent, Mode, Query, QueryKind, Scenario, Step,
};
use crate::error::{Error, Result};
use crate::formalisms::{
    born_probability, classical_record_isometry, collapse_update, kraus_dilation, measurement_isometry,
    normalize_row, CellMismatch, ObserverMemory, ProbabilityTable, TableComparison, ZERO_PROBABILITY,
};
use crate::tensor::{
    apply_on_factors, complete_orthonormal_basis, DensityOperator, FactorProjection, GlobalState, Isometry, Ket,
    LinearMap, SpaceLayout, StateVector,
};

/// Tolerance on norms and branch weights while running.
const RUN_TOL: f64 = 1e-10;

/// One outcome history with its probability weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: StateVector,
    /// `(actor, outcome)` for every collapse-mode event so far.
    pub history: Vec<(String, String)>,
}

/// The state after running a scenario: a single branch when every event is
/// relative, otherwise one branch per collapse history.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub branches: Vec<Branch>,
}

impl Ensemble {
    pub fn pure(state: StateVector) -> Self {
        Ensemble {
            branches: vec![Branch {
                weight: 1.0,
                state,
                history: Vec::new(),
            }],
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.branches[0].state.layout()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// The global state when there is exactly one branch.
    pub fn global_state(&self) -> Option<&StateVector> {
        match self.branches.as_slice() {
            [b] => Some(&b.state),
            _ => None,
        }
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let members: Vec<(f64, StateVector)> = self.branches.iter().map(|b| (b.weight, b.state.clone())).collect();
        DensityOperator::from_ensemble(&members)
    }

    /// `sum_i w_i tr(P state_i)` for disjoint rank-one projections.
    pub fn weight(&self, projections: &[FactorProjection]) -> Result<f64> {
        let mut acc = 0.0;
        for b in &self.branches {
            acc += b.weight * b.state.projection_weight(projections)?;
        }
        Ok(acc.clamp(0.0, 1.0))
    }
}

fn checked_state(k: Ket) -> Result<StateVector> {
    let norm = k.norm();
    if (norm - 1.0).abs() > RUN_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(StateVector::from_ket_unchecked(k))
}

/// The isometry writing memory (and register) and the factors it acts on.
fn event_isometry(e: &MeasurementEvent) -> Result<(Isometry, Vec<String>, Option<KrausParts>)> {
    match &e.measurement {
        EventMeasurement::Projective(m) => {
            let iso = match &e.record {
                Some(r) => classical_record_isometry(m, &e.memory, &r.register, &r.statements)?,
                None => measurement_isometry(m, &e.memory)?,
            };
            Ok((iso, m.targets(), None))
        }
        EventMeasurement::Kraus { measurement, ancilla } => {
            let dil = kraus_dilation(measurement, ancilla, &e.memory)?;
            let iso = match &e.record {
                Some(r) => classical_record_isometry(dil.readout(), &e.memory, &r.register, &r.statements)?,
                None => dil.record_isometry().clone(),
            };
            let parts = KrausParts {
                unitary: dil.unitary().clone(),
                ancilla_basis: dil.ancilla_basis().to_vec(),
            };
            Ok((iso, vec![ancilla.clone()], Some(parts)))
        }
    }
}

struct KrausParts {
    unitary: LinearMap,
    ancilla_basis: Vec<StateVector>,
}

fn apply_event(ens: Ensemble, e: &MeasurementEvent) -> Result<Ensemble> {
    let (iso, iso_targets, kraus) = event_isometry(e)?;
    let record = |k: &Ket| -> Result<StateVector> { checked_state(apply_on_factors(iso.map(), &iso_targets, k)?) };
    let mut out = Vec::new();
    for b in ens.branches {
        match (e.mode, &e.measurement, &kraus) {
            (Mode::Relative, EventMeasurement::Projective(_), _) => out.push(Branch {
                state: record(&b.state)?,
                ..b
            }),
            (Mode::Relative, EventMeasurement::Kraus { measurement, ancilla }, Some(parts)) => {
                let extended = b.state.tensor(&parts.ancilla_basis[0])?;
                let mut targets = measurement.targets();
                targets.push(ancilla.clone());
                let rotated = apply_on_factors(&parts.unitary, &targets, &extended)?;
                out.push(Branch {
                    state: record(&rotated)?,
                    ..b
                });
            }
            (Mode::Collapse, EventMeasurement::Projective(m), _) => {
                for o in m.outcomes() {
                    let p = born_probability(&b.state, m, &o.label)?;
                    if p <= ZERO_PROBABILITY {
                        continue;
                    }
                    let collapsed = collapse_update(&b.state, m, &o.label)?;
                    let mut history = b.history.clone();
                    history.push((e.actor.clone(), o.label.clone()));
                    out.push(Branch {
                        weight: b.weight * p,
                        state: record(&collapsed)?,
                        history,
                    });
                }
            }
            (Mode::Collapse, EventMeasurement::Kraus { measurement, .. }, Some(parts)) => {
                for (a, (label, k)) in measurement.outcomes().iter().enumerate() {
                    let projected = apply_on_factors(k, &measurement.targets(), &b.state)?;
                    let p = projected.norm_sqr();
                    if p <= ZERO_PROBABILITY {
                        continue;
                    }
                    let updated = projected.normalize()?.tensor(&parts.ancilla_basis[a])?;
                    let mut history = b.history.clone();
                    history.push((e.actor.clone(), label.clone()));
                    out.push(Branch {
                        weight: b.weight * p,
                        state: record(&updated)?,
                        history,
                    });
                }
            }
            (_, EventMeasurement::Kraus { .. }, None) => unreachable!("Kraus events carry a dilation"),
        }
    }
    let ens = Ensemble { branches: out };
    let total = ens.total_weight();
    if (total - 1.0).abs() > RUN_TOL {
        return Err(Error::IllFormedScenario(format!(
            "branch weights after `{}` sum to {total}",
            e.actor
        )));
    }
    Ok(ens)
}

/// `sum_c |C_c><C_c| ⊗ |phi(c)>`; pointers without a branch, and the
/// memory's unused levels, get the first basis state of the new factor.
fn preparation_isometry(p: &ConditionalPreparation, mem: &ObserverMemory) -> Result<Isometry> {
    let new = p
        .layout()
        .ok_or_else(|| Error::IllFormedScenario(format!("preparation of `{}` has no branches", p.factor)))?;
    let ground = Ket::basis(new.clone(), 0)?;
    let mut inputs: Vec<(Ket, Ket)> = Vec::new();
    for (c, pointer) in mem.pointers() {
        let prepared = p
            .branches
            .iter()
            .find(|(b, _)| b == c)
            .map(|(_, v)| v.as_ket().clone())
            .unwrap_or_else(|| ground.clone());
        inputs.push((pointer.as_ket().clone(), prepared));
    }
    let pointers: Vec<Ket> = inputs.iter().map(|(k, _)| k.clone()).collect();
    for v in complete_orthonormal_basis(mem.layout(), &pointers)? {
        inputs.push((v, ground.clone()));
    }
    let mut map: Option<LinearMap> = None;
    for (k, prepared) in &inputs {
        let term = LinearMap::outer(&k.tensor(prepared)?, k);
        map = Some(match map {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    Isometry::new(map.ok_or(Error::EmptyOutcomes)?)
}

/// Applies every step in order.
pub fn run_ensemble(s: &Scenario) -> Result<Ensemble> {
    s.validate()?;
    let mut ens = Ensemble::pure(s.initial.clone());
    for step in &s.steps {
        ens = match step {
            Step::Measure(e) => apply_event(ens, e)?,
            Step::Prepare(p) => {
                let mem = &s.event(&p.control)?.memory;
                let iso = preparation_isometry(p, mem)?;
                let targets = [mem.memory_label()];
                let branches = ens
                    .branches
                    .into_iter()
                    .map(|b| {
                        Ok(Branch {
                            state: checked_state(apply_on_factors(iso.map(), &targets, &b.state)?)?,
                            ..b
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ensemble { branches }
            }
        };
    }
    Ok(ens)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryValue {
    Scalar(f64),
    Table(ProbabilityTable),
    Comparison {
        collapse: ProbabilityTable,
        relative: ProbabilityTable,
        /// Largest cell difference over rows defined in both tables.
        gap: f64,
        witness: Option<(String, String)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub title: String,
    pub kind: QueryKind,
    pub value: QueryValue,
    /// Present when the query carries an expectation.
    pub comparison: Option<TableComparison>,
}

impl QueryResult {
    pub fn passed(&self) -> Option<bool> {
        self.comparison.as_ref().map(|c| c.passed)
    }
}

fn pointer(mem: &ObserverMemory, outcome: &str) -> Result<FactorProjection> {
    Ok(FactorProjection::new(
        [mem.memory_label()],
        mem.pointer(outcome)?.as_ket().clone(),
    ))
}

/// A collapse-mode actor's outcome is read from the branch history, since
/// later events may act on its memory; otherwise from the memory pointer.
enum Condition {
    History(String, String),
    Projection(FactorProjection),
}

fn outcome_condition(s: &Scenario, actor: &str, outcome: &str) -> Result<Condition> {
    let e = s.event(actor)?;
    let p = pointer(&e.memory, outcome)?;
    Ok(match e.mode {
        Mode::Collapse => Condition::History(actor.to_string(), outcome.to_string()),
        Mode::Relative => Condition::Projection(p),
    })
}

fn weight(ens: &Ensemble, conditions: &[Condition]) -> Result<f64> {
    let mut projections = Vec::new();
    let mut history = Vec::new();
    for c in conditions {
        match c {
            Condition::History(a, o) => history.push((a, o)),
            Condition::Projection(p) => projections.push(p.clone()),
        }
    }
    let mut acc = 0.0;
    for b in &ens.branches {
        if history
            .iter()
            .all(|(a, o)| b.history.iter().any(|(ha, ho)| ha == *a && ho == *o))
        {
            acc += b.weight * b.state.projection_weight(&projections)?;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

fn conditional_table(ens: &Ensemble, s: &Scenario, given: &str, target: &str, recorded: bool) -> Result<ProbabilityTable> {
    let g = s.event(given)?;
    let t = s.event(target)?;
    let columns = t.memory.outcome_labels();
    let mut rows = Vec::new();
    for a in g.memory.outcome_labels() {
        let mut weights = Vec::with_capacity(columns.len());
        for b in &columns {
            let mut conds = vec![outcome_condition(s, given, &a)?];
            if recorded {
                let r = g
                    .record
                    .as_ref()
                    .ok_or_else(|| Error::IllFormedScenario(format!("`{given}` keeps no record")))?;
                let x = r.register.symbol(r.statement_of(&a)?)?;
                conds.push(Condition::Projection(FactorProjection::new(
                    [r.register.label()],
                    x.as_ket().clone(),
                )));
            }
            conds.push(outcome_condition(s, target, b)?);
            weights.push(weight(ens, &conds)?);
        }
        rows.push(normalize_row(weights));
    }
    ProbabilityTable::conditional(g.memory.outcome_labels(), columns, rows)
}

/// The scenario with `actor`'s event in `mode`, run.
fn rerun(s: &Scenario, actor: &str, mode: Mode) -> Result<(Scenario, Ensemble)> {
    let s = s.with_mode(actor, mode)?;
    let ens = run_ensemble(&s)?;
    Ok((s, ens))
}

fn evaluate(s: &Scenario, ens: &Ensemble, kind: &QueryKind) -> Result<QueryValue> {
    Ok(match kind {
        QueryKind::OutcomeProb { actor, outcome } => {
            QueryValue::Scalar(weight(ens, &[outcome_condition(s, actor, outcome)?])?)
        }
        QueryKind::Projection { vector, .. } => QueryValue::Scalar(weight(
            ens,
            &[Condition::Projection(FactorProjection::on_own_factor(vector.as_ket().clone()))],
        )?),
        QueryKind::Joint { rows, columns } => {
            let (r, c) = (&s.event(rows)?.memory, &s.event(columns)?.memory);
            let entries = r
                .outcome_labels()
                .iter()
                .map(|a| {
                    c.outcome_labels()
                        .iter()
                        .map(|b| weight(ens, &[outcome_condition(s, rows, a)?, outcome_condition(s, columns, b)?]))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            QueryValue::Table(ProbabilityTable::joint(r.outcome_labels(), c.outcome_labels(), entries)?)
        }
        QueryKind::Conditional {
            given,
            target,
            mode,
            recorded,
        } => {
            let table = match mode {
                Some(m) if s.event(given)?.mode != *m => {
                    let (s2, e2) = rerun(s, given, *m)?;
                    conditional_table(&e2, &s2, given, target, *recorded)?
                }
                _ => conditional_table(ens, s, given, target, *recorded)?,
            };
            QueryValue::Table(table)
        }
        QueryKind::Compare { given, target } => {
            let side = |m: Mode| -> Result<ProbabilityTable> {
                if s.event(given)?.mode == m {
                    conditional_table(ens, s, given, target, false)
                } else {
                    let (s2, e2) = rerun(s, given, m)?;
                    conditional_table(&e2, &s2, given, target, false)
                }
            };
            let collapse = side(Mode::Collapse)?;
            let relative = side(Mode::Relative)?;
            let (gap, witness) = match collapse.max_abs_diff(&relative) {
                Some((d, row, col)) => (d, Some((row, col))),
                None => (0.0, None),
            };
            QueryValue::Comparison {
                collapse,
                relative,
                gap,
                witness,
            }
        }
    })
}

fn check(value: &QueryValue, expected: &Expectation, tol: f64) -> TableComparison {
    match (value, expected) {
        (QueryValue::Table(t), Expectation::Table(e)) => t.compare(e, tol),
        (QueryValue::Scalar(v), Expectation::Scalar(e)) => {
            let d = (v - e).abs();
            let passed = d <= tol;
            TableComparison {
                passed,
                max_deviation: d,
                mismatches: if passed {
                    Vec::new()
                } else {
                    vec![CellMismatch {
                        row: String::new(),
                        column: String::new(),
                        expected: Some(*e),
                        actual: Some(*v),
                    }]
                },
            }
        }
        _ => TableComparison {
            passed: false,
            max_deviation: f64::INFINITY,
            mismatches: Vec::new(),
        },
    }
}

fn run_query(s: &Scenario, ens: &Ensemble, q: &Query) -> Result<QueryResult> {
    let value = evaluate(s, ens, &q.kind)?;
    let tol = q.tolerance.unwrap_or(s.tolerance);
    let comparison = q.expected.as_ref().map(|e| check(&value, e, tol));
    Ok(QueryResult {
        title: q.title(),
        kind: q.kind.clone(),
        value,
        comparison,
    })
}

/// Runs the steps and answers every query, comparing against expectations
/// within the query's or the scenario's tolerance.
pub fn run_scenario(s: &Scenario) -> Result<Vec<QueryResult>> {
    let ens = run_ensemble(s)?;
    s.queries.iter().map(|q| run_query(s, &ens, q)).collect()
}
