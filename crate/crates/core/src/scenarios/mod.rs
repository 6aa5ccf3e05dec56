//! Experiments as ordered measurement events on a global state, plus the
//! canonical Wigner's-friend arrangements.

mod builders;
mod run;

pub use builders::{
    appendix_b_tables, closed_form_relative_table, extended_wigner_friend, extended_wigner_friend_recorded,
    inequivalence_report, same_level_chain, wigner_friend, wigner_friend_shared_record, AgentConstruction,
    default_alpha_grid, AgentTable, InequivalencePoint, APPENDIX_B_PLAN,
};
pub use run::{run_ensemble, run_scenario, Branch, Ensemble, QueryResult, QueryValue};

use crate::error::{Error, Result};
use crate::formalisms::{ClassicalRegister, KrausMeasurement, ObserverMemory, ProbabilityTable, ProjectiveMeasurement};
use crate::tensor::{Ket, LinearMap, SpaceLayout, StateVector};

/// Default tolerance when comparing query results with expectations.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// How an event acts on the global state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Branch on outcomes and renormalize each branch.
    Collapse,
    /// Extend the global state by the measurement isometry.
    Relative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Collapse => "collapse",
            Mode::Relative => "relative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventMeasurement {
    Projective(ProjectiveMeasurement),
    /// Realized through a dilation whose ancilla factor is named `ancilla`.
    Kraus { measurement: KrausMeasurement, ancilla: String },
}

impl EventMeasurement {
    pub fn targets(&self) -> Vec<String> {
        match self {
            EventMeasurement::Projective(m) => m.targets(),
            EventMeasurement::Kraus { measurement, .. } => measurement.targets(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            EventMeasurement::Projective(m) => m.labels(),
            EventMeasurement::Kraus { measurement, .. } => measurement.labels(),
        }
    }
}

/// A classical register written alongside the memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub register: ClassicalRegister,
    /// outcome -> statement
    pub statements: Vec<(String, String)>,
}

impl Record {
    pub fn statement_of(&self, outcome: &str) -> Result<&str> {
        self.statements
            .iter()
            .find(|(a, _)| a == outcome)
            .map(|(_, s)| s.as_str())
            .ok_or_else(|| Error::MissingStatement(outcome.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEvent {
    pub actor: String,
    pub measurement: EventMeasurement,
    pub memory: ObserverMemory,
    pub mode: Mode,
    pub record: Option<Record>,
}

/// A new factor prepared in a state that depends on an earlier actor's
/// outcome: `|C_c> -> |C_c> ⊗ |phi(c)>` on the actor's memory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPreparation {
    pub control: String,
    pub factor: String,
    pub branches: Vec<(String, StateVector)>,
}

impl ConditionalPreparation {
    pub fn layout(&self) -> Option<&SpaceLayout> {
        self.branches.first().map(|(_, v)| v.layout())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Measure(MeasurementEvent),
    Prepare(ConditionalPreparation),
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryKind {
    /// Probability that `actor` recorded `outcome`.
    OutcomeProb { actor: String, outcome: String },
    /// Weight of a projection onto `vector` on the factors it lives on.
    Projection { label: String, vector: StateVector },
    /// Joint table, rows `rows` outcomes and columns `columns` outcomes.
    Joint { rows: String, columns: String },
    /// `target`'s outcomes given `given`'s. With `mode` set, `given`'s event
    /// is rerun in that mode. With `recorded`, the register written by
    /// `given` is conditioned on as well.
    Conditional {
        given: String,
        target: String,
        mode: Option<Mode>,
        recorded: bool,
    },
    /// The conditional under both modes of `given`'s event, and their gap.
    Compare { given: String, target: String },
}

impl QueryKind {
    pub fn describe(&self) -> String {
        match self {
            QueryKind::OutcomeProb { actor, outcome } => format!("prob {actor} {outcome}"),
            QueryKind::Projection { label, vector } => {
                let f: Vec<&str> = vector.layout().labels().collect();
                format!("prob {label} on {}", f.join(", "))
            }
            QueryKind::Joint { rows, columns } => format!("joint {rows} {columns}"),
            QueryKind::Conditional {
                given,
                target,
                mode,
                recorded,
            } => {
                let mut s = format!("conditional {target} given {given}");
                if let Some(m) = mode {
                    s.push_str(&format!(" via {}", m.as_str()));
                }
                if *recorded {
                    s.push_str(" recorded");
                }
                s
            }
            QueryKind::Compare { given, target } => format!("compare {target} given {given}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Scalar(f64),
    Table(ProbabilityTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub name: Option<String>,
    pub kind: QueryKind,
    pub expected: Option<Expectation>,
    /// Overrides the scenario tolerance.
    pub tolerance: Option<f64>,
}

impl Query {
    pub fn new(kind: QueryKind) -> Self {
        Query {
            name: None,
            kind,
            expected: None,
            tolerance: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn expecting(mut self, e: Expectation) -> Self {
        self.expected = Some(e);
        self
    }

    pub fn title(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub initial: StateVector,
    pub steps: Vec<Step>,
    pub queries: Vec<Query>,
    pub tolerance: f64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, initial: StateVector) -> Self {
        Scenario {
            name: name.into(),
            initial,
            steps: Vec::new(),
            queries: Vec::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.initial.layout()
    }

    pub fn measure(mut self, event: MeasurementEvent) -> Self {
        self.steps.push(Step::Measure(event));
        self
    }

    pub fn prepare(mut self, prep: ConditionalPreparation) -> Self {
        self.steps.push(Step::Prepare(prep));
        self
    }

    pub fn query(mut self, q: Query) -> Self {
        self.queries.push(q);
        self
    }

    pub fn events(&self) -> impl Iterator<Item = &MeasurementEvent> {
        self.steps.iter().filter_map(|s| match s {
            Step::Measure(e) => Some(e),
            Step::Prepare(_) => None,
        })
    }

    pub fn event(&self, actor: &str) -> Result<&MeasurementEvent> {
        self.events()
            .find(|e| e.actor == actor)
            .ok_or_else(|| Error::UnknownActor(actor.to_string()))
    }

    pub fn event_mut(&mut self, actor: &str) -> Result<&mut MeasurementEvent> {
        self.steps
            .iter_mut()
            .find_map(|s| match s {
                Step::Measure(e) if e.actor == actor => Some(e),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownActor(actor.to_string()))
    }

    /// Copy with `actor`'s event switched to `mode`.
    pub fn with_mode(&self, actor: &str, mode: Mode) -> Result<Scenario> {
        let mut s = self.clone();
        s.event_mut(actor)?.mode = mode;
        Ok(s)
    }

    /// Checks actor and label uniqueness, that every step's factors exist
    /// when it runs, and that queries refer to known actors.
    pub fn validate(&self) -> Result<()> {
        let mut layout = self.layout().clone();
        let mut actors: Vec<&str> = Vec::new();
        let ill = |m: String| Err(Error::IllFormedScenario(m));
        for step in &self.steps {
            match step {
                Step::Measure(e) => {
                    if actors.contains(&e.actor.as_str()) {
                        return ill(format!("actor `{}` measures twice", e.actor));
                    }
                    actors.push(&e.actor);
                    let targets = e.measurement.targets();
                    let want = layout.select(&targets)?;
                    let have = match &e.measurement {
                        EventMeasurement::Projective(m) => {
                            m.require_complete()?;
                            m.subspace()
                        }
                        EventMeasurement::Kraus { measurement, .. } => measurement.subspace(),
                    };
                    if !want.same_shape(have) {
                        return ill(format!(
                            "`{}` measures {} but the state has {}",
                            e.actor, have, want
                        ));
                    }
                    if e.memory.outcome_labels() != e.measurement.labels() {
                        return ill(format!("memory of `{}` does not match its outcomes", e.actor));
                    }
                    if let EventMeasurement::Kraus { ancilla, measurement } = &e.measurement {
                        layout = layout.concat(&SpaceLayout::single(ancilla.clone(), measurement.len())?)?;
                    }
                    layout = layout.concat(e.memory.layout())?;
                    if let Some(r) = &e.record {
                        for l in e.measurement.labels() {
                            r.register.symbol(r.statement_of(&l)?)?;
                        }
                        layout = layout.concat(r.register.layout())?;
                    }
                }
                Step::Prepare(p) => {
                    let control = self
                        .events()
                        .find(|e| e.actor == p.control)
                        .filter(|_| actors.contains(&p.control.as_str()))
                        .ok_or_else(|| Error::UnknownActor(p.control.clone()))?;
                    let Some(new) = p.layout() else {
                        return ill(format!("preparation of `{}` has no branches", p.factor));
                    };
                    if new.labels().ne([p.factor.as_str()]) {
                        return ill(format!("branches for `{}` live on {}", p.factor, new));
                    }
                    if p.branches.iter().any(|(_, v)| v.layout() != new) {
                        return ill(format!("branches for `{}` differ in layout", p.factor));
                    }
                    for (c, _) in &p.branches {
                        control.memory.pointer(c)?;
                    }
                    layout = layout.concat(new)?;
                }
            }
        }
        for q in &self.queries {
            let known = |a: &str| -> Result<()> {
                if actors.contains(&a) {
                    Ok(())
                } else {
                    Err(Error::UnknownActor(a.to_string()))
                }
            };
            match &q.kind {
                QueryKind::OutcomeProb { actor, outcome } => {
                    known(actor)?;
                    self.event(actor)?.memory.pointer(outcome)?;
                }
                QueryKind::Projection { vector, .. } => {
                    let labels: Vec<&str> = vector.layout().labels().collect();
                    if !layout.select(&labels)?.same_shape(vector.layout()) {
                        return ill(format!("projection on {} does not fit the state", vector.layout()));
                    }
                }
                QueryKind::Joint { rows, columns } => {
                    known(rows)?;
                    known(columns)?;
                }
                QueryKind::Conditional {
                    given,
                    target,
                    recorded,
                    ..
                } => {
                    known(given)?;
                    known(target)?;
                    if *recorded && self.event(given)?.record.is_none() {
                        return ill(format!("`{given}` keeps no record"));
                    }
                }
                QueryKind::Compare { given, target } => {
                    known(given)?;
                    known(target)?;
                    if matches!(q.expected, Some(Expectation::Table(_)) | Some(Expectation::Scalar(_))) {
                        return ill("compare queries take no expectation".into());
                    }
                }
            }
            if matches!(q.kind, QueryKind::OutcomeProb { .. } | QueryKind::Projection { .. })
                && matches!(q.expected, Some(Expectation::Table(_)))
            {
                return ill(format!("`{}` yields a number, not a table", q.title()));
            }
            if matches!(q.kind, QueryKind::Joint { .. } | QueryKind::Conditional { .. })
                && matches!(q.expected, Some(Expectation::Scalar(_)))
            {
                return ill(format!("`{}` yields a table, not a number", q.title()));
            }
        }
        Ok(())
    }

    /// Structural equality with numeric data compared entrywise within `tol`.
    pub fn approx_eq(&self, other: &Scenario, tol: f64) -> bool {
        ket_close(&self.initial, &other.initial, tol)
            && self.steps.len() == other.steps.len()
            && self.steps.iter().zip(&other.steps).all(|(a, b)| step_close(a, b, tol))
            && self.queries.len() == other.queries.len()
            && self.queries.iter().zip(&other.queries).all(|(a, b)| query_close(a, b, tol))
    }
}

fn ket_close(a: &Ket, b: &Ket, tol: f64) -> bool {
    a.layout() == b.layout() && a.amplitudes().iter().zip(b.amplitudes().iter()).all(|(x, y)| (x - y).norm() <= tol)
}

fn map_close(a: &LinearMap, b: &LinearMap, tol: f64) -> bool {
    a.in_layout() == b.in_layout()
        && a.out_layout() == b.out_layout()
        && a.matrix().iter().zip(b.matrix().iter()).all(|(x, y)| (x - y).norm() <= tol)
}

fn labeled_close(a: &[(String, StateVector)], b: &[(String, StateVector)], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((la, va), (lb, vb))| la == lb && ket_close(va, vb, tol))
}

fn measurement_close(a: &EventMeasurement, b: &EventMeasurement, tol: f64) -> bool {
    match (a, b) {
        (EventMeasurement::Projective(x), EventMeasurement::Projective(y)) => {
            x.len() == y.len()
                && x.outcomes().iter().zip(y.outcomes()).all(|(p, q)| {
                    p.label == q.label && p.auxiliary == q.auxiliary && ket_close(&p.vector, &q.vector, tol)
                })
        }
        (
            EventMeasurement::Kraus {
                measurement: x,
                ancilla: ax,
            },
            EventMeasurement::Kraus {
                measurement: y,
                ancilla: ay,
            },
        ) => {
            ax == ay
                && x.len() == y.len()
                && x
                    .outcomes()
                    .iter()
                    .zip(y.outcomes())
                    .all(|((la, ka), (lb, kb))| la == lb && map_close(ka, kb, tol))
        }
        _ => false,
    }
}

fn step_close(a: &Step, b: &Step, tol: f64) -> bool {
    match (a, b) {
        (Step::Measure(x), Step::Measure(y)) => {
            x.actor == y.actor
                && x.mode == y.mode
                && x.memory.owner() == y.memory.owner()
                && x.memory.memory_label() == y.memory.memory_label()
                && labeled_close(x.memory.pointers(), y.memory.pointers(), tol)
                && measurement_close(&x.measurement, &y.measurement, tol)
                && match (&x.record, &y.record) {
                    (None, None) => true,
                    (Some(r), Some(s)) => {
                        r.statements == s.statements
                            && r.register.label() == s.register.label()
                            && r.register.statements() == s.register.statements()
                    }
                    _ => false,
                }
        }
        (Step::Prepare(x), Step::Prepare(y)) => {
            x.control == y.control && x.factor == y.factor && labeled_close(&x.branches, &y.branches, tol)
        }
        _ => false,
    }
}

fn table_close(a: &ProbabilityTable, b: &ProbabilityTable, tol: f64) -> bool {
    a.kind() == b.kind()
        && a.row_labels() == b.row_labels()
        && a.column_labels() == b.column_labels()
        && (0..a.row_labels().len()).all(|r| a.is_row_defined(r) == b.is_row_defined(r))
        && a.flatten().iter().zip(b.flatten()).all(|(x, y)| (x - y).abs() <= tol)
}

fn query_close(a: &Query, b: &Query, tol: f64) -> bool {
    let kind = match (&a.kind, &b.kind) {
        (
            QueryKind::Projection { label: la, vector: va },
            QueryKind::Projection { label: lb, vector: vb },
        ) => la == lb && ket_close(va, vb, tol),
        (x, y) => x == y,
    };
    let expected = match (&a.expected, &b.expected) {
        (None, None) => true,
        (Some(Expectation::Scalar(x)), Some(Expectation::Scalar(y))) => (x - y).abs() <= tol,
        (Some(Expectation::Table(x)), Some(Expectation::Table(y))) => table_close(x, y, tol),
        _ => false,
    };
    kind && expected && a.name == b.name && a.tolerance == b.tolerance
}
