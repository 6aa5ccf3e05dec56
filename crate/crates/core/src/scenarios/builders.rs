use super::{
    run_scenario, ConditionalPreparation, EventMeasurement, Expectation, MeasurementEvent, Mode, Query, QueryKind,
    QueryValue, Record, Scenario,
};
use crate::error::{Error, Result};
use crate::formalisms::{ClassicalRegister, ObserverMemory, ProbabilityTable, ProjectiveMeasurement};
use crate::tensor::{SpaceLayout, StateVector, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn qubit(label: &str) -> SpaceLayout {
    SpaceLayout::single(label, 2).expect("nonzero dimension")
}

fn real_state(layout: SpaceLayout, amps: &[f64]) -> Result<StateVector> {
    StateVector::new(layout, amps.iter().map(|&a| c(a)).collect())
}

/// An event whose memory factor is named after the actor, with
/// computational pointers in outcome order.
fn event(actor: &str, m: ProjectiveMeasurement, mode: Mode) -> Result<MeasurementEvent> {
    let memory = ObserverMemory::for_outcomes(actor, actor, &m.labels())?;
    Ok(MeasurementEvent {
        actor: actor.to_string(),
        measurement: EventMeasurement::Projective(m),
        memory,
        mode,
        record: None,
    })
}

fn conditional_query(given: &str, target: &str, mode: Option<Mode>) -> Query {
    Query::new(QueryKind::Conditional {
        given: given.into(),
        target: target.into(),
        mode,
        recorded: false,
    })
}

fn table(rows: &[&str], cols: &[&str], values: &[&[f64]]) -> Result<ProbabilityTable> {
    ProbabilityTable::conditional(
        strings(rows),
        strings(cols),
        values.iter().map(|r| Some(r.to_vec())).collect(),
    )
}

/// Two observers measuring the same system one after the other; the first
/// observer's event runs in `mode`.
pub fn same_level_chain(
    state: StateVector,
    first: ProjectiveMeasurement,
    second: ProjectiveMeasurement,
    mode: Mode,
) -> Result<Scenario> {
    Ok(Scenario::new("same-level chain", state)
        .measure(event("O1", first, mode)?)
        .measure(event("O2", second, Mode::Relative)?)
        .query(conditional_query("O1", "O2", None).named("chain")))
}

/// The friend `F` measures a spin in `(|u> + |d>)/sqrt(2)`; Wigner measures
/// spin and memory in `b1 = a|uU> + b|dD>`, `b2 = b|uU> - a|dD>`, completed
/// to a basis of the joint space.
pub fn wigner_friend(alpha: f64, beta: f64) -> Result<Scenario> {
    if !alpha.is_finite() || !beta.is_finite() || (alpha * alpha + beta * beta - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidAmplitudes { alpha, beta });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = real_state(qubit("S"), &[h, h])?;
    let joint = SpaceLayout::new([("S", 2), ("F", 2)])?;
    let w = ProjectiveMeasurement::new(vec![
        ("b1", real_state(joint.clone(), &[alpha, 0.0, 0.0, beta])?),
        ("b2", real_state(joint, &[beta, 0.0, 0.0, -alpha])?),
    ])?
    .completed()?;
    let (a2, b2) = (alpha * alpha, beta * beta);
    let mut s = Scenario::new("wigner", phi)
        .measure(event("F", ProjectiveMeasurement::computational("S", &["u", "d"])?, Mode::Relative)?)
        .measure(event("W", w, Mode::Relative)?)
        .query(
            conditional_query("F", "W", Some(Mode::Collapse))
                .named("update_rule")
                .expecting(Expectation::Table(table(
                    &["u", "d"],
                    &["b1", "b2"],
                    &[&[a2, b2], &[b2, a2]],
                )?)),
        );
    let mut relative = conditional_query("F", "W", Some(Mode::Relative)).named("relative_state");
    if (alpha - beta).abs() <= 1e-12 {
        relative = relative.expecting(Expectation::Table(table(
            &["u", "d"],
            &["b1", "b2"],
            &[&[1.0, 0.0], &[1.0, 0.0]],
        )?));
    }
    s = s.query(relative);
    Ok(s)
}

/// [`wigner_friend`] where the friend also writes the same statement for
/// both outcomes into a register `R`.
pub fn wigner_friend_shared_record(alpha: f64, beta: f64) -> Result<Scenario> {
    let mut s = wigner_friend(alpha, beta)?;
    s.name = "wigner, shared record".into();
    let register = ClassicalRegister::from_statements("R", &["no measurement", "50:50", "not 50:50"])?;
    s.event_mut("F")?.record = Some(Record {
        register,
        statements: vec![("u".into(), "50:50".into()), ("d".into(), "50:50".into())],
    });
    s.queries.push(Query::new(QueryKind::Conditional {
        given: "F".into(),
        target: "W".into(),
        mode: None,
        recorded: true,
    })
    .named("recorded"));
    Ok(s)
}

/// Coin `sqrt(1/3)|h> + sqrt(2/3)|t>` measured by `F1`, who prepares `S` in
/// `|d>` on heads and `(|u> + |d>)/sqrt(2)` on tails; `F2` measures `S`; `A`
/// measures coin and `F1`, `W` measures `S` and `F2`, both in
/// `o = (|00> - |11>)/sqrt(2)`, `f = (|00> + |11>)/sqrt(2)`.
pub fn extended_wigner_friend() -> Result<Scenario> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let coin = real_state(qubit("C"), &[(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()])?;
    let bell_pair = |a: &str, b: &str| -> Result<ProjectiveMeasurement> {
        let l = SpaceLayout::new([(a, 2), (b, 2)])?;
        ProjectiveMeasurement::new(vec![
            ("o", real_state(l.clone(), &[h, 0.0, 0.0, -h])?),
            ("f", real_state(l, &[h, 0.0, 0.0, h])?),
        ])?
        .completed()
    };
    let joint_aw = ProbabilityTable::joint(
        strings(&["o", "f"]),
        strings(&["o", "f"]),
        vec![vec![1.0 / 12.0, 1.0 / 12.0], vec![1.0 / 12.0, 0.75]],
    )?;
    Ok(Scenario::new("extended wigner", coin)
        .measure(event("F1", ProjectiveMeasurement::computational("C", &["h", "t"])?, Mode::Relative)?)
        .prepare(ConditionalPreparation {
            control: "F1".into(),
            factor: "S".into(),
            branches: vec![
                ("h".into(), real_state(qubit("S"), &[0.0, 1.0])?),
                ("t".into(), real_state(qubit("S"), &[h, h])?),
            ],
        })
        .measure(event("F2", ProjectiveMeasurement::computational("S", &["u", "d"])?, Mode::Relative)?)
        .measure(event("A", bell_pair("C", "F1")?, Mode::Relative)?)
        .measure(event("W", bell_pair("S", "F2")?, Mode::Relative)?)
        .query(
            Query::new(QueryKind::Joint {
                rows: "A".into(),
                columns: "W".into(),
            })
            .named("joint_aw")
            .expecting(Expectation::Table(joint_aw)),
        )
        .query(
            conditional_query("F1", "W", Some(Mode::Collapse))
                .named("f1_prediction")
                .expecting(Expectation::Table(table(
                    &["h", "t"],
                    &["o", "f"],
                    &[&[0.5, 0.5], &[0.0, 1.0]],
                )?)),
        )
        .query(
            Query::new(QueryKind::OutcomeProb {
                actor: "W".into(),
                outcome: "f".into(),
            })
            .named("w_sees_f")
            .expecting(Expectation::Scalar(5.0 / 6.0)),
        ))
}

/// [`extended_wigner_friend`] with `F1` writing its prediction for `W` into
/// a register `R` that neither superobserver measures.
pub fn extended_wigner_friend_recorded() -> Result<Scenario> {
    let mut s = extended_wigner_friend()?;
    s.name = "extended wigner, recorded".into();
    let register = ClassicalRegister::from_statements("R", &["w is o or f", "w is f"])?;
    s.event_mut("F1")?.record = Some(Record {
        register,
        statements: vec![("h".into(), "w is o or f".into()), ("t".into(), "w is f".into())],
    });
    // The register changes what A sees, so only the queries about W remain.
    s.queries.retain(|q| q.name.as_deref() == Some("w_sees_f"));
    s.queries.push(
        Query::new(QueryKind::Conditional {
            given: "F1".into(),
            target: "W".into(),
            mode: None,
            recorded: true,
        })
        .named("q_class")
        .expecting(Expectation::Table(table(
            &["h", "t"],
            &["o", "f"],
            &[&[0.5, 0.5], &[0.0, 1.0]],
        )?)),
    );
    Ok(s)
}

/// How an agent's table over `(a, w)` is assembled from the extended
/// scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentConstruction {
    /// Joint `q(a, w)` with every event relative.
    RelativeJoint,
    /// Joint `q(a, w)` with `actor`'s event collapsing, i.e. the mixture
    /// over that actor's outcomes weighted by their probabilities.
    CollapsedJoint { actor: &'static str },
    /// The conditionals `q(w | a)` as a 2x2 array divided by its total.
    RenormalizedConditional,
}

/// Which construction each agent's table uses.
pub const APPENDIX_B_PLAN: [(&str, AgentConstruction); 4] = [
    ("F1", AgentConstruction::CollapsedJoint { actor: "F1" }),
    ("F2", AgentConstruction::CollapsedJoint { actor: "F2" }),
    ("A", AgentConstruction::RenormalizedConditional),
    ("W", AgentConstruction::RelativeJoint),
];

#[derive(Debug, Clone, PartialEq)]
pub struct AgentTable {
    pub agent: String,
    pub construction: AgentConstruction,
    /// Joint table over A's (rows) and W's (columns) outcomes `o`, `f`.
    pub table: ProbabilityTable,
}

fn single_table(s: &Scenario, kind: QueryKind) -> Result<ProbabilityTable> {
    let mut s = s.clone();
    s.queries = vec![Query::new(kind)];
    match run_scenario(&s)?.remove(0).value {
        QueryValue::Table(t) => Ok(t),
        _ => unreachable!("table query"),
    }
}

fn aw_joint(s: &Scenario) -> Result<ProbabilityTable> {
    single_table(
        s,
        QueryKind::Joint {
            rows: "A".into(),
            columns: "W".into(),
        },
    )?
    .restrict(&["o", "f"], &["o", "f"])
}

/// Each agent's table over `(a, w)` following [`APPENDIX_B_PLAN`].
pub fn appendix_b_tables() -> Result<Vec<AgentTable>> {
    let base = extended_wigner_friend()?;
    APPENDIX_B_PLAN
        .iter()
        .map(|&(agent, construction)| {
            let table = match construction {
                AgentConstruction::RelativeJoint => aw_joint(&base)?,
                AgentConstruction::CollapsedJoint { actor } => aw_joint(&base.with_mode(actor, Mode::Collapse)?)?,
                AgentConstruction::RenormalizedConditional => {
                    let cond = single_table(
                        &base,
                        QueryKind::Conditional {
                            given: "A".into(),
                            target: "W".into(),
                            mode: None,
                            recorded: false,
                        },
                    )?
                    .restrict(&["o", "f"], &["o", "f"])?;
                    let total = cond.total();
                    let entries = cond
                        .entries()
                        .iter()
                        .map(|r| r.iter().map(|v| v / total).collect())
                        .collect();
                    ProbabilityTable::joint(strings(&["o", "f"]), strings(&["o", "f"]), entries)?
                }
            };
            Ok(AgentTable {
                agent: agent.to_string(),
                construction,
                table,
            })
        })
        .collect()
}

/// The update-rule and relative-state conditionals of [`wigner_friend`] at
/// one value of `alpha^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequivalencePoint {
    pub alpha_sq: f64,
    pub collapse: ProbabilityTable,
    pub relative: ProbabilityTable,
    pub gap: f64,
    /// `(row, column)` of the largest difference.
    pub witness: Option<(String, String)>,
}

/// `0, 0.05, ..., 1`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Both conditionals and their largest gap for each `alpha^2` in the grid,
/// with `beta^2 = 1 - alpha^2`.
pub fn inequivalence_report(alpha_sq_grid: &[f64]) -> Result<Vec<InequivalencePoint>> {
    alpha_sq_grid
        .iter()
        .map(|&x| {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::GridOutOfRange(x));
            }
            let mut s = wigner_friend(x.sqrt(), (1.0 - x).sqrt())?;
            s.queries = vec![Query::new(QueryKind::Compare {
                given: "F".into(),
                target: "W".into(),
            })];
            let QueryValue::Comparison {
                collapse,
                relative,
                gap,
                witness,
            } = run_scenario(&s)?.remove(0).value
            else {
                unreachable!("compare query")
            };
            Ok(InequivalencePoint {
                alpha_sq: x,
                collapse: collapse.restrict(&["u", "d"], &["b1", "b2"])?,
                relative: relative.restrict(&["u", "d"], &["b1", "b2"])?,
                gap,
                witness,
            })
        })
        .collect()
}

/// A closed-form proposal for the relative-state table of [`wigner_friend`]:
/// rows `u`, `d`, columns `b1`, `b2`,
/// `[((a+b)/2a)^2, ((a-b)/2b)^2; ((a+b)/2b)^2, ((a-b)/2a)^2]`. Undefined when
/// either parameter vanishes. Its rows need not sum to one; it is reported
/// next to the computed table, not used as a reference.
pub fn closed_form_relative_table(alpha: f64, beta: f64) -> Option<[[f64; 2]; 2]> {
    if alpha == 0.0 || beta == 0.0 {
        return None;
    }
    let sq = |x: f64| x * x;
    Some([
        [sq((alpha + beta) / (2.0 * alpha)), sq((alpha - beta) / (2.0 * beta))],
        [sq((alpha + beta) / (2.0 * beta)), sq((alpha - beta) / (2.0 * alpha))],
    ])
}
