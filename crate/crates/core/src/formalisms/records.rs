//! Classical registers holding an agent's statements about outcomes.

use super::relative::{conditional_row, pointer_projection};
use super::{ClassicalRegister, ObserverMemory, ProjectiveMeasurement, TableRow};
use crate::error::{Error, Result};
use crate::tensor::{gram_matrix, FactorProjection, GlobalState, Isometry, Ket, LinearMap, ISOMETRY_TOL};

/// `|a> -> |a> ⊗ |A_a> ⊗ |x_{statement(a)}>`; the memory and the register are
/// appended in that order. Several outcomes may share a statement.
pub fn classical_record_isometry<S: AsRef<str>>(
    m: &ProjectiveMeasurement,
    mem: &ObserverMemory,
    reg: &ClassicalRegister,
    statement_of: &[(S, S)],
) -> Result<Isometry> {
    if statement_of.is_empty() || m.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    m.require_complete()?;
    for (outcome, _) in statement_of {
        m.index_of(outcome.as_ref())?;
    }
    let mut map: Option<LinearMap> = None;
    for o in m.outcomes() {
        let statement = statement_of
            .iter()
            .find(|(a, _)| a.as_ref() == o.label)
            .map(|(_, s)| s.as_ref())
            .ok_or_else(|| Error::MissingStatement(o.label.clone()))?;
        let image = o
            .vector
            .as_ket()
            .tensor(mem.pointer(&o.label)?)?
            .tensor(reg.symbol(statement)?)?;
        let term = LinearMap::outer(&image, &o.vector);
        map = Some(match map {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    Isometry::new(map.ok_or(Error::EmptyOutcomes)?)
}

/// `q(b | a, x) = q(a, x, b) / sum_b q(a, x, b)`: the relative conditional
/// with the register projector `|x><x|` inserted.
pub fn recorded_conditional<G: GlobalState>(
    total: &G,
    reg: &ClassicalRegister,
    statement: &str,
    cond: (&ObserverMemory, &str),
    target: &ObserverMemory,
) -> Result<TableRow> {
    let (mem, outcome) = cond;
    if !total.layout().contains(reg.label()) {
        return Err(Error::UnknownLabel(reg.label().to_string()));
    }
    if !total.layout().contains(mem.memory_label()) {
        return Err(Error::UnknownLabel(mem.memory_label().to_string()));
    }
    let condition = [
        pointer_projection(mem, outcome)?,
        FactorProjection::new([reg.label()], reg.symbol(statement)?.as_ket().clone()),
    ];
    conditional_row(total, outcome, &condition, target)
}

/// Whether a partial map `in_i -> out_i` extends to an isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionVerdict {
    pub extendable: bool,
    /// Largest entry-wise difference between the two Gram matrices.
    pub max_deviation: f64,
}

/// A partial map extends to an isometry iff it preserves every pairwise
/// inner product, so the Gram matrices of inputs and outputs are compared.
pub fn partial_map_isometry_check<K: AsRef<Ket>>(pairs: &[(K, K)]) -> Result<ExtensionVerdict> {
    let Some((first_in, first_out)) = pairs.first() else {
        return Ok(ExtensionVerdict {
            extendable: true,
            max_deviation: 0.0,
        });
    };
    let (in_layout, out_layout) = (first_in.as_ref().layout(), first_out.as_ref().layout());
    if out_layout.dim() < in_layout.dim() {
        return Err(Error::DimensionMismatch(format!(
            "output space {out_layout} is smaller than input space {in_layout}"
        )));
    }
    for (i, o) in pairs {
        if i.as_ref().layout() != in_layout || o.as_ref().layout() != out_layout {
            return Err(Error::LayoutMismatch("pairs do not share layouts".into()));
        }
    }
    let ins: Vec<&Ket> = pairs.iter().map(|(i, _)| i.as_ref()).collect();
    let outs: Vec<&Ket> = pairs.iter().map(|(_, o)| o.as_ref()).collect();
    let diff = gram_matrix(&ins)? - gram_matrix(&outs)?;
    let max_deviation = diff.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(ExtensionVerdict {
        extendable: max_deviation <= ISOMETRY_TOL,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formalisms::relative::relative_conditional;
    use crate::tensor::{apply_on_factors, check_isometry, SpaceLayout, StateVector, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn spin() -> SpaceLayout {
        SpaceLayout::single("S", 2).unwrap()
    }

    fn z() -> ProjectiveMeasurement {
        ProjectiveMeasurement::computational("S", &["up", "down"]).unwrap()
    }

    fn friend() -> ObserverMemory {
        ObserverMemory::computational("F", "F", &["up", "down"]).unwrap()
    }

    #[test]
    fn per_outcome_statements() {
        let reg = ClassicalRegister::from_statements("R", &["s0", "s1"]).unwrap();
        let v = classical_record_isometry(&z(), &friend(), &reg, &[("up", "s0"), ("down", "s1")]).unwrap();
        let m = v.map().matrix();
        assert_eq!(m.shape(), (8, 2));
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(7, 1)], C64::new(1.0, 0.0));
        let labels: Vec<&str> = v.out_layout().labels().collect();
        assert_eq!(labels, ["S", "F", "R"]);
    }

    #[test]
    fn shared_statement_still_isometric() {
        let reg = ClassicalRegister::from_statements("R", &["s1", "s2"]).unwrap();
        let v = classical_record_isometry(&z(), &friend(), &reg, &[("up", "s1"), ("down", "s1")]).unwrap();
        assert!(check_isometry(v.map(), 1e-15).is_isometry);
    }

    #[test]
    fn record_errors() {
        let reg = ClassicalRegister::from_statements("R", &["s0"]).unwrap();
        let none: [(&str, &str); 0] = [];
        assert!(matches!(
            classical_record_isometry(&z(), &friend(), &reg, &none),
            Err(Error::EmptyOutcomes)
        ));
        assert!(matches!(
            classical_record_isometry(&z(), &friend(), &reg, &[("up", "s0"), ("down", "nope")]),
            Err(Error::UnknownStatement(_))
        ));
        assert!(matches!(
            classical_record_isometry(&z(), &friend(), &reg, &[("up", "s0")]),
            Err(Error::MissingStatement(_))
        ));
    }

    #[test]
    fn shared_record_leaves_conditional_unchanged() {
        let h = FRAC_1_SQRT_2;
        let plus = StateVector::new(spin(), vec![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let reg = ClassicalRegister::from_statements("R", &["50:50", "other"]).unwrap();
        let v = classical_record_isometry(&z(), &friend(), &reg, &[("up", "50:50"), ("down", "50:50")]).unwrap();
        let total = apply_on_factors(v.map(), &["S"], &plus).unwrap();
        let second = ObserverMemory::computational("G", "G", &["up", "down"]).unwrap();
        let total = apply_on_factors(
            crate::formalisms::measurement_isometry(&z(), &second).unwrap().map(),
            &["S"],
            &total,
        )
        .unwrap();
        for a in ["up", "down"] {
            let with = recorded_conditional(&total, &reg, "50:50", (&friend(), a), &second).unwrap();
            let without = relative_conditional(&total, (&friend(), a), &second).unwrap();
            assert_eq!(with.values, without.values);
        }
    }

    #[test]
    fn gram_verdicts() {
        let l = spin();
        let k = |i| StateVector::basis(l.clone(), i).unwrap();
        let ok = partial_map_isometry_check(&[(k(0), k(0)), (k(1), k(1))]).unwrap();
        assert!(ok.extendable);
        assert_eq!(ok.max_deviation, 0.0);
        let bad = partial_map_isometry_check(&[(k(0), k(0)), (k(1), k(0))]).unwrap();
        assert!(!bad.extendable);
        assert!((bad.max_deviation - 1.0).abs() < 1e-15);
        let empty: [(StateVector, StateVector); 0] = [];
        assert!(partial_map_isometry_check(&empty).unwrap().extendable);
    }
}
