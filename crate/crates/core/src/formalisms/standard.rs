//! Born rule and measurement-update rule.

use super::relative::measurement_isometry;
use super::{ObserverMemory, ProbabilityTable, ProjectiveMeasurement, ZERO_PROBABILITY};
use crate::error::{Error, Result};
use crate::tensor::{apply_on_factors, FactorProjection, GlobalState, Ket, LinearMap, StateVector};

/// `|<a|phi>|^2`, evaluated as `tr(P_a |phi><phi|)` with `P_a` on the
/// measurement's factors.
pub fn born_probability(state: &StateVector, m: &ProjectiveMeasurement, outcome: &str) -> Result<f64> {
    let v = m.vector(outcome)?;
    let p = state.projection_weight(&[FactorProjection::new(m.targets(), v.as_ket().clone())])?;
    Ok(p.clamp(0.0, 1.0))
}

fn project(state: &Ket, m: &ProjectiveMeasurement, outcome: &str) -> Result<Ket> {
    apply_on_factors(&m.projector(outcome)?, &m.targets(), state)
}

/// Projects onto the outcome and renormalizes.
pub fn collapse_update(state: &StateVector, m: &ProjectiveMeasurement, outcome: &str) -> Result<StateVector> {
    let projected = project(state, m, outcome)?;
    let p = projected.norm_sqr();
    if p <= ZERO_PROBABILITY {
        return Err(Error::UndefinedCollapse {
            outcome: outcome.to_string(),
            probability: p,
        });
    }
    projected.normalize()
}

/// Two consecutive measurements under the update rule:
/// `p(b|a) = p(a,b) / sum_b p(a,b)` with `p(a,b) = tr(P_b P_a rho P_a P_b)`.
pub fn standard_conditional(
    state: &StateVector,
    first: &ProjectiveMeasurement,
    second: &ProjectiveMeasurement,
) -> Result<ProbabilityTable> {
    first.require_complete()?;
    second.require_complete()?;
    let targets = second.targets();
    let mut rows = Vec::with_capacity(first.len());
    for a in first.outcomes() {
        let after_a = project(state, first, &a.label)?;
        let joint = second
            .outcomes()
            .iter()
            .map(|b| {
                let v = apply_on_factors(&LinearMap::projector(&b.vector), &targets, &after_a)?;
                Ok(v.norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(normalize_row(joint));
    }
    ProbabilityTable::conditional(first.labels(), second.labels(), rows)
}

/// Divides by the row sum, or `None` when the sum is below
/// [`ZERO_PROBABILITY`].
pub(crate) fn normalize_row(weights: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    (total > ZERO_PROBABILITY).then(|| weights.iter().map(|w| (w / total).clamp(0.0, 1.0)).collect())
}

/// The observer collapses the state on their own outcome `a`, the memory
/// records it, and the superobserver's outcome probabilities are taken on
/// `|a> ⊗ |A_a>`: `p(b|a) = |<b | a ⊗ A_a>|^2`.
pub fn subjective_collapse_conditional(
    state: &StateVector,
    observer_m: &ProjectiveMeasurement,
    mem: &ObserverMemory,
    super_m: &ProjectiveMeasurement,
) -> Result<ProbabilityTable> {
    super_m.require_complete()?;
    let record = measurement_isometry(observer_m, mem)?;
    let targets = observer_m.targets();
    let mut rows = Vec::with_capacity(observer_m.len());
    for a in observer_m.outcomes() {
        if born_probability(state, observer_m, &a.label)? <= ZERO_PROBABILITY {
            rows.push(None);
            continue;
        }
        let collapsed = collapse_update(state, observer_m, &a.label)?;
        let with_memory = apply_on_factors(record.map(), &targets, &collapsed)?;
        let with_memory = StateVector::from_ket(with_memory)?;
        let weights = super_m
            .outcomes()
            .iter()
            .map(|b| born_probability(&with_memory, super_m, &b.label))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(normalize_row(weights));
    }
    ProbabilityTable::conditional(observer_m.labels(), super_m.labels(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{equal_up_to_phase, SpaceLayout, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn spin() -> SpaceLayout {
        SpaceLayout::single("S", 2).unwrap()
    }

    fn z() -> ProjectiveMeasurement {
        ProjectiveMeasurement::computational("S", &["up", "down"]).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::new(spin(), vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap()
    }

    fn hadamard_basis() -> ProjectiveMeasurement {
        let h = FRAC_1_SQRT_2;
        ProjectiveMeasurement::new(vec![
            ("+", StateVector::new(spin(), vec![c(h), c(h)]).unwrap()),
            ("-", StateVector::new(spin(), vec![c(h), c(-h)]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn born_values() {
        assert!((born_probability(&plus(), &z(), "up").unwrap() - 0.5).abs() < 1e-15);
        let up = StateVector::basis(spin(), 0).unwrap();
        assert_eq!(born_probability(&up, &z(), "up").unwrap(), 1.0);
        let skew = StateVector::new(spin(), vec![c(0.3f64.sqrt()), c(0.7f64.sqrt())]).unwrap();
        assert!((born_probability(&skew, &z(), "up").unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(born_probability(&up, &z(), "sideways"), Err(Error::UnknownOutcome(_))));
    }

    #[test]
    fn collapse_to_eigenstate() {
        let after = collapse_update(&plus(), &z(), "up").unwrap();
        assert!(equal_up_to_phase(&after, &StateVector::basis(spin(), 0).unwrap(), 1e-14));
    }

    #[test]
    fn collapse_on_impossible_outcome() {
        let up = StateVector::basis(spin(), 0).unwrap();
        assert!(matches!(
            collapse_update(&up, &z(), "down"),
            Err(Error::UndefinedCollapse { .. })
        ));
    }

    #[test]
    fn collapse_bell_state() {
        let so = SpaceLayout::new([("S", 2), ("O", 2)]).unwrap();
        let bell = StateVector::new(so.clone(), vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let after = collapse_update(&bell, &z(), "up").unwrap();
        assert!(equal_up_to_phase(&after, &StateVector::basis(so, 0).unwrap(), 1e-14));
    }

    #[test]
    fn same_basis_gives_identity_table() {
        let t = standard_conditional(&plus(), &z(), &z()).unwrap();
        assert_eq!(t.entries(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn z_then_hadamard_is_uniform() {
        let t = standard_conditional(&plus(), &z(), &hadamard_basis()).unwrap();
        for v in t.flatten() {
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn undefined_row_for_impossible_condition() {
        let up = StateVector::basis(spin(), 0).unwrap();
        let t = standard_conditional(&up, &z(), &hadamard_basis()).unwrap();
        assert!(t.is_row_defined(0));
        assert!(!t.is_row_defined(1));
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let partial = ProjectiveMeasurement::new(vec![("up", StateVector::basis(spin(), 0).unwrap())]).unwrap();
        assert!(matches!(
            standard_conditional(&plus(), &partial, &z()),
            Err(Error::IncompleteMeasurement(_))
        ));
    }
}
