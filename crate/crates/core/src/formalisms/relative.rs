//! Relative-state formalism: measurements are isometries that correlate an
//! observer's memory with the measured factors, and probabilities are traces
//! of memory-pointer projectors against the global state.

use super::standard::normalize_row;
use super::{ObserverMemory, ProbabilityTable, ProjectiveMeasurement, TableRow};
use crate::error::{Error, Result};
use crate::tensor::{
    apply_on_factors, inner_product, FactorProjection, GlobalState, Isometry, Ket, LinearMap, StateVector, C64,
};

fn check_pointers(labels: &[String], mem: &ObserverMemory) -> Result<()> {
    let pointers = mem.outcome_labels();
    if pointers.len() != labels.len() {
        return Err(Error::PointerCountMismatch {
            outcomes: labels.len(),
            pointers: pointers.len(),
        });
    }
    if let Some(l) = labels.iter().zip(&pointers).find(|(a, b)| a != b).map(|(a, _)| a) {
        return Err(Error::UnknownOutcome(format!("{l} has no pointer state in memory `{}`", mem.memory_label())));
    }
    Ok(())
}

/// `V: |a> -> |a> ⊗ |A_a>` for every outcome `a`; the memory factor is
/// appended after the measured factors.
pub fn measurement_isometry(m: &ProjectiveMeasurement, mem: &ObserverMemory) -> Result<Isometry> {
    m.require_complete()?;
    check_pointers(&m.labels(), mem)?;
    let out_layout = m.subspace().concat(mem.layout())?;
    let mut map: Option<LinearMap> = None;
    for o in m.outcomes() {
        let image = o.vector.as_ket().tensor(mem.pointer(&o.label)?)?;
        let term = LinearMap::outer(&image, &o.vector);
        map = Some(match map {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    let map = map.ok_or(Error::EmptyOutcomes)?;
    debug_assert_eq!(map.out_layout(), &out_layout);
    Isometry::new(map)
}

/// Extends the global state by the observer's measurement isometry.
pub fn apply_relative_measurement(
    total: &StateVector,
    m: &ProjectiveMeasurement,
    mem: &ObserverMemory,
) -> Result<StateVector> {
    let v = measurement_isometry(m, mem)?;
    let out = apply_on_factors(v.map(), &m.targets(), total)?;
    StateVector::from_ket(out)
}

pub(crate) fn pointer_projection(mem: &ObserverMemory, outcome: &str) -> Result<FactorProjection> {
    Ok(FactorProjection::new(
        [mem.memory_label()],
        mem.pointer(outcome)?.as_ket().clone(),
    ))
}

fn require_memory<G: GlobalState>(total: &G, mem: &ObserverMemory) -> Result<()> {
    if total.layout().contains(mem.memory_label()) {
        Ok(())
    } else {
        Err(Error::UnknownLabel(mem.memory_label().to_string()))
    }
}

/// `q(a) = tr((1 ⊗ |A_a><A_a|) Phi_tot)`.
pub fn relative_outcome_probability<G: GlobalState>(total: &G, mem: &ObserverMemory, outcome: &str) -> Result<f64> {
    require_memory(total, mem)?;
    Ok(total
        .projection_weight(&[pointer_projection(mem, outcome)?])?
        .clamp(0.0, 1.0))
}

/// Trace of the tensor product of rank-one projectors (identity elsewhere)
/// against the global state.
pub fn relative_joint_probability<G: GlobalState>(total: &G, projections: &[FactorProjection]) -> Result<f64> {
    Ok(total.projection_weight(projections)?.clamp(0.0, 1.0))
}

/// Conditional distribution of `target`'s outcomes given the projections in
/// `condition`, normalized by the marginal over the target's outcomes.
pub(crate) fn conditional_row<G: GlobalState>(
    total: &G,
    condition_label: &str,
    condition: &[FactorProjection],
    target: &ObserverMemory,
) -> Result<TableRow> {
    require_memory(total, target)?;
    let columns = target.outcome_labels();
    let weights = columns
        .iter()
        .map(|b| {
            let mut ps = condition.to_vec();
            ps.push(pointer_projection(target, b)?);
            relative_joint_probability(total, &ps)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TableRow {
        condition: condition_label.to_string(),
        columns,
        values: normalize_row(weights.clone()),
        weights,
    })
}

/// `q(b|a) = q(a,b) / sum_b q(a,b)` from memory pointer projections.
pub fn relative_conditional<G: GlobalState>(
    total: &G,
    cond: (&ObserverMemory, &str),
    target: &ObserverMemory,
) -> Result<TableRow> {
    let (mem, outcome) = cond;
    require_memory(total, mem)?;
    conditional_row(total, outcome, &[pointer_projection(mem, outcome)?], target)
}

/// All rows of [`relative_conditional`] over the conditioning memory's
/// outcomes.
pub fn relative_conditional_table<G: GlobalState>(
    total: &G,
    given: &ObserverMemory,
    target: &ObserverMemory,
) -> Result<ProbabilityTable> {
    let rows = given
        .outcome_labels()
        .iter()
        .map(|a| relative_conditional(total, (given, a), target))
        .collect::<Result<Vec<_>>>()?;
    ProbabilityTable::from_rows(rows)
}

/// Whether every superobserver basis vector factors as `|a0> ⊗ |A_a1>`
/// (up to phase) over the observer's basis and memory pointers. Under this
/// condition collapse and relative conditionals coincide.
pub fn product_basis_condition(
    super_m: &ProjectiveMeasurement,
    observer_m: &ProjectiveMeasurement,
    mem: &ObserverMemory,
    tol: f64,
) -> Result<bool> {
    let products = observer_m
        .outcomes()
        .iter()
        .flat_map(|a| mem.pointers().iter().map(move |(_, p)| (a, p)))
        .map(|(a, p)| a.vector.as_ket().tensor(p))
        .collect::<Result<Vec<Ket>>>()?;
    for b in super_m.outcomes() {
        let mut found = false;
        for prod in &products {
            let prod = prod.with_layout(super_m.subspace().clone())?;
            let overlap: C64 = inner_product(&prod, b.vector.as_ket())?;
            if (overlap.norm() - 1.0).abs() <= tol {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formalisms::{born_probability, standard_conditional};
    use crate::tensor::{check_isometry, SpaceLayout};
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

    fn friend() -> ObserverMemory {
        ObserverMemory::computational("F", "F", &["up", "down"]).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::new(spin(), vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap()
    }

    #[test]
    fn qubit_isometry_matrix() {
        let v = measurement_isometry(&z(), &friend()).unwrap();
        let m = v.map().matrix();
        assert_eq!(m.shape(), (4, 2));
        // |up> -> |up,U> (index 0), |down> -> |down,D> (index 3)
        assert_eq!(m[(0, 0)], c(1.0));
        assert_eq!(m[(3, 1)], c(1.0));
        assert_eq!(m.iter().filter(|x| x.norm() > 0.0).count(), 2);
        let check = check_isometry(v.map(), 1e-15);
        assert!(check.is_isometry);
        assert_eq!(check.max_deviation, 0.0);
    }

    #[test]
    fn isometry_on_superposition() {
        let total = apply_relative_measurement(&plus(), &z(), &friend()).unwrap();
        let expect = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in total.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn qutrit_isometry_is_isometric() {
        let l = SpaceLayout::single("S", 3).unwrap();
        let h = 1.0 / 3f64.sqrt();
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let basis = (0..3)
            .map(|k| {
                let amps = (0..3).map(|j| w.powu((j * k) as u32) * h).collect();
                (k.to_string(), StateVector::new(l.clone(), amps).unwrap())
            })
            .collect();
        let m = ProjectiveMeasurement::new(basis).unwrap();
        let mem = ObserverMemory::computational("O", "O", &["0", "1", "2"]).unwrap();
        let v = measurement_isometry(&m, &mem).unwrap();
        assert!(check_isometry(v.map(), 1e-14).is_isometry);
    }

    #[test]
    fn pointer_count_mismatch() {
        let mem = ObserverMemory::computational("F", "F", &["a", "b", "c"]).unwrap();
        assert!(matches!(
            measurement_isometry(&z(), &mem),
            Err(Error::PointerCountMismatch { .. })
        ));
    }

    #[test]
    fn postulate_one_values() {
        let total = apply_relative_measurement(&plus(), &z(), &friend()).unwrap();
        assert!((relative_outcome_probability(&total, &friend(), "up").unwrap() - 0.5).abs() < 1e-15);
        let up = StateVector::basis(spin(), 0).unwrap();
        let total = apply_relative_measurement(&up, &z(), &friend()).unwrap();
        assert_eq!(relative_outcome_probability(&total, &friend(), "up").unwrap(), 1.0);
    }

    #[test]
    fn memory_must_be_present() {
        assert!(matches!(
            relative_outcome_probability(&plus(), &friend(), "up"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn delta_property() {
        let skew = StateVector::new(spin(), vec![c(0.6), c(0.8)]).unwrap();
        let total = apply_relative_measurement(&skew, &z(), &friend()).unwrap();
        for (ai, a) in ["up", "down"].iter().enumerate() {
            for (bi, b) in ["up", "down"].iter().enumerate() {
                let q = relative_joint_probability(
                    &total,
                    &[
                        FactorProjection::new(["S"], z().vector(b).unwrap().as_ket().clone()),
                        pointer_projection(&friend(), a).unwrap(),
                    ],
                )
                .unwrap();
                let expect = if ai == bi { born_probability(&skew, &z(), a).unwrap() } else { 0.0 };
                assert!((q - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_projection_list_gives_one() {
        let total = apply_relative_measurement(&plus(), &z(), &friend()).unwrap();
        assert!((relative_joint_probability(&total, &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_level_chain_matches_standard() {
        let h = FRAC_1_SQRT_2;
        let x = ProjectiveMeasurement::new(vec![
            ("+", StateVector::new(spin(), vec![c(h), c(h)]).unwrap()),
            ("-", StateVector::new(spin(), vec![c(h), c(-h)]).unwrap()),
        ])
        .unwrap();
        let second = ObserverMemory::computational("G", "G", &["+", "-"]).unwrap();
        let skew = StateVector::new(spin(), vec![c(0.6), c(0.8)]).unwrap();
        let total = apply_relative_measurement(&skew, &z(), &friend()).unwrap();
        let total = apply_relative_measurement(&total, &x, &second).unwrap();
        let rel = relative_conditional_table(&total, &friend(), &second).unwrap();
        let std = standard_conditional(&skew, &z(), &x).unwrap();
        assert!(rel.max_abs_diff(&std).unwrap().0 < 1e-12);
    }

    #[test]
    fn product_basis_detection() {
        let so = SpaceLayout::new([("S", 2), ("F", 2)]).unwrap();
        let products = ProjectiveMeasurement::new(
            (0..4)
                .map(|i| (i.to_string(), StateVector::basis(so.clone(), i).unwrap()))
                .collect(),
        )
        .unwrap();
        assert!(product_basis_condition(&products, &z(), &friend(), 1e-10).unwrap());
        let h = FRAC_1_SQRT_2;
        let bell = ProjectiveMeasurement::new(vec![
            ("+", StateVector::new(so.clone(), vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()),
            ("-", StateVector::new(so, vec![c(h), c(0.0), c(0.0), c(-h)]).unwrap()),
        ])
        .unwrap()
        .completed()
        .unwrap();
        assert!(!product_basis_condition(&bell, &z(), &friend(), 1e-10).unwrap());
    }
}
