//! General measurements given by Kraus operators, and their unitary dilation
//! onto an ancilla read out by an observer.

use nalgebra::DMatrix;

use super::relative::{measurement_isometry, relative_conditional_table, relative_outcome_probability};
use super::standard::normalize_row;
use super::{KrausMeasurement, ObserverMemory, ProbabilityTable, ProjectiveMeasurement, ZERO_PROBABILITY};
use crate::error::{Error, Result};
use crate::tensor::{
    complete_orthonormal_basis, DensityOperator, Isometry, Ket, LinearMap, SpaceLayout, StateVector, C64,
};

/// `tr(K_a rho K_a†)`.
pub fn kraus_probability(rho: &DensityOperator, m: &KrausMeasurement, outcome: &str) -> Result<f64> {
    let k = m.operator(outcome)?;
    let effect = k.adjoint().compose(k)?;
    Ok(rho.expectation(&effect, &m.targets())?.re.clamp(0.0, 1.0))
}

/// `K_a rho K_a† / p(a)`.
pub fn kraus_update(rho: &DensityOperator, m: &KrausMeasurement, outcome: &str) -> Result<DensityOperator> {
    let p = kraus_probability(rho, m, outcome)?;
    if p <= ZERO_PROBABILITY {
        return Err(Error::UndefinedCollapse {
            outcome: outcome.to_string(),
            probability: p,
        });
    }
    let raw = rho.conjugate_on_factors(m.operator(outcome)?, &m.targets())?;
    let scaled = raw.matrix() / C64::new(p, 0.0);
    let herm = (&scaled + scaled.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityOperator::from_parts_unchecked(raw.in_layout().clone(), herm))
}

/// A Kraus measurement realized as a unitary on system ⊗ ancilla, followed
/// by an observer reading the ancilla in its computational basis.
#[derive(Debug, Clone)]
pub struct KrausDilation {
    targets: Vec<String>,
    ancilla_label: String,
    unitary: LinearMap,
    ancilla_basis: Vec<StateVector>,
    readout: ProjectiveMeasurement,
    record_isometry: Isometry,
    memory: ObserverMemory,
}

/// Builds `U` with `<a|U (rho ⊗ |0><0|) U†|a> = K_a rho K_a†`.
///
/// The ancilla has one level per outcome. With basis index `(s, x) = s * n + x`,
/// column `(s, 0)` of `U` is `sum_a K_a|s> ⊗ |a>`; the other columns are the
/// orthonormal completion of those, taken in index order and assigned to
/// `(s, x)` for `x >= 1` in index order.
pub fn kraus_dilation(m: &KrausMeasurement, ancilla_label: &str, memory: &ObserverMemory) -> Result<KrausDilation> {
    let n = m.len();
    let d = m.subspace().dim();
    let ancilla = SpaceLayout::single(ancilla_label, n)?;
    let joint = m.subspace().concat(&ancilla)?;
    let big = d * n;

    let mut first = Vec::with_capacity(d);
    for s in 0..d {
        let mut col = DMatrix::<C64>::zeros(big, 1);
        for (a, (_, k)) in m.outcomes().iter().enumerate() {
            for sp in 0..d {
                col[(sp * n + a, 0)] = k.matrix()[(sp, s)];
            }
        }
        first.push(Ket::from_vector(joint.clone(), col.column(0).into_owned())?);
    }
    let rest = complete_orthonormal_basis(&joint, &first)?;
    if rest.len() != big - d {
        return Err(Error::NotOrthonormal(format!(
            "dilation completion produced {} of {} columns",
            rest.len(),
            big - d
        )));
    }
    let mut u = DMatrix::<C64>::zeros(big, big);
    let mut extra = rest.iter();
    for (s, image) in first.iter().enumerate() {
        u.set_column(s * n, image.amplitudes());
        for x in 1..n {
            let v = extra.next().expect("count checked above");
            u.set_column(s * n + x, v.amplitudes());
        }
    }
    let unitary = LinearMap::operator(joint, u)?;

    let readout = ProjectiveMeasurement::new(
        m.labels()
            .into_iter()
            .enumerate()
            .map(|(a, l)| Ok((l, StateVector::basis(ancilla.clone(), a)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let ancilla_basis = readout.outcomes().iter().map(|o| o.vector.clone()).collect();
    let record_isometry = measurement_isometry(&readout, memory)?;
    Ok(KrausDilation {
        targets: m.targets(),
        ancilla_label: ancilla_label.to_string(),
        unitary,
        ancilla_basis,
        readout,
        record_isometry,
        memory: memory.clone(),
    })
}

impl KrausDilation {
    pub fn unitary(&self) -> &LinearMap {
        &self.unitary
    }

    pub fn ancilla_basis(&self) -> &[StateVector] {
        &self.ancilla_basis
    }

    /// The ancilla readout as a projective measurement.
    pub fn readout(&self) -> &ProjectiveMeasurement {
        &self.readout
    }

    /// `|a>_X -> |a>_X ⊗ |A_a>` on the ancilla.
    pub fn record_isometry(&self) -> &Isometry {
        &self.record_isometry
    }

    pub fn memory(&self) -> &ObserverMemory {
        &self.memory
    }

    pub fn ancilla_label(&self) -> &str {
        &self.ancilla_label
    }

    fn unitary_targets(&self) -> Vec<String> {
        let mut t = self.targets.clone();
        t.push(self.ancilla_label.clone());
        t
    }

    fn ancilla_ground(&self) -> &StateVector {
        &self.ancilla_basis[0]
    }

    /// `U (rho ⊗ |0><0|) U†`, with the ancilla appended to the layout.
    pub fn dilate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let extended = rho.tensor(&DensityOperator::from_pure(self.ancilla_ground()))?;
        let out = extended.conjugate_on_factors(&self.unitary, &self.unitary_targets())?;
        Ok(DensityOperator::from_parts_unchecked(
            out.in_layout().clone(),
            out.matrix().clone(),
        ))
    }

    /// Dilation followed by the memory isometry on the ancilla; the layout
    /// gains the ancilla and then the memory factor.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.dilate(rho)?
            .apply_isometry(&self.record_isometry, &[self.ancilla_label.as_str()])
    }

    pub fn apply_pure(&self, state: &StateVector) -> Result<StateVector> {
        let extended = state.tensor(self.ancilla_ground())?;
        let rotated = crate::tensor::apply_on_factors(&self.unitary, &self.unitary_targets(), &extended)?;
        let recorded = crate::tensor::apply_on_factors(
            self.record_isometry.map(),
            &[self.ancilla_label.as_str()],
            &rotated,
        )?;
        StateVector::from_ket(recorded)
    }

    /// Outcome probability read off the memory pointer after [`Self::apply`].
    pub fn outcome_probability(&self, rho: &DensityOperator, outcome: &str) -> Result<f64> {
        relative_outcome_probability(&self.apply(rho)?, &self.memory, outcome)
    }
}

/// `p(b|a)` for `second` applied after `first`, by the update rule:
/// `tr(K_b rho_a K_b†)` with `rho_a` the updated state.
pub fn kraus_sequence_conditional(
    rho: &DensityOperator,
    first: &KrausMeasurement,
    second: &KrausMeasurement,
) -> Result<ProbabilityTable> {
    let mut rows = Vec::with_capacity(first.len());
    for a in first.labels() {
        if kraus_probability(rho, first, &a)? <= ZERO_PROBABILITY {
            rows.push(None);
            continue;
        }
        let after = kraus_update(rho, first, &a)?;
        let weights = second
            .labels()
            .iter()
            .map(|b| kraus_probability(&after, second, b))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(normalize_row(weights));
    }
    ProbabilityTable::conditional(first.labels(), second.labels(), rows)
}

fn fresh_label(layout: &SpaceLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('\'');
    }
    label
}

/// The same conditional with both measurements dilated and recorded in
/// memories, read off the final state by pointer projections.
pub fn dilated_sequence_conditional(
    rho: &DensityOperator,
    first: &KrausMeasurement,
    second: &KrausMeasurement,
) -> Result<ProbabilityTable> {
    let mut layout = rho.layout().clone();
    let mut state = rho.clone();
    let mut memories = Vec::new();
    for (i, m) in [first, second].into_iter().enumerate() {
        let ancilla = fresh_label(&layout, &format!("X{}", i + 1));
        let mem_label = fresh_label(&layout, &format!("M{}", i + 1));
        let mem = ObserverMemory::for_outcomes(&mem_label, &mem_label, &m.labels())?;
        state = kraus_dilation(m, &ancilla, &mem)?.apply(&state)?;
        layout = state.layout().clone();
        memories.push(mem);
    }
    relative_conditional_table(&state, &memories[0], &memories[1])
}
