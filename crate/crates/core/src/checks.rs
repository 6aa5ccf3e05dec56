//! Random instances of the equivalences between the collapse and relative
//! calculi. Each function draws one instance and returns its deviation.

use rand::Rng;

use crate::error::Result;
use crate::formalisms::{
    apply_relative_measurement, born_probability, dilated_sequence_conditional, kraus_dilation, kraus_probability,
    kraus_sequence_conditional, measurement_isometry, product_basis_condition, relative_conditional_table,
    relative_outcome_probability, standard_conditional, subjective_collapse_conditional, ObserverMemory,
    ProbabilityTable, ProjectiveMeasurement,
};
use crate::random::{random_density, random_kraus, random_projective, random_state};
use crate::tensor::{check_isometry, SpaceLayout, C64};

fn table_gap(a: &ProbabilityTable, b: &ProbabilityTable) -> f64 {
    a.max_abs_diff(b).map_or(f64::INFINITY, |(d, _, _)| d)
}

fn memory_for(owner: &str, m: &ProjectiveMeasurement) -> Result<ObserverMemory> {
    ObserverMemory::for_outcomes(owner, owner, &m.labels())
}

/// Two observers measuring one `d`-level system in turn: relative table
/// against the sequential update rule.
pub fn same_level_deviation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<f64> {
    let l = SpaceLayout::single("S", d)?;
    let psi = random_state(rng, &l);
    let m1 = random_projective(rng, &l)?;
    let m2 = random_projective(rng, &l)?;
    let (o1, o2) = (memory_for("O1", &m1)?, memory_for("O2", &m2)?);
    let total = apply_relative_measurement(&psi, &m1, &o1)?;
    let total = apply_relative_measurement(&total, &m2, &o2)?;
    let rel = relative_conditional_table(&total, &o1, &o2)?;
    Ok(table_gap(&rel, &standard_conditional(&psi, &m1, &m2)?))
}

/// A superobserver basis of products `|a> ⊗ |A_b>` with random phases:
/// subjective-collapse table against the relative table. Also returns
/// whether the product condition was detected.
pub fn product_basis_deviation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<(f64, bool)> {
    let l = SpaceLayout::single("S", d)?;
    let psi = random_state(rng, &l);
    let m = random_projective(rng, &l)?;
    let mem = memory_for("F", &m)?;
    let joint = l.concat(mem.layout())?;
    let mut basis = Vec::new();
    for a in m.outcomes() {
        for (p, ptr) in mem.pointers() {
            let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let v = a.vector.tensor(ptr)?.with_layout(joint.clone())?;
            let v = crate::tensor::StateVector::from_ket(v.as_ket().scale(phase))?;
            basis.push((format!("{}{}", a.label, p), v));
        }
    }
    let sup = ProjectiveMeasurement::new(basis)?;
    let detected = product_basis_condition(&sup, &m, &mem, 1e-10)?;
    let wmem = memory_for("W", &sup)?;
    let total = apply_relative_measurement(&psi, &m, &mem)?;
    let total = apply_relative_measurement(&total, &sup, &wmem)?;
    let rel = relative_conditional_table(&total, &mem, &wmem)?;
    let col = subjective_collapse_conditional(&psi, &m, &mem, &sup)?;
    Ok((table_gap(&rel, &col), detected))
}

/// Pointer probabilities after the measurement isometry against the Born
/// rule, and the isometry defect of the map itself.
pub fn postulate_one_deviation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<(f64, f64)> {
    let l = SpaceLayout::single("S", d)?;
    let psi = random_state(rng, &l);
    let m = random_projective(rng, &l)?;
    let mem = memory_for("O", &m)?;
    let iso = measurement_isometry(&m, &mem)?;
    let defect = check_isometry(iso.map(), 1e-10).max_deviation;
    let total = apply_relative_measurement(&psi, &m, &mem)?;
    let mut dev: f64 = 0.0;
    for a in m.labels() {
        let q = relative_outcome_probability(&total, &mem, &a)?;
        dev = dev.max((q - born_probability(&psi, &m, &a)?).abs());
    }
    Ok((dev, defect))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausDeviation {
    /// `max |U†U - 1|` for the dilation unitary.
    pub unitarity: f64,
    /// Largest gap between pointer probabilities and `tr(K_a rho K_a†)`.
    pub probability: f64,
    /// Largest gap between the two routes for a follow-up measurement.
    pub chain: f64,
}

impl KrausDeviation {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.probability).max(self.chain)
    }
}

/// A random `n`-outcome Kraus measurement on a random mixed state of a
/// `d`-level system, followed by a second random Kraus measurement.
pub fn kraus_deviation<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Result<KrausDeviation> {
    let l = SpaceLayout::single("S", d)?;
    let k = random_kraus(rng, &l, n)?;
    let rank = rng.random_range(1..=d);
    let rho = random_density(rng, &l, rank);
    let mem = ObserverMemory::for_outcomes("O", "O", &k.labels())?;
    let dil = kraus_dilation(&k, "X", &mem)?;
    let unitarity = check_isometry(dil.unitary(), 1e-10).max_deviation;
    let total = dil.apply(&rho)?;
    let mut probability: f64 = 0.0;
    for a in k.labels() {
        let q = relative_outcome_probability(&total, &mem, &a)?;
        probability = probability.max((q - kraus_probability(&rho, &k, &a)?).abs());
    }
    let n2 = rng.random_range(1..=4);
    let k2 = random_kraus(rng, &l, n2)?;
    let chain = table_gap(
        &kraus_sequence_conditional(&rho, &k, &k2)?,
        &dilated_sequence_conditional(&rho, &k, &k2)?,
    );
    Ok(KrausDeviation {
        unitarity,
        probability,
        chain,
    })
}
