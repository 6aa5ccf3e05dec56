use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{
    complete_orthonormal_basis, gram_matrix, orthonormality_deviation, Ket, LinearMap, SpaceLayout, StateVector,
    C64, ISOMETRY_TOL,
};

/// Prefix of outcome labels created by [`ProjectiveMeasurement::completed`].
/// It cannot start an identifier in scenario files, so it never clashes with
/// user labels.
pub const COMPLETION_PREFIX: &str = "~";

fn check_unique_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for l in labels {
        if seen.contains(&l) {
            return Err(Error::DuplicateOutcome(l.to_string()));
        }
        seen.push(l);
    }
    Ok(())
}

fn check_orthonormal(vectors: &[&Ket], what: &str) -> Result<()> {
    let dev = orthonormality_deviation(&gram_matrix(vectors)?);
    if dev > ISOMETRY_TOL {
        return Err(Error::NotOrthonormal(format!("{what} deviate by {dev:e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveOutcome {
    pub label: String,
    pub vector: StateVector,
    /// Added by basis completion rather than declared.
    pub auxiliary: bool,
}

/// Rank-one projectors `|a><a|` on the factors the basis vectors live on.
///
/// The targeted factors are the labels of the basis vectors' layout. A
/// family with fewer vectors than the subspace dimension is representable
/// but incomplete; operations that need a full basis reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    subspace: SpaceLayout,
    outcomes: Vec<ProjectiveOutcome>,
}

impl ProjectiveMeasurement {
    pub fn new<S: Into<String>>(outcomes: Vec<(S, StateVector)>) -> Result<Self> {
        let outcomes: Vec<ProjectiveOutcome> = outcomes
            .into_iter()
            .map(|(label, vector)| ProjectiveOutcome {
                label: label.into(),
                vector,
                auxiliary: false,
            })
            .collect();
        let Some(first) = outcomes.first() else {
            return Err(Error::EmptyOutcomes);
        };
        let subspace = first.vector.layout().clone();
        for o in &outcomes {
            if o.vector.layout() != &subspace {
                return Err(Error::LayoutMismatch(format!(
                    "outcome `{}` lives on {}, expected {}",
                    o.label,
                    o.vector.layout(),
                    subspace
                )));
            }
        }
        check_unique_labels(outcomes.iter().map(|o| o.label.as_str()))?;
        let vectors: Vec<&Ket> = outcomes.iter().map(|o| o.vector.as_ket()).collect();
        check_orthonormal(&vectors, "basis vectors")?;
        if outcomes.len() > subspace.dim() {
            return Err(Error::NotOrthonormal(format!(
                "{} vectors in dimension {}",
                outcomes.len(),
                subspace.dim()
            )));
        }
        Ok(ProjectiveMeasurement { subspace, outcomes })
    }

    /// Computational-basis measurement on a single factor.
    pub fn computational<S: AsRef<str>>(factor: &str, labels: &[S]) -> Result<Self> {
        let layout = SpaceLayout::single(factor, labels.len())?;
        let outcomes = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Ok((l.as_ref().to_string(), StateVector::basis(layout.clone(), i)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
    }

    /// Extends an incomplete family to a full basis with deterministic
    /// complement vectors labeled `~0`, `~1`, ...
    pub fn completed(mut self) -> Result<Self> {
        let family: Vec<Ket> = self.outcomes.iter().map(|o| o.vector.as_ket().clone()).collect();
        let extra = complete_orthonormal_basis(&self.subspace, &family)?;
        for (i, v) in extra.into_iter().enumerate() {
            let label = format!("{COMPLETION_PREFIX}{i}");
            if self.outcomes.iter().any(|o| o.label == label) {
                return Err(Error::DuplicateOutcome(label));
            }
            self.outcomes.push(ProjectiveOutcome {
                label,
                vector: StateVector::from_ket(v)?,
                auxiliary: true,
            });
        }
        Ok(self)
    }

    pub fn subspace(&self) -> &SpaceLayout {
        &self.subspace
    }

    pub fn targets(&self) -> Vec<String> {
        self.subspace.labels().map(str::to_string).collect()
    }

    pub fn outcomes(&self) -> &[ProjectiveOutcome] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|o| o.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.outcomes.len() == self.subspace.dim()
    }

    pub fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteMeasurement(self.targets()))
        }
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o.label == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn vector(&self, label: &str) -> Result<&StateVector> {
        Ok(&self.outcomes[self.index_of(label)?].vector)
    }

    pub fn projector(&self, label: &str) -> Result<LinearMap> {
        Ok(LinearMap::projector(self.vector(label)?))
    }

    /// Copy with the targeted factors renamed positionally.
    pub fn retargeted<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let subspace = self.subspace.relabeled(labels)?;
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| {
                Ok(ProjectiveOutcome {
                    label: o.label.clone(),
                    vector: o.vector.with_layout(subspace.clone())?,
                    auxiliary: o.auxiliary,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectiveMeasurement { subspace, outcomes })
    }
}

/// Outcome-labeled Kraus operators with `sum_a K_a† K_a = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausMeasurement {
    subspace: SpaceLayout,
    outcomes: Vec<(String, LinearMap)>,
}

impl KrausMeasurement {
    pub fn new<S: Into<String>>(outcomes: Vec<(S, LinearMap)>) -> Result<Self> {
        let outcomes: Vec<(String, LinearMap)> = outcomes.into_iter().map(|(l, k)| (l.into(), k)).collect();
        let Some((_, first)) = outcomes.first() else {
            return Err(Error::EmptyOutcomes);
        };
        let subspace = first.in_layout().clone();
        let n = subspace.dim();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for (label, k) in &outcomes {
            if k.in_layout() != &subspace || k.out_layout() != &subspace {
                return Err(Error::LayoutMismatch(format!(
                    "Kraus operator `{label}` acts {} -> {}, expected square on {}",
                    k.in_layout(),
                    k.out_layout(),
                    subspace
                )));
            }
            sum += k.matrix().adjoint() * k.matrix();
        }
        check_unique_labels(outcomes.iter().map(|(l, _)| l.as_str()))?;
        let deviation = (sum - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if deviation > ISOMETRY_TOL {
            return Err(Error::IncompleteKraus { deviation });
        }
        Ok(KrausMeasurement { subspace, outcomes })
    }

    /// The projector family of a complete projective measurement.
    pub fn from_projective(m: &ProjectiveMeasurement) -> Result<Self> {
        m.require_complete()?;
        let ops = m
            .outcomes()
            .iter()
            .map(|o| (o.label.clone(), LinearMap::projector(&o.vector)))
            .collect();
        Self::new(ops)
    }

    pub fn subspace(&self) -> &SpaceLayout {
        &self.subspace
    }

    pub fn targets(&self) -> Vec<String> {
        self.subspace.labels().map(str::to_string).collect()
    }

    pub fn outcomes(&self) -> &[(String, LinearMap)] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn operator(&self, label: &str) -> Result<&LinearMap> {
        Ok(&self.outcomes[self.index_of(label)?].1)
    }
}

/// An agent's memory factor with one orthonormal pointer state per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverMemory {
    owner: String,
    memory_label: String,
    pointers: Vec<(String, StateVector)>,
}

impl ObserverMemory {
    pub fn new<S: Into<String>>(
        owner: impl Into<String>,
        memory_label: impl Into<String>,
        pointers: Vec<(S, StateVector)>,
    ) -> Result<Self> {
        let memory_label = memory_label.into();
        let pointers: Vec<(String, StateVector)> = pointers.into_iter().map(|(l, v)| (l.into(), v)).collect();
        if pointers.is_empty() {
            return Err(Error::EmptyOutcomes);
        }
        for (label, v) in &pointers {
            let labels: Vec<&str> = v.layout().labels().collect();
            if labels != [memory_label.as_str()] {
                return Err(Error::LayoutMismatch(format!(
                    "pointer `{label}` lives on {}, expected the single factor `{memory_label}`",
                    v.layout()
                )));
            }
        }
        check_unique_labels(pointers.iter().map(|(l, _)| l.as_str()))?;
        let vectors: Vec<&Ket> = pointers.iter().map(|(_, v)| v.as_ket()).collect();
        check_orthonormal(&vectors, "pointer states")?;
        Ok(ObserverMemory {
            owner: owner.into(),
            memory_label,
            pointers,
        })
    }

    /// Computational-basis pointers, one per outcome label.
    pub fn computational<S: AsRef<str>>(owner: &str, memory_label: &str, outcomes: &[S]) -> Result<Self> {
        let layout = SpaceLayout::single(memory_label, outcomes.len())?;
        let pointers = outcomes
            .iter()
            .enumerate()
            .map(|(i, l)| Ok((l.as_ref().to_string(), StateVector::basis(layout.clone(), i)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(owner, memory_label, pointers)
    }

    /// Computational pointers matching a measurement's outcome labels.
    pub fn for_outcomes(owner: &str, memory_label: &str, outcome_labels: &[String]) -> Result<Self> {
        Self::computational(owner, memory_label, outcome_labels)
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn memory_label(&self) -> &str {
        &self.memory_label
    }

    pub fn dim(&self) -> usize {
        self.pointers[0].1.dim()
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.pointers[0].1.layout()
    }

    pub fn pointers(&self) -> &[(String, StateVector)] {
        &self.pointers
    }

    pub fn outcome_labels(&self) -> Vec<String> {
        self.pointers.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn pointer(&self, outcome: &str) -> Result<&StateVector> {
        self.pointers
            .iter()
            .find(|(l, _)| l == outcome)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnknownOutcome(outcome.to_string()))
    }
}

/// Orthonormal register states encoding an agent's statements.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRegister {
    label: String,
    symbols: Vec<(String, StateVector)>,
}

impl ClassicalRegister {
    pub fn new<S: Into<String>>(label: impl Into<String>, symbols: Vec<(S, StateVector)>) -> Result<Self> {
        let label = label.into();
        let symbols: Vec<(String, StateVector)> = symbols.into_iter().map(|(s, v)| (s.into(), v)).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyOutcomes);
        }
        for (s, v) in &symbols {
            let labels: Vec<&str> = v.layout().labels().collect();
            if labels != [label.as_str()] {
                return Err(Error::LayoutMismatch(format!(
                    "symbol `{s}` lives on {}, expected the single factor `{label}`",
                    v.layout()
                )));
            }
        }
        check_unique_labels(symbols.iter().map(|(s, _)| s.as_str()))?;
        let vectors: Vec<&Ket> = symbols.iter().map(|(_, v)| v.as_ket()).collect();
        check_orthonormal(&vectors, "register symbols")?;
        Ok(ClassicalRegister { label, symbols })
    }

    /// One computational basis state per statement.
    pub fn from_statements<S: AsRef<str>>(label: &str, statements: &[S]) -> Result<Self> {
        let layout = SpaceLayout::single(label, statements.len())?;
        let symbols = statements
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((s.as_ref().to_string(), StateVector::basis(layout.clone(), i)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, symbols)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.symbols[0].1.layout()
    }

    pub fn statements(&self) -> Vec<String> {
        self.symbols.iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn symbol(&self, statement: &str) -> Result<&StateVector> {
        self.symbols
            .iter()
            .find(|(s, _)| s == statement)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnknownStatement(statement.to_string()))
    }
}
