use std::fmt;

use crate::error::{Error, Result};

/// One tensor factor of a [`SpaceLayout`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered, labeled tensor factors.
///
/// Basis indices are row-major over the factors: the first factor is the
/// slowest-varying digit. An empty layout is the trivial one-dimensional
/// space.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
}

impl SpaceLayout {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut layout = SpaceLayout::default();
        for (label, dim) in factors {
            layout.push(label, dim)?;
        }
        Ok(layout)
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn push(&mut self, label: impl Into<String>, dim: usize) -> Result<()> {
        let label = label.into();
        if dim == 0 {
            return Err(Error::ZeroDimension(label));
        }
        if self.contains(&label) {
            return Err(Error::LabelCollision(label));
        }
        self.factors.push(Factor { label, dim });
        Ok(())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total dimension: the product of factor dimensions.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn factor_dim(&self, label: &str) -> Option<usize> {
        self.factors.iter().find(|f| f.label == label).map(|f| f.dim)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    /// Concatenation of factor lists; labels must stay unique.
    pub fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout> {
        let mut out = self.clone();
        for f in &other.factors {
            out.push(f.label.clone(), f.dim)?;
        }
        Ok(out)
    }

    /// The layout of the named factors, in the order given.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<SpaceLayout> {
        let mut out = SpaceLayout::default();
        for label in labels {
            let label = label.as_ref();
            let dim = self
                .factor_dim(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            out.push(label, dim)?;
        }
        Ok(out)
    }

    /// Positions of the named factors, in the order given.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut seen = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let pos = self
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            if seen.contains(&pos) {
                return Err(Error::LabelCollision(label.to_string()));
            }
            seen.push(pos);
        }
        Ok(seen)
    }

    /// Same dims in the same order, labels ignored.
    pub fn same_shape(&self, other: &SpaceLayout) -> bool {
        self.dims() == other.dims()
    }

    /// Copy of this layout with labels replaced positionally.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<SpaceLayout> {
        if labels.len() != self.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "relabeling {} factors with {} labels",
                self.factors.len(),
                labels.len()
            )));
        }
        SpaceLayout::new(
            labels
                .iter()
                .zip(&self.factors)
                .map(|(l, f)| (l.as_ref().to_string(), f.dim)),
        )
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", factor.label, factor.dim)?;
        }
        f.write_str("]")
    }
}
