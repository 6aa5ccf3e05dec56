use std::ops::Deref;

use nalgebra::DVector;

use super::{SpaceLayout, C64};
use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of a [`StateVector`].
pub const NORM_TOL: f64 = 1e-12;

/// A vector over a layout with no constraint on its norm.
///
/// Projections and other non-isometric maps produce `Ket`s; turning one back
/// into a state requires an explicit [`Ket::normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    layout: SpaceLayout,
    amps: DVector<C64>,
}

impl Ket {
    pub fn new(layout: SpaceLayout, amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(layout, DVector::from_vec(amps))
    }

    pub fn from_vector(layout: SpaceLayout, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for layout {} of dimension {}",
                amps.len(),
                layout,
                layout.dim()
            )));
        }
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Ket { layout, amps })
    }

    pub(crate) fn from_parts_unchecked(layout: SpaceLayout, amps: DVector<C64>) -> Self {
        debug_assert_eq!(amps.len(), layout.dim());
        Ket { layout, amps }
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let n = layout.dim();
        Ket {
            layout,
            amps: DVector::zeros(n),
        }
    }

    /// Computational basis vector `|index>`.
    pub fn basis(layout: SpaceLayout, index: usize) -> Result<Self> {
        let n = layout.dim();
        if index >= n {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut amps = DVector::zeros(n);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Ket { layout, amps })
    }

    /// Computational basis vector with one digit per factor.
    pub fn from_digits(layout: SpaceLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} digits for {} factors",
                digits.len(),
                dims.len()
            )));
        }
        let mut index = 0;
        for (&d, &dim) in digits.iter().zip(&dims) {
            if d >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "digit {d} out of range for factor of dimension {dim}"
                )));
            }
            index = index * dim + d;
        }
        Self::basis(layout, index)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Ket {
        Ket {
            layout: self.layout.clone(),
            amps: &self.amps * factor,
        }
    }

    /// Sum of two kets on the same layout.
    pub fn add(&self, other: &Ket) -> Result<Ket> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(Ket {
            layout: self.layout.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    pub fn normalize(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(StateVector(Ket {
            layout: self.layout.clone(),
            amps: &self.amps / C64::new(norm, 0.0),
        }))
    }

    /// Same amplitudes over a layout of identical shape.
    pub fn with_layout(&self, layout: SpaceLayout) -> Result<Ket> {
        if !layout.same_shape(&self.layout) {
            return Err(Error::DimensionMismatch(format!(
                "cannot move ket from {} to {}",
                self.layout, layout
            )));
        }
        Ok(Ket {
            layout,
            amps: self.amps.clone(),
        })
    }

    /// Kronecker product; `self` is the slow index.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Ket { layout, amps })
    }
}

/// A unit-norm [`Ket`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Ket);

impl StateVector {
    pub fn new(layout: SpaceLayout, amps: Vec<C64>) -> Result<Self> {
        Self::from_ket(Ket::new(layout, amps)?)
    }

    /// Checks the norm is 1 within [`NORM_TOL`].
    pub fn from_ket(ket: Ket) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector(ket))
    }

    pub(crate) fn from_ket_unchecked(ket: Ket) -> Self {
        StateVector(ket)
    }

    pub fn basis(layout: SpaceLayout, index: usize) -> Result<Self> {
        Ket::basis(layout, index).map(StateVector)
    }

    pub fn from_digits(layout: SpaceLayout, digits: &[usize]) -> Result<Self> {
        Ket::from_digits(layout, digits).map(StateVector)
    }

    pub fn as_ket(&self) -> &Ket {
        &self.0
    }

    pub fn into_ket(self) -> Ket {
        self.0
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        // A product of unit vectors is a unit vector.
        self.0.tensor(&other.0).map(StateVector)
    }

    pub fn with_layout(&self, layout: SpaceLayout) -> Result<StateVector> {
        self.0.with_layout(layout).map(StateVector)
    }
}

impl Deref for StateVector {
    type Target = Ket;

    fn deref(&self) -> &Ket {
        &self.0
    }
}

impl AsRef<Ket> for StateVector {
    fn as_ref(&self) -> &Ket {
        &self.0
    }
}

impl AsRef<Ket> for Ket {
    fn as_ref(&self) -> &Ket {
        self
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &Ket, b: &Ket) -> Result<C64> {
    if a.layout != b.layout {
        return Err(Error::LayoutMismatch(format!(
            "{} vs {}",
            a.layout, b.layout
        )));
    }
    Ok(a.amps.dotc(&b.amps))
}

/// Compares two kets up to a global phase, aligning the phase on the
/// largest-magnitude amplitude of `a`.
pub fn equal_up_to_phase(a: &Ket, b: &Ket, tol: f64) -> bool {
    if a.layout.dims() != b.layout.dims() {
        return false;
    }
    let Some((k, _)) = a
        .amps
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return true;
    };
    let (ak, bk) = (a.amps[k], b.amps[k]);
    if ak.norm() <= tol {
        return b.amps.iter().all(|c| c.norm() <= tol);
    }
    if bk.norm() <= tol {
        return false;
    }
    let phase = (ak / ak.norm()) / (bk / bk.norm());
    a.amps
        .iter()
        .zip(b.amps.iter())
        .all(|(x, y)| (x - y * phase).norm() <= tol)
}
