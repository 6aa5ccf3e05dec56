//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! Every operator is addressed to factors by label; callers never do index
//! arithmetic themselves. Basis indices are row-major with the first factor
//! slowest, so `tensor_product(a, b)` is the ordinary Kronecker product.

mod density;
mod index;
mod layout;
mod map;
mod state;

use nalgebra::DMatrix;

pub use density::{partial_trace, DensityOperator, HERMITIAN_TOL, PSD_FLOOR, TRACE_TOL};
pub use layout::{Factor, SpaceLayout};
pub use map::{
    apply_on_factors, check_isometry, embed_on_factors, Isometry, IsometryCheck, LinearMap, ISOMETRY_TOL,
};
pub use state::{equal_up_to_phase, inner_product, Ket, StateVector, NORM_TOL};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Values that combine under the Kronecker product.
pub trait TensorProduct: Sized {
    fn tensor_with(&self, other: &Self) -> Result<Self>;
}

impl TensorProduct for Ket {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for StateVector {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for LinearMap {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for DensityOperator {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

/// `a ⊗ b` with `a` as the slow index; fails on a factor-label collision.
pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor_with(b)
}

/// `G_ij = <v_i|v_j>`.
pub fn gram_matrix<K: AsRef<Ket>>(vectors: &[K]) -> Result<DMatrix<C64>> {
    let n = vectors.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner_product(vectors[i].as_ref(), vectors[j].as_ref())?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// Largest entry-wise deviation of `G` from the identity.
pub fn orthonormality_deviation(gram: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Extends an orthonormal family to a basis of its layout.
///
/// Computational basis vectors are orthogonalized against the family in
/// index order; those with a residual below `1e-6` are skipped. Returns only
/// the new vectors, so the output is deterministic for a given input.
pub fn complete_orthonormal_basis(layout: &SpaceLayout, family: &[Ket]) -> Result<Vec<Ket>> {
    for v in family {
        if v.layout() != layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", v.layout(), layout)));
        }
    }
    let dev = orthonormality_deviation(&gram_matrix(family)?);
    if dev > ISOMETRY_TOL {
        return Err(Error::NotOrthonormal(format!("family deviates by {dev:e}")));
    }
    let dim = layout.dim();
    let mut basis: Vec<Ket> = family.to_vec();
    let mut extra = Vec::new();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = Ket::basis(layout.clone(), i)?;
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for u in &basis {
                let overlap = inner_product(u, &v)?;
                v = v.add(&u.scale(-overlap))?;
            }
        }
        if v.norm() > 1e-6 {
            let v = v.normalize()?.into_ket();
            basis.push(v.clone());
            extra.push(v);
        }
    }
    Ok(extra)
}

/// A rank-one projector `|v><v|` addressed to a set of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorProjection {
    pub factors: Vec<String>,
    pub vector: Ket,
}

impl FactorProjection {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = S>, vector: Ket) -> Self {
        FactorProjection {
            factors: factors.into_iter().map(Into::into).collect(),
            vector,
        }
    }

    /// Projection onto a one-factor vector, addressed by the vector's own label.
    pub fn on_own_factor(vector: Ket) -> Self {
        let factors = vector.layout().labels().map(str::to_string).collect();
        FactorProjection { factors, vector }
    }
}

fn check_disjoint(projections: &[FactorProjection]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for p in projections {
        for f in &p.factors {
            if seen.contains(&f.as_str()) {
                return Err(Error::OverlappingProjections(f.clone()));
            }
            seen.push(f);
        }
    }
    Ok(())
}

/// A global state that probabilities can be read off by projection.
pub trait GlobalState {
    fn layout(&self) -> &SpaceLayout;

    /// `tr((P_1 ⊗ ... ⊗ P_k ⊗ 1) state)` for rank-one projectors on pairwise
    /// disjoint factor sets.
    fn projection_weight(&self, projections: &[FactorProjection]) -> Result<f64>;
}

impl GlobalState for Ket {
    fn layout(&self) -> &SpaceLayout {
        Ket::layout(self)
    }

    fn projection_weight(&self, projections: &[FactorProjection]) -> Result<f64> {
        check_disjoint(projections)?;
        let mut v = self.clone();
        for p in projections {
            v = apply_on_factors(&LinearMap::projector(&p.vector), &p.factors, &v)?;
        }
        // Disjoint rank-one projectors commute, so their product is a projector.
        Ok(v.norm_sqr())
    }
}

impl GlobalState for StateVector {
    fn layout(&self) -> &SpaceLayout {
        self.as_ket().layout()
    }

    fn projection_weight(&self, projections: &[FactorProjection]) -> Result<f64> {
        self.as_ket().projection_weight(projections)
    }
}

impl GlobalState for DensityOperator {
    fn layout(&self) -> &SpaceLayout {
        DensityOperator::layout(self)
    }

    fn projection_weight(&self, projections: &[FactorProjection]) -> Result<f64> {
        check_disjoint(projections)?;
        if projections.is_empty() {
            return Ok(self.trace().re);
        }
        let mut targets: Vec<&str> = Vec::new();
        let mut matrix = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for p in projections {
            let proj = LinearMap::projector(&p.vector);
            matrix = matrix.kronecker(proj.matrix());
            targets.extend(p.factors.iter().map(String::as_str));
        }
        let target_layout = self.layout().select(&targets)?;
        let op = LinearMap::operator(target_layout, matrix)?;
        Ok(self.expectation(&op, &targets)?.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn gram_of_orthonormal_pair() {
        let l = SpaceLayout::single("S", 2).unwrap();
        let v = [Ket::basis(l.clone(), 0).unwrap(), Ket::basis(l, 1).unwrap()];
        assert_eq!(gram_matrix(&v).unwrap(), DMatrix::<C64>::identity(2, 2));
    }

    #[test]
    fn gram_of_zero_and_plus() {
        let l = SpaceLayout::single("S", 2).unwrap();
        let plus = Ket::new(l.clone(), vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let g = gram_matrix(&[Ket::basis(l, 0).unwrap(), plus]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(1.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(1.0)]);
        assert!((g - expect).norm() < 1e-15);
    }

    #[test]
    fn gram_of_nothing() {
        let g = gram_matrix::<Ket>(&[]).unwrap();
        assert_eq!(g.shape(), (0, 0));
    }

    #[test]
    fn gram_layout_mismatch() {
        let a = Ket::basis(SpaceLayout::single("S", 2).unwrap(), 0).unwrap();
        let b = Ket::basis(SpaceLayout::single("T", 2).unwrap(), 0).unwrap();
        assert!(matches!(gram_matrix(&[a, b]), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn completion_of_bell_pair() {
        let l = SpaceLayout::new([("S", 2), ("O", 2)]).unwrap();
        let h = FRAC_1_SQRT_2;
        let plus = Ket::new(l.clone(), vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let minus = Ket::new(l.clone(), vec![c(h), c(0.0), c(0.0), c(-h)]).unwrap();
        let extra = complete_orthonormal_basis(&l, &[plus.clone(), minus.clone()]).unwrap();
        assert_eq!(extra, vec![Ket::basis(l.clone(), 1).unwrap(), Ket::basis(l, 2).unwrap()]);
        let all = [plus, minus, extra[0].clone(), extra[1].clone()];
        assert!(orthonormality_deviation(&gram_matrix(&all).unwrap()) < 1e-14);
    }

    #[test]
    fn projection_weight_agrees_for_pure_and_mixed() {
        let l = SpaceLayout::new([("S", 2), ("O", 2)]).unwrap();
        let psi = StateVector::new(l, vec![c(0.6), c(0.0), c(0.0), c(0.8)]).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        let p = [FactorProjection::on_own_factor(
            Ket::basis(SpaceLayout::single("O", 2).unwrap(), 1).unwrap(),
        )];
        let a = psi.projection_weight(&p).unwrap();
        let b = rho.projection_weight(&p).unwrap();
        assert!((a - 0.64).abs() < 1e-14);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn overlapping_projections_rejected() {
        let l = SpaceLayout::single("S", 2).unwrap();
        let psi = StateVector::basis(l.clone(), 0).unwrap();
        let v = Ket::basis(l, 0).unwrap();
        let p = [FactorProjection::on_own_factor(v.clone()), FactorProjection::on_own_factor(v)];
        assert!(matches!(
            psi.projection_weight(&p),
            Err(Error::OverlappingProjections(_))
        ));
    }
}
