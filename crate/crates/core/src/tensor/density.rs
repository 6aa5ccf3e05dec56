use nalgebra::{DMatrix, SymmetricEigen};

use super::index::FactorSplit;
use super::map::FactorAction;
use super::{Isometry, LinearMap, SpaceLayout, StateVector, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

/// A mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SpaceLayout,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let n = layout.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for layout {} of dimension {n}",
                matrix.nrows(),
                matrix.ncols(),
                layout
            )));
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("density operator"));
        }
        let herm_dev = (&matrix - matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm_dev > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm_dev:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(DensityOperator { layout, matrix })
    }

    pub(crate) fn from_parts_unchecked(layout: SpaceLayout, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        DensityOperator { layout, matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        DensityOperator {
            layout: state.layout().clone(),
            matrix: v * v.adjoint(),
        }
    }

    /// `sum_i w_i |psi_i><psi_i|`; weights must be non-negative and sum to 1.
    pub fn from_ensemble(members: &[(f64, StateVector)]) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidDensity("empty ensemble".into()));
        };
        let layout = first.layout().clone();
        let n = layout.dim();
        let mut matrix = DMatrix::zeros(n, n);
        for (w, psi) in members {
            if psi.layout() != &layout {
                return Err(Error::LayoutMismatch(format!("{} vs {}", psi.layout(), layout)));
            }
            let v = psi.amplitudes();
            matrix += (v * v.adjoint()) * C64::new(*w, 0.0);
        }
        Self::new(layout, matrix)
    }

    /// Validates a square operator as a density operator.
    pub fn from_operator(op: &LinearMap) -> Result<Self> {
        if op.in_layout() != op.out_layout() {
            return Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                op.in_layout(),
                op.out_layout()
            )));
        }
        Self::new(op.in_layout().clone(), op.matrix().clone())
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn as_operator(&self) -> LinearMap {
        LinearMap::operator(self.layout.clone(), self.matrix.clone())
            .expect("density matrix matches its layout")
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `(op ⊗ 1) rho (op ⊗ 1)†` as a raw operator; extra output factors of
    /// `op` are appended to the layout.
    pub fn conjugate_on_factors<S: AsRef<str>>(&self, op: &LinearMap, targets: &[S]) -> Result<LinearMap> {
        let action = FactorAction::new(op, targets, &self.layout)?;
        let left = action.apply_columns(op.matrix(), &self.matrix);
        let both = action.apply_columns(op.matrix(), &left.adjoint());
        LinearMap::operator(action.out_layout().clone(), both.adjoint())
    }

    /// Isometries preserve every density-operator invariant, so the result
    /// is not re-validated.
    pub fn apply_isometry<S: AsRef<str>>(&self, iso: &Isometry, targets: &[S]) -> Result<DensityOperator> {
        let out = self.conjugate_on_factors(iso.map(), targets)?;
        Ok(DensityOperator {
            layout: out.in_layout().clone(),
            matrix: out.matrix().clone(),
        })
    }

    /// `tr((op ⊗ 1) rho)` for a square `op` on the named factors.
    pub fn expectation<S: AsRef<str>>(&self, op: &LinearMap, targets: &[S]) -> Result<C64> {
        let positions = self.layout.positions(targets)?;
        let target_layout = self.layout.select(targets)?;
        if !op.is_square() || !op.in_layout().same_shape(&target_layout) {
            return Err(Error::DimensionMismatch(format!(
                "operator {} -> {} does not act on {}",
                op.in_layout(),
                op.out_layout(),
                target_layout
            )));
        }
        let split = FactorSplit::new(&self.layout, &positions);
        let m = op.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..split.rest_dim {
            for t in 0..split.target_dim {
                for tp in 0..split.target_dim {
                    acc += m[(t, tp)] * self.matrix[(split.full(r, tp), split.full(r, t))];
                }
            }
        }
        Ok(acc)
    }
}

fn min_eigenvalue(matrix: &DMatrix<C64>) -> f64 {
    if matrix.nrows() == 0 {
        return 0.0;
    }
    // Symmetrize to keep the eigensolver on exactly Hermitian input.
    let herm = (matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Reduced state on `keep_labels`; kept factors stay in their original
/// order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep_labels: &[S]) -> Result<DensityOperator> {
    let mut positions = rho.layout.positions(keep_labels)?;
    positions.sort_unstable();
    let kept: Vec<&str> = positions
        .iter()
        .map(|&p| rho.layout.factors()[p].label.as_str())
        .collect();
    let layout = rho.layout.select(&kept)?;
    let split = FactorSplit::new(&rho.layout, &positions);
    let td = split.target_dim;
    let mut matrix = DMatrix::zeros(td, td);
    for r in 0..split.rest_dim {
        for t in 0..td {
            for tp in 0..td {
                matrix[(t, tp)] += rho.matrix[(split.full(r, t), split.full(r, tp))];
            }
        }
    }
    Ok(DensityOperator { layout, matrix })
}
