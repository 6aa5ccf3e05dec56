use nalgebra::DMatrix;

use super::index::FactorSplit;
use super::{Ket, SpaceLayout, C64};
use crate::error::{Error, Result};

/// Tolerance on `V†V = 1` for [`Isometry`] construction.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// A dense linear map between two layouts, stored as an `out_dim × in_dim`
/// matrix. Projectors, unitaries and Kraus operators are all `LinearMap`s.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    in_layout: SpaceLayout,
    out_layout: SpaceLayout,
    matrix: DMatrix<C64>,
}

impl LinearMap {
    pub fn new(in_layout: SpaceLayout, out_layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != out_layout.dim() || matrix.ncols() != in_layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for map {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                in_layout,
                out_layout
            )));
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(LinearMap {
            in_layout,
            out_layout,
            matrix,
        })
    }

    /// Square operator on a single layout.
    pub fn operator(layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(layout.clone(), layout, matrix)
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.dim();
        LinearMap {
            in_layout: layout.clone(),
            out_layout: layout,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// `|out><inp|`.
    pub fn outer(out: &Ket, inp: &Ket) -> Self {
        LinearMap {
            in_layout: inp.layout().clone(),
            out_layout: out.layout().clone(),
            matrix: out.amplitudes() * inp.amplitudes().adjoint(),
        }
    }

    /// `|v><v|`.
    pub fn projector(v: &Ket) -> Self {
        Self::outer(v, v)
    }

    /// The map sending the `j`-th computational basis vector of `in_layout`
    /// to `images[j]`.
    pub fn from_images(in_layout: SpaceLayout, images: &[Ket]) -> Result<Self> {
        if images.len() != in_layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for input dimension {}",
                images.len(),
                in_layout.dim()
            )));
        }
        let Some(first) = images.first() else {
            return Err(Error::EmptyOutcomes);
        };
        let out_layout = first.layout().clone();
        let mut matrix = DMatrix::zeros(out_layout.dim(), in_layout.dim());
        for (j, img) in images.iter().enumerate() {
            if img.layout() != &out_layout {
                return Err(Error::LayoutMismatch(format!(
                    "image {j} lives on {}, expected {}",
                    img.layout(),
                    out_layout
                )));
            }
            matrix.set_column(j, img.amplitudes());
        }
        Ok(LinearMap {
            in_layout,
            out_layout,
            matrix,
        })
    }

    pub fn in_layout(&self) -> &SpaceLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SpaceLayout {
        &self.out_layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.in_layout.same_shape(&self.out_layout)
    }

    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            in_layout: self.out_layout.clone(),
            out_layout: self.in_layout.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &LinearMap) -> Result<LinearMap> {
        if !self.in_layout.same_shape(&first.out_layout) {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.in_layout, self.out_layout, first.in_layout, first.out_layout
            )));
        }
        Ok(LinearMap {
            in_layout: first.in_layout.clone(),
            out_layout: self.out_layout.clone(),
            matrix: &self.matrix * &first.matrix,
        })
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        if !self.in_layout.same_shape(&other.in_layout) || !self.out_layout.same_shape(&other.out_layout) {
            return Err(Error::DimensionMismatch("adding maps of different shapes".into()));
        }
        Ok(LinearMap {
            in_layout: self.in_layout.clone(),
            out_layout: self.out_layout.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, factor: C64) -> LinearMap {
        LinearMap {
            in_layout: self.in_layout.clone(),
            out_layout: self.out_layout.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Whole-space application. The ket's layout must have the input shape.
    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if !ket.layout().same_shape(&self.in_layout) {
            return Err(Error::DimensionMismatch(format!(
                "applying map on {} to ket on {}",
                self.in_layout,
                ket.layout()
            )));
        }
        Ok(Ket::from_parts_unchecked(
            self.out_layout.clone(),
            &self.matrix * ket.amplitudes(),
        ))
    }

    /// Kronecker product; `self` is the slow index on both sides.
    pub fn tensor(&self, other: &LinearMap) -> Result<LinearMap> {
        Ok(LinearMap {
            in_layout: self.in_layout.concat(&other.in_layout)?,
            out_layout: self.out_layout.concat(&other.out_layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Copy with both layouts relabeled positionally.
    pub fn relabeled<S: AsRef<str>>(&self, in_labels: &[S], out_labels: &[S]) -> Result<LinearMap> {
        Ok(LinearMap {
            in_layout: self.in_layout.relabeled(in_labels)?,
            out_layout: self.out_layout.relabeled(out_labels)?,
            matrix: self.matrix.clone(),
        })
    }
}

/// A [`LinearMap`] with `V†V = 1` checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    map: LinearMap,
}

impl Isometry {
    pub fn new(map: LinearMap) -> Result<Self> {
        let check = check_isometry(&map, ISOMETRY_TOL);
        if !check.is_isometry {
            return Err(Error::NotIsometry {
                deviation: check.max_deviation,
            });
        }
        Ok(Isometry { map })
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn into_map(self) -> LinearMap {
        self.map
    }

    pub fn in_layout(&self) -> &SpaceLayout {
        self.map.in_layout()
    }

    pub fn out_layout(&self) -> &SpaceLayout {
        self.map.out_layout()
    }
}

/// Outcome of [`check_isometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryCheck {
    pub is_isometry: bool,
    /// `max |(V†V - 1)_ij|`; infinite when the shape already rules it out.
    pub max_deviation: f64,
    pub reason: Option<String>,
}

pub fn check_isometry(map: &LinearMap, tol: f64) -> IsometryCheck {
    if map.out_dim() < map.in_dim() {
        return IsometryCheck {
            is_isometry: false,
            max_deviation: f64::INFINITY,
            reason: Some(format!(
                "output dimension {} is smaller than input dimension {}",
                map.out_dim(),
                map.in_dim()
            )),
        };
    }
    let gram = map.matrix.adjoint() * &map.matrix;
    let n = gram.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    let ok = dev <= tol;
    IsometryCheck {
        is_isometry: ok,
        max_deviation: dev,
        reason: (!ok).then(|| format!("max deviation {dev:e} exceeds {tol:e}")),
    }
}

/// How a map acts on a subset of factors: the input must match the target
/// dims in order; the leading output factors replace the targets in place
/// and any further output factors are appended to the layout.
pub(crate) struct FactorAction {
    split: FactorSplit,
    new_dim: usize,
    out_layout: SpaceLayout,
}

impl FactorAction {
    pub fn new<S: AsRef<str>>(op: &LinearMap, targets: &[S], layout: &SpaceLayout) -> Result<Self> {
        let positions = layout.positions(targets)?;
        let target_layout = layout.select(targets)?;
        if !op.in_layout().same_shape(&target_layout) {
            return Err(Error::DimensionMismatch(format!(
                "map input {} does not match targets {}",
                op.in_layout(),
                target_layout
            )));
        }
        let k = positions.len();
        let out_factors = op.out_layout().factors();
        if out_factors.len() < k
            || out_factors[..k].iter().map(|f| f.dim).ne(target_layout.factors().iter().map(|f| f.dim))
        {
            return Err(Error::DimensionMismatch(format!(
                "map output {} must start with the target dims of {}",
                op.out_layout(),
                target_layout
            )));
        }
        let appended = SpaceLayout::new(out_factors[k..].iter().map(|f| (f.label.clone(), f.dim)))?;
        let out_layout = layout.concat(&appended)?;
        Ok(FactorAction {
            split: FactorSplit::new(layout, &positions),
            new_dim: appended.dim(),
            out_layout,
        })
    }

    pub fn out_layout(&self) -> &SpaceLayout {
        &self.out_layout
    }

    /// Applies `op` to every column of `input` (rows indexed by the source
    /// layout).
    pub fn apply_columns(&self, op: &DMatrix<C64>, input: &DMatrix<C64>) -> DMatrix<C64> {
        let td = self.split.target_dim;
        let nd = self.new_dim;
        let mut out = DMatrix::zeros(self.out_layout.dim(), input.ncols());
        for col in 0..input.ncols() {
            for r in 0..self.split.rest_dim {
                for t in 0..td {
                    let a = input[(self.split.full(r, t), col)];
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for tp in 0..td {
                        let base = self.split.full(r, tp) * nd;
                        for n in 0..nd {
                            let m = op[(tp * nd + n, t)];
                            if m != C64::new(0.0, 0.0) {
                                out[(base + n, col)] += m * a;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Applies `op` to the named factors of `ket`; see [`FactorAction`] for how
/// extra output factors are placed.
pub fn apply_on_factors<S: AsRef<str>>(op: &LinearMap, targets: &[S], ket: &Ket) -> Result<Ket> {
    let action = FactorAction::new(op, targets, ket.layout())?;
    let column = DMatrix::from_column_slice(ket.dim(), 1, ket.amplitudes().as_slice());
    let out = action.apply_columns(op.matrix(), &column);
    Ok(Ket::from_parts_unchecked(
        action.out_layout().clone(),
        out.column(0).into_owned(),
    ))
}

/// Lifts a square operator on `target_labels` to the whole of `layout`,
/// acting as the identity on every other factor.
pub fn embed_on_factors<S: AsRef<str>>(
    op: &LinearMap,
    target_labels: &[S],
    layout: &SpaceLayout,
) -> Result<LinearMap> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "embedding needs a square operator, got {} -> {}",
            op.in_layout(),
            op.out_layout()
        )));
    }
    let positions = layout.positions(target_labels)?;
    let target_layout = layout.select(target_labels)?;
    if !op.in_layout().same_shape(&target_layout) {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} does not match targets {}",
            op.in_layout(),
            target_layout
        )));
    }
    let split = FactorSplit::new(layout, &positions);
    let n = layout.dim();
    let mut matrix = DMatrix::zeros(n, n);
    for r in 0..split.rest_dim {
        for tp in 0..split.target_dim {
            for t in 0..split.target_dim {
                matrix[(split.full(r, tp), split.full(r, t))] = op.matrix()[(tp, t)];
            }
        }
    }
    Ok(LinearMap {
        in_layout: layout.clone(),
        out_layout: layout.clone(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn so() -> SpaceLayout {
        SpaceLayout::new([("S", 2), ("O", 2)]).unwrap()
    }

    fn flip() -> LinearMap {
        LinearMap::operator(
            SpaceLayout::single("S", 2).unwrap(),
            DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        )
        .unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = LinearMap::identity(SpaceLayout::single("A", 2).unwrap());
        let b = LinearMap::identity(SpaceLayout::single("B", 3).unwrap());
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.matrix(), &DMatrix::<C64>::identity(6, 6));
    }

    #[test]
    fn embed_flip_on_system() {
        let full = embed_on_factors(&flip(), &["S"], &so()).unwrap();
        let ket = Ket::basis(so(), 0).unwrap();
        let out = full.apply(&ket).unwrap();
        assert_eq!(out, Ket::basis(so(), 2).unwrap());
    }

    #[test]
    fn embed_identity_is_identity() {
        let id = LinearMap::identity(SpaceLayout::single("O", 2).unwrap());
        let full = embed_on_factors(&id, &["O"], &so()).unwrap();
        assert_eq!(full.matrix(), &DMatrix::<C64>::identity(4, 4));
    }

    #[test]
    fn embed_projector_on_memory() {
        let one = Ket::basis(SpaceLayout::single("O", 2).unwrap(), 1).unwrap();
        let p = LinearMap::projector(&one);
        let full = embed_on_factors(&p, &["O"], &so()).unwrap();
        let bell = Ket::new(so(), vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let out = full.apply(&bell).unwrap();
        // Frozen by a hand 4x4 product: diag(0,1,0,1) * bell.
        let expect = [0.0, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in out.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(
            embed_on_factors(&flip(), &["Z"], &so()),
            Err(Error::UnknownLabel(_))
        ));
        let big = LinearMap::identity(SpaceLayout::single("S", 3).unwrap());
        assert!(matches!(
            embed_on_factors(&big, &["S"], &so()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn apply_on_factors_matches_embedding() {
        let ket = Ket::new(so(), vec![c(0.1), c(0.2), c(0.3), c(0.4)]).unwrap();
        let via_embed = embed_on_factors(&flip(), &["S"], &so()).unwrap().apply(&ket).unwrap();
        let direct = apply_on_factors(&flip(), &["S"], &ket).unwrap();
        assert_eq!(via_embed, direct);
    }

    #[test]
    fn apply_on_factors_appends_new_factor() {
        // |a> -> |a>|a> copy map from S to S,M
        let s = SpaceLayout::single("S", 2).unwrap();
        let sm = SpaceLayout::new([("S", 2), ("M", 2)]).unwrap();
        let copy = LinearMap::from_images(
            s.clone(),
            &[Ket::basis(sm.clone(), 0).unwrap(), Ket::basis(sm, 3).unwrap()],
        )
        .unwrap();
        let ket = Ket::new(
            SpaceLayout::new([("S", 2), ("E", 2)]).unwrap(),
            vec![c(0.5), c(0.5), c(0.5), c(0.5)],
        )
        .unwrap();
        let out = apply_on_factors(&copy, &["S"], &ket).unwrap();
        assert_eq!(out.layout().labels().collect::<Vec<_>>(), vec!["S", "E", "M"]);
        // (S,E,M): only digits with M == S survive
        for (i, a) in out.amplitudes().iter().enumerate() {
            let (sd, md) = (i / 4, i % 2);
            let expect = if sd == md { 0.5 } else { 0.0 };
            assert!((a - c(expect)).norm() < 1e-15);
        }
    }

    #[test]
    fn isometry_checks() {
        let id = LinearMap::identity(SpaceLayout::single("S", 3).unwrap());
        let check = check_isometry(&id, 1e-12);
        assert!(check.is_isometry);
        assert_eq!(check.max_deviation, 0.0);

        let mut m = DMatrix::<C64>::identity(2, 2);
        m[(0, 0)] = c(2.0);
        let scaled = LinearMap::operator(SpaceLayout::single("S", 2).unwrap(), m).unwrap();
        assert!(!check_isometry(&scaled, 1e-10).is_isometry);
        assert!(Isometry::new(scaled).is_err());

        let wide = LinearMap::new(
            SpaceLayout::single("S", 2).unwrap(),
            SpaceLayout::single("T", 1).unwrap(),
            DMatrix::from_element(1, 2, c(1.0)),
        )
        .unwrap();
        let check = check_isometry(&wide, 1e-10);
        assert!(!check.is_isometry);
        assert!(check.reason.is_some());
    }
}
