//! Random states, bases and measurements for property checks.
//!
//! Everything here takes an explicit generator so callers control seeding.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::formalisms::{KrausMeasurement, ProjectiveMeasurement};
use crate::tensor::{DensityOperator, Ket, LinearMap, SpaceLayout, StateVector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Modified Gram-Schmidt on the columns. Gaussian columns are linearly
/// independent with probability one.
fn orthonormalize_columns(mut m: DMatrix<C64>) -> DMatrix<C64> {
    for j in 0..m.ncols() {
        for k in 0..j {
            let overlap = m.column(k).dotc(&m.column(j));
            let proj = m.column(k) * overlap;
            let mut col = m.column_mut(j);
            col -= proj;
        }
        let norm = m.column(j).norm();
        m.column_mut(j).unscale_mut(norm);
    }
    m
}

/// Haar-like random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout) -> StateVector {
    let amps = (0..layout.dim()).map(|_| gaussian(rng)).collect();
    Ket::new(layout.clone(), amps)
        .and_then(|k| k.normalize())
        .expect("gaussian vector is nonzero")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout) -> LinearMap {
    let n = layout.dim();
    let q = orthonormalize_columns(gaussian_matrix(rng, n, n));
    LinearMap::operator(layout.clone(), q).expect("square matrix")
}

/// Random orthonormal basis of `layout`, as columns of a random unitary.
pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout) -> Vec<StateVector> {
    let u = random_unitary(rng, layout);
    (0..layout.dim())
        .map(|j| {
            StateVector::from_ket(
                Ket::from_vector(layout.clone(), u.matrix().column(j).into_owned()).expect("column fits"),
            )
            .expect("unitary columns are unit vectors")
        })
        .collect()
}

/// Complete projective measurement in a random basis, outcomes labeled
/// `0..dim`.
pub fn random_projective<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout) -> Result<ProjectiveMeasurement> {
    let outcomes = random_basis(rng, layout)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (i.to_string(), v))
        .collect();
    ProjectiveMeasurement::new(outcomes)
}

/// Random density operator of the given rank (clamped to `1..=dim`).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout, rank: usize) -> DensityOperator {
    let n = layout.dim();
    let g = gaussian_matrix(rng, n, rank.clamp(1, n));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    // Exact Hermiticity for the validator.
    m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityOperator::new(layout.clone(), m).expect("G G† / tr is a density operator")
}

/// Random Kraus family: the blocks of a random isometry `d -> d * outcomes`.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, layout: &SpaceLayout, outcomes: usize) -> Result<KrausMeasurement> {
    let d = layout.dim();
    let v = orthonormalize_columns(gaussian_matrix(rng, d * outcomes, d));
    let ops = (0..outcomes)
        .map(|a| {
            let block = v.rows(a * d, d).into_owned();
            LinearMap::operator(layout.clone(), block).map(|k| (a.to_string(), k))
        })
        .collect::<Result<Vec<_>>>()?;
    KrausMeasurement::new(ops)
}
