//! Quadrature-weighted discretizations of the Grushin operators, the flat torus
//! Laplacian and damping multiplication operators.
//!
//! Every operator is block-diagonal over Fourier modes in `x₂` and acts on
//! coefficient vectors in (mode, node) lexicographic order. The discrete `L²`
//! inner product is `h·Σ u_i v̄_i` inside a mode and Parseval-weighted (weight 1)
//! across modes.

mod damping;
mod export;
mod grid;
mod grushin;

pub use damping::{assemble_damping, DampingProfile, X2Profile};
pub use export::{write_matrix_market, write_matrix_market_file};
pub use grid::{FourierModeSet, Grid1D};
pub use grushin::{
    assemble_flat_laplacian, assemble_grushin_full, assemble_grushin_full_capped,
    assemble_grushin_mode, DEFAULT_DIM_CAP,
};

use faer::Mat;

use crate::c64;
use crate::error::{Error, Result};
use crate::linalg::{self, BlockMatrix};

/// Which part of the Fourier decomposition an operator represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeLabel {
    Mode(i64),
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorMeta {
    /// Hypoellipticity index of the underlying Grushin family; 1 for elliptic
    /// or non-differential operators.
    pub k: f64,
    pub mode: ModeLabel,
}

/// A discretized nonnegative self-adjoint operator together with the weight
/// of its `L²` inner product.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: BlockMatrix,
    quad_weight: f64,
    meta: OperatorMeta,
}

impl HermitianOperator {
    pub fn new(matrix: BlockMatrix, quad_weight: f64, meta: OperatorMeta) -> Result<Self> {
        if !(quad_weight.is_finite() && quad_weight > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature weight must be positive, got {quad_weight}"
            )));
        }
        let scale = matrix.max_abs();
        let defect = matrix.hermitian_defect();
        if !(defect <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::Assembly(format!(
                "matrix is not Hermitian (defect {defect:e}, scale {scale:e})"
            )));
        }
        Ok(Self {
            matrix,
            quad_weight,
            meta,
        })
    }

    /// A scalar (1×1) operator with unit weight, for closed-form checks.
    pub fn scalar(value: f64) -> Self {
        Self {
            matrix: BlockMatrix::single(Mat::from_fn(1, 1, |_, _| linalg::creal(value))),
            quad_weight: 1.0,
            meta: OperatorMeta {
                k: 1.0,
                mode: ModeLabel::Full,
            },
        }
    }

    /// `β·Id` on the same block structure as `like`.
    pub fn scaled_identity_like(like: &HermitianOperator, beta: f64) -> Self {
        Self {
            matrix: like
                .matrix
                .map_blocks(|b| Mat::from_fn(b.nrows(), b.nrows(), |i, j| {
                    if i == j {
                        linalg::creal(beta)
                    } else {
                        linalg::czero()
                    }
                })),
            quad_weight: like.quad_weight,
            meta: like.meta,
        }
    }

    pub fn matrix(&self) -> &BlockMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn quad_weight(&self) -> f64 {
        self.quad_weight
    }

    pub fn meta(&self) -> OperatorMeta {
        self.meta
    }

    pub fn apply(&self, u: &[c64]) -> Vec<c64> {
        self.matrix.apply(u)
    }

    /// Weighted inner product `h·Σ u_i v̄_i`.
    pub fn inner(&self, u: &[c64], v: &[c64]) -> c64 {
        linalg::dot(v, u) * self.quad_weight
    }

    pub fn norm(&self, u: &[c64]) -> f64 {
        (linalg::norm_sq(u) * self.quad_weight).sqrt()
    }

    /// `⟨Lu, u⟩` in the weighted inner product.
    pub fn quadratic_form(&self, u: &[c64]) -> f64 {
        self.inner(&self.apply(u), u).re
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim());
        for b in self.matrix.blocks() {
            out.extend(linalg::hermitian_eigenvalues(b)?);
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Largest eigenvalue modulus (the spectral norm).
    pub fn norm_2(&self) -> Result<f64> {
        let mut out = 0.0f64;
        for b in self.matrix.blocks() {
            let ev = linalg::hermitian_eigenvalues(b)?;
            for e in ev {
                out = out.max(e.abs());
            }
        }
        Ok(out)
    }

    /// The operator squared blockwise (same weight and metadata).
    pub fn squared(&self) -> Self {
        Self {
            matrix: self.matrix.map_blocks(|b| b * b),
            quad_weight: self.quad_weight,
            meta: self.meta,
        }
    }

    pub(crate) fn regrouped(&self, sizes: &[usize]) -> Result<BlockMatrix> {
        self.matrix.regroup(sizes)
    }
}
