use faer::Mat;

use super::{FourierModeSet, Grid1D, HermitianOperator, ModeLabel, OperatorMeta};
use crate::error::{invalid, Error, Result};
use crate::linalg::{creal, czero, BlockMatrix};

/// Default guard on the assembled dimension `N·(2M+1)`.
pub const DEFAULT_DIM_CAP: usize = 40_000;

fn grushin_block(omega: f64, k: f64, grid: &Grid1D) -> Result<Mat<crate::c64>> {
    let n = grid.n_interior();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    for &x in grid.nodes() {
        let v = omega * omega * x.abs().powf(2.0 * (k - 1.0));
        if !v.is_finite() {
            return Err(Error::Assembly(format!(
                "non-finite potential at x = {x} (k = {k}, omega = {omega})"
            )));
        }
        diag.push(2.0 * inv_h2 + v);
    }
    Ok(Mat::from_fn(n, n, |i, j| {
        if i == j {
            creal(diag[i])
        } else if i.abs_diff(j) == 1 {
            creal(-inv_h2)
        } else {
            czero()
        }
    }))
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(invalid(format!("k must be finite and >= 1, got {k}")));
    }
    Ok(())
}

/// Finite-difference block of `-d²/dx₁² + ω_n²|x₁|^{2(k-1)}` with Dirichlet
/// conditions at `x₁ = ±1`.
pub fn assemble_grushin_mode(n: i64, k: f64, grid: &Grid1D) -> Result<HermitianOperator> {
    check_k(k)?;
    let block = grushin_block(FourierModeSet::omega(n), k, grid)?;
    HermitianOperator::new(
        BlockMatrix::new(vec![block], vec![Some(n)])?,
        grid.spacing(),
        OperatorMeta {
            k,
            mode: ModeLabel::Mode(n),
        },
    )
}

/// The Grushin operator on all retained modes, one block per mode in
/// increasing frequency order.
pub fn assemble_grushin_full(
    k: f64,
    grid: &Grid1D,
    modes: &FourierModeSet,
) -> Result<HermitianOperator> {
    assemble_grushin_full_capped(k, grid, modes, DEFAULT_DIM_CAP)
}

pub fn assemble_grushin_full_capped(
    k: f64,
    grid: &Grid1D,
    modes: &FourierModeSet,
    cap: usize,
) -> Result<HermitianOperator> {
    check_k(k)?;
    let dim = grid
        .n_interior()
        .checked_mul(modes.len())
        .ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap,
        })?;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let mut blocks = Vec::with_capacity(modes.len());
    let mut labels = Vec::with_capacity(modes.len());
    for n in modes.frequencies() {
        blocks.push(grushin_block(FourierModeSet::omega(n), k, grid)?);
        labels.push(Some(n));
    }
    HermitianOperator::new(
        BlockMatrix::new(blocks, labels)?,
        grid.spacing(),
        OperatorMeta {
            k,
            mode: ModeLabel::Full,
        },
    )
}

/// Spectral Laplacian of the flat torus. With `x1_modes = None` the torus is
/// `ℝ/ℤ` (one coefficient per `x₂` mode); otherwise it is `(ℝ/ℤ)²` and each
/// `x₂` block is diagonal over the `x₁` modes.
pub fn assemble_flat_laplacian(
    x1_modes: Option<&FourierModeSet>,
    modes: &FourierModeSet,
) -> Result<HermitianOperator> {
    let inner: Vec<f64> = match x1_modes {
        Some(m) => m.frequencies().map(FourierModeSet::omega).collect(),
        None => vec![0.0],
    };
    let dim = inner.len() * modes.len();
    if dim > DEFAULT_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let mut blocks = Vec::with_capacity(modes.len());
    let mut labels = Vec::with_capacity(modes.len());
    for n in modes.frequencies() {
        let w2 = FourierModeSet::omega(n).powi(2);
        blocks.push(Mat::from_fn(inner.len(), inner.len(), |i, j| {
            if i == j {
                creal(inner[i] * inner[i] + w2)
            } else {
                czero()
            }
        }));
        labels.push(Some(n));
    }
    HermitianOperator::new(
        BlockMatrix::new(blocks, labels)?,
        1.0,
        OperatorMeta {
            k: 1.0,
            mode: ModeLabel::Full,
        },
    )
}
