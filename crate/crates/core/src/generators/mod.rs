//! Damped first-order generators, their quadratic pencils, spectra and the
//! kernel spectral projector.
//!
//! A generator is stored on the common block partition of its stiffness and
//! damping operators. For wave and plate generators each block `p` acts on
//! `[u_p; v_p]`, so the generator's coordinate order differs from the global
//! `(u, v)` order; [`DampedGenerator::to_block_layout`] converts between them.

mod projector;
mod spectrum;

pub use projector::{kernel_projector, KernelProjector};
pub use spectrum::{
    pencil_relative_sigma_min, spectrum, LocalizationFlag, SpectrumOptions, SpectrumReport,
};

use std::sync::OnceLock;

use faer::{Mat, Scale};

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, common_partition, creal, BlockMatrix};
use crate::operators::HermitianOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Wave,
    Schrodinger,
    Plate,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wave => "wave",
            ModelKind::Schrodinger => "schrodinger",
            ModelKind::Plate => "plate",
        }
    }

    /// Wave and plate generators act on `(u, ∂ₜu)`.
    pub fn is_second_order(self) -> bool {
        !matches!(self, ModelKind::Schrodinger)
    }
}

/// Gram form defining the norm on the phase space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `h·blockdiag(S+Id, Id)` for wave/plate (`S = A` resp. `A²`), `h·Id` for
    /// Schrödinger.
    Energy,
    /// `h·blockdiag(S, Id)`; a norm only when `S` is coercive.
    Seminorm,
}

struct Factor {
    r: Mat<c64>,
    r_inv: Mat<c64>,
}

/// The generator `𝒜`, `𝒜_S` or `𝒜_P` together with its energy forms.
pub struct DampedGenerator {
    kind: ModelKind,
    stiffness: HermitianOperator,
    damping: HermitianOperator,
    partition: Vec<usize>,
    modes: Vec<Option<i64>>,
    s_blocks: Vec<Mat<c64>>,
    d_blocks: Vec<Mat<c64>>,
    matrix: BlockMatrix,
    damping_norm: OnceLock<f64>,
    energy_factors: OnceLock<std::result::Result<Vec<Factor>, usize>>,
    seminorm_factors: OnceLock<std::result::Result<Vec<Factor>, usize>>,
}

impl std::fmt::Debug for DampedGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DampedGenerator")
            .field("kind", &self.kind)
            .field("partition", &self.partition)
            .finish_non_exhaustive()
    }
}

fn check_pair(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if (a.quad_weight() - b.quad_weight()).abs() > 1e-14 * a.quad_weight() {
        return Err(invalid(format!(
            "stiffness and damping use different quadrature weights ({} vs {})",
            a.quad_weight(),
            b.quad_weight()
        )));
    }
    Ok(())
}

/// `A` and `BB*` on their common block partition.
fn common_blocks(a: &HermitianOperator, b: &HermitianOperator) -> Result<(BlockMatrix, BlockMatrix)> {
    check_pair(a, b)?;
    let sizes = common_partition(&a.matrix().sizes(), &b.matrix().sizes())?;
    Ok((a.regrouped(&sizes)?, b.regrouped(&sizes)?))
}

fn wave_block(s: &Mat<c64>, d: &Mat<c64>) -> Mat<c64> {
    let m = s.nrows();
    Mat::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => linalg::czero(),
        (true, false) => {
            if j - m == i {
                creal(1.0)
            } else {
                linalg::czero()
            }
        }
        (false, true) => -s[(i - m, j)],
        (false, false) => -d[(i - m, j - m)],
    })
}

impl DampedGenerator {
    fn build(kind: ModelKind, a: &HermitianOperator, b: &HermitianOperator) -> Result<Self> {
        let (a_blocks, d_blocks) = common_blocks(a, b)?;
        let s_blocks: Vec<Mat<c64>> = match kind {
            ModelKind::Plate => a_blocks.blocks().iter().map(|m| m * m).collect(),
            _ => a_blocks.blocks().to_vec(),
        };
        let d_blocks = d_blocks.blocks().to_vec();
        let blocks: Vec<Mat<c64>> = match kind {
            ModelKind::Schrodinger => s_blocks
                .iter()
                .zip(&d_blocks)
                .map(|(s, d)| {
                    Mat::from_fn(s.nrows(), s.nrows(), |i, j| {
                        c64::new(0.0, 1.0) * s[(i, j)] - d[(i, j)]
                    })
                })
                .collect(),
            _ => s_blocks
                .iter()
                .zip(&d_blocks)
                .map(|(s, d)| wave_block(s, d))
                .collect(),
        };
        let modes = a_blocks.modes().to_vec();
        Ok(Self {
            kind,
            stiffness: a.clone(),
            damping: b.clone(),
            partition: a_blocks.sizes(),
            modes: modes.clone(),
            s_blocks,
            d_blocks,
            matrix: BlockMatrix::new(blocks, modes)?,
            damping_norm: OnceLock::new(),
            energy_factors: OnceLock::new(),
            seminorm_factors: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// The operator `A` as supplied (not squared for plates).
    pub fn stiffness(&self) -> &HermitianOperator {
        &self.stiffness
    }

    pub fn damping(&self) -> &HermitianOperator {
        &self.damping
    }

    /// The generator matrix in block layout.
    pub fn matrix(&self) -> &BlockMatrix {
        &self.matrix
    }

    /// Stiffness block `S_p` (`A_p`, or `A_p²` for plates).
    pub fn stiffness_block(&self, p: usize) -> &Mat<c64> {
        &self.s_blocks[p]
    }

    pub fn damping_block(&self, p: usize) -> &Mat<c64> {
        &self.d_blocks[p]
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.len()
    }

    /// Sizes of the configuration-space blocks (`u_p`).
    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn block_modes(&self) -> &[Option<i64>] {
        &self.modes
    }

    pub fn quad_weight(&self) -> f64 {
        self.stiffness.quad_weight()
    }

    /// Dimension of configuration space (`u` alone).
    pub fn config_dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// Dimension of the phase space.
    pub fn phase_dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `‖BB*‖`, the largest eigenvalue of the damping operator.
    pub fn damping_norm(&self) -> f64 {
        *self
            .damping_norm
            .get_or_init(|| self.damping.norm_2().unwrap_or(f64::NAN))
    }

    /// Converts global `(u, v)` coordinates to the block layout.
    pub fn to_block_layout(&self, u: &[c64], v: Option<&[c64]>) -> Result<Vec<c64>> {
        let n = self.config_dim();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.len(),
            });
        }
        if !self.kind.is_second_order() {
            return Ok(u.to_vec());
        }
        let v = v.ok_or_else(|| invalid("second-order state requires a velocity"))?;
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut out = Vec::with_capacity(2 * n);
        let mut o = 0;
        for &m in &self.partition {
            out.extend_from_slice(&u[o..o + m]);
            out.extend_from_slice(&v[o..o + m]);
            o += m;
        }
        Ok(out)
    }

    /// Inverse of [`Self::to_block_layout`]; the velocity is `None` for
    /// Schrödinger generators.
    pub fn from_block_layout(&self, x: &[c64]) -> (Vec<c64>, Option<Vec<c64>>) {
        if !self.kind.is_second_order() {
            return (x.to_vec(), None);
        }
        let n = self.config_dim();
        let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut o = 0;
        for &m in &self.partition {
            u.extend_from_slice(&x[o..o + m]);
            v.extend_from_slice(&x[o + m..o + 2 * m]);
            o += 2 * m;
        }
        (u, Some(v))
    }

    /// Gram block `W_p` of the given metric (including the quadrature weight).
    pub fn gram_block(&self, p: usize, metric: Metric) -> Mat<c64> {
        let h = creal(self.quad_weight());
        let s = &self.s_blocks[p];
        let m = s.nrows();
        match self.kind {
            ModelKind::Schrodinger => linalg::identity(m) * Scale(h),
            _ => {
                let shift = if metric == Metric::Energy { 1.0 } else { 0.0 };
                let top = Mat::from_fn(m, m, |i, j| {
                    s[(i, j)] + if i == j { creal(shift) } else { linalg::czero() }
                });
                linalg::block_diag2(&top, &linalg::identity(m)) * Scale(h)
            }
        }
    }

    pub fn gram(&self, metric: Metric) -> BlockMatrix {
        let blocks = (0..self.num_blocks())
            .map(|p| self.gram_block(p, metric))
            .collect();
        BlockMatrix::new(blocks, self.modes.clone()).expect("square gram blocks")
    }

    /// `⟨W x, x⟩` for a block-layout vector.
    pub fn quad_form(&self, x: &[c64], metric: Metric) -> f64 {
        let offsets = self.matrix.offsets();
        let mut acc = 0.0;
        for p in 0..self.num_blocks() {
            let xp = &x[offsets[p]..offsets[p + 1]];
            acc += linalg::quad_form(&self.gram_block(p, metric), xp).re;
        }
        acc
    }

    pub fn norm(&self, x: &[c64], metric: Metric) -> f64 {
        self.quad_form(x, metric).max(0.0).sqrt()
    }

    /// Applies the generator to a block-layout vector.
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        self.matrix.apply(x)
    }

    /// Cholesky factors `W_p = R_pᴴR_p` with their inverses, computed once.
    fn factors(&self, metric: Metric) -> Result<&[Factor]> {
        let cell = match metric {
            Metric::Energy => &self.energy_factors,
            Metric::Seminorm => &self.seminorm_factors,
        };
        let res = cell.get_or_init(|| {
            (0..self.num_blocks())
                .map(|p| {
                    let w = self.gram_block(p, metric);
                    let r = linalg::cholesky_upper(&w).map_err(|_| w.nrows())?;
                    let r_inv = linalg::upper_triangular_inverse(&r);
                    Ok(Factor { r, r_inv })
                })
                .collect()
        });
        match res {
            Ok(f) => Ok(f.as_slice()),
            Err(dim) => Err(Error::Cholesky { dim: *dim }),
        }
    }

    /// `R_p (M) R_p⁻¹`, the block `M` seen as an operator on the metric space.
    pub(crate) fn similarity(&self, p: usize, m: &Mat<c64>, metric: Metric) -> Result<Mat<c64>> {
        let f = &self.factors(metric)?[p];
        Ok(&f.r * m * &f.r_inv)
    }
}

/// `[[0, Id], [−A, −BB*]]`
pub fn damped_wave_generator(a: &HermitianOperator, b: &HermitianOperator) -> Result<DampedGenerator> {
    DampedGenerator::build(ModelKind::Wave, a, b)
}

/// `iA − BB*`
pub fn schrodinger_generator(a: &HermitianOperator, b: &HermitianOperator) -> Result<DampedGenerator> {
    DampedGenerator::build(ModelKind::Schrodinger, a, b)
}

/// `[[0, Id], [−A², −BB*]]`
pub fn plate_generator(a: &HermitianOperator, b: &HermitianOperator) -> Result<DampedGenerator> {
    DampedGenerator::build(ModelKind::Plate, a, b)
}

pub fn generator(kind: ModelKind, a: &HermitianOperator, b: &HermitianOperator) -> Result<DampedGenerator> {
    DampedGenerator::build(kind, a, b)
}

/// `P(z) = A + z² + z·BB*`
pub fn quadratic_pencil(a: &HermitianOperator, b: &HermitianOperator, z: c64) -> Result<BlockMatrix> {
    let (a, d) = common_blocks(a, b)?;
    a.zip_with(&d, |a, d| {
        Mat::from_fn(a.nrows(), a.nrows(), |i, j| {
            let diag = if i == j { z * z } else { linalg::czero() };
            a[(i, j)] + diag + z * d[(i, j)]
        })
    })
}

/// `P_λ = A − λ² + iλ·BB*`, i.e. `P(iλ)`.
pub fn damped_wave_pencil(a: &HermitianOperator, b: &HermitianOperator, lambda: f64) -> Result<BlockMatrix> {
    quadratic_pencil(a, b, c64::new(0.0, lambda))
}

/// `Q_λ = A − λ + i·BB*`
pub fn shifted_schrodinger_pencil(
    a: &HermitianOperator,
    b: &HermitianOperator,
    lambda: f64,
) -> Result<BlockMatrix> {
    let (a, d) = common_blocks(a, b)?;
    a.zip_with(&d, |a, d| {
        Mat::from_fn(a.nrows(), a.nrows(), |i, j| {
            let diag = if i == j { creal(-lambda) } else { linalg::czero() };
            a[(i, j)] + diag + c64::new(0.0, 1.0) * d[(i, j)]
        })
    })
}

/// `(σ_min, ‖·‖₂)` of a block-diagonal matrix.
pub fn block_extreme_singular_values(m: &BlockMatrix) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for b in m.blocks() {
        let (l, h) = linalg::extreme_singular_values(b)?;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{assemble_damping, assemble_grushin_full, DampingProfile, FourierModeSet, Grid1D};

    fn close(a: c64, b: c64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn wave_action_matches_definition() {
        let grid = Grid1D::new(5).unwrap();
        let modes = FourierModeSet::new(1);
        let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
        let b = assemble_damping(&DampingProfile::x1_outside(&grid, 0.5), &grid, &modes).unwrap();
        let g = damped_wave_generator(&a, &b).unwrap();
        let u: Vec<c64> = (0..15).map(|i| c64::new(i as f64, 1.0)).collect();
        let v: Vec<c64> = (0..15).map(|i| c64::new(1.0, -(i as f64))).collect();
        let x = g.to_block_layout(&u, Some(&v)).unwrap();
        let (gu, gv) = g.from_block_layout(&g.apply(&x));
        let au = a.apply(&u);
        let bv = b.apply(&v);
        for i in 0..15 {
            assert!(close(gu[i], v[i]));
            assert!(close(gv.as_ref().unwrap()[i], -au[i] - bv[i]));
        }
        let (u2, v2) = g.from_block_layout(&x);
        assert_eq!(u2, u);
        assert_eq!(v2.unwrap(), v);
    }

    #[test]
    fn mode_coupled_damping_merges_blocks() {
        let grid = Grid1D::new(4).unwrap();
        let modes = FourierModeSet::new(2);
        let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
        let b = assemble_damping(&DampingProfile::x2_indicator(0.0, 0.5), &grid, &modes).unwrap();
        let g = damped_wave_generator(&a, &b).unwrap();
        assert_eq!(g.partition(), &[20]);
        assert_eq!(g.phase_dim(), 40);
    }

    #[test]
    fn pencil_at_zero_is_stiffness() {
        let a = HermitianOperator::scalar(3.0);
        let b = HermitianOperator::scalar(0.7);
        let p = quadratic_pencil(&a, &b, linalg::czero()).unwrap();
        assert_eq!(p.block(0)[(0, 0)], creal(3.0));
        let p = quadratic_pencil(&a, &b, c64::new(0.0, 2.0)).unwrap();
        let pl = damped_wave_pencil(&a, &b, 2.0).unwrap();
        assert!(close(p.block(0)[(0, 0)], c64::new(3.0 - 4.0, 1.4)));
        assert!(close(pl.block(0)[(0, 0)], p.block(0)[(0, 0)]));
        let q = shifted_schrodinger_pencil(&a, &b, 0.0).unwrap();
        assert!(close(q.block(0)[(0, 0)], c64::new(3.0, 0.7)));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let grid = Grid1D::new(4).unwrap();
        let a = assemble_grushin_full(2.0, &grid, &FourierModeSet::new(1)).unwrap();
        let b = HermitianOperator::scalar(1.0);
        assert!(matches!(
            damped_wave_generator(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
