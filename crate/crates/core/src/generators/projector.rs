use faer::Mat;

use super::{DampedGenerator, ModelKind};
use crate::c64;
use crate::error::{Error, Result};
use crate::linalg::{self, BlockMatrix};

/// Spectral projector of a wave or plate generator onto its kernel.
///
/// The right kernel is `ker S × {0}` and the left kernel (kernel of `𝒜ᴴ`) is
/// spanned by `(D v, v)` for `v ∈ ker S`; the projector is
/// `Π₀ = R (Yᴴ R)⁻¹ Yᴴ`, stored blockwise in the generator's layout.
#[derive(Clone, Debug)]
pub struct KernelProjector {
    /// Right kernel basis per generator block (zero columns when trivial).
    pub right: Vec<Mat<c64>>,
    pub left: Vec<Mat<c64>>,
    pub projector: BlockMatrix,
    pub rank: usize,
}

impl KernelProjector {
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        self.projector.apply(x)
    }
}

pub fn kernel_projector(gen: &DampedGenerator) -> Result<KernelProjector> {
    if !gen.kind().is_second_order() {
        return Err(Error::Unsupported(
            "kernel projector is defined for wave and plate generators".into(),
        ));
    }
    let nb = gen.num_blocks();
    let mut spectra = Vec::with_capacity(nb);
    let mut smax = 0.0f64;
    for p in 0..nb {
        let (vals, vecs) = linalg::hermitian_eigen(gen.stiffness_block(p))?;
        for v in &vals {
            smax = smax.max(v.abs());
        }
        spectra.push((vals, vecs));
    }
    let threshold = 1e-10 * smax;

    let mut right = Vec::with_capacity(nb);
    let mut left = Vec::with_capacity(nb);
    let mut blocks = Vec::with_capacity(nb);
    let mut rank = 0;
    for (p, (vals, vecs)) in spectra.into_iter().enumerate() {
        let m = gen.partition()[p];
        let kernel: Vec<usize> = (0..m).filter(|&i| vals[i].abs() <= threshold).collect();
        let r = kernel.len();
        rank += r;
        let v = Mat::from_fn(m, r, |i, c| vecs[(i, kernel[c])]);
        let dv = gen.damping_block(p) * &v;
        let rb = Mat::from_fn(2 * m, r, |i, c| {
            if i < m {
                v[(i, c)]
            } else {
                linalg::czero()
            }
        });
        let yb = Mat::from_fn(2 * m, r, |i, c| {
            if i < m {
                dv[(i, c)]
            } else {
                v[(i - m, c)]
            }
        });
        let proj = if r == 0 {
            Mat::<c64>::zeros(2 * m, 2 * m)
        } else {
            let gram = yb.adjoint() * &rb;
            let (lo, hi) = linalg::extreme_singular_values(&gram)?;
            let scale = dv.norm_l2().max(1.0);
            if lo <= 1e-10 * scale || lo <= 1e-10 * hi.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularNormalization(lo));
            }
            &rb * linalg::inverse(&gram) * yb.adjoint()
        };
        right.push(rb);
        left.push(yb);
        blocks.push(proj);
    }
    Ok(KernelProjector {
        right,
        left,
        projector: BlockMatrix::new(blocks, gen.block_modes().to_vec())?,
        rank,
    })
}

impl DampedGenerator {
    /// `Π₀x` when the generator has a kernel projector, otherwise zero.
    pub fn project_kernel(&self, x: &[c64]) -> Result<Vec<c64>> {
        match self.kind() {
            ModelKind::Schrodinger => Ok(vec![linalg::czero(); x.len()]),
            _ => Ok(kernel_projector(self)?.apply(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::damped_wave_generator;
    use crate::linalg::creal;
    use crate::operators::{
        assemble_damping, assemble_flat_laplacian, assemble_grushin_full, DampingProfile,
        FourierModeSet, Grid1D, HermitianOperator,
    };

    #[test]
    fn dirichlet_grushin_has_trivial_projector() {
        let grid = Grid1D::new(8).unwrap();
        let modes = FourierModeSet::new(2);
        let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
        let b = assemble_damping(&DampingProfile::Constant(1.0), &grid, &modes).unwrap();
        let k = kernel_projector(&damped_wave_generator(&a, &b).unwrap()).unwrap();
        assert_eq!(k.rank, 0);
        assert_eq!(k.projector.max_abs(), 0.0);
    }

    #[test]
    fn torus_projector_closed_form() {
        let beta = 0.75;
        let a = assemble_flat_laplacian(None, &FourierModeSet::new(2)).unwrap();
        let b = HermitianOperator::scaled_identity_like(&a, beta);
        let g = damped_wave_generator(&a, &b).unwrap();
        let k = kernel_projector(&g).unwrap();
        assert_eq!(k.rank, 1);
        // Mode 0 is the middle block; its phase space is (u, v) ∈ ℂ².
        let p = k.projector.block(2);
        let expected = [[1.0, 1.0 / beta], [0.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - creal(expected[i][j])).norm() < 1e-14);
            }
        }
        assert_eq!(k.right[2][(0, 0)].norm(), 1.0);
    }

    #[test]
    fn undamped_kernel_normalization_is_singular() {
        let a = assemble_flat_laplacian(None, &FourierModeSet::new(1)).unwrap();
        let b = HermitianOperator::scaled_identity_like(&a, 0.0);
        let g = damped_wave_generator(&a, &b).unwrap();
        assert!(matches!(
            kernel_projector(&g),
            Err(Error::SingularNormalization(_))
        ));
    }
}
