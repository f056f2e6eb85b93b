//! Thin dense linear-algebra layer over `faer`, plus the block-diagonal matrix
//! container shared by operators, generators and pencils.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::{c64, Side};

use crate::error::{invalid, Error, Result};

/// Fixes the dense kernels to sequential execution so results do not depend
/// on the worker-thread count. Work is parallelized above this layer.
pub fn init_sequential_kernels() {
    faer::set_global_parallelism(Par::Seq);
}

pub fn czero() -> c64 {
    c64::new(0.0, 0.0)
}

pub fn creal(x: f64) -> c64 {
    c64::new(x, 0.0)
}

/// `Σ conj(x_i) y_i`
pub fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sq(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

pub fn matvec(m: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(m.ncols(), x.len());
    let y = m * ColRef::from_slice(x);
    (0..y.nrows()).map(|i| y[i]).collect()
}

/// `x^H M x`
pub fn quad_form(m: &Mat<c64>, x: &[c64]) -> c64 {
    dot(x, &matvec(m, x))
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i == j { creal(1.0) } else { czero() })
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat<c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// `max |M - M^H|`
pub fn hermitian_defect(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigensolver { dim: m.nrows() })
}

/// Eigenpairs (ascending) of a Hermitian matrix; eigenvectors are the columns.
pub fn hermitian_eigen(m: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigensolver { dim: m.nrows() })?;
    let s = evd.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &Mat<c64>) -> Result<Vec<c64>> {
    m.eigenvalues()
        .map_err(|_| Error::Eigensolver { dim: m.nrows() })
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eigen(m: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = m.eigen().map_err(|_| Error::Eigensolver { dim: m.nrows() })?;
    let s = evd.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &Mat<c64>) -> Result<Vec<f64>> {
    m.singular_values().map_err(|_| Error::Svd {
        dim: m.nrows().max(m.ncols()),
    })
}

/// `(σ_min, σ_max)`
pub fn extreme_singular_values(m: &Mat<c64>) -> Result<(f64, f64)> {
    let s = singular_values(m)?;
    match (s.last(), s.first()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Ok((0.0, 0.0)),
    }
}

/// Upper factor `R` with `M = R^H R` for a Hermitian positive definite `M`.
pub fn cholesky_upper(m: &Mat<c64>) -> Result<Mat<c64>> {
    let llt = m
        .llt(Side::Lower)
        .map_err(|_| Error::Cholesky { dim: m.nrows() })?;
    Ok(llt.L().adjoint().to_owned())
}

/// Inverse of an invertible upper-triangular matrix.
pub fn upper_triangular_inverse(r: &Mat<c64>) -> Mat<c64> {
    let mut out = identity(r.nrows());
    r.solve_upper_triangular_in_place(out.as_mut());
    out
}

/// Dense inverse through partial-pivot LU.
pub fn inverse(m: &Mat<c64>) -> Mat<c64> {
    m.partial_piv_lu().inverse()
}

/// Solves `M X = B` through partial-pivot LU.
pub fn solve(m: &Mat<c64>, rhs: &Mat<c64>) -> Mat<c64> {
    m.partial_piv_lu().solve(rhs)
}

pub fn block_diag2(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = Mat::<c64>::zeros(n + m, n + m);
    out.as_mut().submatrix_mut(0, 0, n, n).copy_from(a);
    out.as_mut().submatrix_mut(n, n, m, m).copy_from(b);
    out
}

/// Block-diagonal complex matrix. Each block optionally carries the Fourier
/// mode it represents; mode-coupled blocks carry `None`.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    blocks: Vec<Mat<c64>>,
    modes: Vec<Option<i64>>,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<Mat<c64>>, modes: Vec<Option<i64>>) -> Result<Self> {
        if blocks.len() != modes.len() {
            return Err(invalid("one mode label per block is required"));
        }
        if let Some(b) = blocks.iter().find(|b| b.nrows() != b.ncols()) {
            return Err(invalid(format!(
                "blocks must be square, found {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { blocks, modes })
    }

    pub fn single(m: Mat<c64>) -> Self {
        Self {
            blocks: vec![m],
            modes: vec![None],
        }
    }

    pub fn blocks(&self) -> &[Mat<c64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Mat<c64> {
        &self.blocks[i]
    }

    pub fn modes(&self) -> &[Option<i64>] {
        &self.modes
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    /// Block start offsets, followed by the total dimension.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len() + 1);
        let mut acc = 0;
        out.push(0);
        for b in &self.blocks {
            acc += b.nrows();
            out.push(acc);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.dim();
        let mut out = Mat::<c64>::zeros(n, n);
        let offsets = self.offsets();
        for (b, &o) in self.blocks.iter().zip(&offsets) {
            let m = b.nrows();
            out.as_mut().submatrix_mut(o, o, m, m).copy_from(b);
        }
        out
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.dim());
        let offsets = self.offsets();
        let mut out = Vec::with_capacity(x.len());
        for (b, w) in self.blocks.iter().zip(offsets.windows(2)) {
            out.extend(matvec(b, &x[w[0]..w[1]]));
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(hermitian_defect).fold(0.0, f64::max)
    }

    pub fn map_blocks(&self, mut f: impl FnMut(&Mat<c64>) -> Mat<c64>) -> Self {
        Self {
            blocks: self.blocks.iter().map(&mut f).collect(),
            modes: self.modes.clone(),
        }
    }

    /// Combines two matrices with the same block partition blockwise.
    pub fn zip_with(
        &self,
        other: &Self,
        mut f: impl FnMut(&Mat<c64>, &Mat<c64>) -> Mat<c64>,
    ) -> Result<Self> {
        if self.sizes() != other.sizes() {
            return Err(invalid("block partitions differ"));
        }
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
            modes: self.modes.clone(),
        })
    }

    /// Re-blocks onto a coarser partition (each new block must be a union of
    /// consecutive existing blocks).
    pub fn regroup(&self, sizes: &[usize]) -> Result<Self> {
        if sizes == self.sizes().as_slice() {
            return Ok(self.clone());
        }
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut modes = Vec::with_capacity(sizes.len());
        let mut next = 0usize;
        for &target in sizes {
            let start = next;
            let mut acc = 0usize;
            while acc < target {
                let Some(b) = self.blocks.get(next) else {
                    return Err(invalid("partition does not cover the matrix"));
                };
                acc += b.nrows();
                next += 1;
            }
            if acc != target {
                return Err(invalid("target partition is not a coarsening"));
            }
            let group = &self.blocks[start..next];
            if group.len() == 1 {
                blocks.push(group[0].clone());
                modes.push(self.modes[start]);
            } else {
                let mut m = Mat::<c64>::zeros(target, target);
                let mut o = 0;
                for b in group {
                    let k = b.nrows();
                    m.as_mut().submatrix_mut(o, o, k, k).copy_from(b);
                    o += k;
                }
                blocks.push(m);
                modes.push(None);
            }
        }
        if next != self.blocks.len() {
            return Err(invalid("partition does not cover the matrix"));
        }
        Ok(Self { blocks, modes })
    }
}

/// Finest partition that both `a` and `b` refine.
pub fn common_partition(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let total_a: usize = a.iter().sum();
    let total_b: usize = b.iter().sum();
    if total_a != total_b {
        return Err(Error::DimensionMismatch {
            expected: total_a,
            found: total_b,
        });
    }
    let cuts = |p: &[usize]| {
        let mut acc = 0;
        p.iter()
            .map(|&s| {
                acc += s;
                acc
            })
            .collect::<Vec<_>>()
    };
    let (ca, cb) = (cuts(a), cuts(b));
    let mut out = Vec::new();
    let mut last = 0;
    let mut j = 0;
    for &c in &ca {
        while j < cb.len() && cb[j] < c {
            j += 1;
        }
        if j < cb.len() && cb[j] == c {
            out.push(c - last);
            last = c;
        }
    }
    Ok(out)
}
