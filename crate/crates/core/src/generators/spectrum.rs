use std::io::Write;

use faer::Mat;
use rayon::prelude::*;

use super::{DampedGenerator, ModelKind};
use crate::c64;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalizationFlag {
    /// Inside the predicted region with margin larger than the tolerance.
    Inside,
    /// Within the tolerance of the region boundary.
    Boundary,
    Outside,
    /// The eigenpair residual exceeds the acceptance tolerance.
    Unresolved,
}

impl LocalizationFlag {
    pub fn name(self) -> &'static str {
        match self {
            LocalizationFlag::Inside => "inside",
            LocalizationFlag::Boundary => "boundary",
            LocalizationFlag::Outside => "outside",
            LocalizationFlag::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    /// Largest phase-space dimension accepted.
    pub dim_cap: usize,
    /// Eigenpairs whose residual exceeds this are flagged unresolved.
    pub residual_tol: f64,
    /// Absolute tolerance of the localization test.
    pub localization_tol: f64,
    /// Relative clustering radius for multiplicities and conjugate pairing.
    pub cluster_radius: f64,
    /// Use `σ_min(P(z))/‖P(z)‖` from an SVD per eigenvalue instead of the
    /// eigenvector backward error.
    pub exact_residuals: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            dim_cap: 20_000,
            residual_tol: 1e-7,
            localization_tol: 1e-8,
            cluster_radius: 1e-7,
            exact_residuals: false,
        }
    }
}

/// Eigenvalues of a generator with residuals, localization flags, conjugate
/// pairing and cluster multiplicities. Entries are sorted by `Im`, then `Re`.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub kind: ModelKind,
    pub eigenvalues: Vec<c64>,
    /// Relative residual of each eigenpair: the backward error
    /// `‖P(z)u‖ / ((‖S‖ + |z|² + |z|‖D‖)‖u‖)` of the pencil (resp.
    /// `‖(𝒜_S − z)u‖ / ((‖A‖ + ‖D‖ + |z|)‖u‖)`), or `σ_min(P(z))/‖P(z)‖` when
    /// exact residuals are requested.
    pub residuals: Vec<f64>,
    pub flags: Vec<LocalizationFlag>,
    /// Index of the conjugate partner (wave and plate only).
    pub conjugate_pairs: Vec<Option<usize>>,
    pub multiplicities: Vec<usize>,
    /// Generator block each eigenvalue comes from, and that block's mode.
    pub blocks: Vec<usize>,
    pub modes: Vec<Option<i64>>,
    /// `‖BB*‖` used for the localization regions.
    pub damping_norm: f64,
    pub options: SpectrumOptions,
}

impl SpectrumReport {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn count(&self, flag: LocalizationFlag) -> usize {
        self.flags.iter().filter(|&&f| f == flag).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Whether `z` is real up to the clustering radius.
    pub fn is_real(&self, z: c64) -> bool {
        z.im.abs() <= self.options.cluster_radius * (1.0 + z.norm())
    }

    /// Largest `|z̄_i − z_{pair(i)}|`; infinite if some eigenvalue has no
    /// partner.
    pub fn conjugate_defect(&self) -> f64 {
        let mut out = 0.0f64;
        for (i, p) in self.conjugate_pairs.iter().enumerate() {
            match p {
                Some(j) => out = out.max((self.eigenvalues[i].conj() - self.eigenvalues[*j]).norm()),
                None => return f64::INFINITY,
            }
        }
        out
    }

    /// CSV with header `re,im,residual,flag`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "re,im,residual,flag")?;
        for i in 0..self.len() {
            let z = self.eigenvalues[i];
            writeln!(
                out,
                "{},{},{},{}",
                crate::cli::fmt_f64(z.re),
                crate::cli::fmt_f64(z.im),
                crate::cli::fmt_f64(self.residuals[i]),
                self.flags[i].name()
            )?;
        }
        Ok(())
    }
}

/// Signed distance-like margin to the predicted region: negative inside,
/// positive outside.
fn region_margin(kind: ModelKind, z: c64, bnorm: f64, nonreal: bool) -> f64 {
    let mut m = z.re.max(-bnorm - z.re);
    match kind {
        ModelKind::Wave | ModelKind::Plate => {
            if nonreal {
                m = m.max(-0.5 * bnorm - z.re);
            }
        }
        ModelKind::Schrodinger => m = m.max(-z.im),
    }
    m
}

fn classify(margin: f64, tol: f64) -> LocalizationFlag {
    if margin < -tol {
        LocalizationFlag::Inside
    } else if margin <= tol {
        LocalizationFlag::Boundary
    } else {
        LocalizationFlag::Outside
    }
}

fn hermitian_norm(m: &Mat<c64>) -> Result<f64> {
    Ok(linalg::hermitian_eigenvalues(m)?
        .into_iter()
        .fold(0.0, |acc, e| acc.max(e.abs())))
}

fn pencil_block(gen: &DampedGenerator, p: usize, z: c64) -> Mat<c64> {
    let s = gen.stiffness_block(p);
    let d = gen.damping_block(p);
    let m = s.nrows();
    match gen.kind() {
        ModelKind::Schrodinger => Mat::from_fn(m, m, |i, j| {
            let diag = if i == j { z } else { linalg::czero() };
            diag - c64::new(0.0, 1.0) * s[(i, j)] + d[(i, j)]
        }),
        _ => Mat::from_fn(m, m, |i, j| {
            let diag = if i == j { z * z } else { linalg::czero() };
            s[(i, j)] + diag + z * d[(i, j)]
        }),
    }
}

/// `σ_min/‖·‖₂` of the pencil of block `p` at `z`: `P(z)` for wave and plate
/// generators, `z − 𝒜_S` for Schrödinger.
pub fn pencil_relative_sigma_min(gen: &DampedGenerator, p: usize, z: c64) -> Result<f64> {
    let (lo, hi) = linalg::extreme_singular_values(&pencil_block(gen, p, z))?;
    Ok(if hi > 0.0 { lo / hi } else { 0.0 })
}

struct BlockSpectrum {
    values: Vec<c64>,
    residuals: Vec<f64>,
}

/// Replaces each cluster of eigenvalues whose eigenvectors are numerically
/// parallel (a perturbed Jordan block) by the cluster mean.
fn merge_defective_clusters(values: &mut [c64], vecs: &Mat<c64>, radius: f64) {
    let n = values.len();
    let col = |j: usize| -> Vec<c64> { (0..vecs.nrows()).map(|i| vecs[(i, j)]).collect() };
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let ui = col(i);
        let ni = linalg::norm_sq(&ui).sqrt();
        let r = radius * (1.0 + values[i].norm());
        let mut group = vec![i];
        for j in i + 1..n {
            if done[j] || (values[j] - values[i]).norm() > r {
                continue;
            }
            let uj = col(j);
            let cos = linalg::dot(&ui, &uj).norm() / (ni * linalg::norm_sq(&uj).sqrt());
            if cos >= 1.0 - 1e-6 {
                group.push(j);
            }
        }
        if group.len() > 1 {
            let mean = group.iter().map(|&j| values[j]).sum::<c64>() / group.len() as f64;
            for &j in &group {
                values[j] = mean;
                done[j] = true;
            }
        }
    }
}

fn block_spectrum(gen: &DampedGenerator, p: usize, opts: &SpectrumOptions) -> Result<BlockSpectrum> {
    let exact = opts.exact_residuals;
    let g = gen.matrix().block(p);
    let (mut values, vecs) = linalg::eigen(g)?;
    merge_defective_clusters(&mut values, &vecs, opts.cluster_radius);
    let s = gen.stiffness_block(p);
    let d = gen.damping_block(p);
    let m = s.nrows();
    let (s_norm, d_norm) = if exact {
        (0.0, 0.0)
    } else {
        (hermitian_norm(s)?, hermitian_norm(d)?)
    };
    let mut residuals = Vec::with_capacity(values.len());
    for (i, &z) in values.iter().enumerate() {
        if exact {
            residuals.push(pencil_relative_sigma_min(gen, p, z)?);
            continue;
        }
        let u: Vec<c64> = (0..m).map(|r| vecs[(r, i)]).collect();
        let un = linalg::norm_sq(&u).sqrt();
        let pu = linalg::matvec(&pencil_block(gen, p, z), &u);
        let scale = match gen.kind() {
            ModelKind::Schrodinger => s_norm + d_norm + z.norm(),
            _ => s_norm + z.norm_sqr() + z.norm() * d_norm,
        };
        let denom = scale * un;
        residuals.push(if denom > 0.0 {
            linalg::norm_sq(&pu).sqrt() / denom
        } else {
            0.0
        });
    }
    Ok(BlockSpectrum { values, residuals })
}

/// All eigenvalues of the generator by dense eigensolves of its blocks, each
/// validated by a pencil residual and classified against the localization
/// region (`Re z ∈ [−‖b‖, 0]`, and `Re z ≥ −½‖b‖` for nonreal `z`, for wave
/// and plate; `Re z ∈ [−‖b‖, 0]`, `Im z ≥ 0` for Schrödinger).
pub fn spectrum(gen: &DampedGenerator, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let dim = gen.phase_dim();
    if dim > opts.dim_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: opts.dim_cap,
        });
    }
    let per_block: Vec<Result<BlockSpectrum>> = (0..gen.num_blocks())
        .into_par_iter()
        .map(|p| block_spectrum(gen, p, opts))
        .collect();

    let mut entries: Vec<(c64, f64, usize)> = Vec::with_capacity(dim);
    for (p, bs) in per_block.into_iter().enumerate() {
        let bs = bs?;
        for (z, r) in bs.values.into_iter().zip(bs.residuals) {
            entries.push((z, r, p));
        }
    }
    entries.sort_by(|a, b| {
        a.0.im
            .total_cmp(&b.0.im)
            .then(a.0.re.total_cmp(&b.0.re))
            .then(a.2.cmp(&b.2))
    });

    let bnorm = gen.damping_norm();
    let radius = |z: c64| opts.cluster_radius * (1.0 + z.norm());
    let eigenvalues: Vec<c64> = entries.iter().map(|e| e.0).collect();
    let residuals: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let blocks: Vec<usize> = entries.iter().map(|e| e.2).collect();
    let modes = blocks.iter().map(|&p| gen.block_modes()[p]).collect();

    let flags = eigenvalues
        .iter()
        .zip(&residuals)
        .map(|(&z, &r)| {
            if !(r <= opts.residual_tol) {
                LocalizationFlag::Unresolved
            } else {
                let nonreal = z.im.abs() > radius(z);
                classify(region_margin(gen.kind(), z, bnorm, nonreal), opts.localization_tol)
            }
        })
        .collect();

    let multiplicities = cluster_multiplicities(&eigenvalues, opts.cluster_radius);
    let conjugate_pairs = if gen.kind().is_second_order() {
        pair_conjugates(&eigenvalues, &blocks, opts.cluster_radius)
    } else {
        vec![None; eigenvalues.len()]
    };

    Ok(SpectrumReport {
        kind: gen.kind(),
        eigenvalues,
        residuals,
        flags,
        conjugate_pairs,
        multiplicities,
        blocks,
        modes,
        damping_norm: bnorm,
        options: *opts,
    })
}

/// Number of eigenvalues within `radius·(1+|z|)` of each eigenvalue. The
/// input is sorted by imaginary part, which bounds the scan.
fn cluster_multiplicities(z: &[c64], radius: f64) -> Vec<usize> {
    let n = z.len();
    let mut out = vec![0usize; n];
    for i in 0..n {
        let r = radius * (1.0 + z[i].norm());
        let mut count = 0;
        let mut j = i;
        while j > 0 && z[i].im - z[j - 1].im <= r {
            j -= 1;
        }
        while j < n && z[j].im - z[i].im <= r {
            if (z[j] - z[i]).norm() <= r {
                count += 1;
            }
            j += 1;
        }
        out[i] = count;
    }
    out
}

/// Greedy nearest-partner matching of `z̄_i` within each generator block.
fn pair_conjugates(z: &[c64], blocks: &[usize], radius: f64) -> Vec<Option<usize>> {
    let n = z.len();
    let mut out = vec![None; n];
    let mut by_block: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &b) in blocks.iter().enumerate() {
        by_block.entry(b).or_default().push(i);
    }
    for idx in by_block.values() {
        for &i in idx {
            if out[i].is_some() {
                continue;
            }
            let target = z[i].conj();
            let r = radius * (1.0 + z[i].norm());
            if z[i].im.abs() <= r {
                out[i] = Some(i);
                continue;
            }
            let best = idx
                .iter()
                .copied()
                .filter(|&j| j != i && out[j].is_none())
                .map(|j| (j, (z[j] - target).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, dist)) = best {
                if dist <= (1e3 * r).max(1e-6 * (1.0 + z[i].norm())) {
                    out[i] = Some(j);
                    out[j] = Some(i);
                }
            }
        }
    }
    out
}
