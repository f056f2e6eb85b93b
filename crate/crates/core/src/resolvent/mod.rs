//! Resolvent norms along `iℝ` in the energy metric, growth-exponent fits,
//! tunneling quasimodes and exponentially thin spectrum-free regions.

mod gap;
mod quasimode;

pub use gap::{
    branches_near_axis, fit_gap_region, spectral_gap_check, GapCheck, GapFit, GapRegion,
};
pub use quasimode::{
    ground_energies, quasimode, quasimode_defect, Quasimode, QuasimodeDefect,
};

use std::io::Write;

use faer::Mat;
use rayon::prelude::*;

use crate::c64;
use crate::cli::fmt_f64;
use crate::error::{invalid, Result};
use crate::generators::{DampedGenerator, Metric, ModelKind};
use crate::linalg;
use crate::stats::fit_line;

/// `‖(is − 𝒢)⁻¹‖` in the energy metric.
pub fn resolvent_norm(gen: &DampedGenerator, s: f64) -> Result<f64> {
    resolvent_norm_in(gen, s, Metric::Energy)
}

/// `‖(is − 𝒢)⁻¹‖` in the given metric, computed as `1/σ_min` of
/// `R (is − 𝒢) R⁻¹` with `W = RᴴR` blockwise. Returns `+∞` when `is` is an
/// eigenvalue to working precision.
pub fn resolvent_norm_in(gen: &DampedGenerator, s: f64, metric: Metric) -> Result<f64> {
    let is = c64::new(0.0, s);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for p in 0..gen.num_blocks() {
        let g = gen.matrix().block(p);
        let shifted = Mat::from_fn(g.nrows(), g.ncols(), |i, j| {
            let d = if i == j { is } else { linalg::czero() };
            d - g[(i, j)]
        });
        let t = gen.similarity(p, &shifted, metric)?;
        let (l, h) = linalg::extreme_singular_values(&t)?;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    if !(lo > 1e-14 * hi) {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / lo)
}

/// Least-squares fit `log‖(is−𝒢)⁻¹‖ ≈ κ̂·|s|^k + ĉ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub kappa_hat: f64,
    pub c_hat: f64,
    pub r2: f64,
    pub k: f64,
}

impl ExponentFit {
    pub fn write_summary(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "kappa_hat = {}", fmt_f64(self.kappa_hat))?;
        writeln!(out, "c_hat = {}", fmt_f64(self.c_hat))?;
        writeln!(out, "r2 = {}", fmt_f64(self.r2))?;
        writeln!(out, "k = {}", fmt_f64(self.k))?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ResolventSweep {
    pub kind: ModelKind,
    pub metric: Metric,
    pub s_values: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: Option<ExponentFit>,
}

impl ResolventSweep {
    /// CSV with header `s,norm`; eigenvalue hits are written as `inf`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "s,norm")?;
        for (s, n) in self.s_values.iter().zip(&self.norms) {
            writeln!(out, "{},{}", fmt_f64(*s), fmt_f64(*n))?;
        }
        Ok(())
    }
}

/// Resolvent norms over a strictly increasing grid of `s`.
pub fn resolvent_sweep(gen: &DampedGenerator, s_grid: &[f64], metric: Metric) -> Result<ResolventSweep> {
    if s_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("sweep grid must be strictly increasing"));
    }
    let norms: Vec<Result<f64>> = s_grid
        .par_iter()
        .map(|&s| resolvent_norm_in(gen, s, metric))
        .collect();
    Ok(ResolventSweep {
        kind: gen.kind(),
        metric,
        s_values: s_grid.to_vec(),
        norms: norms.into_iter().collect::<Result<_>>()?,
        fit: None,
    })
}

pub fn fit_exponent(sweep: &ResolventSweep, k: f64) -> Result<ExponentFit> {
    let xs: Vec<f64> = sweep.s_values.iter().map(|s| s.abs().powf(k)).collect();
    let ys: Vec<f64> = sweep.norms.iter().map(|n| n.ln()).collect();
    let f = fit_line(&xs, &ys, 3)?;
    Ok(ExponentFit {
        kappa_hat: f.slope,
        c_hat: f.intercept,
        r2: f.r2,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{damped_wave_generator, schrodinger_generator};
    use crate::operators::{
        assemble_damping, assemble_grushin_full, DampingProfile, FourierModeSet, Grid1D,
        HermitianOperator,
    };

    #[test]
    fn scalar_schrodinger_resolvent() {
        let g = schrodinger_generator(&HermitianOperator::scalar(1.0), &HermitianOperator::scalar(1.0))
            .unwrap();
        for s in [-2.0, 0.0, 0.5, 1.0, 3.0] {
            let expected = 1.0 / (1.0 + (s - 1.0f64).powi(2)).sqrt();
            let got = resolvent_norm(&g, s).unwrap();
            assert!((got - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn undamped_wave_is_normal_in_the_seminorm() {
        let grid = Grid1D::new(10).unwrap();
        let modes = FourierModeSet::new(1);
        let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
        let b = assemble_damping(&DampingProfile::none(), &grid, &modes).unwrap();
        let g = damped_wave_generator(&a, &b).unwrap();
        let roots: Vec<f64> = a.eigenvalues().unwrap().iter().map(|l| l.sqrt()).collect();
        for s in [0.3, 2.0, 7.7, 15.1] {
            let dist = roots
                .iter()
                .flat_map(|r| [(s - r).abs(), (s + r).abs()])
                .fold(f64::INFINITY, f64::min);
            let got = resolvent_norm_in(&g, s, Metric::Seminorm).unwrap();
            assert!((got * dist - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn synthetic_exponent_fits() {
        let s: Vec<f64> = (1..8).map(|i| i as f64 * 0.5).collect();
        let sweep = |f: &dyn Fn(f64) -> f64| ResolventSweep {
            kind: ModelKind::Wave,
            metric: Metric::Energy,
            s_values: s.clone(),
            norms: s.iter().map(|&x| f(x)).collect(),
            fit: None,
        };
        let fit = fit_exponent(&sweep(&|x| (2.0 * x * x).exp()), 2.0).unwrap();
        assert!((fit.kappa_hat - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let fit = fit_exponent(&sweep(&|x| (3.0 * x).exp()), 1.0).unwrap();
        assert!((fit.kappa_hat - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_grid_must_increase() {
        let g = schrodinger_generator(&HermitianOperator::scalar(1.0), &HermitianOperator::scalar(1.0))
            .unwrap();
        assert!(resolvent_sweep(&g, &[1.0, 0.5], Metric::Energy).is_err());
        let sw = resolvent_sweep(&g, &[0.0, 1.0], Metric::Energy).unwrap();
        assert!((sw.norms[1] - 1.0).abs() < 1e-14);
    }
}
