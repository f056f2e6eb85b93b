use std::f64::consts::PI;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::State;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::operators::HermitianOperator;
use crate::stats::fit_line;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Members `(u₀, u₁)` with entries uniform in `[-1, 1]`, from a fixed seed.
pub fn random_ensemble(dim: usize, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut draw = || {
                (0..dim)
                    .map(|_| linalg::creal(rng.random_range(-1.0..=1.0)))
                    .collect::<Vec<_>>()
            };
            let u = draw();
            let v = draw();
            State::second_order(u, v)
        })
        .collect()
}

/// `(φ, 0)` with `φ` the ground state of the block of mode `n` (zero in every
/// other block).
pub fn mode_ground_state(a: &HermitianOperator, n: i64) -> Result<State> {
    let p = a
        .matrix()
        .modes()
        .iter()
        .position(|&m| m == Some(n))
        .ok_or_else(|| invalid(format!("mode {n} is not a block of the operator")))?;
    let offsets = a.matrix().offsets();
    let (_, vecs) = linalg::hermitian_eigen(a.matrix().block(p))?;
    let mut u = vec![linalg::czero(); a.dim()];
    for i in 0..offsets[p + 1] - offsets[p] {
        u[offsets[p] + i] = vecs[(i, 0)];
    }
    Ok(State::second_order(u, vec![linalg::czero(); a.dim()]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostFit {
    pub c_hat: f64,
    pub kappa_hat: f64,
    pub r2: f64,
    pub k: f64,
}

#[derive(Clone, Debug)]
pub struct ObservabilityProbe {
    /// `(μ, G_needed(μ))`
    pub g_needed: Vec<(f64, f64)>,
    /// Per member: `‖(u₀,u₁)‖_{H×H⁻¹}`, `‖(u₀,u₁)‖_{H₁×H}`, `‖B*u‖_{L²(0,T)}`.
    pub norms: Vec<(f64, f64, f64)>,
    /// Members with vanishing observation (not observable at this level).
    pub excluded: Vec<usize>,
    /// Fit of `log G_needed` against `μ^k`; absent when fewer than three
    /// positive values exist.
    pub fit: Option<CostFit>,
}

/// Smallest `G(μ)` compatible with the approximate observability inequality
/// on a data ensemble, for the free wave observed through `b` on `(0, T)`.
pub fn observability_cost_probe(
    a: &HermitianOperator,
    b: &HermitianOperator,
    t_obs: f64,
    ensemble: &[State],
    mu_grid: &[f64],
    k: f64,
) -> Result<ObservabilityProbe> {
    if !(t_obs > 0.0) {
        return Err(invalid(format!("observation time must be > 0, got {t_obs}")));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !(b.norm_2()? > 0.0) {
        return Err(invalid("observation region is empty"));
    }
    if mu_grid.iter().any(|m| !(*m > 0.0)) {
        return Err(invalid("mu grid must be positive"));
    }
    let n = a.dim();
    let h = a.quad_weight();
    let (lambda, v) = linalg::hermitian_eigen(&a.matrix().to_dense())?;
    let lambda: Vec<f64> = lambda.into_iter().map(|l| l.max(0.0)).collect();
    let dt = v.adjoint() * b.matrix().to_dense() * &v;
    let omega_max = lambda.iter().copied().fold(0.0, f64::max).sqrt();

    let (gx, gw) = gauss_legendre(8);
    let panels = ((2.0 * omega_max * t_obs / PI).ceil() as usize).max(8);
    let width = t_obs / panels as f64;
    let mut nodes = Vec::with_capacity(panels * gx.len());
    for p in 0..panels {
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push((width * (p as f64 + 0.5 * (x + 1.0)), 0.5 * width * w));
        }
    }

    let per_member: Vec<Result<(f64, f64, f64)>> = ensemble
        .par_iter()
        .map(|s| {
            let u1 = s
                .v
                .as_ref()
                .ok_or_else(|| invalid("ensemble members need (u0, u1)"))?;
            if s.u.len() != n || u1.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.u.len(),
                });
            }
            let ca = v.adjoint() * Mat::from_fn(n, 1, |i, _| s.u[i]);
            let cb = v.adjoint() * Mat::from_fn(n, 1, |i, _| u1[i]);
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for j in 0..n {
                let (a2, b2) = (ca[(j, 0)].norm_sqr(), cb[(j, 0)].norm_sqr());
                lhs += a2 + b2 / (1.0 + lambda[j]);
                rhs += (1.0 + lambda[j]) * a2 + b2;
            }
            let mut obs = 0.0;
            let mut c = vec![linalg::czero(); n];
            for &(t, w) in &nodes {
                for j in 0..n {
                    let om = lambda[j].sqrt();
                    let (cs, sn) = if om > 0.0 {
                        ((om * t).cos(), (om * t).sin() / om)
                    } else {
                        (1.0, t)
                    };
                    c[j] = ca[(j, 0)] * cs + cb[(j, 0)] * sn;
                }
                obs += w * linalg::quad_form(&dt, &c).re;
            }
            Ok(((h * lhs).sqrt(), (h * rhs).sqrt(), (h * obs.max(0.0)).sqrt()))
        })
        .collect();
    let norms: Vec<(f64, f64, f64)> = per_member.into_iter().collect::<Result<_>>()?;

    let scale = norms.iter().map(|m| m.0).fold(0.0, f64::max);
    let excluded: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, m)| !(m.2 > 1e-14 * scale))
        .map(|(i, _)| i)
        .collect();
    let g_needed: Vec<(f64, f64)> = mu_grid
        .iter()
        .map(|&mu| {
            let g = norms
                .iter()
                .enumerate()
                .filter(|(i, _)| !excluded.contains(i))
                .map(|(_, m)| (m.0 - m.1 / mu).max(0.0) / m.2)
                .fold(0.0, f64::max);
            (mu, g)
        })
        .collect();
    let pts: Vec<(f64, f64)> = g_needed.iter().filter(|g| g.1 > 0.0).copied().collect();
    let fit = if pts.len() >= 3 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0.powf(k)).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        fit_line(&xs, &ys, 3).ok().map(|f| CostFit {
            c_hat: f.intercept.exp(),
            kappa_hat: f.slope,
            r2: f.r2,
            k,
        })
    } else {
        None
    };
    Ok(ObservabilityProbe {
        g_needed,
        norms,
        excluded,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((q - 2.0 / 15.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn ensemble_is_deterministic() {
        let a = random_ensemble(5, 3, 42);
        let b = random_ensemble(5, 3, 42);
        assert_eq!(a, b);
        assert_ne!(a, random_ensemble(5, 3, 43));
    }
}
