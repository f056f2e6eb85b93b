//! Time evolution of the damped systems: implicit-midpoint stepping and
//! spectral propagation, energy and dissipation bookkeeping, decay
//! measurements and an empirical observability-cost probe.

mod decay;
mod observability;
mod spectral;
mod stepping;

pub use decay::{default_initial_state, generator_power_norm, measure_decay, DecayMeasurement};
pub use observability::{
    gauss_legendre, mode_ground_state, observability_cost_probe, random_ensemble, CostFit,
    ObservabilityProbe,
};

use std::io::Write;

use crate::c64;
use crate::cli::fmt_f64;
use crate::error::{invalid, Error, Result};
use crate::generators::{DampedGenerator, Metric, ModelKind};
use crate::linalg;

/// Coefficient vectors in (mode, node) order; `v` is `∂ₜu` for wave and plate
/// states and absent for Schrödinger.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<c64>,
    pub v: Option<Vec<c64>>,
    pub t: f64,
}

impl State {
    pub fn second_order(u: Vec<c64>, v: Vec<c64>) -> Self {
        Self { u, v: Some(v), t: 0.0 }
    }

    pub fn first_order(u: Vec<c64>) -> Self {
        Self { u, v: None, t: 0.0 }
    }

    pub fn from_real(u: &[f64], v: Option<&[f64]>) -> Self {
        let c = |x: &[f64]| x.iter().map(|&a| linalg::creal(a)).collect::<Vec<_>>();
        Self {
            u: c(u),
            v: v.map(c),
            t: 0.0,
        }
    }

    fn check(&self, gen: &DampedGenerator) -> Result<()> {
        let finite = |x: &[c64]| x.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&self.u) || !self.v.as_deref().is_none_or(finite) {
            return Err(invalid("state has non-finite entries"));
        }
        if self.u.len() != gen.config_dim() {
            return Err(Error::DimensionMismatch {
                expected: gen.config_dim(),
                found: self.u.len(),
            });
        }
        if gen.kind().is_second_order() != self.v.is_some() {
            return Err(invalid(format!(
                "{} states {} a velocity component",
                gen.kind().name(),
                if gen.kind().is_second_order() { "need" } else { "take no" }
            )));
        }
        Ok(())
    }

    pub(crate) fn to_block(&self, gen: &DampedGenerator) -> Result<Vec<c64>> {
        self.check(gen)?;
        gen.to_block_layout(&self.u, self.v.as_deref())
    }

    pub(crate) fn from_block(gen: &DampedGenerator, x: &[c64], t: f64) -> Self {
        let (u, v) = gen.from_block_layout(x);
        Self { u, v, t }
    }
}

/// Increasing sample times; the initial time 0 is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    times: Vec<f64>,
}

impl Schedule {
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("schedule needs at least one time"));
        }
        if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("schedule times must be positive and strictly increasing"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("schedule times must be finite"));
        }
        Ok(Self { times })
    }

    /// `n` equal intervals of `[0, t_end]`.
    pub fn linear(t_end: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("linear schedule needs n >= 1"));
        }
        Self::from_times((1..=n).map(|i| t_end * i as f64 / n as f64).collect())
    }

    /// `n >= 2` geometrically spaced times from `t_first` to `t_end`.
    pub fn geometric(t_first: f64, t_end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t_first > 0.0 && t_end > t_first) {
            return Err(invalid("geometric schedule needs n >= 2 and 0 < t_first < t_end"));
        }
        let r = (t_end / t_first).ln();
        let mut times: Vec<f64> = (0..n)
            .map(|i| t_first * (r * i as f64 / (n - 1) as f64).exp())
            .collect();
        times[n - 1] = t_end;
        Self::from_times(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty schedule")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Spectral propagation when the eigenbasis is well conditioned,
    /// stepping otherwise.
    Auto,
    Stepping,
    Spectral,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub method: Method,
    /// Initial step size for stepping.
    pub dt: f64,
    /// Target dissipation residual for step refinement.
    pub residual_tol: f64,
    /// Maximal number of step halvings.
    pub max_refinements: usize,
    /// Largest eigenvector-matrix condition number accepted for spectral
    /// propagation.
    pub cond_limit: f64,
    pub store_states: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            dt: 0.05,
            residual_tol: 1e-6,
            max_refinements: 12,
            cond_limit: 1e8,
            store_states: false,
        }
    }
}

/// Sampled energies and cumulative damping integral of one evolution; index 0
/// is `t = 0`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: ModelKind,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// `∫₀ᵗ ⟨b ∂ₜu, ∂ₜu⟩` (wave, plate) or `∫₀ᵗ ⟨b u, u⟩` (Schrödinger).
    pub damping_integral: Vec<f64>,
    pub states: Option<Vec<State>>,
    /// Method actually used.
    pub method: Method,
    /// Accepted step size (stepping only).
    pub dt: Option<f64>,
    /// `(Δt, residual)` for every stepping attempt.
    pub refinements: Vec<(f64, f64)>,
    /// Whether the residual target was met.
    pub converged: bool,
}

impl Trajectory {
    pub fn dissipation_residual(&self) -> f64 {
        dissipation_residual(self)
    }

    /// CSV with header `t,energy,damping_integral`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "t,energy,damping_integral")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.times[i]),
                fmt_f64(self.energies[i]),
                fmt_f64(self.damping_integral[i])
            )?;
        }
        Ok(())
    }
}

/// `E = ½(⟨Su,u⟩ + ‖v‖²)` (`S = A`, resp. `A²` for plates) or `½‖u‖²`.
pub fn energy(gen: &DampedGenerator, state: &State) -> Result<f64> {
    Ok(energy_block(gen, &state.to_block(gen)?))
}

pub(crate) fn energy_block(gen: &DampedGenerator, x: &[c64]) -> f64 {
    0.5 * gen.quad_form(x, Metric::Seminorm)
}

/// Instantaneous dissipation `⟨b w, w⟩` with `w = v` (second order) or `u`.
pub(crate) fn dissipation_rate(gen: &DampedGenerator, x: &[c64]) -> f64 {
    let offsets = gen.matrix().offsets();
    let second = gen.kind().is_second_order();
    let mut acc = 0.0;
    for p in 0..gen.num_blocks() {
        let xp = &x[offsets[p]..offsets[p + 1]];
        let m = gen.partition()[p];
        let w = if second { &xp[m..] } else { xp };
        acc += linalg::quad_form(gen.damping_block(p), w).re;
    }
    acc * gen.quad_weight()
}

/// `|E(T) − E(0) + ∫₀ᵀ⟨b w, w⟩| / E(0)`
pub fn dissipation_residual(traj: &Trajectory) -> f64 {
    let n = traj.times.len();
    if n == 0 {
        return 0.0;
    }
    let e0 = traj.energies[0];
    let defect = (traj.energies[n - 1] - e0 + traj.damping_integral[n - 1]).abs();
    if e0 > 0.0 {
        defect / e0
    } else {
        defect
    }
}

/// Evolves `u0` over the schedule.
pub fn evolve(
    gen: &DampedGenerator,
    u0: &State,
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let x0 = u0.to_block(gen)?;
    match opts.method {
        Method::Stepping => stepping::evolve_stepping(gen, &x0, schedule, opts),
        Method::Spectral | Method::Auto => {
            match spectral::SpectralPropagator::new(gen, opts.cond_limit)? {
                Some(prop) => Ok(prop.trajectory(gen, &x0, schedule, opts.store_states)),
                None => {
                    log::warn!(
                        "eigenvector basis condition number exceeds {:e}; falling back to stepping",
                        opts.cond_limit
                    );
                    stepping::evolve_stepping(gen, &x0, schedule, opts)
                }
            }
        }
    }
}
