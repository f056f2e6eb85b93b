use std::io::Write;

use super::spectral::SpectralPropagator;
use super::{evolve, EvolveOptions, Schedule, State, Trajectory};
use crate::c64;
use crate::cli::fmt_f64;
use crate::error::{invalid, Result};
use crate::generators::{DampedGenerator, Metric, ModelKind};
use crate::linalg;

/// Normalized decay products `E(t)^{1/2}·log(t+2)^{γ}/‖𝒜^jU₀‖_ℋ` with
/// `γ = j/k` (wave) or `2j/k` (Schrödinger, plate).
#[derive(Clone, Debug)]
pub struct DecayMeasurement {
    pub j: u32,
    pub k: f64,
    pub log_exponent: f64,
    /// `‖𝒜^jU₀‖` in the energy norm.
    pub power_norm: f64,
    /// `(t, product)` for every positive sample time.
    pub samples: Vec<(f64, f64)>,
    pub trajectory: Trajectory,
    /// No damping: the products grow and the run is a control case.
    pub undamped: bool,
    /// `1/|Re z|` for the nonzero eigenvalue closest to `iℝ`; beyond this
    /// time the truncated system decays exponentially.
    pub t_takeover: f64,
    /// Sample window before the exponential takeover.
    pub window: (f64, f64),
}

impl DecayMeasurement {
    /// Largest product over samples with `t ∈ [t_lo, t_hi]`.
    pub fn sup_over(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.samples
            .iter()
            .filter(|(t, _)| *t >= t_lo && *t <= t_hi)
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `t,normalized_product`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "t,normalized_product")?;
        for (t, p) in &self.samples {
            writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*p))?;
        }
        Ok(())
    }
}

/// `‖𝒜^j x‖` in the energy norm, by repeated application.
pub fn generator_power_norm(gen: &DampedGenerator, state: &State, j: u32) -> Result<f64> {
    let mut x = state.to_block(gen)?;
    for _ in 0..j {
        x = gen.apply(&x);
    }
    Ok(gen.norm(&x, Metric::Energy))
}

/// Sum of the ground states of the stiffness blocks (zero velocity),
/// normalized in the energy norm.
pub fn default_initial_state(gen: &DampedGenerator) -> Result<State> {
    let a = gen.stiffness();
    let mut u = Vec::with_capacity(a.dim());
    for block in a.matrix().blocks() {
        let (_, vecs) = linalg::hermitian_eigen(block)?;
        let col: Vec<c64> = (0..block.nrows()).map(|i| vecs[(i, 0)]).collect();
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(linalg::creal(1.0));
        let phase = pivot.conj() / pivot.norm();
        u.extend(col.iter().map(|z| linalg::creal((z * phase).re)));
    }
    let mut state = if gen.kind().is_second_order() {
        State::second_order(u, vec![linalg::czero(); a.dim()])
    } else {
        State::first_order(u)
    };
    let norm = gen.norm(&state.to_block(gen)?, Metric::Energy);
    if !(norm > 0.0) {
        return Err(invalid("initial state has zero norm"));
    }
    state.u.iter_mut().for_each(|z| *z /= norm);
    Ok(state)
}

pub fn measure_decay(
    gen: &DampedGenerator,
    u0: &State,
    j: u32,
    k: f64,
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<DecayMeasurement> {
    if j < 1 || !(k >= 1.0) {
        return Err(invalid("decay measurement needs j >= 1 and k >= 1"));
    }
    let x0 = u0.to_block(gen)?;
    let undamped = !(gen.damping_norm() > 0.0);
    if gen.kind().is_second_order() && !undamped {
        let p = gen.project_kernel(&x0)?;
        let rest: Vec<c64> = x0.iter().zip(&p).map(|(a, b)| a - b).collect();
        if linalg::norm_sq(&rest).sqrt() <= 1e-12 * linalg::norm_sq(&x0).sqrt() {
            return Err(invalid("initial data lies in the kernel of the generator"));
        }
    }
    let power_norm = generator_power_norm(gen, u0, j)?;
    if !(power_norm > 0.0) {
        return Err(invalid("initial data is annihilated by the generator power"));
    }
    let log_exponent = match gen.kind() {
        ModelKind::Wave => j as f64 / k,
        ModelKind::Schrodinger | ModelKind::Plate => 2.0 * j as f64 / k,
    };
    let trajectory = evolve(gen, u0, schedule, opts)?;

    let slowest = match SpectralPropagator::new(gen, f64::INFINITY)? {
        Some(p) => p
            .eigenvalues()
            .filter(|z| z.norm() > 1e-8)
            .map(|z| z.re.abs())
            .fold(f64::INFINITY, f64::min),
        None => f64::INFINITY,
    };
    let t_takeover = if undamped || !(slowest > 0.0) {
        f64::INFINITY
    } else {
        1.0 / slowest
    };
    let samples: Vec<(f64, f64)> = trajectory
        .times
        .iter()
        .zip(&trajectory.energies)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &e)| {
            (
                t,
                e.max(0.0).sqrt() * (t + 2.0).ln().powf(log_exponent) / power_norm,
            )
        })
        .collect();
    let t_first = samples.first().map_or(0.0, |s| s.0);
    let window = (t_first, schedule.t_end().min(t_takeover));
    Ok(DecayMeasurement {
        j,
        k,
        log_exponent,
        power_norm,
        samples,
        trajectory,
        undamped,
        t_takeover,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::damped_wave_generator;
    use crate::operators::{assemble_flat_laplacian, FourierModeSet, HermitianOperator};

    #[test]
    fn kernel_data_is_rejected() {
        let a = assemble_flat_laplacian(None, &FourierModeSet::new(1)).unwrap();
        let b = HermitianOperator::scaled_identity_like(&a, 1.0);
        let g = damped_wave_generator(&a, &b).unwrap();
        let mut u = vec![linalg::czero(); 3];
        u[1] = linalg::creal(1.0);
        let s = State::second_order(u, vec![linalg::czero(); 3]);
        let sched = Schedule::linear(1.0, 2).unwrap();
        assert!(measure_decay(&g, &s, 1, 1.0, &sched, &EvolveOptions::default()).is_err());
    }

    #[test]
    fn undamped_products_grow() {
        let g = damped_wave_generator(&HermitianOperator::scalar(2.0), &HermitianOperator::scalar(0.0))
            .unwrap();
        let s = State::from_real(&[1.0], Some(&[0.0]));
        let sched = Schedule::geometric(1.0, 1e4, 9).unwrap();
        let m = measure_decay(&g, &s, 1, 2.0, &sched, &EvolveOptions::default()).unwrap();
        assert!(m.undamped);
        assert!(m.t_takeover.is_infinite());
        let p: Vec<f64> = m.samples.iter().map(|s| s.1).collect();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn scalar_damped_products_stay_bounded() {
        let g = damped_wave_generator(&HermitianOperator::scalar(2.0), &HermitianOperator::scalar(2.0))
            .unwrap();
        let s = State::from_real(&[1.0], Some(&[0.0]));
        let sched = Schedule::geometric(0.1, 100.0, 30).unwrap();
        let m = measure_decay(&g, &s, 1, 2.0, &sched, &EvolveOptions::default()).unwrap();
        assert!(m.sup_over(0.0, 100.0) < 1.0);
        assert!((m.t_takeover - 1.0).abs() < 1e-12);
    }
}
