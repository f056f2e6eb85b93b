use std::collections::HashMap;

use faer::{Mat, Scale};

use super::{
    dissipation_rate, energy_block, EvolveOptions, Method, Schedule, State, Trajectory,
};
use crate::c64;
use crate::error::{invalid, Result};
use crate::generators::DampedGenerator;
use crate::linalg;

/// Blockwise implicit-midpoint propagators `(I − τ/2·G)⁻¹(I + τ/2·G)`, cached
/// by step size.
struct Propagators<'a> {
    gen: &'a DampedGenerator,
    cache: HashMap<u64, Vec<Mat<c64>>>,
}

impl<'a> Propagators<'a> {
    fn new(gen: &'a DampedGenerator) -> Self {
        Self {
            gen,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, tau: f64) -> &[Mat<c64>] {
        let gen = self.gen;
        self.cache.entry(tau.to_bits()).or_insert_with(|| {
            let half = linalg::creal(0.5 * tau);
            gen.matrix()
                .blocks()
                .iter()
                .map(|g| {
                    let n = g.nrows();
                    let id = linalg::identity(n);
                    let lhs = &id - g * Scale(half);
                    let rhs = &id + g * Scale(half);
                    linalg::solve(&lhs, &rhs)
                })
                .collect()
        })
    }
}

struct Run {
    energies: Vec<f64>,
    integral: Vec<f64>,
    states: Option<Vec<State>>,
}

fn run(
    gen: &DampedGenerator,
    props: &mut Propagators<'_>,
    x0: &[c64],
    schedule: &Schedule,
    dt: f64,
    store: bool,
) -> Run {
    let offsets = gen.matrix().offsets();
    let mut x = x0.to_vec();
    let mut energies = vec![energy_block(gen, &x)];
    let mut integral = vec![0.0];
    let mut states = store.then(|| vec![State::from_block(gen, &x, 0.0)]);
    let mut acc = 0.0;
    let mut rate = dissipation_rate(gen, &x);
    let mut t = 0.0;
    for &target in schedule.times() {
        let gap = target - t;
        let steps = ((gap / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let tau = gap / steps as f64;
        let phi = props.get(tau);
        for _ in 0..steps {
            let mut next = Vec::with_capacity(x.len());
            for (p, ph) in phi.iter().enumerate() {
                next.extend(linalg::matvec(ph, &x[offsets[p]..offsets[p + 1]]));
            }
            x = next;
            let new_rate = dissipation_rate(gen, &x);
            acc += 0.5 * tau * (rate + new_rate);
            rate = new_rate;
        }
        t = target;
        energies.push(energy_block(gen, &x));
        integral.push(acc);
        if let Some(s) = states.as_mut() {
            s.push(State::from_block(gen, &x, t));
        }
    }
    Run {
        energies,
        integral,
        states,
    }
}

/// Fixed-step implicit midpoint, halving `Δt` until the dissipation residual
/// meets the tolerance.
pub(super) fn evolve_stepping(
    gen: &DampedGenerator,
    x0: &[c64],
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(opts.dt > 0.0) {
        return Err(invalid(format!("step size must be > 0, got {}", opts.dt)));
    }
    let mut props = Propagators::new(gen);
    let mut dt = opts.dt;
    let mut refinements = Vec::new();
    let mut times = vec![0.0];
    times.extend_from_slice(schedule.times());
    loop {
        let r = run(gen, &mut props, x0, schedule, dt, opts.store_states);
        let mut traj = Trajectory {
            kind: gen.kind(),
            times: times.clone(),
            energies: r.energies,
            damping_integral: r.integral,
            states: r.states,
            method: Method::Stepping,
            dt: Some(dt),
            refinements: Vec::new(),
            converged: false,
        };
        let res = traj.dissipation_residual();
        refinements.push((dt, res));
        let done = res <= opts.residual_tol;
        if done || refinements.len() > opts.max_refinements {
            if !done {
                log::warn!(
                    "dissipation residual {res:e} above {:e} after {} refinements",
                    opts.residual_tol,
                    opts.max_refinements
                );
            }
            traj.converged = done;
            traj.refinements = refinements;
            return Ok(traj);
        }
        props.cache.clear();
        dt *= 0.5;
    }
}
