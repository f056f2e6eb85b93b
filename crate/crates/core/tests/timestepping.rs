use hypolab::c64;
use hypolab::generators::{damped_wave_generator, schrodinger_generator, DampedGenerator};
use hypolab::operators::{
    assemble_damping, assemble_flat_laplacian, assemble_grushin_full, DampingProfile,
    FourierModeSet, Grid1D, HermitianOperator,
};
use hypolab::timestepping::{
    default_initial_state, energy, evolve, gauss_legendre, mode_ground_state,
    observability_cost_probe, random_ensemble, EvolveOptions, Method, Schedule, State,
};
use proptest::prelude::*;

fn damped(n: usize, m: usize, values: &[f64], schrodinger: bool) -> DampedGenerator {
    let grid = Grid1D::new(n).unwrap();
    let modes = FourierModeSet::new(m);
    let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
    let profile = DampingProfile::x1_from_fn(&grid, |x| values[((x + 1.0) * 2.0) as usize % values.len()]);
    let b = assemble_damping(&profile, &grid, &modes).unwrap();
    if schrodinger {
        schrodinger_generator(&a, &b).unwrap()
    } else {
        damped_wave_generator(&a, &b).unwrap()
    }
}

fn state(gen: &DampedGenerator, seed: &[f64]) -> State {
    let dim = gen.config_dim();
    let u: Vec<c64> = (0..dim).map(|i| c64::new(seed[i % seed.len()], 0.0)).collect();
    if gen.kind().is_second_order() {
        let v = (0..dim).map(|i| c64::new(0.0, seed[(i + 1) % seed.len()])).collect();
        State::second_order(u, v)
    } else {
        State::first_order(u)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_is_nonincreasing(
        values in prop::collection::vec(0.0f64..2.0, 4),
        seed in prop::collection::vec(-1.0f64..1.0, 5),
        schrodinger in any::<bool>(),
        stepping in any::<bool>(),
    ) {
        let gen = damped(8, 1, &values, schrodinger);
        let u0 = state(&gen, &seed);
        let opts = EvolveOptions {
            method: if stepping { Method::Stepping } else { Method::Auto },
            dt: 0.02,
            max_refinements: 2,
            ..EvolveOptions::default()
        };
        let traj = evolve(&gen, &u0, &Schedule::linear(2.0, 20).unwrap(), &opts).unwrap();
        let e0 = traj.energies[0];
        for w in traj.energies.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * e0);
        }
        for w in traj.damping_integral.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * e0);
        }
    }
}

#[test]
fn stepping_and_spectral_agree() {
    let gen = damped(10, 1, &[1.0, 0.0, 0.0, 1.0], false);
    let u0 = default_initial_state(&gen).unwrap();
    let sched = Schedule::linear(3.0, 6).unwrap();
    let spectral = evolve(&gen, &u0, &sched, &EvolveOptions { method: Method::Spectral, ..Default::default() }).unwrap();
    let stepping = evolve(
        &gen,
        &u0,
        &sched,
        &EvolveOptions { method: Method::Stepping, residual_tol: 1e-9, ..Default::default() },
    )
    .unwrap();
    assert_eq!(spectral.method, Method::Spectral);
    assert!(stepping.converged);
    for (a, b) in spectral.energies.iter().zip(&stepping.energies) {
        assert!((a - b).abs() <= 1e-5 * spectral.energies[0], "{a} vs {b}");
    }
    assert!(spectral.dissipation_residual() <= 1e-9);
}

#[test]
fn dissipation_residual_converges_at_second_order() {
    let gen = damped(20, 2, &[1.0, 0.0, 0.0, 1.0], false);
    let u0 = default_initial_state(&gen).unwrap();
    let opts = EvolveOptions { method: Method::Stepping, dt: 0.1, residual_tol: 1e-7, ..Default::default() };
    let traj = evolve(&gen, &u0, &Schedule::linear(1.0, 4).unwrap(), &opts).unwrap();
    assert!(traj.converged);
    let r = &traj.refinements;
    let (a, b) = (r[r.len() - 2], r[r.len() - 1]);
    let order = (a.1 / b.1).log2();
    assert!((1.8..=2.2).contains(&order), "{order}");
}

#[test]
fn schrodinger_mass_identity() {
    let gen = damped(12, 1, &[0.5, 0.0, 0.0, 0.5], true);
    let u0 = default_initial_state(&gen).unwrap();
    let traj = evolve(&gen, &u0, &Schedule::linear(4.0, 8).unwrap(), &EvolveOptions::default()).unwrap();
    assert!(traj.dissipation_residual() <= 1e-8);
    assert!((energy(&gen, &u0).unwrap() - traj.energies[0]).abs() <= 1e-14);
}

#[test]
fn gauss_legendre_is_exact_to_degree_fifteen() {
    let (x, w) = gauss_legendre(8);
    for d in 0..16 {
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
        let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
        assert!((q - exact).abs() <= 1e-14, "degree {d}");
    }
}

#[test]
fn full_observation_on_the_torus_needs_bounded_cost() {
    let a = assemble_flat_laplacian(None, &FourierModeSet::new(3)).unwrap();
    let b = HermitianOperator::scaled_identity_like(&a, 1.0);
    let ensemble = random_ensemble(a.dim(), 12, 7);
    let mu = [1.0, 4.0, 16.0, 64.0];
    let probe = observability_cost_probe(&a, &b, 2.0, &ensemble, &mu, 1.0).unwrap();
    let gmax = probe.g_needed.iter().map(|g| g.1).fold(0.0, f64::max);
    assert!(gmax.is_finite() && gmax < 10.0, "{gmax}");
    assert!(probe.g_needed.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn localized_ground_states_need_growing_cost() {
    let grid = Grid1D::new(60).unwrap();
    let modes = FourierModeSet::new(6);
    let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
    let b = assemble_damping(&DampingProfile::x1_outside(&grid, 0.5), &grid, &modes).unwrap();
    let mu = [1e6];
    let cost = |n: i64| {
        let s = mode_ground_state(&a, n).unwrap();
        observability_cost_probe(&a, &b, 2.0, &[s], &mu, 2.0).unwrap().g_needed[0].1
    };
    let costs: Vec<f64> = (1..=6).map(cost).collect();
    assert!(costs.windows(2).all(|w| w[1] > w[0]), "{costs:?}");
}
