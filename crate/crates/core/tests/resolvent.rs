use hypolab::generators::{damped_wave_generator, schrodinger_generator, spectrum, Metric, SpectrumOptions};
use hypolab::operators::{
    assemble_damping, assemble_grushin_full, DampingProfile, FourierModeSet, Grid1D,
};
use hypolab::resolvent::{
    fit_gap_region, quasimode, quasimode_defect, resolvent_norm_in, spectral_gap_check, GapRegion,
};
use proptest::prelude::*;

fn damped_grushin(n: usize, m: usize, r: f64) -> hypolab::generators::DampedGenerator {
    let grid = Grid1D::new(n).unwrap();
    let modes = FourierModeSet::new(m);
    let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
    let b = assemble_damping(&DampingProfile::x1_outside(&grid, r), &grid, &modes).unwrap();
    damped_wave_generator(&a, &b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolvent_dominates_inverse_distance(s in -40.0f64..40.0, r in 0.2f64..0.8) {
        let gen = damped_grushin(12, 2, r);
        let report = spectrum(&gen, &SpectrumOptions::default()).unwrap();
        let dist = report
            .eigenvalues
            .iter()
            .map(|z| (hypolab::c64::new(0.0, s) - z).norm())
            .fold(f64::INFINITY, f64::min);
        for metric in [Metric::Energy, Metric::Seminorm] {
            let norm = resolvent_norm_in(&gen, s, metric).unwrap();
            prop_assert!(norm >= (1.0 - 1e-9) / dist, "{norm} < 1/{dist}");
        }
    }

    #[test]
    fn schrodinger_resolvent_is_bounded_by_distance_to_the_axis(s in -30.0f64..30.0) {
        let grid = Grid1D::new(10).unwrap();
        let modes = FourierModeSet::new(1);
        let a = assemble_grushin_full(2.0, &grid, &modes).unwrap();
        let b = assemble_damping(&DampingProfile::Constant(0.5), &grid, &modes).unwrap();
        let gen = schrodinger_generator(&a, &b).unwrap();
        // Constant damping shifts the self-adjoint part by -0.5.
        let norm = resolvent_norm_in(&gen, s, Metric::Energy).unwrap();
        prop_assert!(norm <= 2.0 * (1.0 + 1e-10));
    }
}

#[test]
fn fitted_gap_region_contains_no_spectrum() {
    let gen = damped_grushin(60, 6, 0.5);
    let report = spectrum(&gen, &SpectrumOptions::default()).unwrap();
    let fit = fit_gap_region(&report, 2.0, 6).unwrap();
    assert!(fit.fit.slope < 0.0);
    assert!(spectral_gap_check(&report, &fit.region).pass);
    let wider = GapRegion::new(fit.region.eps * 10.0, fit.region.kappa, 2.0, report.kind).unwrap();
    assert!(!spectral_gap_check(&report, &wider).pass);
}

#[test]
fn quasimode_mass_on_the_damping_support_decays() {
    let grid = Grid1D::new(120).unwrap();
    let profile = DampingProfile::x1_outside(&grid, 0.5);
    let masses: Vec<f64> = (1..=8)
        .map(|n| quasimode_defect(&quasimode(n, 2.0, &grid).unwrap(), &profile).unwrap().bnorm)
        .collect();
    assert!(masses.windows(2).all(|w| w[1] < w[0]));
}
