use hypolab::linalg;
use hypolab::operators::{
    assemble_damping, assemble_grushin_full, assemble_grushin_mode, DampingProfile,
    FourierModeSet, Grid1D,
};
use proptest::prelude::*;

fn random_vector(seed: &[f64], dim: usize) -> Vec<hypolab::c64> {
    (0..dim)
        .map(|i| hypolab::c64::new(seed[i % seed.len()] * (i as f64 + 1.0).sin(), seed[(i + 1) % seed.len()]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grushin_is_hermitian_and_positive(
        k in 1.0f64..3.5,
        n in 3usize..30,
        m in 0usize..4,
        seed in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let grid = Grid1D::new(n).unwrap();
        let a = assemble_grushin_full(k, &grid, &FourierModeSet::new(m)).unwrap();
        let scale = a.matrix().max_abs();
        prop_assert!(a.matrix().hermitian_defect() <= 1e-12 * scale);
        let ev = a.eigenvalues().unwrap();
        prop_assert!(ev[0] > 0.0);
        let u = random_vector(&seed, a.dim());
        prop_assert!(a.quadratic_form(&u) >= -1e-12 * scale * linalg::norm_sq(&u));
    }

    #[test]
    fn opposite_modes_share_their_spectrum(k in 1.0f64..3.0, n in 3usize..25, mode in 1i64..6) {
        let grid = Grid1D::new(n).unwrap();
        let p = assemble_grushin_mode(mode, k, &grid).unwrap().eigenvalues().unwrap();
        let q = assemble_grushin_mode(-mode, k, &grid).unwrap().eigenvalues().unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn damping_is_positive_and_bounded(
        values in prop::collection::vec(0.0f64..3.0, 12),
        m in 0usize..3,
        start in 0.0f64..0.5,
        width in 0.05f64..0.5,
    ) {
        let grid = Grid1D::new(12).unwrap();
        let modes = FourierModeSet::new(m);
        for profile in [
            DampingProfile::SeparableX1(values.clone()),
            DampingProfile::x2_indicator(start, start + width),
        ] {
            let b = assemble_damping(&profile, &grid, &modes).unwrap();
            let ev = b.eigenvalues().unwrap();
            let sup = profile.sup_norm();
            prop_assert!(ev[0] >= -1e-12 * sup.max(1.0));
            prop_assert!(*ev.last().unwrap() <= sup * (1.0 + 1e-12) + 1e-12);
        }
    }
}

#[test]
fn dirichlet_laplacian_eigenvalues() {
    let n = 50;
    let grid = Grid1D::new(n).unwrap();
    let a = assemble_grushin_mode(0, 2.0, &grid).unwrap();
    let h = grid.spacing();
    let ev = a.eigenvalues().unwrap();
    for (j, e) in ev.iter().enumerate() {
        let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
        let exact = 4.0 / (h * h) * (0.5 * theta).sin().powi(2);
        assert!((e - exact).abs() <= 1e-10 * exact);
    }
}
