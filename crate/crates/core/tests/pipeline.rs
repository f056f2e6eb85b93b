use std::f64::consts::SQRT_2;

use hypolab::generators::ModelKind;
use hypolab::pipeline::{
    damped_resolvent_bound, decay_envelope, free_resolvent_bound, m_log, m_log_inverse_ln,
    model_m, Clamp, CostFunction, PipelineParams,
};
use proptest::prelude::*;

fn params(t_obs: f64, c0: f64) -> PipelineParams {
    PipelineParams {
        t_obs,
        c0,
        ..PipelineParams::default()
    }
}

fn kinds() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Wave),
        Just(ModelKind::Schrodinger),
        Just(ModelKind::Plate)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_is_nondecreasing(
        c in 0.1f64..10.0,
        kappa in 0.0f64..3.0,
        k in 1.0f64..4.0,
        t_obs in 0.1f64..10.0,
        kind in kinds(),
        s in 1.0f64..40.0,
        ds in 0.0f64..10.0,
    ) {
        let cost = CostFunction::new(c, kappa, k).unwrap();
        let gfrak = free_resolvent_bound(&cost, &params(t_obs, 1.0)).unwrap();
        let m = model_m(kind, &gfrak);
        let ml = m_log(&m, false);
        for f in [&gfrak, &m, &ml] {
            prop_assert!(f.ln_eval(s + ds) >= f.ln_eval(s) - 1e-12 * f.ln_eval(s).abs());
        }
        prop_assert!(ml.ln_eval(s) >= m.ln_eval(s));
    }

    #[test]
    fn inverse_round_trips(
        kappa in 0.1f64..2.0,
        k in 1.0f64..3.0,
        kind in kinds(),
        s in 1.0f64..200.0,
    ) {
        let cost = CostFunction::new(1.0, kappa, k).unwrap();
        let ml = m_log(&model_m(kind, &free_resolvent_bound(&cost, &PipelineParams::default()).unwrap()), false);
        let inv = m_log_inverse_ln(&ml, ml.ln_eval(s));
        prop_assert_eq!(inv.clamp, Clamp::None);
        prop_assert!((inv.value - s).abs() <= 1e-9 * s);
    }

    #[test]
    fn envelope_is_nonincreasing(ln_t in 2.0f64..400.0, dl in 0.0f64..50.0, j in 1u32..4, kind in kinds()) {
        let cost = CostFunction::new(1.0, 1.0, 2.0).unwrap();
        let m = model_m(kind, &free_resolvent_bound(&cost, &params(4.0, 1.0)).unwrap());
        let env = decay_envelope(&m, j, 1.0, 1.0, false).unwrap();
        prop_assert!(env.ln_eval_ln_t(ln_t + dl) <= env.ln_eval_ln_t(ln_t) + 1e-12);
    }

    #[test]
    fn damped_bound_is_monotone(g1 in 0.1f64..10.0, g2 in 0.1f64..10.0, nb in 0.0f64..3.0, l in 0.1f64..50.0) {
        let base = damped_resolvent_bound(g1, g2, nb, l).unwrap();
        prop_assert!(damped_resolvent_bound(g1 * 1.5, g2, nb, l).unwrap() >= base);
        prop_assert!(damped_resolvent_bound(g1, g2 * 1.5, nb, l).unwrap() >= base);
    }
}

#[test]
fn damped_bound_closed_form() {
    let v = damped_resolvent_bound(1.0, 1.0, 1.0, 1.0).unwrap();
    assert!((v - (3.0 + 4.0 * SQRT_2)).abs() <= 1e-12);
}

#[test]
fn polynomial_costs_give_polynomial_envelopes() {
    let cost = CostFunction::new(1.0, 0.0, 1.0).unwrap();
    let m = model_m(ModelKind::Wave, &free_resolvent_bound(&cost, &PipelineParams::default()).unwrap());
    let env = decay_envelope(&m, 1, 1.0, 1.0, true).unwrap();
    let (a, b) = (env.ln_eval_ln_t(30.0), env.ln_eval_ln_t(40.0));
    let slope = (b - a) / 10.0;
    assert!(slope < -0.2 && slope > -0.5, "{slope}");
}
