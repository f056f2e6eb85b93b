use super::{m_log, m_log_inverse_ln, BoundFunction, Clamp, Inverse};
use crate::error::{invalid, Error, Result};
use crate::generators::ModelKind;
use crate::stats::{fit_line, LineFit};

/// `t ↦ C_j / M_log⁻¹(t/(cj))^j`
#[derive(Clone, Debug)]
pub struct Envelope {
    ml: BoundFunction,
    j: u32,
    c: f64,
    c_j: f64,
}

impl Envelope {
    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_j(&self) -> f64 {
        self.c_j
    }

    pub fn m_log(&self) -> &BoundFunction {
        &self.ml
    }

    /// `M_log⁻¹(t/(cj))` for `t = e^{ln_t}`.
    pub fn inverse_at_ln(&self, ln_t: f64) -> Inverse {
        m_log_inverse_ln(&self.ml, ln_t - (self.c * self.j as f64).ln())
    }

    /// `ln` of the envelope at `t = e^{ln_t}`.
    pub fn ln_eval_ln_t(&self, ln_t: f64) -> f64 {
        let s = self.inverse_at_ln(ln_t).value;
        self.c_j.ln() - self.j as f64 * s.ln()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ln_eval_ln_t(t.ln()).exp()
    }
}

/// Builds the envelope of `M` (the logarithmic loss is dropped when
/// `polynomial` is set).
pub fn decay_envelope(m: &BoundFunction, j: u32, c: f64, c_j: f64, polynomial: bool) -> Result<Envelope> {
    if j < 1 {
        return Err(invalid("envelope order j must be >= 1"));
    }
    if !(c > 0.0 && c_j >= 0.0) {
        return Err(invalid(format!("envelope needs c > 0 and C_j >= 0 (got {c}, {c_j})")));
    }
    Ok(Envelope {
        ml: m_log(m, polynomial),
        j,
        c,
        c_j,
    })
}

/// Slope of `ln envelope` against `ln ln t` over `points` values of `ln t`
/// spaced geometrically in `[ln_t_lo, ln_t_hi]`. Points where the inversion
/// clamps are skipped.
pub fn fit_envelope_exponent(env: &Envelope, ln_t_lo: f64, ln_t_hi: f64, points: usize) -> Result<LineFit> {
    if !(ln_t_lo > 0.0 && ln_t_hi > ln_t_lo && points >= 3) {
        return Err(invalid("exponent fit needs 0 < ln_t_lo < ln_t_hi and >= 3 points"));
    }
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    let ratio = (ln_t_hi / ln_t_lo).ln();
    for i in 0..points {
        let ln_t = ln_t_lo * (ratio * i as f64 / (points - 1) as f64).exp();
        if env.inverse_at_ln(ln_t).clamp != Clamp::None {
            continue;
        }
        xs.push(ln_t.ln());
        ys.push(env.ln_eval_ln_t(ln_t));
    }
    fit_line(&xs, &ys, 3)
}

/// `y ↦ −ε e^{−κ|y|^k}`
pub fn gap_curve(eps: f64, kappa: f64, k: f64) -> impl Fn(f64) -> f64 {
    move |y: f64| -eps * (-kappa * y.abs().powf(k)).exp()
}

/// A predicted envelope paired with measured normalized decay samples.
#[derive(Clone, Debug)]
pub struct DecayCertificate {
    pub kind: ModelKind,
    pub j: u32,
    pub c: f64,
    /// Smallest `C_j` for which the envelope dominates every measurement.
    pub c_j: f64,
    /// `(t, envelope(t))` at the measurement times.
    pub envelope: Vec<(f64, f64)>,
    pub measured: Vec<(f64, f64)>,
    /// Measurements above the envelope.
    pub violations: Vec<usize>,
    /// Measurements whose inversion fell outside the bracket.
    pub clamped: Vec<usize>,
}

/// Calibrates `C_j` for a fixed constant `c` so the envelope
/// dominates `measured = [(t, ratio)]`.
pub fn certificate_from_measurements(
    kind: ModelKind,
    m: &BoundFunction,
    j: u32,
    c: f64,
    measured: &[(f64, f64)],
    polynomial: bool,
) -> Result<DecayCertificate> {
    let probe = decay_envelope(m, j, c, 1.0, polynomial)?;
    let mut ln_cj = f64::NEG_INFINITY;
    let mut clamped = Vec::new();
    for (i, &(t, ratio)) in measured.iter().enumerate() {
        if !(t > 0.0 && ratio >= 0.0 && ratio.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "measurement ({t}, {ratio}) needs t > 0 and a finite ratio >= 0"
            )));
        }
        let inv = probe.inverse_at_ln(t.ln());
        if inv.clamp != Clamp::None {
            clamped.push(i);
        }
        if ratio > 0.0 {
            ln_cj = ln_cj.max(ratio.ln() + j as f64 * inv.value.ln());
        }
    }
    let c_j = ln_cj.exp();
    let env = decay_envelope(m, j, c, c_j, polynomial)?;
    let envelope: Vec<(f64, f64)> = measured.iter().map(|&(t, _)| (t, env.eval(t))).collect();
    let violations = measured
        .iter()
        .zip(&envelope)
        .enumerate()
        .filter(|(_, (m, e))| m.1 > e.1 * (1.0 + 1e-9))
        .map(|(i, _)| i)
        .collect();
    Ok(DecayCertificate {
        kind,
        j,
        c,
        c_j,
        envelope,
        measured: measured.to_vec(),
        violations,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_m_envelope_closed_form() {
        let one = BoundFunction::from_ln(0.0, f64::INFINITY, |_| 0.0);
        let env = decay_envelope(&one, 1, 2.0, 3.0, false).unwrap();
        for t in [4.0, 10.0, 30.0] {
            let expected = 3.0 / ((t / 2.0f64).exp() / 2.0 - 1.0);
            assert!((env.eval(t) - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn envelope_is_nonincreasing() {
        let m = BoundFunction::from_ln(1.0, f64::INFINITY, |s| 2.0 * s * s);
        let env = decay_envelope(&m, 1, 1.0, 1.0, false).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let v = env.ln_eval_ln_t(i as f64 * 50.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn doubling_j_doubles_the_exponent() {
        let m = BoundFunction::from_ln(1.0, f64::INFINITY, |s| 2.0 * s * s);
        let e1 = decay_envelope(&m, 1, 1.0, 1.0, false).unwrap();
        let e2 = decay_envelope(&m, 2, 0.5, 1.0, false).unwrap();
        let f1 = fit_envelope_exponent(&e1, 1e3, 1e6, 20).unwrap();
        let f2 = fit_envelope_exponent(&e2, 1e3, 1e6, 20).unwrap();
        assert!((f2.slope / f1.slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn square_exponential_inverse_exponent() {
        let m = BoundFunction::from_ln(0.0, f64::INFINITY, |s| s * s);
        let env = decay_envelope(&m, 1, 1.0, 1.0, false).unwrap();
        let f = fit_envelope_exponent(&env, 1e3f64.ln(), 1e9f64.ln(), 25).unwrap();
        // Reference fit computed with 50-digit arithmetic.
        assert!((f.slope + 0.570_494_759_031_952_8).abs() < 1e-8, "{}", f.slope);
    }

    #[test]
    fn gap_curve_values() {
        let g = gap_curve(0.1, 1.0, 2.0);
        assert!((g(2.0) + 0.1 * (-4.0f64).exp()).abs() < 1e-17);
        assert!((g(2.0) + 0.0018316).abs() < 1e-7);
        assert_eq!(g(0.0), -0.1);
        assert_eq!(g(-1.3), g(1.3));
    }

    #[test]
    fn certificate_recovers_constant() {
        let m = BoundFunction::from_ln(1.0, f64::INFINITY, |s| s);
        let truth = decay_envelope(&m, 1, 1.0, 2.5, false).unwrap();
        let measured: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&t| (t, truth.eval(t))).collect();
        let cert = certificate_from_measurements(ModelKind::Wave, &m, 1, 1.0, &measured, false).unwrap();
        assert!((cert.c_j - 2.5).abs() < 1e-9);
        assert!(cert.violations.is_empty());
        let empty = certificate_from_measurements(ModelKind::Wave, &m, 1, 1.0, &[], false).unwrap();
        assert_eq!(empty.c_j, 0.0);
        assert!(empty.envelope.is_empty());
    }
}
