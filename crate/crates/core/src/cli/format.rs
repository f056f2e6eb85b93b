use std::f64::consts::LN_10;

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Formats `exp(ln_x)`, falling back to a mantissa/exponent split computed in
/// log space when the value is outside the `f64` range.
pub fn fmt_ln(ln_x: f64) -> String {
    if ln_x.is_nan() {
        return "nan".into();
    }
    if ln_x == f64::NEG_INFINITY {
        return "0".into();
    }
    let v = ln_x.exp();
    if v.is_finite() && v > 0.0 {
        return fmt_f64(v);
    }
    if ln_x == f64::INFINITY {
        return "inf".into();
    }
    let log10 = ln_x / LN_10;
    let mut exp = log10.floor();
    let mut mant = 10f64.powf(log10 - exp);
    if mant >= 10.0 {
        mant /= 10.0;
        exp += 1.0;
    }
    format!("{}e{}", mant, exp as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-7, 3.0e20, 614600259687.5308, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn formats_beyond_range() {
        assert_eq!(fmt_ln(2f64.ln()), "2");
        for ln_x in [1000.0 * LN_10, 1234.5, -2000.0] {
            let s = fmt_ln(ln_x);
            let (m, e) = s.split_once('e').unwrap();
            let m: f64 = m.parse().unwrap();
            let e: f64 = e.parse().unwrap();
            assert!((1.0..10.0).contains(&m), "{s}");
            assert!((m.ln() + e * LN_10 - ln_x).abs() < 1e-9 * ln_x.abs(), "{s}");
        }
        assert!(fmt_ln(-800.0 * LN_10).ends_with("e-800"));
    }
}
