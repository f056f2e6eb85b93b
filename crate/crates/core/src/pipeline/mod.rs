//! The constants chain from an observability cost `G` to a decay envelope:
//! `G → 𝗚 → M → M_log → M_log⁻¹ → C_j / M_log⁻¹(t/(cj))^j`.
//!
//! Values overflow `f64` quickly (`𝗚²` with `k = 2` exceeds `e^{700}` near
//! `λ ≈ 18`), so every [`BoundFunction`] is evaluated as a natural logarithm.

mod envelope;
mod table;

pub use envelope::{
    certificate_from_measurements, decay_envelope, fit_envelope_exponent, gap_curve,
    DecayCertificate, Envelope,
};
pub use table::{pipeline_table, write_envelope_csv, write_pipeline_table, PipelineRow};

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::generators::ModelKind;

/// Observability cost `G(μ) = C e^{κμ^k}`, floored at `floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostFunction {
    pub c: f64,
    pub kappa: f64,
    pub k: f64,
    pub floor: f64,
    /// Threshold from which the cost inequality is asserted.
    pub mu0: f64,
}

impl CostFunction {
    pub fn new(c: f64, kappa: f64, k: f64) -> Result<Self> {
        let g = Self {
            c,
            kappa,
            k,
            floor: 0.0,
            mu0: 0.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("cost constant C must be > 0, got {}", self.c)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid(format!("cost rate kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(invalid(format!("cost exponent k must be >= 1, got {}", self.k)));
        }
        if !(self.floor >= 0.0 && self.mu0 >= 0.0) {
            return Err(invalid("cost floor and mu0 must be >= 0"));
        }
        Ok(())
    }

    pub fn ln_value(&self, mu: f64) -> f64 {
        let v = self.c.ln() + self.kappa * mu.abs().powf(self.k);
        if self.floor > 0.0 {
            v.max(self.floor.ln())
        } else {
            v
        }
    }

    pub fn value(&self, mu: f64) -> f64 {
        self.ln_value(mu).exp()
    }
}

/// Constants entering the free resolvent bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineParams {
    /// Observation time `T`.
    pub t_obs: f64,
    /// Lower-bound constant in `G(μ) ≥ c₀/μ`.
    pub c0: f64,
    /// Absorption parameter `α`.
    pub alpha: f64,
    pub mu0: f64,
    pub lambda0: f64,
    /// `‖B‖ = √‖b‖_∞`
    pub norm_b: f64,
    /// Right-hand-side constant of the observability transfer.
    pub c_rhs: f64,
    /// Floor `𝗚 ≥ floor`; kept apart from `c0`.
    pub gfrak_floor: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            t_obs: 1.0,
            c0: 1.0,
            alpha: 2.0 - SQRT_2,
            mu0: 1.0,
            lambda0: 1.0,
            norm_b: 1.0,
            c_rhs: 0.0,
            gfrak_floor: 0.0,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.t_obs > 0.0 && self.c0 > 0.0) {
            return Err(invalid("observation time T and c0 must be > 0"));
        }
        if !(self.mu0 >= 0.0 && self.lambda0 >= 1.0) {
            return Err(invalid("thresholds need mu0 >= 0 and lambda0 >= 1"));
        }
        if !(self.norm_b >= 0.0 && self.c_rhs >= 0.0 && self.gfrak_floor >= 0.0) {
            return Err(invalid("norm_b, c_rhs and the floor must be >= 0"));
        }
        Ok(())
    }

    /// `K = √T + 1/c₀`
    pub fn k_const(&self) -> f64 {
        self.t_obs.sqrt() + 1.0 / self.c0
    }
}

type LnFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Closed(LnFn),
    /// Piecewise-linear interpolation of `ln f` in `s`.
    Tabulated { xs: Vec<f64>, ln_ys: Vec<f64> },
}

/// A positive nondecreasing function on `[lo, hi]`, evaluated through its
/// logarithm.
#[derive(Clone)]
pub struct BoundFunction {
    repr: Repr,
    lo: f64,
    hi: f64,
}

impl std::fmt::Debug for BoundFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundFunction")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl BoundFunction {
    /// A closed-form function given by `s ↦ ln f(s)`.
    pub fn from_ln(lo: f64, hi: f64, ln_f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            repr: Repr::Closed(Arc::new(ln_f)),
            lo,
            hi,
        }
    }

    pub fn from_fn(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_ln(lo, hi, move |s| f(s).ln())
    }

    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(invalid("tabulated function needs >= 2 matching samples"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("tabulation abscissae must increase strictly"));
        }
        if ys.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
            return Err(invalid("tabulated values must be positive and finite"));
        }
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        Ok(Self {
            repr: Repr::Tabulated {
                xs,
                ln_ys: ys.iter().map(|y| y.ln()).collect(),
            },
            lo,
            hi,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn ln_eval(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Closed(f) => f(s),
            Repr::Tabulated { xs, ln_ys } => {
                let s = s.clamp(xs[0], xs[xs.len() - 1]);
                let i = xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1);
                let w = (s - xs[i - 1]) / (xs[i] - xs[i - 1]);
                ln_ys[i - 1] + w * (ln_ys[i] - ln_ys[i - 1])
            }
        }
    }

    /// `f(s)`; `+∞` when it exceeds the `f64` range.
    pub fn eval(&self, s: f64) -> f64 {
        self.ln_eval(s).exp()
    }

    /// Whether `ln f` is nondecreasing on `samples` equispaced points of the
    /// domain (capped at `cap` when the domain is unbounded).
    pub fn is_nondecreasing_sampled(&self, samples: usize, cap: f64) -> bool {
        let hi = self.hi.min(cap);
        let n = samples.max(2);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let s = self.lo + (hi - self.lo) * i as f64 / (n - 1) as f64;
            let v = self.ln_eval(s);
            if v.is_nan() || v < prev {
                return false;
            }
            prev = v;
        }
        true
    }
}

/// `𝗚(λ) = (K(1+C_rhs)/α)·(λ+√2+α)·G(λ+√2+α)` with `K = √T + 1/c₀`.
pub fn free_resolvent_bound(g: &CostFunction, p: &PipelineParams) -> Result<BoundFunction> {
    g.validate()?;
    p.validate()?;
    let ln_pref = (p.k_const() * (1.0 + p.c_rhs) / p.alpha).ln();
    let shift = SQRT_2 + p.alpha;
    let floor = p.gfrak_floor;
    let g = *g;
    Ok(BoundFunction::from_ln(p.lambda0, f64::INFINITY, move |lambda| {
        let mu = lambda + shift;
        let v = ln_pref + mu.ln() + g.ln_value(mu);
        if floor > 0.0 {
            v.max(floor.ln())
        } else {
            v
        }
    }))
}

/// `(G₁·λ^{-1/2} + G₂·√2·‖B‖)² + 2√2·G₂`, the bound multiplying `‖P_λ v‖`.
pub fn damped_resolvent_bound(g1: f64, g2: f64, norm_b: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if !(g1 >= 0.0 && g2 >= 0.0 && norm_b >= 0.0) {
        return Err(invalid("G1, G2 and norm_b must be >= 0"));
    }
    Ok((g1 / lambda.sqrt() + g2 * SQRT_2 * norm_b).powi(2) + 2.0 * SQRT_2 * g2)
}

/// `M(λ) = ⟨λ⟩𝗚(λ)²` with `⟨λ⟩ = √(1+λ²)`.
pub fn wave_m(gfrak: &BoundFunction) -> BoundFunction {
    let g = gfrak.clone();
    let (lo, hi) = gfrak.domain();
    BoundFunction::from_ln(lo, hi, move |l| 0.5 * (l * l).ln_1p() + 2.0 * g.ln_eval(l))
}

/// `M(λ) = 𝗚(√λ)²`
pub fn schrodinger_m(gfrak: &BoundFunction) -> BoundFunction {
    let g = gfrak.clone();
    let (lo, hi) = gfrak.domain();
    BoundFunction::from_ln(lo * lo, hi * hi, move |l| 2.0 * g.ln_eval(l.sqrt()))
}

/// `M(λ) = λ·𝗚(√λ)²`
pub fn plate_m(gfrak: &BoundFunction) -> BoundFunction {
    let g = gfrak.clone();
    let (lo, hi) = gfrak.domain();
    BoundFunction::from_ln(lo * lo, hi * hi, move |l| l.ln() + 2.0 * g.ln_eval(l.sqrt()))
}

pub fn model_m(kind: ModelKind, gfrak: &BoundFunction) -> BoundFunction {
    match kind {
        ModelKind::Wave => wave_m(gfrak),
        ModelKind::Schrodinger => schrodinger_m(gfrak),
        ModelKind::Plate => plate_m(gfrak),
    }
}

/// `ln(1 + eˣ)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `M_log(s) = M(s)·(ln(1+M(s)) + ln(1+s))`. With `polynomial = true` the
/// logarithmic loss is dropped and `M` itself is returned.
pub fn m_log(m: &BoundFunction, polynomial: bool) -> BoundFunction {
    if polynomial {
        return m.clone();
    }
    let m = m.clone();
    let (lo, hi) = m.domain();
    BoundFunction::from_ln(lo, hi, move |s| {
        let ln_m = m.ln_eval(s);
        ln_m + (softplus(ln_m) + s.ln_1p()).ln()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clamp {
    None,
    /// The target lies below `f(lo)`; the result is `lo`.
    Below,
    /// The target could not be bracketed; the result is the last upper end.
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inverse {
    pub value: f64,
    pub clamp: Clamp,
}

/// Default upper end of the inversion bracket before doubling.
pub const INVERSION_HI: f64 = 1e6;

/// `s` with `f(s) = t`, by bisection on `[lo, 1e6]` (doubled upwards until the
/// target is bracketed) to relative tolerance `1e-12`.
pub fn m_log_inverse(ml: &BoundFunction, t: f64) -> Inverse {
    m_log_inverse_ln(ml, t.ln())
}

/// As [`m_log_inverse`], with the target given as `ln t`.
pub fn m_log_inverse_ln(ml: &BoundFunction, ln_t: f64) -> Inverse {
    let (dom_lo, dom_hi) = ml.domain();
    let lo0 = dom_lo;
    if ln_t.is_nan() || ln_t <= ml.ln_eval(lo0) {
        return Inverse {
            value: lo0,
            clamp: if ln_t < ml.ln_eval(lo0) || ln_t.is_nan() {
                Clamp::Below
            } else {
                Clamp::None
            },
        };
    }
    let mut hi = INVERSION_HI.max(2.0 * lo0.max(0.5)).min(dom_hi);
    let mut lo = lo0;
    let mut doublings = 0;
    while ml.ln_eval(hi) < ln_t {
        if hi >= dom_hi || doublings >= 2000 || !(2.0 * hi).is_finite() {
            return Inverse {
                value: hi,
                clamp: Clamp::Above,
            };
        }
        lo = hi;
        hi = (2.0 * hi).min(dom_hi);
        doublings += 1;
    }
    for _ in 0..4000 {
        if hi - lo <= 1e-12 * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ml.ln_eval(mid) < ln_t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Inverse {
        value: 0.5 * (lo + hi),
        clamp: Clamp::None,
    }
}
