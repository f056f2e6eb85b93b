use std::f64::consts::PI;

use faer::Mat;

use super::{FourierModeSet, Grid1D, HermitianOperator, ModeLabel, OperatorMeta};
use crate::c64;
use crate::error::{invalid, Result};
use crate::linalg::{creal, czero, BlockMatrix};

/// A damping function of `x₂` alone.
#[derive(Clone, Debug, PartialEq)]
pub enum X2Profile {
    /// `height · 1_{(start, end)}(x₂)` on `ℝ/ℤ`, with `0 ≤ end − start ≤ 1`.
    Indicator { start: f64, end: f64, height: f64 },
}

impl X2Profile {
    /// Fourier coefficient `ĉ_j = ∫₀¹ b(x) e^{-2πijx} dx`.
    pub fn coefficient(&self, j: i64) -> c64 {
        match *self {
            X2Profile::Indicator { start, end, height } => {
                if j == 0 {
                    return creal(height * (end - start));
                }
                let w = 2.0 * PI * j as f64;
                let e = |x: f64| c64::new((w * x).cos(), -(w * x).sin());
                (e(start) - e(end)) / c64::new(0.0, w) * height
            }
        }
    }

    fn sup_norm(&self) -> f64 {
        match *self {
            X2Profile::Indicator { start, end, height } => {
                if end > start {
                    height
                } else {
                    0.0
                }
            }
        }
    }
}

/// Nonnegative damping coefficient `b`; the assembled operator is `BB*`,
/// multiplication by `b`.
#[derive(Clone, Debug, PartialEq)]
pub enum DampingProfile {
    Constant(f64),
    /// Values of `b(x₁)` at the interior grid nodes.
    SeparableX1(Vec<f64>),
    SeparableX2(X2Profile),
}

impl DampingProfile {
    pub fn none() -> Self {
        DampingProfile::Constant(0.0)
    }

    pub fn x1_from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        DampingProfile::SeparableX1(grid.nodes().iter().map(|&x| f(x)).collect())
    }

    /// `1_{|x₁| ≥ r}` sampled on the grid.
    pub fn x1_outside(grid: &Grid1D, r: f64) -> Self {
        Self::x1_from_fn(grid, |x| if x.abs() >= r { 1.0 } else { 0.0 })
    }

    pub fn x2_indicator(start: f64, end: f64) -> Self {
        DampingProfile::SeparableX2(X2Profile::Indicator {
            start,
            end,
            height: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DampingProfile::Constant(beta) => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(invalid(format!("damping constant must be >= 0, got {beta}")));
                }
            }
            DampingProfile::SeparableX1(values) => {
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(invalid(format!("damping sample {v} is negative or not finite")));
                }
            }
            DampingProfile::SeparableX2(X2Profile::Indicator { start, end, height }) => {
                let len = end - start;
                if !(height.is_finite() && *height >= 0.0) {
                    return Err(invalid(format!("indicator height must be >= 0, got {height}")));
                }
                if !(len.is_finite() && (0.0..=1.0).contains(&len)) {
                    return Err(invalid(format!(
                        "indicator interval ({start}, {end}) must have length in [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `‖b‖_∞`
    pub fn sup_norm(&self) -> f64 {
        match self {
            DampingProfile::Constant(beta) => *beta,
            DampingProfile::SeparableX1(values) => values.iter().copied().fold(0.0, f64::max),
            DampingProfile::SeparableX2(p) => p.sup_norm(),
        }
    }

    pub fn is_separable_x1(&self) -> bool {
        matches!(
            self,
            DampingProfile::Constant(_) | DampingProfile::SeparableX1(_)
        )
    }

    /// Nodal values of `b(x₁)` for profiles that do not depend on `x₂`.
    pub fn x1_values(&self, grid: &Grid1D) -> Option<Vec<f64>> {
        match self {
            DampingProfile::Constant(beta) => Some(vec![*beta; grid.n_interior()]),
            DampingProfile::SeparableX1(v) => Some(v.clone()),
            DampingProfile::SeparableX2(_) => None,
        }
    }
}

/// Assembles `BB*` on the Grushin discretization. `x₂`-dependent profiles
/// couple all modes and produce a single Toeplitz-in-mode block.
pub fn assemble_damping(
    profile: &DampingProfile,
    grid: &Grid1D,
    modes: &FourierModeSet,
) -> Result<HermitianOperator> {
    profile.validate()?;
    let n = grid.n_interior();
    let meta = OperatorMeta {
        k: 1.0,
        mode: ModeLabel::Full,
    };
    let matrix = match profile {
        DampingProfile::SeparableX2(p) => {
            let nm = modes.len();
            let freqs: Vec<i64> = modes.frequencies().collect();
            let mut m = Mat::<c64>::zeros(n * nm, n * nm);
            for (a, &fa) in freqs.iter().enumerate() {
                for (b, &fb) in freqs.iter().enumerate() {
                    let c = p.coefficient(fa - fb);
                    for i in 0..n {
                        m[(a * n + i, b * n + i)] = c;
                    }
                }
            }
            BlockMatrix::new(vec![m], vec![None])?
        }
        _ => {
            let values = profile.x1_values(grid).unwrap_or_default();
            if values.len() != n {
                return Err(crate::Error::DimensionMismatch {
                    expected: n,
                    found: values.len(),
                });
            }
            let block = Mat::from_fn(n, n, |i, j| {
                if i == j {
                    creal(values[i])
                } else {
                    czero()
                }
            });
            let freqs: Vec<Option<i64>> = modes.frequencies().map(Some).collect();
            BlockMatrix::new(vec![block; modes.len()], freqs)?
        }
    };
    HermitianOperator::new(matrix, grid.spacing(), meta)
}
