use std::path::PathBuf;

use serde::Deserialize;

use crate::generators::ModelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    /// Finite-difference Grushin operator on `[-1,1] × ℝ/ℤ`.
    Grushin,
    /// Spectral Laplacian on `ℝ/ℤ`, one coefficient per mode.
    Torus,
    /// `1 × 1` operator `A = a`.
    Scalar,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub k: f64,
    pub n: usize,
    pub m: usize,
    /// Value of `A` for the scalar geometry.
    pub a: f64,
    pub dim_cap: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            kind: GeometryKind::Grushin,
            k: 2.0,
            n: 100,
            m: 3,
            a: 1.0,
            dim_cap: crate::operators::DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingVariant {
    None,
    Constant,
    /// `β·1_{|x₁| ≥ r}`
    Outside,
    /// `β·1_{x₂ ∈ (start, end)}`
    X2Indicator,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Damping {
    pub variant: DampingVariant,
    pub beta: f64,
    pub radius: f64,
    pub start: f64,
    pub end: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Self {
            variant: DampingVariant::Outside,
            beta: 1.0,
            radius: 0.5,
            start: 0.0,
            end: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Wave,
    Schrodinger,
    Plate,
}

impl From<ModelName> for ModelKind {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Wave => ModelKind::Wave,
            ModelName::Schrodinger => ModelKind::Schrodinger,
            ModelName::Plate => ModelKind::Plate,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub kind: ModelName,
}

impl Default for Model {
    fn default() -> Self {
        Self {
            kind: ModelName::Wave,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Energy,
    Seminorm,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Explicit frequencies; when empty they are taken from the ground
    /// energies of modes `first_mode..=last_mode`.
    pub s: Vec<f64>,
    pub first_mode: i64,
    pub last_mode: i64,
    pub metric: MetricName,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            s: Vec::new(),
            first_mode: 2,
            last_mode: 12,
            metric: MetricName::Energy,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasimodeTask {
    pub first_mode: i64,
    pub last_mode: i64,
}

impl Default for QuasimodeTask {
    fn default() -> Self {
        Self {
            first_mode: 1,
            last_mode: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear,
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Auto,
    Stepping,
    Spectral,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evolve {
    pub schedule: ScheduleKind,
    pub t_first: f64,
    pub t_end: f64,
    pub samples: usize,
    pub dt: f64,
    pub method: MethodName,
    pub max_refinements: usize,
    /// Power of the generator in the decay products; 0 disables them.
    pub j: u32,
}

impl Default for Evolve {
    fn default() -> Self {
        Self {
            schedule: ScheduleKind::Linear,
            t_first: 0.1,
            t_end: 10.0,
            samples: 100,
            dt: 0.05,
            method: MethodName::Auto,
            max_refinements: 12,
            j: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pipeline {
    pub c: f64,
    pub kappa: f64,
    pub k: f64,
    pub t_obs: f64,
    pub c0: f64,
    pub alpha: f64,
    pub norm_b: f64,
    pub c_rhs: f64,
    pub lambdas: Vec<f64>,
    pub polynomial: bool,
    pub j: u32,
    /// Constant `c` inside `M_log⁻¹(c t)`.
    pub c_decay: f64,
    pub c_j: f64,
    pub envelope_times: Vec<f64>,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            c: 1.0,
            kappa: 1.0,
            k: 2.0,
            t_obs: 1.0,
            c0: 1.0,
            alpha: 2.0 - std::f64::consts::SQRT_2,
            norm_b: 1.0,
            c_rhs: 0.0,
            lambdas: vec![1.0, 2.0, 3.0, 5.0, 10.0],
            polynomial: false,
            j: 1,
            c_decay: 1.0,
            c_j: 1.0,
            envelope_times: vec![1e1, 1e2, 1e3, 1e4, 1e6, 1e8],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gapcheck {
    /// Branches used to fit the region.
    pub count: usize,
    /// Fixed region; both must be set to skip the fit.
    pub eps: Option<f64>,
    pub kappa: Option<f64>,
}

impl Default for Gapcheck {
    fn default() -> Self {
        Self {
            count: 10,
            eps: None,
            kappa: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Observability {
    pub t_obs: f64,
    pub members: usize,
    pub seed: u64,
    pub mu: Vec<f64>,
    /// Include the per-mode ground states alongside the random members.
    pub ground_states: bool,
}

impl Default for Observability {
    fn default() -> Self {
        Self {
            t_obs: 4.0,
            members: 32,
            seed: 0,
            mu: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            ground_states: true,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    pub residual: f64,
    pub localization: f64,
    pub cluster: f64,
    pub dissipation: f64,
    pub cond_limit: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            residual: 1e-7,
            localization: 1e-8,
            cluster: 1e-7,
            dissipation: 1e-6,
            cond_limit: 1e8,
        }
    }
}

/// One experiment. Keys are written as `section.key = value`; unknown
/// sections and keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub damping: Damping,
    pub model: Model,
    pub sweep: Sweep,
    pub quasimode: QuasimodeTask,
    pub evolve: Evolve,
    pub pipeline: Pipeline,
    pub gapcheck: Gapcheck,
    pub observability: Observability,
    pub output: Output,
    pub tolerance: Tolerance,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let g = &self.geometry;
        if !(g.k >= 1.0 && g.k.is_finite()) {
            return Err(format!("geometry.k must be >= 1, got {}", g.k));
        }
        if g.kind == GeometryKind::Grushin && g.n < 2 {
            return Err(format!("geometry.n must be >= 2, got {}", g.n));
        }
        if g.kind == GeometryKind::Scalar && !(g.a >= 0.0) {
            return Err(format!("geometry.a must be >= 0, got {}", g.a));
        }
        let d = &self.damping;
        if !(d.beta >= 0.0 && d.beta.is_finite()) {
            return Err(format!("damping.beta must be >= 0, got {}", d.beta));
        }
        match (g.kind, d.variant) {
            (GeometryKind::Grushin, DampingVariant::Outside) if !(d.radius >= 0.0 && d.radius <= 1.0) => {
                return Err(format!("damping.radius must lie in [0, 1], got {}", d.radius));
            }
            (GeometryKind::Grushin, DampingVariant::X2Indicator) if !(d.start < d.end) => {
                return Err("damping.start must be < damping.end".into());
            }
            (GeometryKind::Torus | GeometryKind::Scalar, DampingVariant::Outside | DampingVariant::X2Indicator) => {
                return Err("torus and scalar geometries accept damping.variant = none or constant".into());
            }
            _ => {}
        }
        let t = &self.tolerance;
        for (name, v) in [
            ("tolerance.residual", t.residual),
            ("tolerance.localization", t.localization),
            ("tolerance.cluster", t.cluster),
            ("tolerance.dissipation", t.dissipation),
            ("tolerance.cond_limit", t.cond_limit),
        ] {
            if !(v > 0.0) {
                return Err(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.sweep.s.is_empty() && self.sweep.first_mode > self.sweep.last_mode {
            return Err("sweep.first_mode must be <= sweep.last_mode".into());
        }
        if self.quasimode.first_mode < 1 || self.quasimode.first_mode > self.quasimode.last_mode {
            return Err("quasimode modes must satisfy 1 <= first_mode <= last_mode".into());
        }
        let e = &self.evolve;
        if !(e.t_end > 0.0 && e.dt > 0.0 && e.samples >= 1) {
            return Err("evolve.t_end, evolve.dt and evolve.samples must be positive".into());
        }
        if e.schedule == ScheduleKind::Geometric && !(e.t_first > 0.0 && e.t_first < e.t_end) {
            return Err("evolve.t_first must lie in (0, t_end)".into());
        }
        let o = &self.observability;
        if !(o.t_obs > 0.0) || o.mu.iter().any(|m| !(*m > 0.0)) {
            return Err("observability.t_obs and observability.mu must be positive".into());
        }
        if self.gapcheck.eps.is_some() != self.gapcheck.kappa.is_some() {
            return Err("gapcheck.eps and gapcheck.kappa must be given together".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let cfg = ExperimentConfig::parse("geometry.k = 3\ngeometry.n = 40\nmodel.kind = \"schrodinger\"\n")
            .unwrap();
        assert_eq!(cfg.geometry.k, 3.0);
        assert_eq!(cfg.geometry.n, 40);
        assert_eq!(cfg.model.kind, ModelName::Schrodinger);
        assert_eq!(cfg.geometry.m, 3);
    }

    #[test]
    fn misspelled_keys_fail_with_location() {
        let err = ExperimentConfig::parse("geometry.k = 2\ngeometry.nn = 40\n").unwrap_err();
        assert!(err.contains("nn"), "{err}");
        assert!(err.contains("line 2"), "{err}");
        assert!(ExperimentConfig::parse("geometri.k = 2\n").is_err());
    }

    #[test]
    fn out_of_range_values_fail() {
        assert!(ExperimentConfig::parse("geometry.k = 0.5\n").is_err());
        assert!(ExperimentConfig::parse("damping.radius = 2\n").is_err());
        assert!(ExperimentConfig::parse("geometry.kind = \"torus\"\n").is_err());
    }
}
