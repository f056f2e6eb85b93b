use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::config::{
    DampingVariant, ExperimentConfig, GeometryKind, MethodName, MetricName, ScheduleKind,
};
use super::fmt_f64;
use crate::error::{Error, Result};
use crate::generators::{generator, spectrum, DampedGenerator, Metric, ModelKind, SpectrumOptions};
use crate::operators::{
    assemble_damping, assemble_flat_laplacian, assemble_grushin_full_capped, DampingProfile,
    FourierModeSet, Grid1D, HermitianOperator, X2Profile,
};
use crate::pipeline::{
    decay_envelope, free_resolvent_bound, model_m, pipeline_table, write_envelope_csv,
    write_pipeline_table, CostFunction, PipelineParams,
};
use crate::resolvent::{
    fit_exponent, fit_gap_region, ground_energies, quasimode, quasimode_defect, resolvent_sweep,
    spectral_gap_check, GapRegion,
};
use crate::stats::fit_line;
use crate::timestepping::{
    default_initial_state, evolve, measure_decay, mode_ground_state, observability_cost_probe,
    random_ensemble, EvolveOptions, Method, Schedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    Spectrum,
    Sweep,
    Quasimode,
    Evolve,
    Pipeline,
    Gapcheck,
    Observability,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Sweep => "sweep",
            Task::Quasimode => "quasimode",
            Task::Evolve => "evolve",
            Task::Pipeline => "pipeline",
            Task::Gapcheck => "gapcheck",
            Task::Observability => "observability",
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical { task: &'static str, source: Error },
    Io(std::io::Error),
    /// The gap check found eigenvalues inside the region.
    Violation(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io(_) => 1,
            RunError::Violation(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical { task, source } => write!(f, "{task}: {source}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Violation(m) => write!(f, "gap check failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Files produced by a run, keyed by file name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
    /// Set when an acceptance check of the task failed; the files are still
    /// complete.
    pub violation: Option<String>,
}

impl Artifacts {
    fn add(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.files.insert(name.to_string(), buf);
        Ok(())
    }

    /// `sha256  name` for every artifact, sorted by name.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        for (name, bytes) in &self.files {
            s.push_str(&hex::encode(Sha256::digest(bytes)));
            s.push_str("  ");
            s.push_str(name);
            s.push('\n');
        }
        s
    }

    /// Writes every artifact and `manifest.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest())
    }
}

/// Stiffness and damping operators described by the geometry and damping
/// sections.
pub fn build_operators(cfg: &ExperimentConfig) -> Result<(HermitianOperator, HermitianOperator)> {
    let g = &cfg.geometry;
    let d = &cfg.damping;
    let beta = match d.variant {
        DampingVariant::None => 0.0,
        _ => d.beta,
    };
    match g.kind {
        GeometryKind::Scalar => Ok((HermitianOperator::scalar(g.a), HermitianOperator::scalar(beta))),
        GeometryKind::Torus => {
            let a = assemble_flat_laplacian(None, &FourierModeSet::new(g.m))?;
            let b = HermitianOperator::scaled_identity_like(&a, beta);
            Ok((a, b))
        }
        GeometryKind::Grushin => {
            let grid = Grid1D::new(g.n)?;
            let modes = FourierModeSet::new(g.m);
            let a = assemble_grushin_full_capped(g.k, &grid, &modes, g.dim_cap)?;
            let profile = damping_profile(cfg, &grid);
            let b = assemble_damping(&profile, &grid, &modes)?;
            Ok((a, b))
        }
    }
}

fn damping_profile(cfg: &ExperimentConfig, grid: &Grid1D) -> DampingProfile {
    let d = &cfg.damping;
    match d.variant {
        DampingVariant::None => DampingProfile::none(),
        DampingVariant::Constant => DampingProfile::Constant(d.beta),
        DampingVariant::Outside => {
            let r = d.radius;
            DampingProfile::x1_from_fn(grid, |x| if x.abs() >= r { d.beta } else { 0.0 })
        }
        DampingVariant::X2Indicator => DampingProfile::SeparableX2(X2Profile::Indicator {
            start: d.start,
            end: d.end,
            height: d.beta,
        }),
    }
}

fn spectrum_options(cfg: &ExperimentConfig) -> SpectrumOptions {
    SpectrumOptions {
        dim_cap: cfg.geometry.dim_cap,
        residual_tol: cfg.tolerance.residual,
        localization_tol: cfg.tolerance.localization,
        cluster_radius: cfg.tolerance.cluster,
        ..SpectrumOptions::default()
    }
}

/// Exponent `p` in `e^{κ|s|^p}` for the model.
fn growth_exponent(kind: ModelKind, k: f64) -> f64 {
    match kind {
        ModelKind::Wave => k,
        ModelKind::Schrodinger | ModelKind::Plate => 0.5 * k,
    }
}

/// Runs one task and returns its artifacts without touching the file system.
pub fn run(task: Task, cfg: &ExperimentConfig) -> std::result::Result<Artifacts, RunError> {
    let numerical = |source: Error| match source {
        Error::InvalidInput(m) => RunError::Config(m),
        Error::Io(e) => RunError::Io(e),
        source => RunError::Numerical {
            task: task.name(),
            source,
        },
    };
    let mut out = Artifacts::default();
    let verdict = match task {
        Task::Pipeline => run_pipeline(cfg, &mut out).map(|_| None),
        Task::Quasimode => run_quasimode(cfg, &mut out).map(|_| None),
        _ => {
            let (a, b) = build_operators(cfg).map_err(numerical)?;
            let kind = ModelKind::from(cfg.model.kind);
            let gen = generator(kind, &a, &b).map_err(numerical)?;
            match task {
                Task::Spectrum => run_spectrum(cfg, &gen, &mut out).map(|_| None),
                Task::Sweep => run_sweep(cfg, &a, &gen, &mut out).map(|_| None),
                Task::Evolve => run_evolve(cfg, &gen, &mut out).map(|_| None),
                Task::Gapcheck => run_gapcheck(cfg, &gen, &mut out),
                Task::Observability => run_observability(cfg, &a, &b, &mut out).map(|_| None),
                Task::Pipeline | Task::Quasimode => unreachable!(),
            }
        }
    }
    .map_err(numerical)?;
    out.violation = verdict;
    Ok(out)
}

fn summary<'a>(pairs: &'a [(&'a str, String)]) -> impl FnOnce(&mut Vec<u8>) -> Result<()> + 'a {
    move |buf| {
        for (k, v) in pairs {
            writeln!(buf, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn run_spectrum(cfg: &ExperimentConfig, gen: &DampedGenerator, out: &mut Artifacts) -> Result<()> {
    let report = spectrum(gen, &spectrum_options(cfg))?;
    out.add("spectrum.csv", |w| report.write_csv(w))?;
    out.add(
        "spectrum_summary.txt",
        summary(&[
            ("model", gen.kind().name().to_string()),
            ("eigenvalues", report.len().to_string()),
            ("max_residual", fmt_f64(report.max_residual())),
            ("damping_norm", fmt_f64(report.damping_norm)),
            (
                "unresolved",
                report
                    .count(crate::generators::LocalizationFlag::Unresolved)
                    .to_string(),
            ),
        ]),
    )
}

fn run_sweep(
    cfg: &ExperimentConfig,
    a: &HermitianOperator,
    gen: &DampedGenerator,
    out: &mut Artifacts,
) -> Result<()> {
    let s: Vec<f64> = if cfg.sweep.s.is_empty() {
        let modes: Vec<i64> = (cfg.sweep.first_mode..=cfg.sweep.last_mode).collect();
        let lambdas = ground_energies(a, &modes)?;
        match gen.kind() {
            ModelKind::Wave => lambdas.iter().map(|l| l.sqrt()).collect(),
            ModelKind::Schrodinger | ModelKind::Plate => lambdas,
        }
    } else {
        cfg.sweep.s.clone()
    };
    let metric = match cfg.sweep.metric {
        MetricName::Energy => Metric::Energy,
        MetricName::Seminorm => Metric::Seminorm,
    };
    let mut sweep = resolvent_sweep(gen, &s, metric)?;
    sweep.fit = fit_exponent(&sweep, growth_exponent(gen.kind(), cfg.geometry.k)).ok();
    out.add("resolvent.csv", |w| sweep.write_csv(w))?;
    match sweep.fit {
        Some(fit) => out.add("resolvent_fit.txt", |w| fit.write_summary(w)),
        None => out.add("resolvent_fit.txt", summary(&[("fit", "unavailable".to_string())])),
    }
}

fn run_quasimode(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    if cfg.geometry.kind != GeometryKind::Grushin {
        return Err(Error::Unsupported("quasimodes need the Grushin geometry".into()));
    }
    let grid = Grid1D::new(cfg.geometry.n)?;
    let profile = damping_profile(cfg, &grid);
    let mut rows = Vec::new();
    for n in cfg.quasimode.first_mode..=cfg.quasimode.last_mode {
        let q = quasimode(n, cfg.geometry.k, &grid)?;
        let d = quasimode_defect(&q, &profile)?;
        rows.push((n, q.lambda, d));
    }
    out.add("quasimodes.csv", |w| {
        writeln!(w, "n,lambda,bnorm,pencil_defect,support_mass")?;
        for (n, l, d) in &rows {
            writeln!(
                w,
                "{n},{},{},{},{}",
                fmt_f64(*l),
                fmt_f64(d.bnorm),
                fmt_f64(d.pencil_defect),
                fmt_f64(d.support_mass)
            )?;
        }
        Ok(())
    })?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.2.bnorm.ln()).collect();
    let pairs = match fit_line(&xs, &ys, 3) {
        Ok(f) => vec![
            ("slope", fmt_f64(f.slope)),
            ("intercept", fmt_f64(f.intercept)),
            ("r2", fmt_f64(f.r2)),
        ],
        Err(_) => vec![("fit", "unavailable".to_string())],
    };
    out.add("quasimode_fit.txt", summary(&pairs))
}

fn run_evolve(cfg: &ExperimentConfig, gen: &DampedGenerator, out: &mut Artifacts) -> Result<()> {
    let e = &cfg.evolve;
    let schedule = match e.schedule {
        ScheduleKind::Linear => Schedule::linear(e.t_end, e.samples)?,
        ScheduleKind::Geometric => Schedule::geometric(e.t_first, e.t_end, e.samples)?,
    };
    let opts = EvolveOptions {
        method: match e.method {
            MethodName::Auto => Method::Auto,
            MethodName::Stepping => Method::Stepping,
            MethodName::Spectral => Method::Spectral,
        },
        dt: e.dt,
        residual_tol: cfg.tolerance.dissipation,
        max_refinements: e.max_refinements,
        cond_limit: cfg.tolerance.cond_limit,
        store_states: false,
    };
    let u0 = default_initial_state(gen)?;
    let (traj, decay) = if e.j > 0 {
        let m = measure_decay(gen, &u0, e.j, cfg.geometry.k, &schedule, &opts)?;
        (m.trajectory.clone(), Some(m))
    } else {
        (evolve(gen, &u0, &schedule, &opts)?, None)
    };
    out.add("trajectory.csv", |w| traj.write_csv(w))?;
    let method = match traj.method {
        Method::Spectral => "spectral",
        _ => "stepping",
    };
    let mut pairs = vec![
        ("method", method.to_string()),
        ("dissipation_residual", fmt_f64(traj.dissipation_residual())),
        ("converged", traj.converged.to_string()),
    ];
    if let Some(dt) = traj.dt {
        pairs.push(("dt", fmt_f64(dt)));
    }
    if let Some(m) = &decay {
        out.add("decay.csv", |w| m.write_csv(w))?;
        pairs.push(("power_norm", fmt_f64(m.power_norm)));
        pairs.push(("log_exponent", fmt_f64(m.log_exponent)));
        pairs.push(("t_takeover", fmt_f64(m.t_takeover)));
        pairs.push(("window_start", fmt_f64(m.window.0)));
        pairs.push(("window_end", fmt_f64(m.window.1)));
        pairs.push(("sup_in_window", fmt_f64(m.sup_over(m.window.0, m.window.1))));
    }
    out.add("evolve_summary.txt", summary(&pairs))
}

fn run_pipeline(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let p = &cfg.pipeline;
    let cost = CostFunction::new(p.c, p.kappa, p.k)?;
    let params = PipelineParams {
        t_obs: p.t_obs,
        c0: p.c0,
        alpha: p.alpha,
        norm_b: p.norm_b,
        c_rhs: p.c_rhs,
        ..PipelineParams::default()
    };
    params.validate()?;
    let kind = ModelKind::from(cfg.model.kind);
    let rows = pipeline_table(&cost, &params, kind, &p.lambdas, p.polynomial)?;
    out.add("pipeline.csv", |w| write_pipeline_table(&rows, w))?;
    let gfrak = free_resolvent_bound(&cost, &params)?;
    let m = model_m(kind, &gfrak);
    let env = decay_envelope(&m, p.j, p.c_decay, p.c_j, p.polynomial)?;
    out.add("envelope.csv", |w| write_envelope_csv(&env, &p.envelope_times, w))
}

fn run_gapcheck(
    cfg: &ExperimentConfig,
    gen: &DampedGenerator,
    out: &mut Artifacts,
) -> Result<Option<String>> {
    let report = spectrum(gen, &spectrum_options(cfg))?;
    out.add("spectrum.csv", |w| report.write_csv(w))?;
    let k = cfg.geometry.k;
    let (region, fit) = match (cfg.gapcheck.eps, cfg.gapcheck.kappa) {
        (Some(eps), Some(kappa)) => (GapRegion::new(eps, kappa, k, gen.kind())?, None),
        _ => {
            let f = fit_gap_region(&report, k, cfg.gapcheck.count)?;
            (f.region, Some(f))
        }
    };
    let check = spectral_gap_check(&report, &region);
    if let Some(f) = &fit {
        out.add("gap_branches.csv", |w| {
            writeln!(w, "re,im")?;
            for z in &f.branches {
                writeln!(w, "{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
            }
            Ok(())
        })?;
    }
    let mut pairs = vec![
        ("pass", check.pass.to_string()),
        ("eps", fmt_f64(region.eps)),
        ("kappa", fmt_f64(region.kappa)),
        ("exponent", fmt_f64(region.exponent())),
        ("violations", check.violations.len().to_string()),
    ];
    if let Some(f) = &fit {
        pairs.push(("slope", fmt_f64(f.fit.slope)));
        pairs.push(("r2", fmt_f64(f.fit.r2)));
    }
    out.add("gapcheck.txt", summary(&pairs))?;
    Ok((!check.pass).then(|| {
        format!(
            "{} eigenvalues inside the region (eps = {}, kappa = {})",
            check.violations.len(),
            fmt_f64(region.eps),
            fmt_f64(region.kappa)
        )
    }))
}

fn run_observability(
    cfg: &ExperimentConfig,
    a: &HermitianOperator,
    b: &HermitianOperator,
    out: &mut Artifacts,
) -> Result<()> {
    let o = &cfg.observability;
    let mut ensemble = random_ensemble(a.dim(), o.members, o.seed);
    if o.ground_states && cfg.geometry.kind != GeometryKind::Scalar {
        for n in FourierModeSet::new(cfg.geometry.m).frequencies() {
            ensemble.push(mode_ground_state(a, n)?);
        }
    }
    let probe = observability_cost_probe(a, b, o.t_obs, &ensemble, &o.mu, cfg.geometry.k)?;
    out.add("observability.csv", |w| {
        writeln!(w, "mu,g_needed")?;
        for (mu, g) in &probe.g_needed {
            writeln!(w, "{},{}", fmt_f64(*mu), fmt_f64(*g))?;
        }
        Ok(())
    })?;
    let mut pairs = vec![
        ("members", ensemble.len().to_string()),
        ("excluded", probe.excluded.len().to_string()),
    ];
    match probe.fit {
        Some(f) => {
            pairs.push(("c_hat", fmt_f64(f.c_hat)));
            pairs.push(("kappa_hat", fmt_f64(f.kappa_hat)));
            pairs.push(("r2", fmt_f64(f.r2)));
        }
        None => pairs.push(("fit", "unavailable".to_string())),
    }
    out.add("observability_summary.txt", summary(&pairs))
}
