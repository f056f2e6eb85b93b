use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::generators::{ModelKind, SpectrumReport};
use crate::stats::{fit_line, LineFit};

/// `Γ = {Re z ≥ −ε e^{−κ|Im z|^p}}` with `p = k` for wave and plate
/// generators and `p = k/2` for Schrödinger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRegion {
    pub eps: f64,
    pub kappa: f64,
    pub k: f64,
    pub kind: ModelKind,
}

impl GapRegion {
    pub fn new(eps: f64, kappa: f64, k: f64, kind: ModelKind) -> Result<Self> {
        if !(eps > 0.0 && kappa > 0.0 && k > 0.0) {
            return Err(invalid(format!(
                "gap region needs eps, kappa, k > 0 (got {eps}, {kappa}, {k})"
            )));
        }
        Ok(Self { eps, kappa, k, kind })
    }

    pub fn exponent(&self) -> f64 {
        match self.kind {
            ModelKind::Schrodinger => 0.5 * self.k,
            _ => self.k,
        }
    }

    pub fn boundary(&self, y: f64) -> f64 {
        crate::pipeline::gap_curve(self.eps, self.kappa, self.exponent())(y)
    }

    /// Membership evaluated in log form so thin regions do not underflow.
    pub fn contains(&self, z: c64) -> bool {
        if z.re >= 0.0 {
            return true;
        }
        (-z.re).ln() <= self.eps.ln() - self.kappa * z.im.abs().powf(self.exponent())
    }
}

#[derive(Clone, Debug)]
pub struct GapCheck {
    pub pass: bool,
    pub violations: Vec<c64>,
}

fn is_tolerated_zero(kind: ModelKind, z: c64) -> bool {
    kind.is_second_order() && z.norm() <= 1e-8
}

/// Eigenvalues inside `Γ` (other than a kernel eigenvalue at 0 for wave and
/// plate generators).
pub fn spectral_gap_check(report: &SpectrumReport, region: &GapRegion) -> GapCheck {
    let violations: Vec<c64> = report
        .eigenvalues
        .iter()
        .copied()
        .filter(|&z| !is_tolerated_zero(report.kind, z) && region.contains(z))
        .collect();
    GapCheck {
        pass: violations.is_empty(),
        violations,
    }
}

/// The `count` eigenvalues in the upper half plane closest to `iℝ` along
/// distinct branches: walking upwards in `Im z`, an eigenvalue starts a new
/// branch when it is closer to the axis than every eigenvalue below it.
/// Returned in increasing `Im z`.
pub fn branches_near_axis(report: &SpectrumReport, count: usize) -> Vec<c64> {
    let mut upper: Vec<c64> = report
        .eigenvalues
        .iter()
        .copied()
        .filter(|&z| !report.is_real(z) && z.im > 0.0 && !is_tolerated_zero(report.kind, z))
        .collect();
    upper.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let mut frontier = Vec::new();
    let mut best = f64::INFINITY;
    for z in upper {
        if z.re.abs() < best {
            best = z.re.abs();
            frontier.push(z);
        }
    }
    frontier.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()));
    frontier.truncate(count);
    frontier.sort_by(|a, b| a.im.total_cmp(&b.im));
    frontier
}

#[derive(Clone, Debug)]
pub struct GapFit {
    pub region: GapRegion,
    /// Fit of `log|Re z|` against `|Im z|^p` on the selected branches.
    pub fit: LineFit,
    pub branches: Vec<c64>,
}

/// Calibrates `Γ`: `κ` is minus the slope of `log|Re z|` against `|Im z|^p`
/// over the `count` branches nearest `iℝ`, and `ε` is the largest value for
/// which the whole spectrum stays outside `Γ`, reduced by a relative `1e-6`.
pub fn fit_gap_region(report: &SpectrumReport, k: f64, count: usize) -> Result<GapFit> {
    let p = match report.kind {
        ModelKind::Schrodinger => 0.5 * k,
        _ => k,
    };
    let branches = branches_near_axis(report, count);
    if branches.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} nonreal eigenvalues near the axis, at least 3 required",
            branches.len()
        )));
    }
    let xs: Vec<f64> = branches.iter().map(|z| z.im.abs().powf(p)).collect();
    let ys: Vec<f64> = branches.iter().map(|z| z.re.abs().ln()).collect();
    let fit = fit_line(&xs, &ys, 3)?;
    let kappa = -fit.slope;
    if !(kappa > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "gap profile does not shrink towards the axis (slope {})",
            fit.slope
        )));
    }
    let mut ln_eps = f64::INFINITY;
    for &z in &report.eigenvalues {
        if is_tolerated_zero(report.kind, z) {
            continue;
        }
        if !(z.re < 0.0) {
            return Err(Error::DegenerateFit(format!(
                "eigenvalue {z} is not in the open left half plane"
            )));
        }
        ln_eps = ln_eps.min((-z.re).ln() + kappa * z.im.abs().powf(p));
    }
    let eps = (ln_eps + (1.0 - 1e-6f64).ln()).exp();
    Ok(GapFit {
        region: GapRegion::new(eps, kappa, k, report.kind)?,
        fit,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{LocalizationFlag, SpectrumOptions};

    fn report(kind: ModelKind, z: Vec<c64>) -> SpectrumReport {
        let n = z.len();
        SpectrumReport {
            kind,
            eigenvalues: z,
            residuals: vec![0.0; n],
            flags: vec![LocalizationFlag::Inside; n],
            conjugate_pairs: vec![None; n],
            multiplicities: vec![1; n],
            blocks: vec![0; n],
            modes: vec![None; n],
            damping_norm: 1.0,
            options: SpectrumOptions::default(),
        }
    }

    #[test]
    fn scalar_double_root_is_outside_gap() {
        let r = report(ModelKind::Wave, vec![c64::new(-1.0, 0.0), c64::new(-1.0, 0.0)]);
        let g = GapRegion::new(0.5, 1.0, 2.0, ModelKind::Wave).unwrap();
        assert!(spectral_gap_check(&r, &g).pass);
    }

    #[test]
    fn eigenvalue_close_to_axis_violates() {
        let r = report(ModelKind::Wave, vec![c64::new(-1e-9, 10.0)]);
        let g = GapRegion::new(0.1, 0.01, 2.0, ModelKind::Wave).unwrap();
        let c = spectral_gap_check(&r, &g);
        assert!(!c.pass);
        assert_eq!(c.violations.len(), 1);
    }

    #[test]
    fn synthetic_gaussian_gap_is_recovered() {
        let z: Vec<c64> = (1..=8)
            .map(|i| {
                let y = 0.5 * i as f64;
                c64::new(-(-(y * y)).exp(), y)
            })
            .collect();
        let r = report(ModelKind::Wave, z);
        let fit = fit_gap_region(&r, 2.0, 10).unwrap();
        assert!((fit.region.kappa - 1.0).abs() < 1e-10);
        assert!(fit.region.eps <= 1.0);
        assert!(spectral_gap_check(&r, &fit.region).pass);
    }

    #[test]
    fn frontier_skips_eigenvalues_farther_from_axis() {
        let z = vec![
            c64::new(-0.5, 1.0),
            c64::new(-2.0, 1.5),
            c64::new(-0.1, 2.0),
            c64::new(-0.3, 2.5),
            c64::new(-0.01, 3.0),
        ];
        let r = report(ModelKind::Wave, z);
        let b = branches_near_axis(&r, 10);
        assert_eq!(
            b,
            vec![c64::new(-0.5, 1.0), c64::new(-0.1, 2.0), c64::new(-0.01, 3.0)]
        );
    }
}
