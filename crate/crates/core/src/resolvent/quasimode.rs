use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::operators::{assemble_grushin_mode, DampingProfile, Grid1D, HermitianOperator, ModeLabel};

/// Ground state of one Grushin mode block, normalized in the weighted `L²`
/// norm and made real with a positive maximum.
#[derive(Clone, Debug)]
pub struct Quasimode {
    pub n: i64,
    pub k: f64,
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub quad_weight: f64,
    /// `‖(L_n − λ_n)φ_n‖`
    pub residual: f64,
    residual_vec: Vec<f64>,
}

impl Quasimode {
    pub fn norm(&self) -> f64 {
        (self.quad_weight * self.phi.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasimodeDefect {
    /// `‖bφ_n‖`
    pub bnorm: f64,
    /// `‖P(i√λ_n)φ_n‖`
    pub pencil_defect: f64,
    /// `‖φ_n‖_{L²(supp b)}`
    pub support_mass: f64,
}

/// Ground eigenpair with phase fixed so the largest entry is real positive.
fn ground_state(op: &HermitianOperator) -> Result<(f64, Vec<f64>)> {
    let block = op.matrix().block(0);
    let (vals, vecs) = linalg::hermitian_eigen(block)?;
    let m = block.nrows();
    let col: Vec<crate::c64> = (0..m).map(|i| vecs[(i, 0)]).collect();
    let pivot = col
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(linalg::creal(1.0));
    let phase = pivot.conj() / pivot.norm();
    let mut phi: Vec<f64> = col.iter().map(|z| (z * phase).re).collect();
    let norm = (op.quad_weight() * phi.iter().map(|x| x * x).sum::<f64>()).sqrt();
    phi.iter_mut().for_each(|x| *x /= norm);
    Ok((vals[0], phi))
}

pub fn quasimode(n: i64, k: f64, grid: &Grid1D) -> Result<Quasimode> {
    if n < 1 {
        return Err(invalid(format!("quasimodes are indexed by n >= 1, got {n}")));
    }
    let op = assemble_grushin_mode(n, k, grid)?;
    let (lambda, phi) = ground_state(&op)?;
    let phic: Vec<crate::c64> = phi.iter().map(|&x| linalg::creal(x)).collect();
    let lphi = op.apply(&phic);
    let residual_vec: Vec<f64> = lphi
        .iter()
        .zip(&phi)
        .map(|(l, p)| l.re - lambda * p)
        .collect();
    let h = grid.spacing();
    let residual = (h * residual_vec.iter().map(|x| x * x).sum::<f64>()).sqrt();
    Ok(Quasimode {
        n,
        k,
        lambda,
        phi,
        quad_weight: h,
        residual,
        residual_vec,
    })
}

/// Defect norms of a quasimode against an `x₁`-dependent damping profile.
pub fn quasimode_defect(q: &Quasimode, b: &DampingProfile) -> Result<QuasimodeDefect> {
    b.validate()?;
    let values = match b {
        DampingProfile::Constant(beta) => vec![*beta; q.phi.len()],
        DampingProfile::SeparableX1(v) => v.clone(),
        DampingProfile::SeparableX2(_) => {
            return Err(Error::Unsupported(
                "quasimode defects need a damping profile independent of x2".into(),
            ))
        }
    };
    if values.len() != q.phi.len() {
        return Err(Error::DimensionMismatch {
            expected: q.phi.len(),
            found: values.len(),
        });
    }
    let h = q.quad_weight;
    let mut b2 = 0.0;
    let mut mass = 0.0;
    let mut defect2 = 0.0;
    let sl = q.lambda.sqrt();
    for i in 0..q.phi.len() {
        let bp = values[i] * q.phi[i];
        b2 += bp * bp;
        if values[i] > 0.0 {
            mass += q.phi[i] * q.phi[i];
        }
        // P(i√λ)φ = (L − λ)φ + i√λ bφ with both parts real.
        defect2 += q.residual_vec[i].powi(2) + (sl * bp).powi(2);
    }
    Ok(QuasimodeDefect {
        bnorm: (h * b2).sqrt(),
        pencil_defect: (h * defect2).sqrt(),
        support_mass: (h * mass).sqrt(),
    })
}

/// Smallest eigenvalue of each listed mode block of a full operator.
pub fn ground_energies(op: &HermitianOperator, modes: &[i64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(modes.len());
    for &n in modes {
        let p = op
            .matrix()
            .modes()
            .iter()
            .position(|&m| m == Some(n))
            .or_else(|| match op.meta().mode {
                ModeLabel::Mode(m) if m == n => Some(0),
                _ => None,
            })
            .ok_or_else(|| invalid(format!("mode {n} is not a block of the operator")))?;
        let ev = linalg::hermitian_eigenvalues(op.matrix().block(p))?;
        out.push(ev[0]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_accurate() {
        let grid = Grid1D::new(80).unwrap();
        let q = quasimode(3, 2.0, &grid).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-12);
        assert!(q.residual <= 1e-9 * q.lambda);
        assert!(q.phi.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn defects_for_trivial_profiles() {
        let grid = Grid1D::new(40).unwrap();
        let q = quasimode(2, 2.0, &grid).unwrap();
        let d = quasimode_defect(&q, &DampingProfile::none()).unwrap();
        assert_eq!(d.bnorm, 0.0);
        assert!(d.pencil_defect <= q.residual + 1e-15);
        let d = quasimode_defect(&q, &DampingProfile::Constant(0.5)).unwrap();
        assert!((d.bnorm - 0.5).abs() < 1e-12);
        assert!((d.pencil_defect - 0.5 * q.lambda.sqrt()).abs() < 1e-9);
        assert!(quasimode_defect(&q, &DampingProfile::x2_indicator(0.0, 0.5)).is_err());
    }

    #[test]
    fn rejects_mode_zero() {
        let grid = Grid1D::new(10).unwrap();
        assert!(quasimode(0, 2.0, &grid).is_err());
    }
}
