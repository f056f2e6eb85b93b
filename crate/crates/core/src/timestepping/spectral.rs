use faer::{Mat, Scale};

use super::{energy_block, Method, Schedule, State, Trajectory};
use crate::c64;
use crate::error::Result;
use crate::generators::DampedGenerator;
use crate::linalg;

struct BlockModes {
    values: Vec<c64>,
    vectors: Mat<c64>,
    /// `h·V_wᴴ D V_w` with `V_w` the damped rows of the eigenvectors.
    dissipation: Mat<c64>,
}

/// Eigen-expansion `e^{tG} = V e^{tΛ} V⁻¹` of every generator block.
pub(super) struct SpectralPropagator {
    blocks: Vec<BlockModes>,
}

/// `(e^{wt} − 1)/w`, continuous at `w = 0`.
fn phi1(w: c64, t: f64) -> c64 {
    let wt = w * t;
    if wt.norm() < 1e-3 {
        let mut term = linalg::creal(t);
        let mut sum = term;
        for n in 2..8 {
            term = term * wt / n as f64;
            sum += term;
        }
        sum
    } else {
        (wt.exp() - linalg::creal(1.0)) / w
    }
}

impl SpectralPropagator {
    /// `None` when some block's eigenvector matrix has condition number above
    /// `cond_limit`.
    pub(super) fn new(gen: &DampedGenerator, cond_limit: f64) -> Result<Option<Self>> {
        let second = gen.kind().is_second_order();
        let h = linalg::creal(gen.quad_weight());
        let mut blocks = Vec::with_capacity(gen.num_blocks());
        for p in 0..gen.num_blocks() {
            let (values, vectors) = linalg::eigen(gen.matrix().block(p))?;
            let (lo, hi) = linalg::extreme_singular_values(&vectors)?;
            if !(hi <= cond_limit * lo) {
                return Ok(None);
            }
            let m = gen.partition()[p];
            let n = vectors.ncols();
            let rows = if second { m..2 * m } else { 0..m };
            let vw = Mat::from_fn(m, n, |i, j| vectors[(rows.start + i, j)]);
            let dissipation = vw.adjoint() * gen.damping_block(p) * &vw * Scale(h);
            blocks.push(BlockModes {
                values,
                vectors,
                dissipation,
            });
        }
        Ok(Some(Self { blocks }))
    }

    pub(super) fn eigenvalues(&self) -> impl Iterator<Item = c64> + '_ {
        self.blocks.iter().flat_map(|b| b.values.iter().copied())
    }

    pub(super) fn trajectory(
        &self,
        gen: &DampedGenerator,
        x0: &[c64],
        schedule: &Schedule,
        store: bool,
    ) -> Trajectory {
        let offsets = gen.matrix().offsets();
        let coeffs: Vec<Vec<c64>> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(p, b)| {
                let rhs = Mat::from_fn(offsets[p + 1] - offsets[p], 1, |i, _| x0[offsets[p] + i]);
                let c = linalg::solve(&b.vectors, &rhs);
                (0..c.nrows()).map(|i| c[(i, 0)]).collect()
            })
            .collect();

        let mut times = vec![0.0];
        times.extend_from_slice(schedule.times());
        let mut energies = Vec::with_capacity(times.len());
        let mut integral = Vec::with_capacity(times.len());
        let mut states = store.then(Vec::new);
        for &t in &times {
            let mut x = Vec::with_capacity(x0.len());
            let mut acc = 0.0;
            for (b, c) in self.blocks.iter().zip(&coeffs) {
                let ec: Vec<c64> = b
                    .values
                    .iter()
                    .zip(c)
                    .map(|(z, ci)| (z * t).exp() * ci)
                    .collect();
                x.extend(linalg::matvec(&b.vectors, &ec));
                if t > 0.0 {
                    let n = c.len();
                    let mut s = linalg::czero();
                    for j in 0..n {
                        let cj = c[j].conj();
                        let zj = b.values[j].conj();
                        for k in 0..n {
                            let hjk = b.dissipation[(j, k)];
                            if hjk.re == 0.0 && hjk.im == 0.0 {
                                continue;
                            }
                            s += cj * c[k] * hjk * phi1(zj + b.values[k], t);
                        }
                    }
                    acc += s.re;
                }
            }
            energies.push(energy_block(gen, &x));
            integral.push(acc);
            if let Some(st) = states.as_mut() {
                st.push(State::from_block(gen, &x, t));
            }
        }
        Trajectory {
            kind: gen.kind(),
            times,
            energies,
            damping_integral: integral,
            states,
            method: Method::Spectral,
            dt: None,
            refinements: Vec::new(),
            converged: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_matches_series_and_closed_form() {
        let t = 2.0;
        for w in [c64::new(1e-6, 2e-6), c64::new(-0.3, 1.1), c64::new(0.0, 0.0)] {
            let wt = w * t;
            let expected = if wt.norm() < 1e-3 {
                (linalg::creal(1.0) + wt / 2.0 + wt * wt / 6.0) * t
            } else {
                (wt.exp() - linalg::creal(1.0)) / w
            };
            assert!((phi1(w, t) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }
}
