use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Uniform interior grid on `(-1, 1)` with the Dirichlet endpoints removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    n_interior: usize,
    spacing: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior < 2 {
            return Err(invalid(format!(
                "grid needs at least 2 interior nodes, got {n_interior}"
            )));
        }
        let np1 = (n_interior + 1) as f64;
        // (2i - (N+1))/(N+1) is exactly antisymmetric under i -> N+1-i.
        let nodes = (1..=n_interior)
            .map(|i| (2.0 * i as f64 - np1) / np1)
            .collect();
        Ok(Self {
            n_interior,
            spacing: 2.0 / np1,
            nodes,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Fourier modes `n ∈ {-M, …, M}` of `ℝ/ℤ`, with angular factors `ω_n = 2πn`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierModeSet {
    max_frequency: usize,
}

impl FourierModeSet {
    pub fn new(max_frequency: usize) -> Self {
        Self { max_frequency }
    }

    pub fn max_frequency(&self) -> usize {
        self.max_frequency
    }

    pub fn len(&self) -> usize {
        2 * self.max_frequency + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> + Clone {
        let m = self.max_frequency as i64;
        -m..=m
    }

    pub fn omega(n: i64) -> f64 {
        2.0 * PI * n as f64
    }

    /// Position of mode `n` in the block ordering.
    pub fn index_of(&self, n: i64) -> Option<usize> {
        let m = self.max_frequency as i64;
        (-m..=m).contains(&n).then(|| (n + m) as usize)
    }
}
