//! Dirichlet sine eigenbasis on (-L, L).

use crate::error::{domain, Result};
use std::f64::consts::PI;

/// `k`-th eigenvalue root `lambda_k = k pi / (2L)`; the eigenvalue is its square.
pub fn lambda(k: usize, l: f64) -> f64 {
    k as f64 * PI / (2.0 * l)
}

/// Normalized eigenfunction `(1/sqrt L) sin(k pi (x+L) / (2L))`.
pub fn phi(k: usize, x: f64, l: f64) -> f64 {
    (k as f64 * PI * (x + l) / (2.0 * l)).sin() / l.sqrt()
}

/// Coefficients of a function in the sine basis, `coeffs[k-1]` pairs with `phi(k, .)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    pub coeffs: Vec<f64>,
    pub l: f64,
}

impl ModeVector {
    pub fn new(coeffs: Vec<f64>, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(domain(format!("L must be positive and finite, got {l}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain("mode coefficients must be finite"));
        }
        Ok(Self { coeffs, l })
    }

    pub fn zeros(n_modes: usize, l: f64) -> Self {
        Self {
            coeffs: vec![0.0; n_modes],
            l,
        }
    }

    /// The single mode `phi(k, .)` embedded in `n_modes` coefficients.
    pub fn single(k: usize, n_modes: usize, l: f64) -> Result<Self> {
        if k == 0 || k > n_modes {
            return Err(domain(format!("mode {k} outside 1..={n_modes}")));
        }
        let mut v = Self::zeros(n_modes, l);
        v.coeffs[k - 1] = 1.0;
        Ok(v)
    }

    /// L2 projection of `u` onto the first `n_modes` modes by composite Simpson quadrature.
    pub fn project(
        u: impl Fn(f64) -> f64,
        l: f64,
        n_modes: usize,
        n_panels: usize,
    ) -> Result<Self> {
        let n = 2 * n_panels.max(n_modes * 4).div_ceil(2);
        let h = 2.0 * l / n as f64;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let x = -l + i as f64 * h;
                (x, w * h / 3.0 * u(x))
            })
            .collect();
        let coeffs = (1..=n_modes)
            .map(|k| samples.iter().map(|&(x, wu)| wu * phi(k, x, l)).sum())
            .collect();
        Self::new(coeffs, l)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * phi(i + 1, x, self.l))
            .sum()
    }

    /// The weighted norm proxy `sum (1 + k^2) c_k^2`.
    pub fn h1_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = (i + 1) as f64;
                (1.0 + k * k) * c * c
            })
            .sum()
    }

    /// Tail of the weighted norm beyond the first `n` modes.
    pub fn h1_tail_sq(&self, n: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(n)
            .map(|(i, c)| {
                let k = (i + 1) as f64;
                (1.0 + k * k) * c * c
            })
            .sum()
    }
}
