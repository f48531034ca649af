//! Problem parameters, series controls and the principal square root.

use crate::error::{domain, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex scalar used for Laplace variables and kernel values.
pub type ComplexValue = Complex64;

/// Half-length of the spatial domain. The line is a separate state, never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Finite(f64),
    Infinite,
}

impl Length {
    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(l) => Some(l),
            Length::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Length::Infinite)
    }
}

impl std::fmt::Display for Length {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Length::Finite(l) => write!(f, "{l}"),
            Length::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Length {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Length::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| domain(format!("cannot parse length {s:?}")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Length::Infinite);
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(domain(format!("length must be positive, got {v}")));
        }
        Ok(Length::Finite(v))
    }
}

/// The triple (L, x0, beta) indexing every computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub length: Length,
    pub x0: f64,
    pub beta: f64,
}

impl ProblemParams {
    pub fn new(length: Length, x0: f64, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(domain(format!("beta must be finite, got {beta}")));
        }
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(domain(format!("x0 must be positive, got {x0}")));
        }
        if let Length::Finite(l) = length {
            if !(l.is_finite() && l > 0.0) {
                return Err(domain(format!("L must be positive, got {l}")));
            }
            if x0 >= l {
                return Err(domain(format!("need 0 < x0 < L, got x0={x0}, L={l}")));
            }
        }
        Ok(Self { length, x0, beta })
    }

    pub fn interval(l: f64, x0: f64, beta: f64) -> Result<Self> {
        Self::new(Length::Finite(l), x0, beta)
    }

    pub fn line(x0: f64, beta: f64) -> Result<Self> {
        Self::new(Length::Infinite, x0, beta)
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    /// The finite half-length, or a domain error for the line.
    pub fn finite_length(&self) -> Result<f64> {
        self.length
            .finite()
            .ok_or_else(|| domain("operation requires a finite interval"))
    }
}

/// Truncation controls for the kernel series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Term budget; running out of it is an error.
    pub n_terms: usize,
    pub tol: f64,
    /// Below this time the image sum is used, above it the eigen series.
    /// `None` selects `0.1 (2L/pi)^2`.
    pub t_crossover: Option<f64>,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            n_terms: 1_000_000,
            tol: 1e-15,
            t_crossover: None,
        }
    }
}

impl SeriesControl {
    pub const MIN_TERMS: usize = 8;

    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn crossover(&self, l: f64) -> f64 {
        self.t_crossover.unwrap_or_else(|| default_crossover(l))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_terms < 1 {
            return Err(domain("n_terms must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(domain("tol must be positive"));
        }
        if let Some(t) = self.t_crossover {
            if !(t > 0.0) {
                return Err(domain("t_crossover must be positive"));
            }
        }
        Ok(())
    }
}

pub fn default_crossover(l: f64) -> f64 {
    0.1 * (2.0 * l / PI).powi(2)
}

/// A truncated series value together with the number of terms summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
}

/// True when `s` lies on the closed negative real axis.
pub fn on_branch_cut(s: ComplexValue) -> bool {
    s.im == 0.0 && s.re <= 0.0
}

/// Principal square root with `Re sqrt(s) > 0`; the cut `(-inf, 0]` is rejected.
pub fn principal_sqrt(s: ComplexValue) -> Result<ComplexValue> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(domain(format!("non-finite Laplace variable {s}")));
    }
    if on_branch_cut(s) {
        return Err(domain(format!("s = {s} lies on the branch cut (-inf, 0]")));
    }
    Ok(s.sqrt())
}
