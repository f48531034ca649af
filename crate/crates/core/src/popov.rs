//! Popov curves, critical gains and the frequency-domain stability check.

use crate::error::{domain, Result};
use crate::kernels::transfer_iw;
use crate::params::{Length, ProblemParams};
use crate::roots::{brent, first_sign_change, grid_max, log_grid};
use crate::spectrum::crossing_params;
use std::f64::consts::PI;

/// `b_pi = 9 pi^2 / 8`, so that `omega1 = b_pi / x0^2` on the line.
pub fn b_pi() -> f64 {
    9.0 * PI * PI / 8.0
}

/// `c_pi = (3 pi / sqrt 2) exp(3 pi / 4)`, so that `beta1 = c_pi / x0` on the line.
pub fn c_pi() -> f64 {
    3.0 * PI / 2f64.sqrt() * (0.75 * PI).exp()
}

/// `d_pi = 9 pi^3 / (8 pi + 32/3)`, so that `1/q = d_pi / x0^2` on the line.
pub fn d_pi() -> f64 {
    9.0 * PI.powi(3) / (8.0 * PI + 32.0 / 3.0)
}

/// Limit of `omega1 q` for the line, `(3 pi + 4) / (3 pi)`.
pub fn line_product() -> f64 {
    (3.0 * PI + 4.0) / (3.0 * PI)
}

/// Popov tangent slope parameter of the line problem, `q(x0) = x0^2 / d_pi`.
pub fn q_line(x0: f64) -> f64 {
    x0 * x0 / d_pi()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopovSample {
    pub omega: f64,
    /// `Re G(i omega)`
    pub x: f64,
    /// `omega Im G(i omega)`
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopovLine {
    pub q: f64,
    pub beta: f64,
}

impl PopovLine {
    pub fn new(q: f64, beta: f64) -> Result<Self> {
        if !(q > 0.0 && beta > 0.0) {
            return Err(domain(format!(
                "Popov line needs q > 0 and beta > 0, got q={q}, beta={beta}"
            )));
        }
        Ok(Self { q, beta })
    }

    /// `F(x, y) = y - x/q - 1/(q beta)`.
    pub fn f(&self, x: f64, y: f64) -> f64 {
        y - x / self.q - 1.0 / (self.q * self.beta)
    }

    pub fn f_sample(&self, s: &PopovSample) -> f64 {
        self.f(s.x, s.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalParams {
    pub omega1: f64,
    pub beta1: f64,
    pub q: f64,
    pub product: f64,
}

pub fn popov_sample(p: &ProblemParams, omega: f64) -> Result<PopovSample> {
    let g = transfer_iw(p, omega)?;
    Ok(PopovSample {
        omega,
        x: g.re,
        y: omega * g.im,
    })
}

pub fn popov_curve(p: &ProblemParams, omegas: &[f64]) -> Result<Vec<PopovSample>> {
    omegas.iter().map(|&w| popov_sample(p, w)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopovSign {
    /// `G(i omega_k) < 0`
    Plus,
    /// `G(i omega_k) > 0`
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopovSetPoint {
    pub k: usize,
    pub omega: f64,
    pub sign: PopovSign,
}

/// Frequencies where the line Popov curve meets the real axis.
pub fn popov_set_line(x0: f64, k_max: usize) -> Result<Vec<PopovSetPoint>> {
    let p = ProblemParams::line(x0, 0.0)?;
    (1..=k_max)
        .map(|k| {
            let n = (4 * k - 1) as f64;
            let omega = n * n * PI * PI / (8.0 * x0 * x0);
            let g = transfer_iw(&p, omega)?;
            let sign = if g.re < 0.0 {
                PopovSign::Plus
            } else {
                PopovSign::Minus
            };
            Ok(PopovSetPoint { k, omega, sign })
        })
        .collect()
}

pub fn critical_params_line(x0: f64) -> Result<CriticalParams> {
    if !(x0 > 0.0) {
        return Err(domain(format!("x0 must be positive, got {x0}")));
    }
    let omega1 = b_pi() / (x0 * x0);
    let q = q_line(x0);
    Ok(CriticalParams {
        omega1,
        beta1: c_pi() / x0,
        q,
        product: omega1 * q,
    })
}

/// Scaled pieces of `G_delta(i omega) = sinh(delta sqrt(i omega)) / (2 sqrt(i omega) cosh(sqrt(i omega)))`
/// on the unit interval: `Re G = <A,B>/D`, `Im G = det(A,B)/D`, each factor multiplied by a
/// positive exponential so nothing overflows.
#[derive(Debug, Clone, Copy)]
struct Abd {
    a: [f64; 2],
    b: [f64; 2],
    d: f64,
    /// `Re G = <A,B>/D * scale` and likewise for `Im G`
    scale: f64,
}

fn abd(delta: f64, omega: f64) -> Abd {
    let r = (omega / 2.0).sqrt();
    let (dr, e) = (delta * r, |x: f64| (-2.0 * x).exp());
    // cosh(x) e^-x and sinh(x) e^-x
    let ch = |x: f64| 0.5 * (1.0 + e(x));
    let sh = |x: f64| 0.5 * (1.0 - e(x));
    let a = [ch(dr) * dr.sin(), dr.cos() * sh(dr)];
    let b = [
        r.cos() * ch(r) + r.sin() * sh(r),
        r.cos() * ch(r) - r.sin() * sh(r),
    ];
    let w = (2.0 * omega).sqrt();
    // D e^{-w} = w (cos w e^{-w} + cosh w e^{-w})
    let d = w * (w.cos() * (-w).exp() + 0.5 * (1.0 + (-2.0 * w).exp()));
    Abd {
        a,
        b,
        d,
        scale: ((delta - 1.0) * r).exp(),
    }
}

/// `G_delta(i omega)` from the decomposition, as `(Re, Im)`.
pub fn delta_transfer(delta: f64, omega: f64) -> (f64, f64) {
    let v = abd(delta, omega);
    let dot = v.a[0] * v.b[0] + v.a[1] * v.b[1];
    let det = v.a[0] * v.b[1] - v.a[1] * v.b[0];
    (dot / v.d * v.scale, det / v.d * v.scale)
}

/// Critical frequency, gain and tangent slope on the unit interval with `delta = (L - x0)/L`.
pub fn critical_params_delta(delta: f64) -> Result<CriticalParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let x0 = 1.0 - delta;
    let lo = 1e-2;
    let hi = 1e3 / (x0 * x0);
    let grid = log_grid(lo, hi, 8000);
    let sign_det = |w: f64| {
        let v = abd(delta, w);
        v.a[0] * v.b[1] - v.a[1] * v.b[0]
    };
    let omega1 = first_sign_change(sign_det, &grid, 1e-15, |w| delta_transfer(delta, w).0 < 0.0)?;
    let beta1 = -1.0 / delta_transfer(delta, omega1).0;
    let h = omega1 * 1e-6;
    let x = |w: f64| delta_transfer(delta, w).0;
    let y = |w: f64| w * delta_transfer(delta, w).1;
    let slope = (y(omega1 + h) - y(omega1 - h)) / (x(omega1 + h) - x(omega1 - h));
    let q = 1.0 / slope;
    Ok(CriticalParams {
        omega1,
        beta1,
        q,
        product: omega1 * q,
    })
}

/// Critical parameters of the interval problem via the unit-interval family:
/// `omega1 = omega1(delta)/L^2`, `beta1 = beta(delta)/L`, `q = q(delta) L^2`.
pub fn critical_params_interval(p: &ProblemParams) -> Result<CriticalParams> {
    let l = p.finite_length()?;
    let c = critical_params_delta((l - p.x0) / l)?;
    Ok(CriticalParams {
        omega1: c.omega1 / (l * l),
        beta1: c.beta1 / l,
        q: c.q * l * l,
        product: c.product,
    })
}

/// Critical parameters for either geometry.
pub fn critical_params(p: &ProblemParams) -> Result<CriticalParams> {
    match p.length {
        Length::Infinite => critical_params_line(p.x0),
        Length::Finite(_) => critical_params_interval(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub max_f: f64,
    pub argmax_omega: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridControl {
    pub n_nodes: usize,
    /// Lower end of the log grid as a fraction of `omega1`.
    pub lo_factor: f64,
    /// Upper end as a multiple of `omega1`.
    pub hi_factor: f64,
    pub tol: f64,
}

impl Default for GridControl {
    fn default() -> Self {
        Self {
            n_nodes: 2000,
            lo_factor: 1e-4,
            hi_factor: 40.0,
            tol: 1e-10,
        }
    }
}

/// Maximum of `F_{q,beta}` along the Popov curve; the criterion holds iff it is `<= tol`.
///
/// `window` overrides the default `[lo_factor omega1, hi_factor omega1]`.
pub fn verify_criterion(
    p: &ProblemParams,
    line: PopovLine,
    window: Option<(f64, f64)>,
    ctl: GridControl,
) -> Result<CriterionReport> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => {
            let (w1, _) = frequency_scale(p)?;
            (ctl.lo_factor * w1, ctl.hi_factor * w1)
        }
    };
    if !(lo > 0.0 && hi > lo) {
        return Err(domain(format!("invalid frequency window [{lo}, {hi}]")));
    }
    let grid = log_grid(lo, hi, ctl.n_nodes.max(3));
    let f = |w: f64| {
        popov_sample(p, w)
            .map(|s| line.f_sample(&s))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (argmax_omega, max_f) = grid_max(f, &grid);
    Ok(CriterionReport {
        max_f,
        argmax_omega,
        satisfied: max_f <= ctl.tol,
    })
}

fn frequency_scale(p: &ProblemParams) -> Result<(f64, f64)> {
    match p.length {
        Length::Infinite => {
            let c = critical_params_line(p.x0)?;
            Ok((c.omega1, c.beta1))
        }
        Length::Finite(_) => crossing_params(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaHat {
    pub beta_hat: f64,
    pub m: f64,
    pub argmax_omega: f64,
}

/// `beta_hat = 1 / (M q(x0))` with `M = max H`, `H = omega Im G - Re G / q(x0)`.
pub fn beta_hat(p: &ProblemParams) -> Result<BetaHat> {
    p.finite_length()?;
    let q = q_line(p.x0);
    let (w1, _) = crossing_params(p)?;
    let h = |w: f64| {
        transfer_iw(p, w)
            .map(|g| w * g.im - g.re / q)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid = log_grid(w1 * 1e-6, w1 * 1e3, 20_000);
    let (argmax_omega, m) = grid_max(h, &grid);
    if !(m > 0.0) {
        return Err(domain(format!("max of H is not positive ({m:e})")));
    }
    Ok(BetaHat {
        beta_hat: 1.0 / (m * q),
        m,
        argmax_omega,
    })
}

/// `T(y) = (y^2 - d y - d/2) / (2 y^3 - y^2 - d/2)` with `d = d_pi`.
pub fn t_function(y: f64) -> Result<f64> {
    let d = d_pi();
    let den = 2.0 * y.powi(3) - y * y - d / 2.0;
    if !(y > 0.0) {
        return Err(domain(format!("T needs y > 0, got {y}")));
    }
    if den.abs() < 1e-14 {
        return Err(domain(format!("T has a pole at y = {y}")));
    }
    Ok((y * y - d * y - d / 2.0) / den)
}

/// The real root `y_s` of `2 y^3 - y^2 - d_pi/2`.
pub fn t_pole() -> f64 {
    let d = d_pi();
    brent(|y| 2.0 * y.powi(3) - y * y - d / 2.0, 0.0, 3.0, 1e-16)
        .expect("cubic has a sign change on [0, 3]")
}

/// `2 cos(y) y^2 (1+T) + d cos(y) (1-T) + (4 d / c) y e^y`; at solutions of `tan y = T(y)`
/// it equals `-4 y e^y F` on the line Popov curve with `x0 = 1`, `q = q(1)`, `beta = beta1(1)`.
pub fn final_inequality(y: f64) -> Result<f64> {
    let t = t_function(y)?;
    let d = d_pi();
    Ok(
        2.0 * y.cos() * y * y * (1.0 + t)
            + d * y.cos() * (1.0 - t)
            + 4.0 * d / c_pi() * y * y.exp(),
    )
}

/// Solutions of `tan y = T(y)` in `(y_s, y_max]`, the candidate critical points of `F`.
pub fn critical_points(y_max: f64) -> Vec<f64> {
    let ys = t_pole();
    let g = |y: f64| y.sin() - t_function(y).unwrap_or(f64::NAN) * y.cos();
    let n = ((y_max - ys) * 1000.0).ceil() as usize;
    let grid: Vec<f64> = (1..=n)
        .map(|i| ys + (y_max - ys) * i as f64 / n as f64)
        .collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (g(w[0]), g(w[1]));
        if a * b < 0.0 {
            if let Ok(r) = brent(g, w[0], w[1], 1e-15) {
                out.push(r);
            }
        }
    }
    out
}
