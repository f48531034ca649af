//! Resolvent kernels, Green's functions, the Dirichlet heat kernel and the
//! transfer function of the feedback loop.

use crate::error::{domain, Error, Result};
use crate::modes::{lambda, phi, ModeVector};
use crate::params::{
    principal_sqrt, ComplexValue, Length, ProblemParams, SeriesControl, SeriesValue,
};
use num_complex::Complex64;
use std::f64::consts::PI;

const POLE_TOL: f64 = 1e-13;

/// Free-space resolvent kernel `exp(-sqrt(s)|x|) / (2 sqrt(s))`.
pub fn free_resolvent_kernel(s: ComplexValue, x: f64) -> Result<ComplexValue> {
    let r = principal_sqrt(s)?;
    Ok((-r * x.abs()).exp() / (2.0 * r))
}

/// Green's function of `s - d^2/dx^2` on (-L, L) with Dirichlet conditions.
///
/// Evaluated in a form where every exponential has non-positive real part.
pub fn dirichlet_green(s: ComplexValue, x: f64, y: f64, l: f64) -> Result<ComplexValue> {
    if !(l.is_finite() && l > 0.0) {
        return Err(domain(format!("L must be positive and finite, got {l}")));
    }
    if x.abs() > l || y.abs() > l {
        return Err(domain(format!("points ({x}, {y}) outside [-{l}, {l}]")));
    }
    let r = principal_sqrt(s)?;
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let one = Complex64::new(1.0, 0.0);
    let num = (-r * (hi - lo)).exp()
        * (one - (-2.0 * r * (l + lo)).exp())
        * (one - (-2.0 * r * (l - hi)).exp());
    let den = 2.0 * r * (one - (-4.0 * r * l).exp());
    Ok(num / den)
}

/// Unperturbed kernel: Dirichlet Green's function, or the free kernel on the line.
fn base_kernel(length: Length, s: ComplexValue, x: f64, y: f64) -> Result<ComplexValue> {
    match length {
        Length::Finite(l) => dirichlet_green(s, x, y, l),
        Length::Infinite => free_resolvent_kernel(s, x - y),
    }
}

/// Kernel of the resolvent of the rank-one perturbed operator.
pub fn perturbed_resolvent_kernel(
    p: &ProblemParams,
    s: ComplexValue,
    x: f64,
    y: f64,
) -> Result<ComplexValue> {
    let g = base_kernel(p.length, s, x, y)?;
    if p.beta == 0.0 {
        return Ok(g);
    }
    let g_x0_0 = base_kernel(p.length, s, p.x0, 0.0)?;
    let den = 1.0 + p.beta * g_x0_0;
    if den.norm() <= POLE_TOL * (1.0 + (p.beta * g_x0_0).norm()) {
        return Err(Error::Pole { s });
    }
    let g_x0_y = base_kernel(p.length, s, p.x0, y)?;
    let g_x_0 = base_kernel(p.length, s, x, 0.0)?;
    Ok(g - p.beta * g_x0_y * g_x_0 / den)
}

fn check_heat_args(t: f64, x: f64, l: f64, ctl: &SeriesControl) -> Result<()> {
    ctl.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("heat kernel needs t > 0, got {t}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(domain(format!("L must be positive and finite, got {l}")));
    }
    if x.abs() > l {
        return Err(domain(format!("x = {x} outside [-{l}, {l}]")));
    }
    Ok(())
}

/// Sums `term(k)` for k = 0, 1, ... until the bound of the next term drops below
/// `ctl.tol` with at least `MIN_TERMS` terms taken.
fn sum_series(
    ctl: &SeriesControl,
    term: impl Fn(usize) -> f64,
    bound: impl Fn(usize) -> f64,
) -> Result<SeriesValue> {
    let mut acc = 0.0;
    let mut k = 0;
    loop {
        if k >= SeriesControl::MIN_TERMS && bound(k) < ctl.tol {
            return Ok(SeriesValue {
                value: acc,
                terms: k,
            });
        }
        if k >= ctl.n_terms {
            return Err(Error::SeriesBudget {
                terms: ctl.n_terms,
                tol: ctl.tol,
            });
        }
        acc += term(k);
        k += 1;
    }
}

/// Eigen-series form of the Dirichlet heat kernel started from a point source at 0,
/// or its `order`-th time derivative (order 0 or 1).
fn heat_series(t: f64, x: f64, l: f64, ctl: &SeriesControl, order: i32) -> Result<SeriesValue> {
    let arg = PI * (x + l) / (2.0 * l);
    sum_series(
        ctl,
        |k| {
            let n = 2 * k + 1;
            let mu = lambda(n, l).powi(2);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (n as f64 * arg).sin() * (-t * mu).exp() * (-mu).powi(order) / l
        },
        |k| {
            let mu = lambda(2 * k + 1, l).powi(2);
            (-t * mu).exp() * mu.powi(order) / l
        },
    )
}

/// Gaussian `exp(-x^2/4t)/sqrt(4 pi t)` and its time derivative.
fn gaussian(t: f64, x: f64, order: i32) -> f64 {
    let g = (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    if order == 0 {
        g
    } else {
        g * (x * x / (4.0 * t * t) - 0.5 / t)
    }
}

/// Method-of-images form from the 4L-periodic odd extension: positive sources at
/// `4Ln`, negative sources at `4Ln + 2L`.
fn heat_images(t: f64, x: f64, l: f64, ctl: &SeriesControl, order: i32) -> Result<SeriesValue> {
    let pair = |n: i64| {
        let c = 4.0 * l * n as f64;
        gaussian(t, x - c, order) - gaussian(t, x - c - 2.0 * l, order)
    };
    let prefactor = if order == 0 {
        1.0 / (4.0 * PI * t).sqrt()
    } else {
        1.0 / (4.0 * PI * t).sqrt() / t
    };
    sum_series(
        ctl,
        |k| {
            if k == 0 {
                pair(0)
            } else {
                pair(k as i64) + pair(-(k as i64))
            }
        },
        |k| {
            // nearest source belonging to shell k
            let d = (4.0 * l * k as f64 - 2.0 * l - x.abs()).max(0.0);
            let poly = if order == 0 {
                1.0
            } else {
                1.0 + d * d / (4.0 * t)
            };
            4.0 * prefactor * poly * (-d * d / (4.0 * t)).exp()
        },
    )
}

/// Eigen-series evaluation of `k_L(t, x)` regardless of the crossover time.
pub fn heat_kernel_series(t: f64, x: f64, l: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_heat_args(t, x, l, ctl)?;
    heat_series(t, x, l, ctl, 0)
}

/// Image-sum evaluation of `k_L(t, x)` regardless of the crossover time.
pub fn heat_kernel_images(t: f64, x: f64, l: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_heat_args(t, x, l, ctl)?;
    heat_images(t, x, l, ctl, 0)
}

/// Dirichlet heat kernel `k_L(t, x) = (exp(-t A_L) delta_0)(x)`.
pub fn heat_kernel(t: f64, x: f64, l: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_heat_args(t, x, l, ctl)?;
    if t >= ctl.crossover(l) {
        heat_series(t, x, l, ctl, 0)
    } else {
        heat_images(t, x, l, ctl, 0)
    }
}

/// Time derivative of the heat kernel.
pub fn heat_kernel_dt(t: f64, x: f64, l: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_heat_args(t, x, l, ctl)?;
    if t >= ctl.crossover(l) {
        heat_series(t, x, l, ctl, 1)
    } else {
        heat_images(t, x, l, ctl, 1)
    }
}

/// Convolution kernel `a_L(t) = -k_L(t, x0)`, extended by zero at `t = 0`.
pub fn kernel_a(t: f64, p: &ProblemParams, ctl: &SeriesControl) -> Result<f64> {
    let l = p.finite_length()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(-heat_kernel(t, p.x0, l, ctl)?.value)
}

/// Time derivative `a_L'(t)`, zero at `t = 0`.
pub fn kernel_a_prime(t: f64, p: &ProblemParams, ctl: &SeriesControl) -> Result<f64> {
    let l = p.finite_length()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(-heat_kernel_dt(t, p.x0, l, ctl)?.value)
}

/// Nome for which `(1/(2L)) theta1(q, pi (x+L)/(2L)) = k_L(t, x)`.
pub fn heat_nome(t: f64, l: f64) -> f64 {
    (-PI * PI * t / (l * l)).exp()
}

/// Angle `alpha(L, x0) = pi (x0 + L) / (2L)` entering the theta representation.
pub fn theta_angle(x0: f64, l: f64) -> f64 {
    PI * (x0 + l) / (2.0 * l)
}

/// Jacobi theta function `2 sum_k (-1)^k q^((k+1/2)^2) sin((2k+1) z)`.
pub fn theta1(q: f64, z: f64, tol: f64) -> Result<SeriesValue> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("nome must lie in (0, 1), got {q}")));
    }
    let ctl = SeriesControl::with_tol(tol);
    ctl.validate()?;
    let ln_q = q.ln();
    sum_series(
        &ctl,
        |k| {
            let e = (k as f64 + 0.5).powi(2);
            let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
            sign * (e * ln_q).exp() * ((2 * k + 1) as f64 * z).sin()
        },
        |k| 2.0 * ((k as f64 + 0.5).powi(2) * ln_q).exp(),
    )
}

/// Transfer function from actuation at 0 to measurement at x0.
pub fn transfer_function(p: &ProblemParams, s: ComplexValue) -> Result<ComplexValue> {
    let r = principal_sqrt(s)?;
    match p.length {
        Length::Infinite => Ok((-r * p.x0).exp() / (2.0 * r)),
        Length::Finite(l) => {
            let one = Complex64::new(1.0, 0.0);
            let den = 2.0 * r * (one + (-2.0 * r * l).exp());
            if den.norm() == 0.0 || !den.norm().is_finite() {
                return Err(Error::Pole { s });
            }
            Ok((-r * p.x0).exp() * (one - (-2.0 * r * (l - p.x0)).exp()) / den)
        }
    }
}

/// `G(i omega)` for real `omega > 0`.
pub fn transfer_iw(p: &ProblemParams, omega: f64) -> Result<ComplexValue> {
    if !(omega > 0.0) {
        return Err(domain(format!("frequency must be positive, got {omega}")));
    }
    transfer_function(p, Complex64::new(0.0, omega))
}

/// Fourier transforms of `a_L` and `a_L'` at frequency `omega`.
///
/// The series is summed in Kummer form: the `1/mu_k` part is replaced by its
/// closed-form value `(L - x0)/2`, leaving terms that decay like `k^-4`.
pub fn kernel_fourier(
    p: &ProblemParams,
    omega: f64,
    ctl: &SeriesControl,
) -> Result<(ComplexValue, ComplexValue)> {
    let l = p.finite_length()?;
    ctl.validate()?;
    if omega == 0.0 || !omega.is_finite() {
        return Err(domain(format!(
            "kernel_fourier needs finite omega != 0, got {omega}"
        )));
    }
    let alpha = theta_angle(p.x0, l);
    let iw = Complex64::new(0.0, omega);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = 0usize;
    loop {
        let mu = lambda(2 * k + 1, l).powi(2);
        if k >= SeriesControl::MIN_TERMS && omega.abs() / (l * mu * mu) < ctl.tol {
            break;
        }
        if k >= ctl.n_terms {
            return Err(Error::SeriesBudget {
                terms: ctl.n_terms,
                tol: ctl.tol,
            });
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * ((2 * k + 1) as f64 * alpha).sin();
        acc += c / (mu * (iw + mu));
        k += 1;
    }
    let a_hat = -(l - p.x0) / 2.0 + iw * acc / l;
    Ok((a_hat, iw * a_hat))
}

/// Forcing term `g_L(t) = sum_k <u0, phi_k> phi_k(x0) exp(-t lambda_k^2)`.
pub fn forcing(t: f64, p: &ProblemParams, u0: &ModeVector) -> Result<f64> {
    forcing_impl(t, p, u0, 0)
}

/// Termwise time derivative of the forcing term.
pub fn forcing_prime(t: f64, p: &ProblemParams, u0: &ModeVector) -> Result<f64> {
    forcing_impl(t, p, u0, 1)
}

fn forcing_impl(t: f64, p: &ProblemParams, u0: &ModeVector, order: i32) -> Result<f64> {
    let l = p.finite_length()?;
    if !(t >= 0.0) {
        return Err(domain(format!("forcing needs t >= 0, got {t}")));
    }
    if (u0.l - l).abs() > 1e-12 * l {
        return Err(domain(format!(
            "initial data lives on L = {}, problem has L = {l}",
            u0.l
        )));
    }
    Ok(u0
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| {
            let mu = lambda(i + 1, l).powi(2);
            c * phi(i + 1, p.x0, l) * (-t * mu).exp() * (-mu).powi(order)
        })
        .sum())
}
