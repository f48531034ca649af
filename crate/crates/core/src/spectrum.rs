//! Eigenvalues of the perturbed operator from its characteristic functions.
//!
//! Eigenvalues of `-A` are written `s = lambda^2`; conjugate pairs are stored
//! once, with `lambda` in the closed first quadrant.

use crate::error::{domain, Error, Result};
use crate::kernels::transfer_iw;
use crate::params::{ComplexValue, Length, ProblemParams};
use crate::roots::{brent, first_sign_change, log_grid, newton};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Newton residual target on the normalized characteristic functions.
pub const ROOT_TOL: f64 = 1e-9;
/// Absolute tolerance on `Re s` when bisecting an axis crossing.
pub const CROSSING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicPoint {
    pub lambda: ComplexValue,
    pub s: ComplexValue,
    pub beta: f64,
    pub residual: f64,
}

impl CharacteristicPoint {
    fn new(lambda: ComplexValue, beta: f64, residual: f64) -> Self {
        // conjugate pairs are stored by their upper member
        let lambda = if lambda.im < 0.0 {
            lambda.conj()
        } else {
            lambda
        };
        Self {
            lambda,
            s: lambda * lambda,
            beta,
            residual,
        }
    }
}

/// `2 lambda + beta exp(-x0 lambda)`.
pub fn characteristic_line(lambda: ComplexValue, beta: f64, x0: f64) -> ComplexValue {
    2.0 * lambda + beta * (-x0 * lambda).exp()
}

/// The line characteristic divided by `2 lambda`, i.e. `1 + beta G(lambda^2)`.
pub fn normalized_line(lambda: ComplexValue, beta: f64, x0: f64) -> ComplexValue {
    1.0 + beta * (-x0 * lambda).exp() / (2.0 * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCharacteristic {
    pub sin_factor: ComplexValue,
    pub h: ComplexValue,
    pub j: ComplexValue,
    pub k: ComplexValue,
}

fn sin_over(lambda: ComplexValue, len: f64) -> ComplexValue {
    if lambda == Complex64::new(0.0, 0.0) {
        Complex64::new(len, 0.0)
    } else {
        (lambda * len).sin() / lambda
    }
}

fn sinh_over(lambda: ComplexValue, len: f64) -> ComplexValue {
    if lambda == Complex64::new(0.0, 0.0) {
        Complex64::new(len, 0.0)
    } else {
        (lambda * len).sinh() / lambda
    }
}

/// `sin(lambda L)` together with `H_L`, `J_L` and `K_L` at `lambda`.
pub fn characteristic_interval(
    lambda: ComplexValue,
    p: &ProblemParams,
) -> Result<IntervalCharacteristic> {
    let l = p.finite_length()?;
    let l0 = l - p.x0;
    let h = 2.0 * (lambda * l).cos() + p.beta * sin_over(lambda, l0);
    let j = 2.0 * (lambda * l).cosh() + p.beta * sinh_over(lambda, l0);
    Ok(IntervalCharacteristic {
        sin_factor: (lambda * l).sin(),
        h,
        j,
        k: normalized_interval(lambda, p.beta, p.x0, l),
    })
}

/// `K_L(lambda) = 1 + beta sinh(lambda (L - x0)) / (2 lambda cosh(lambda L))`,
/// evaluated with decaying exponentials only.
pub fn normalized_interval(lambda: ComplexValue, beta: f64, x0: f64, l: f64) -> ComplexValue {
    // K is even in lambda
    let z = if lambda.re < 0.0 { -lambda } else { lambda };
    let l0 = l - x0;
    if z.norm() < 1e-8 {
        return Complex64::new(1.0 + beta * l0 / 2.0, 0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    let ratio = (-z * x0).exp() * (one - (-2.0 * z * l0).exp()) / (one + (-2.0 * z * l).exp());
    1.0 + beta * ratio / (2.0 * z)
}

fn normalized(length: Length, lambda: ComplexValue, beta: f64, x0: f64) -> ComplexValue {
    match length {
        Length::Infinite => normalized_line(lambda, beta, x0),
        Length::Finite(l) => normalized_interval(lambda, beta, x0, l),
    }
}

/// Newton polish of a characteristic root for the given gain.
pub fn polish(
    length: Length,
    x0: f64,
    beta: f64,
    guess: ComplexValue,
) -> Result<CharacteristicPoint> {
    let (lambda, res) = newton(
        |z| normalized(length, z, beta, x0),
        guess,
        ROOT_TOL * 1e-3,
        100,
    )
    .or_else(|_| newton(|z| normalized(length, z, beta, x0), guess, ROOT_TOL, 200))?;
    // K_L is even, so the interval root may be reflected into Re lambda >= 0
    let lambda = if !length.is_infinite() && lambda.re < 0.0 {
        -lambda
    } else {
        lambda
    };
    Ok(CharacteristicPoint::new(lambda, beta, res))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySearchResult {
    pub m: f64,
    pub gamma0: f64,
    pub beta_onset: f64,
}

/// `gamma0(m) = pi - atan(m)`, equal to `pi/2` for `m = inf`.
pub fn gamma0(m: f64) -> f64 {
    if m.is_infinite() {
        PI / 2.0
    } else {
        PI - m.atan()
    }
}

/// Onset gain `Phi(m) = 2 gamma0 exp(gamma0/m) / sin(gamma0)` for `x0 = 1`.
pub fn phi_onset(m: f64) -> f64 {
    let g = gamma0(m);
    let e = if m.is_infinite() { 1.0 } else { (g / m).exp() };
    2.0 * g * e / g.sin()
}

/// Central finite difference of `Phi` at `m`.
pub fn phi_onset_derivative(m: f64) -> f64 {
    let h = 1e-5 * m.max(1.0);
    (phi_onset(m + h) - phi_onset(m - h)) / (2.0 * h)
}

/// Ray parameters for slope `m` with the onset gain scaled to sensor position `x0`.
pub fn ray_onset(m: f64, x0: f64) -> Result<RaySearchResult> {
    if !(m > 0.0) {
        return Err(domain(format!("ray slope must be positive, got {m}")));
    }
    Ok(RaySearchResult {
        m,
        gamma0: gamma0(m),
        beta_onset: phi_onset(m) / x0,
    })
}

/// Smallest `gamma >= gamma0(m)` with `2 gamma = beta x0 exp(-gamma/m) sin(gamma)`
/// (in units where `x0 = 1`), rescaled by `1/x0`. `None` if no root exists below `pi`.
pub fn ray_search(m: f64, beta: f64, x0: f64) -> Option<f64> {
    if !(m > 0.0) || !(beta > 0.0) || !(x0 > 0.0) {
        return None;
    }
    let b = beta * x0;
    let g0 = gamma0(m);
    let h = |g: f64| {
        let e = if m.is_infinite() { 1.0 } else { (-g / m).exp() };
        b * e * g.sin() - 2.0 * g
    };
    let h0 = h(g0);
    if h0 == 0.0 {
        return Some(g0 / x0);
    }
    if h0 < 0.0 {
        return None;
    }
    brent(h, g0, PI, 1e-15).ok().map(|g| g / x0)
}

/// Exact first complex pair on the line for `beta x0 > pi`: the ray whose onset gain
/// equals `beta x0` carries the root `lambda = (gamma0/m + i gamma0)/x0`.
pub fn line_pair_exact(beta: f64, x0: f64) -> Result<ComplexValue> {
    let b = beta * x0;
    if !(b > PI) {
        return Err(domain(format!(
            "no complex pair on the line for beta x0 = {b} <= pi"
        )));
    }
    let ln_phi = |u: f64| {
        let m = u.exp();
        let g = gamma0(m);
        (2.0 * g).ln() + g / m - g.sin().ln()
    };
    let target = b.ln();
    let u = brent(|u| ln_phi(u) - target, -12.0, 60.0, 1e-15)?;
    let m = u.exp();
    let g = gamma0(m);
    Ok(Complex64::new(g / m, g) / x0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealBranch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLineRoot {
    pub k: usize,
    pub branch: RealBranch,
    pub s: f64,
    pub beta: f64,
}

/// Negative real eigenvalues of the line problem and the gains at which they occur.
pub fn real_spectrum_line(x0: f64, k_max: usize) -> Vec<RealLineRoot> {
    let mut out = Vec::with_capacity(2 * (k_max + 1));
    for k in 0..=k_max {
        let a = (4 * k + 1) as f64;
        let b = (4 * k + 3) as f64;
        out.push(RealLineRoot {
            k,
            branch: RealBranch::Plus,
            s: -a * a * PI * PI / (4.0 * x0 * x0),
            beta: a * PI / x0,
        });
        out.push(RealLineRoot {
            k,
            branch: RealBranch::Minus,
            s: -b * b * PI * PI / (4.0 * x0 * x0),
            beta: -b * PI / x0,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCrossing {
    pub beta: f64,
    pub s: ComplexValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenTrajectory {
    pub betas: Vec<f64>,
    pub points: Vec<CharacteristicPoint>,
    pub branch_id: usize,
    pub crossing: Option<AxisCrossing>,
    /// Set when continuation stopped early.
    pub diagnostic: Option<String>,
}

/// Seed for the first complex pair: the exact line root, polished on the interval if finite.
pub fn first_pair_seed(length: Length, x0: f64, beta: f64) -> Result<CharacteristicPoint> {
    let guess = line_pair_exact(beta, x0)?;
    polish(length, x0, beta, guess)
}

/// Newton continuation of one eigenvalue branch along a monotone gain grid.
pub fn trace_pair(
    betas: &[f64],
    length: Length,
    x0: f64,
    seed: CharacteristicPoint,
) -> Result<EigenTrajectory> {
    if betas.is_empty() {
        return Err(domain("empty gain grid"));
    }
    let increasing = betas.windows(2).all(|w| w[1] > w[0]);
    let decreasing = betas.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(domain("gain grid must be strictly monotone"));
    }
    let seed_res = normalized(length, seed.lambda, betas[0], x0).norm();
    if seed_res > ROOT_TOL {
        return Err(domain(format!(
            "seed residual {seed_res:e} exceeds {ROOT_TOL:e}"
        )));
    }
    let mut traj = EigenTrajectory {
        betas: Vec::with_capacity(betas.len()),
        points: Vec::with_capacity(betas.len()),
        branch_id: 0,
        crossing: None,
        diagnostic: None,
    };
    traj.betas.push(betas[0]);
    traj.points
        .push(CharacteristicPoint::new(seed.lambda, betas[0], seed_res));
    for (i, &b) in betas.iter().enumerate().skip(1) {
        let n = traj.points.len();
        let guess = if n >= 2 {
            // linear extrapolation in beta
            let (p1, p0) = (traj.points[n - 1], traj.points[n - 2]);
            let w = (b - p1.beta) / (p1.beta - p0.beta);
            p1.lambda + (p1.lambda - p0.lambda) * w
        } else {
            traj.points[n - 1].lambda
        };
        let pt = polish(length, x0, b, guess)
            .or_else(|_| polish(length, x0, b, traj.points[n - 1].lambda));
        match pt {
            Ok(pt) => {
                traj.betas.push(b);
                traj.points.push(pt);
            }
            Err(e) => {
                traj.diagnostic = Some(format!(
                    "continuation stopped at beta = {b} (node {i}): {e}"
                ));
                break;
            }
        }
    }
    traj.crossing = locate_crossing(&traj, length, x0);
    Ok(traj)
}

fn locate_crossing(traj: &EigenTrajectory, length: Length, x0: f64) -> Option<AxisCrossing> {
    let idx = traj
        .points
        .windows(2)
        .position(|w| w[0].s.re.signum() != w[1].s.re.signum() || w[0].s.re == 0.0)?;
    let (mut a, mut b) = (traj.points[idx], traj.points[idx + 1]);
    if a.s.re == 0.0 {
        return Some(AxisCrossing {
            beta: a.beta,
            s: a.s,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a.beta + b.beta);
        let guess = 0.5 * (a.lambda + b.lambda);
        let m = polish(length, x0, mid, guess).ok()?;
        if m.s.re.abs() < CROSSING_TOL || (b.beta - a.beta).abs() < 1e-14 * mid.abs() {
            return Some(AxisCrossing { beta: mid, s: m.s });
        }
        if m.s.re.signum() == a.s.re.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    None
}

/// Scaled curly-bracket factor of `Im(1 + beta G(s))` on the interval at `sqrt(s) = alpha (1+i)`,
/// and its line limit `-cos(alpha x0) - sin(alpha x0)`.
pub fn z_functions(alpha: f64, p: &ProblemParams) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    let z_inf = -(alpha * p.x0).cos() - (alpha * p.x0).sin();
    let l = p.finite_length()?;
    let l0 = l - p.x0;
    let (s0, c0, t0) = ((l0 * alpha).sin(), (l0 * alpha).cos(), (l0 * alpha).tanh());
    let (s1, c1, t1) = ((l * alpha).sin(), (l * alpha).cos(), (l * alpha).tanh());
    let z_l = s0 * (c1 - t1 * s1) - t0 * c0 * (c1 + t1 * s1);
    Ok((z_l, z_inf))
}

/// First frequency where `G(i omega)` is real and negative, and the gain `-1/G(i omega1)`.
pub fn crossing_params(p: &ProblemParams) -> Result<(f64, f64)> {
    let x0 = p.x0;
    let lo = match p.length {
        Length::Finite(l) => 1e-2 / (l * l),
        Length::Infinite => 1e-2 / (x0 * x0),
    };
    let hi = 1e3 / (x0 * x0);
    let grid = log_grid(lo, hi, 8000);
    let im = |w: f64| transfer_iw(p, w).map(|g| g.im).unwrap_or(f64::NAN);
    let re = |w: f64| transfer_iw(p, w).map(|g| g.re).unwrap_or(f64::NAN);
    let w1 = first_sign_change(im, &grid, 1e-15, |w| re(w) < 0.0).map_err(|_| Error::Search {
        lo,
        hi,
        what: "Im G(i omega) has no zero with Re G < 0".into(),
    })?;
    Ok((w1, -1.0 / re(w1)))
}

/// Gain at which two real eigenvalues of the interval operator first merge,
/// detected as a drop by two in the count of real roots of `H_L` on `(0, lambda_max]`.
pub fn merge_gain(
    l: f64,
    x0: f64,
    beta_lo: f64,
    beta_hi: f64,
    lambda_max: f64,
) -> Result<Option<f64>> {
    let p = ProblemParams::interval(l, x0, 0.0)?;
    let grid: Vec<f64> = (1..=20_000)
        .map(|i| lambda_max * i as f64 / 20_000.0)
        .collect();
    let count = |beta: f64| {
        let q = p.with_beta(beta);
        let vals: Vec<f64> = grid
            .iter()
            .map(|&x| {
                characteristic_interval(Complex64::new(x, 0.0), &q)
                    .map(|c| c.h.re)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    };
    let n_steps = 400;
    let c0 = count(beta_lo);
    let mut prev = beta_lo;
    for i in 1..=n_steps {
        let b = beta_lo + (beta_hi - beta_lo) * i as f64 / n_steps as f64;
        if count(b) + 2 <= c0 {
            let (mut a, mut c) = (prev, b);
            while c - a > 1e-9 * c.abs().max(1.0) {
                let m = 0.5 * (a + c);
                if count(m) + 2 <= c0 {
                    c = m;
                } else {
                    a = m;
                }
            }
            return Ok(Some(0.5 * (a + c)));
        }
        prev = b;
    }
    Ok(None)
}
