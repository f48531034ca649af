//! Nonlinear Volterra equation `y = g + a * f(beta y)` for the sensor trace and the
//! Lyapunov functionals `W = V + R` evaluated along its solutions.

use crate::error::{domain, Error, Result};
use crate::kernels::{forcing, forcing_prime, kernel_a, kernel_a_prime};
use crate::modes::ModeVector;
use crate::params::{ProblemParams, SeriesControl};
use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Feedback nonlinearity with `f(0) = 0`, `f'(0) = 1`.
#[derive(Clone)]
pub struct Nonlinearity {
    pub name: String,
    pub f: RealFn,
    pub f_prime: RealFn,
    /// Antiderivative vanishing at 0, if known in closed form.
    pub antiderivative: Option<RealFn>,
    /// `sup |f|`, infinite for unbounded maps.
    pub bound: f64,
    pub lipschitz: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Nonlinearity {
    /// Checks the normalization `f(0) = 0`, `f'(0) = 1` and sampled `|f| <= bound`.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        let name = name.into();
        if f(0.0).abs() > 1e-12 {
            return Err(domain(format!("{name}: f(0) = {} != 0", f(0.0))));
        }
        if (f_prime(0.0) - 1.0).abs() > 1e-12 {
            return Err(domain(format!("{name}: f'(0) = {} != 1", f_prime(0.0))));
        }
        if !(bound > 0.0) || !(lipschitz > 0.0) {
            return Err(domain(format!(
                "{name}: bound and Lipschitz constant must be positive"
            )));
        }
        for i in -400..=400 {
            let w = i as f64 * 0.05;
            if f(w).abs() > bound * (1.0 + 1e-12) {
                return Err(domain(format!("{name}: |f({w})| exceeds bound {bound}")));
            }
        }
        Ok(Self {
            name,
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            antiderivative: None,
            bound,
            lipschitz,
        })
    }

    pub fn with_antiderivative(mut self, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(a));
        self
    }

    pub fn tanh() -> Self {
        Self::new("tanh", f64::tanh, |w| 1.0 - w.tanh().powi(2), 1.0, 1.0)
            .expect("tanh is normalized")
            .with_antiderivative(log_cosh)
    }

    /// Linear feedback, used for the linearized dynamics.
    pub fn identity() -> Self {
        Self::new("identity", |w| w, |_| 1.0, f64::INFINITY, 1.0)
            .expect("identity is normalized")
            .with_antiderivative(|w| 0.5 * w * w)
    }

    /// `f(w) = w` clipped to `[-1, 1]`.
    pub fn clipped_identity() -> Self {
        Self::new(
            "clip",
            |w| w.clamp(-1.0, 1.0),
            |w| if w.abs() <= 1.0 { 1.0 } else { 0.0 },
            1.0,
            1.0,
        )
        .expect("clip is normalized")
        .with_antiderivative(|w| {
            if w.abs() <= 1.0 {
                0.5 * w * w
            } else {
                w.abs() - 0.5
            }
        })
    }

    pub fn eval(&self, w: f64) -> f64 {
        (self.f)(w)
    }

    /// `F_beta(z) = int_0^z f(beta s) ds`.
    pub fn f_beta(&self, beta: f64, z: f64) -> f64 {
        if let Some(a) = &self.antiderivative {
            return a(beta * z) / beta;
        }
        // composite Simpson
        let n = 256;
        let h = z / n as f64;
        let mut acc = self.eval(0.0) + self.eval(beta * z);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.eval(beta * i as f64 * h);
        }
        acc * h / 3.0
    }
}

/// `ln cosh w` without overflow.
fn log_cosh(w: f64) -> f64 {
    let a = w.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Strict sector condition `f(beta w) (w - f(beta w)/beta) > 0` at every node.
pub fn sector_check(f: &Nonlinearity, beta: f64, w_grid: &[f64]) -> bool {
    w_grid.iter().all(|&w| {
        let fw = f.eval(beta * w);
        w != 0.0 && fw * (w - fw / beta) > 0.0
    })
}

#[derive(Debug, Clone)]
pub struct VieProblem {
    pub params: ProblemParams,
    pub u0: ModeVector,
    pub f: Nonlinearity,
    pub ctl: SeriesControl,
}

impl VieProblem {
    pub fn new(params: ProblemParams, u0: ModeVector, f: Nonlinearity) -> Result<Self> {
        let l = params.finite_length()?;
        if (u0.l - l).abs() > 1e-12 * l {
            return Err(domain("initial data and problem use different L"));
        }
        Ok(Self {
            params,
            u0,
            f,
            ctl: SeriesControl::default(),
        })
    }

    pub fn forcing(&self, t: f64) -> Result<f64> {
        forcing(t, &self.params, &self.u0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub t: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    /// `max |W - (V + R)|`
    pub residual: f64,
    /// `residual / max |W|`, zero when `W` vanishes identically.
    pub relative_residual: f64,
}

/// Sampled sensor trace with optional mode snapshots and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub snapshots: Vec<(f64, ModeVector)>,
    pub lyapunov: Option<LyapunovReport>,
}

pub(crate) fn steps(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(domain(format!(
            "need T > 0 and dt > 0, got T={t_end}, dt={dt}"
        )));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(domain(format!(
            "T = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

/// Kernel samples `k(j dt)`, `j = 0..=n`.
fn sample_kernel(n: usize, dt: f64, k: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    (0..=n).map(|j| k(j as f64 * dt)).collect()
}

/// Trapezoidal convolution `dt sum_j w_j k_{n-j} u_j` with `k_0 u_n` included.
fn trap_conv(k: &[f64], u: &[f64], n: usize, dt: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * (k[n] * u[0] + k[0] * u[n]);
    for j in 1..n {
        acc += k[n - j] * u[j];
    }
    dt * acc
}

/// Cumulative trapezoid `int_0^{t_n} h`.
fn cumtrap(h: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(h.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in h.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoidal product integration on a uniform grid. Since `a(0) = 0`, the
/// unknown `y_n` does not appear on the right-hand side and stepping is explicit.
pub fn solve_vie(problem: &VieProblem, t_end: f64, dt: f64) -> Result<Trajectory> {
    let n = steps(t_end, dt)?;
    let p = &problem.params;
    let a = sample_kernel(n, dt, |t| kernel_a(t, p, &problem.ctl))?;
    let g: Vec<f64> = (0..=n)
        .map(|i| problem.forcing(i as f64 * dt))
        .collect::<Result<_>>()?;
    let mut y = Vec::with_capacity(n + 1);
    let mut fy = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let yi = g[i] + explicit_conv(&a, &fy, i, dt);
        if !yi.is_finite() {
            return Err(Error::NonFinite {
                last_valid: i.saturating_sub(1),
            });
        }
        y.push(yi);
        fy.push(problem.f.eval(p.beta * yi));
    }
    Ok(Trajectory {
        t: (0..=n).map(|i| i as f64 * dt).collect(),
        y,
        snapshots: Vec::new(),
        lyapunov: None,
    })
}

/// Trapezoidal convolution at node `n` using only `u_0 .. u_{n-1}`; the weight of
/// `u_n` multiplies `k_0 = a(0) = 0`.
fn explicit_conv(k: &[f64], u: &[f64], n: usize, dt: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * k[n] * u[0];
    for j in 1..n {
        acc += k[n - j] * u[j];
    }
    dt * acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// `max |y_n - y_quadrature|` for the last iterate.
    pub deviation: f64,
    /// Deviation after each iterate, starting with `y_0 = g`.
    pub deviations: Vec<f64>,
    /// Successive gaps `max |y_{k+1} - y_k|`.
    pub gaps: Vec<f64>,
}

/// Picard iterates `y_{k+1} = g + a * f(beta y_k)` with the same quadrature as [`solve_vie`].
pub fn picard_verify(
    problem: &VieProblem,
    t_short: f64,
    dt: f64,
    n_iter: usize,
) -> Result<PicardReport> {
    let n = steps(t_short, dt)?;
    let p = &problem.params;
    let reference = solve_vie(problem, t_short, dt)?.y;
    let a = sample_kernel(n, dt, |t| kernel_a(t, p, &problem.ctl))?;
    let g: Vec<f64> = (0..=n)
        .map(|i| problem.forcing(i as f64 * dt))
        .collect::<Result<_>>()?;
    let dev = |y: &[f64]| {
        y.iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let mut y = g.clone();
    let mut report = PicardReport {
        deviation: dev(&y),
        deviations: vec![dev(&y)],
        gaps: Vec::new(),
    };
    for k in 0..n_iter {
        let fy: Vec<f64> = y.iter().map(|&v| problem.f.eval(p.beta * v)).collect();
        let next: Vec<f64> = (0..=n).map(|i| g[i] + trap_conv(&a, &fy, i, dt)).collect();
        let gap = next
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !gap.is_finite() || gap > 1e12 {
            return Err(Error::Divergence(format!(
                "Picard gap {gap:e} at iterate {k}"
            )));
        }
        report.gaps.push(gap);
        y = next;
        report.deviation = dev(&y);
        report.deviations.push(report.deviation);
    }
    Ok(report)
}

/// `W1`, `W2`, `V`, `R`, `J` along a computed trajectory, all time integrals by the
/// cumulative trapezoid rule and the convolution in `J` by the solver's quadrature.
pub fn lyapunov(problem: &VieProblem, traj: &Trajectory, q: f64) -> Result<LyapunovReport> {
    let p = &problem.params;
    let beta = p.beta;
    if !(beta > 0.0 && q > 0.0) {
        return Err(domain(format!(
            "Lyapunov functionals need beta > 0 and q > 0, got beta={beta}, q={q}"
        )));
    }
    let n = traj.y.len() - 1;
    if n == 0 {
        return Err(domain("trajectory needs at least two nodes"));
    }
    let dt = traj.t[1] - traj.t[0];
    let a = sample_kernel(n, dt, |t| kernel_a(t, p, &problem.ctl))?;
    let ap = sample_kernel(n, dt, |t| kernel_a_prime(t, p, &problem.ctl))?;
    let kq: Vec<f64> = a.iter().zip(&ap).map(|(x, d)| x + q * d).collect();
    let fy: Vec<f64> = traj.y.iter().map(|&v| problem.f.eval(beta * v)).collect();
    let mut g_mix = Vec::with_capacity(n + 1);
    for (i, &t) in traj.t.iter().enumerate() {
        let g = forcing(t, p, &problem.u0)?;
        let gp = forcing_prime(t, p, &problem.u0)?;
        g_mix.push(fy[i] * (g + q * gp));
    }
    let j: Vec<f64> = (0..=n)
        .map(|i| trap_conv(&kq, &fy, i, dt) - fy[i] / beta)
        .collect();
    let h1: Vec<f64> = traj
        .y
        .iter()
        .zip(&fy)
        .map(|(y, f)| f * (y - f / beta))
        .collect();
    let w1 = cumtrap(&h1, dt);
    let w2: Vec<f64> = traj
        .y
        .iter()
        .map(|&y| q * problem.f.f_beta(beta, y))
        .collect();
    let w2_0 = w2[0];
    let v: Vec<f64> = cumtrap(&g_mix, dt).into_iter().map(|x| x + w2_0).collect();
    let fj: Vec<f64> = fy.iter().zip(&j).map(|(f, j)| f * j).collect();
    let r = cumtrap(&fj, dt);
    let w: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
    let residual = (0..=n).fold(0.0f64, |m, i| m.max((w[i] - v[i] - r[i]).abs()));
    let wmax = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(LyapunovReport {
        t: traj.t.clone(),
        w1,
        w2,
        w,
        v,
        r,
        j,
        residual,
        relative_residual: if wmax > 0.0 { residual / wmax } else { 0.0 },
    })
}
