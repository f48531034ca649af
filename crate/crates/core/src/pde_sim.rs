//! Galerkin mode simulation of the feedback heat equation on (-L, L).

use crate::error::{domain, Error, Result};
use crate::modes::{lambda, phi, ModeVector};
use crate::params::ProblemParams;
use crate::volterra::{solve_vie, steps, Nonlinearity, VieProblem};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Decayed,
    LimitCycle,
    Undecided,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Decayed => "decayed",
            Classification::LimitCycle => "limit_cycle",
            Classification::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    pub dt: f64,
    pub n_modes: usize,
    /// Store a mode snapshot every this many steps.
    pub snapshot_stride: Option<usize>,
    /// `|y|` threshold over the final tenth of the horizon for `Decayed`.
    pub decay_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt: 1e-3,
            n_modes: 128,
            snapshot_stride: None,
            decay_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub snapshots: Vec<(f64, ModeVector)>,
    pub classification: Classification,
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
}

/// Exponential Euler for `du_n/dt = -lambda_n^2 u_n - f(beta y) phi_n(0)`, `y = sum u_n phi_n(x0)`.
pub fn simulate(
    u0: &ModeVector,
    p: &ProblemParams,
    f: &Nonlinearity,
    opts: &SimOptions,
) -> Result<SimResult> {
    let l = p.finite_length()?;
    if (u0.l - l).abs() > 1e-12 * l {
        return Err(domain("initial data and problem use different L"));
    }
    if opts.n_modes == 0 {
        return Err(domain("n_modes must be positive"));
    }
    let n_steps = steps(opts.t_end, opts.dt)?;
    let nm = opts.n_modes;
    let mut u: Vec<f64> = (0..nm)
        .map(|i| u0.coeffs.get(i).copied().unwrap_or(0.0))
        .collect();
    let decay: Vec<f64> = (1..=nm)
        .map(|k| (-lambda(k, l).powi(2) * opts.dt).exp())
        .collect();
    let phi0: Vec<f64> = (1..=nm).map(|k| phi(k, 0.0, l)).collect();
    // phi_n(0) (1 - e^{-mu dt}) / mu
    let gain: Vec<f64> = (1..=nm)
        .map(|k| {
            let mu = lambda(k, l).powi(2);
            phi0[k - 1] * (-(-mu * opts.dt).exp_m1()) / mu
        })
        .collect();
    let phix0: Vec<f64> = (1..=nm).map(|k| phi(k, p.x0, l)).collect();
    let trace = |u: &[f64]| u.iter().zip(&phix0).map(|(a, b)| a * b).sum::<f64>();

    let mut t = Vec::with_capacity(n_steps + 1);
    let mut y = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    for step in 0..=n_steps {
        let yi = trace(&u);
        if !yi.is_finite() {
            return Err(Error::NonFinite {
                last_valid: step.saturating_sub(1),
            });
        }
        t.push(step as f64 * opts.dt);
        y.push(yi);
        if let Some(stride) = opts.snapshot_stride {
            if stride > 0 && step % stride == 0 {
                snapshots.push((
                    step as f64 * opts.dt,
                    ModeVector {
                        coeffs: u.clone(),
                        l,
                    },
                ));
            }
        }
        if step == n_steps {
            break;
        }
        let fb = f.eval(p.beta * yi);
        for k in 0..nm {
            u[k] = decay[k] * u[k] - fb * gain[k];
        }
    }
    let (classification, period, amplitude) = classify(&t, &y, opts.decay_tol);
    Ok(SimResult {
        t,
        y,
        snapshots,
        classification,
        period,
        amplitude,
    })
}

/// Upward zero crossings of `y` on `[from, ..)`, linearly interpolated.
pub fn upward_crossings(t: &[f64], y: &[f64], from: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in from.max(1)..y.len() {
        if y[i - 1] < 0.0 && y[i] >= 0.0 {
            let w = y[i - 1] / (y[i - 1] - y[i]);
            out.push(t[i - 1] + w * (t[i] - t[i - 1]));
        }
    }
    out
}

fn half_range(y: &[f64]) -> f64 {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    0.5 * (hi - lo)
}

/// Decay, limit cycle or undecided, judged on the second half of the record.
pub fn classify(
    t: &[f64],
    y: &[f64],
    decay_tol: f64,
) -> (Classification, Option<f64>, Option<f64>) {
    let n = y.len();
    let tail = &y[n - n / 10 - 1..];
    if tail.iter().all(|v| v.abs() < decay_tol) {
        return (Classification::Decayed, None, Some(0.0));
    }
    let half = n / 2;
    let cr = upward_crossings(t, y, half);
    if cr.len() >= 6 {
        let iv: Vec<f64> = cr.windows(2).map(|w| w[1] - w[0]).collect();
        // the last five or more consecutive intervals
        let m = iv.len().min(50);
        let last = &iv[iv.len() - m..];
        let mean = last.iter().sum::<f64>() / m as f64;
        let var = last.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / m as f64;
        let cv = var.sqrt() / mean;
        let q3 = &y[half..half + (n - half) / 2];
        let q4 = &y[half + (n - half) / 2..];
        let (a3, a4) = (half_range(q3), half_range(q4));
        if cv < 0.02 && a4 > decay_tol && a4 >= 0.95 * a3 {
            return (Classification::LimitCycle, Some(mean), Some(a4));
        }
    }
    (Classification::Undecided, None, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub n_modes: usize,
    /// Exponential Euler substeps per quadrature step.
    pub pde_substeps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            n_modes: 128,
            pde_substeps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceGap {
    pub max_gap: f64,
    /// `max_gap / max |y_vie|`, zero for a vanishing trace.
    pub relative: f64,
}

/// Sup-norm gap between the simulated trace at `x0` and the Volterra solution on the same grid.
pub fn trace_consistency(
    u0: &ModeVector,
    p: &ProblemParams,
    f: &Nonlinearity,
    t_end: f64,
    dt: f64,
    opts: TraceOptions,
) -> Result<TraceGap> {
    let sub = opts.pde_substeps.max(1);
    let sim = simulate(
        u0,
        p,
        f,
        &SimOptions {
            t_end,
            dt: dt / sub as f64,
            n_modes: opts.n_modes,
            ..SimOptions::default()
        },
    )?;
    let vie = solve_vie(&VieProblem::new(*p, u0.clone(), f.clone())?, t_end, dt)?;
    let max_gap = vie
        .y
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (i, v)| m.max((v - sim.y[i * sub]).abs()));
    let ymax = vie.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(TraceGap {
        max_gap,
        relative: if ymax > 0.0 { max_gap / ymax } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfFit {
    pub slope: f64,
    pub intercept: f64,
    /// Zero of the fitted line, `-intercept / slope`.
    pub beta_crossing: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfScan {
    pub betas: Vec<f64>,
    pub classifications: Vec<Classification>,
    pub amplitudes: Vec<Option<f64>>,
    pub periods: Vec<Option<f64>>,
    /// Least-squares line through `(beta, amplitude^2)` over the limit-cycle nodes in the fit window.
    pub fit: Option<HopfFit>,
    /// Gains excluded from the fit because the run stayed undecided.
    pub undecided: Vec<f64>,
}

/// Ordinary least squares `y = slope x + intercept` with its coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Some((slope, intercept, r2))
}

/// Steady-state amplitude per gain; runs fan out over the grid and are gathered in grid order.
pub fn hopf_scan(
    base: &ProblemParams,
    u0: &ModeVector,
    f: &Nonlinearity,
    betas: &[f64],
    fit_window: (f64, f64),
    opts: &SimOptions,
) -> Result<HopfScan> {
    let runs: Vec<SimResult> = betas
        .par_iter()
        .map(|&b| simulate(u0, &base.with_beta(b), f, opts))
        .collect::<Result<_>>()?;
    let classifications: Vec<Classification> = runs.iter().map(|r| r.classification).collect();
    let amplitudes: Vec<Option<f64>> = runs.iter().map(|r| r.amplitude).collect();
    let periods: Vec<Option<f64>> = runs.iter().map(|r| r.period).collect();
    let undecided: Vec<f64> = betas
        .iter()
        .zip(&classifications)
        .filter(|(_, c)| **c == Classification::Undecided)
        .map(|(b, _)| *b)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = betas
        .iter()
        .zip(&runs)
        .filter(|(b, r)| {
            r.classification == Classification::LimitCycle
                && **b >= fit_window.0
                && **b <= fit_window.1
        })
        .map(|(b, r)| (*b, r.amplitude.unwrap_or(0.0).powi(2)))
        .unzip();
    let fit = linear_fit(&xs, &ys).map(|(slope, intercept, r_squared)| HopfFit {
        slope,
        intercept,
        beta_crossing: -intercept / slope,
        r_squared,
        n_points: xs.len(),
    });
    Ok(HopfScan {
        betas: betas.to_vec(),
        classifications,
        amplitudes,
        periods,
        fit,
        undecided,
    })
}

/// First snapshot time after which the reconstructed solution of the linearized
/// dynamics stays nonnegative on `x_samples`; `None` if it is negative at the horizon.
pub fn eventual_positivity_probe(
    p: &ProblemParams,
    u0: &ModeVector,
    opts: &SimOptions,
    x_samples: &[f64],
) -> Result<Option<f64>> {
    let stride = opts.snapshot_stride.unwrap_or(100).max(1);
    let sim = simulate(
        u0,
        p,
        &Nonlinearity::identity(),
        &SimOptions {
            snapshot_stride: Some(stride),
            ..opts.clone()
        },
    )?;
    let mut onset = Some(0.0);
    for (t, modes) in &sim.snapshots {
        let vals: Vec<f64> = x_samples.iter().map(|&x| modes.eval(x)).collect();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let negative = vals.iter().any(|&v| v < -1e-10 * scale);
        if negative {
            onset = None;
        } else if onset.is_none() {
            onset = Some(*t);
        }
    }
    Ok(onset)
}
