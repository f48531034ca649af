//! The acceptance criteria, shared by the test target and the CLI self-test.
//!
//! Each criterion computes its quantities and hands them to a `judge_*` function,
//! so the pass/fail logic can be exercised on perturbed inputs.

use crate::discretization::{build_operator, crossing_scan_discrete, eig};
use crate::kernels::{heat_kernel_images, heat_kernel_series};
use crate::modes::ModeVector;
use crate::params::{ProblemParams, SeriesControl};
use crate::pde_sim::{
    hopf_scan, simulate, trace_consistency, Classification, SimOptions, TraceOptions,
};
use crate::popov::{
    b_pi, beta_hat, c_pi, critical_params_delta, critical_params_interval, critical_params_line,
    d_pi, line_product, popov_sample, q_line, t_pole, PopovLine,
};
use crate::roots::{brent, log_grid, newton};
use crate::spectrum::{
    characteristic_interval, characteristic_line, crossing_params, phi_onset, phi_onset_derivative,
    real_spectrum_line, RealBranch,
};
use crate::volterra::{lyapunov, solve_vie, Nonlinearity, VieProblem};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:02} {}: {}", self.id, self.name, self.detail)
    }
}

pub const NAMES: [&str; 17] = [
    "line critical gain",
    "line critical frequency",
    "real-spectrum onset",
    "onset gain diagnostics",
    "Popov tangency on the line",
    "pole constant y_s",
    "invariant product omega1 q",
    "small-delta limits",
    "delta limits of the product",
    "discrete crossing",
    "discrete vs analytic spectrum",
    "Lyapunov identity",
    "Volterra vs PDE trace",
    "stability/oscillation dichotomy",
    "supercritical amplitude scaling",
    "heat-kernel dual representation",
    "beta_hat ordering",
];

fn outcome(id: u8, passed: bool, detail: String) -> Outcome {
    Outcome {
        id,
        name: NAMES[id as usize - 1],
        passed,
        detail,
    }
}

fn failed(id: u8, err: impl std::fmt::Display) -> Outcome {
    outcome(id, false, format!("error: {err}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs one criterion by number (1..=17).
pub fn run(id: u8) -> Outcome {
    let r = match id {
        1 => c01(),
        2 => c02(),
        3 => c03(),
        4 => c04(),
        5 => c05(),
        6 => c06(),
        7 => c07(),
        8 => c08(),
        9 => c09(),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        13 => c13(),
        14 => c14(),
        15 => c15(),
        16 => c16(),
        17 => c17(),
        _ => return failed(id.clamp(1, 17), format!("no criterion {id}")),
    };
    r.unwrap_or_else(|e| failed(id, e))
}

pub fn run_all() -> Vec<Outcome> {
    (1..=17).map(run).collect()
}

type Res = crate::Result<Outcome>;

pub fn judge_line_gain(beta1: f64) -> Outcome {
    let err = (beta1 - 70.3134).abs();
    outcome(
        1,
        err < 1e-3,
        format!("beta1 = {beta1:.10}, |beta1 - 70.3134| = {err:.3e} (< 1e-3)"),
    )
}

fn c01() -> Res {
    Ok(judge_line_gain(critical_params_line(1.0)?.beta1))
}

pub fn judge_line_frequency(root: f64, closed: f64) -> Outcome {
    let err = (root - closed).abs();
    let near = (root - 11.1033).abs();
    outcome(
        2,
        err < 1e-9 && near < 1e-4,
        format!("root = {root:.12}, 9pi^2/8 = {closed:.12}, diff = {err:.3e} (< 1e-9), |root - 11.1033| = {near:.1e}"),
    )
}

fn c02() -> Res {
    let root = brent(|w| 1.0 + (w / 2.0).sqrt().tan(), 10.0, 12.0, 1e-16)?;
    Ok(judge_line_frequency(
        root,
        critical_params_line(1.0)?.omega1,
    ))
}

fn c03() -> Res {
    let roots = real_spectrum_line(1.0, 1);
    let plus: Vec<_> = roots
        .iter()
        .filter(|r| r.branch == RealBranch::Plus)
        .collect();
    let residual =
        |s: f64, beta: f64| characteristic_line(Complex64::new(0.0, (-s).sqrt()), beta, 1.0).norm();
    let (r0, r1) = (
        residual(plus[0].s, plus[0].beta),
        residual(plus[1].s, plus[1].beta),
    );
    let ok0 = (plus[0].s + PI * PI / 4.0).abs() < 1e-12
        && (plus[0].beta - PI).abs() < 1e-12
        && r0 < 1e-10;
    let ok1 = (plus[1].s + 25.0 * PI * PI / 4.0).abs() < 1e-12
        && (plus[1].beta - 5.0 * PI).abs() < 1e-12
        && r1 < 1e-10;
    Ok(outcome(
        3,
        ok0 && ok1,
        format!(
            "s = {:.10} at beta = {:.10} (residual {r0:.1e}); next s = {:.10} at beta = {:.10} (residual {r1:.1e})",
            plus[0].s, plus[0].beta, plus[1].s, plus[1].beta
        ),
    ))
}

pub fn judge_phi(phi_large: f64, dphi1: f64) -> Outcome {
    let err = (phi_large - PI).abs();
    outcome(
        4,
        err < 1e-2 && (-260.0..=-248.0).contains(&dphi1),
        format!("|Phi(1e4) - pi| = {err:.3e} (< 1e-2), Phi'(1) = {dphi1:.4} (in [-260, -248])"),
    )
}

fn c04() -> Res {
    Ok(judge_phi(phi_onset(1e4), phi_onset_derivative(1.0)))
}

pub fn judge_tangency(max_f: f64, f_at_w1: f64, f_half: f64, f_double: f64) -> Outcome {
    outcome(
        5,
        max_f <= 1e-10 && f_at_w1.abs() < 1e-8 && f_half < 0.0 && f_double < 0.0,
        format!("max F on grid = {max_f:.3e}, F(w1) = {f_at_w1:.3e}, F(w1/2) = {f_half:.4e}, F(2 w1) = {f_double:.4e}"),
    )
}

/// Popov functional on the line with `x0 = 1` for a given gain.
fn line_f(beta: f64) -> crate::Result<impl Fn(f64) -> f64> {
    let p = ProblemParams::line(1.0, 0.0)?;
    let line = PopovLine::new(q_line(1.0), beta)?;
    Ok(move |w: f64| {
        popov_sample(&p, w)
            .map(|s| line.f_sample(&s))
            .unwrap_or(f64::INFINITY)
    })
}

pub fn tangency_with_gain(beta: f64) -> Res {
    let w1 = b_pi();
    let f = line_f(beta)?;
    let grid = log_grid(1e-4 * w1, 40.0 * w1, 2000);
    let max_f = grid.iter().map(|&w| f(w)).fold(f64::NEG_INFINITY, f64::max);
    Ok(judge_tangency(max_f, f(w1), f(0.5 * w1), f(2.0 * w1)))
}

fn c05() -> Res {
    tangency_with_gain(critical_params_line(1.0)?.beta1)
}

fn c06() -> Res {
    let ys = t_pole();
    let err = (ys - 1.4399094).abs();
    Ok(outcome(
        6,
        err < 1e-6,
        format!("y_s = {ys:.10}, |y_s - 1.4399094| = {err:.2e} (< 1e-6)"),
    ))
}

fn c07() -> Res {
    let target = line_product();
    let mut worst: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for x0 in [0.5, 1.0, 2.0] {
        let c = critical_params_line(x0)?;
        worst = worst.max((c.product - target).abs());
        // tangent slope from the curve itself
        let p = ProblemParams::line(x0, 0.0)?;
        let h = c.omega1 * 1e-5;
        let (a, b) = (
            popov_sample(&p, c.omega1 - h)?,
            popov_sample(&p, c.omega1 + h)?,
        );
        let q_fd = (b.x - a.x) / (b.y - a.y);
        worst_fd = worst_fd.max(rel(c.omega1 * q_fd, target));
    }
    Ok(outcome(
        7,
        worst < 1e-12 && worst_fd < 1e-6,
        format!("max |omega1 q - (3pi+4)/(3pi)| = {worst:.2e} (< 1e-12); curve-slope check rel err {worst_fd:.2e}"),
    ))
}

fn c08() -> Res {
    let c = critical_params_delta(0.02)?;
    let two_pi2 = 2.0 * PI * PI;
    let cosh2 = PI.exp() + (-PI).exp();
    let (e1, e2, e3) = (
        rel(c.omega1, two_pi2),
        rel(1.0 / c.q, two_pi2),
        rel(c.beta1 * 0.02, cosh2),
    );
    Ok(outcome(
        8,
        e1 < 0.02 && e2 < 0.02 && e3 < 0.02,
        format!("delta = 0.02: rel err omega1 {e1:.2e}, 1/q {e2:.2e}, beta delta {e3:.2e} (each < 2e-2)"),
    ))
}

fn c09() -> Res {
    let small = critical_params_delta(0.02)?.product;
    let large = critical_params_delta(0.98)?.product;
    let (e1, e2) = (rel(small, 1.0), rel(large, line_product()));
    Ok(outcome(
        9,
        e1 < 0.02 && e2 < 0.02,
        format!("omega1 q = {small:.6} at delta 0.02 (rel err {e1:.2e}), {large:.6} at delta 0.98 (rel err {e2:.2e})"),
    ))
}

fn c10() -> Res {
    let grid: Vec<f64> = (0..=12).map(|i| 64.0 + i as f64).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [4.0, 8.0, 16.0] {
        let w1 = critical_params_interval(&ProblemParams::interval(l, 1.0, 0.0)?)?.omega1;
        let tr = crossing_scan_discrete(8, l, 1.0, &grid)?;
        match tr.crossing {
            Some(c) => {
                let e = rel(c.s.im, w1);
                ok &= (68.0..=73.0).contains(&c.beta) && e < 0.02;
                parts.push(format!("L={l}: beta {:.4}, freq rel err {e:.1e}", c.beta));
            }
            None => {
                ok = false;
                parts.push(format!("L={l}: no crossing ({:?})", tr.diagnostic));
            }
        }
    }
    Ok(outcome(10, ok, parts.join("; ")))
}

/// Relative errors of the five smallest-modulus eigenvalues of the level-`m` operator
/// against roots of `sin(sqrt(mu) L)/sqrt(mu) * H_L(sqrt(mu))`, each polished by Newton.
pub fn discrete_spectrum_errors(m: u32) -> crate::Result<Vec<f64>> {
    let p = ProblemParams::interval(4.0, 1.0, 10.0)?;
    let mut pairs = eig(&build_operator(m, &p)?)?;
    pairs.sort_by(|a, b| a.value.norm().total_cmp(&b.value.norm()));
    let entire = |mu: Complex64| {
        let lam = mu.sqrt();
        match characteristic_interval(lam, &p) {
            Ok(c) if lam.norm() > 0.0 => c.sin_factor / lam * c.h,
            Ok(c) => Complex64::new(4.0, 0.0) * c.h,
            Err(_) => Complex64::new(f64::NAN, 0.0),
        }
    };
    pairs
        .iter()
        .take(5)
        .map(|e| {
            let (root, _) = newton(entire, e.value, 1e-13, 100)?;
            Ok((e.value - root).norm() / root.norm())
        })
        .collect()
}

fn c11() -> Res {
    let worst = |m| discrete_spectrum_errors(m).map(|v| v.into_iter().fold(0.0f64, f64::max));
    let (e6, e7, e8) = (worst(6)?, worst(7)?, worst(8)?);
    Ok(outcome(
        11,
        e8 < 1e-3 && e7 > e8 && e6 > e7,
        format!(
            "max rel err m=6: {e6:.2e}, m=7: {e7:.2e}, m=8: {e8:.2e} (m=8 < 1e-3, decreasing in m)"
        ),
    ))
}

fn base_problem(beta: f64) -> crate::Result<(ProblemParams, ModeVector)> {
    Ok((
        ProblemParams::interval(4.0, 1.0, beta)?,
        ModeVector::single(1, 128, 4.0)?,
    ))
}

fn c12() -> Res {
    let (p, u0) = base_problem(5.0)?;
    let prob = VieProblem::new(p, u0, Nonlinearity::tanh())?;
    let traj = solve_vie(&prob, 20.0, 1e-3)?;
    let rep = lyapunov(&prob, &traj, q_line(1.0))?;
    let min1 = rep.w1.iter().copied().fold(f64::INFINITY, f64::min);
    let min2 = rep.w2.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(outcome(
        12,
        rep.relative_residual <= 1e-6 && min1 >= 0.0 && min2 >= 0.0,
        format!(
            "max|W - (V+R)| / max|W| = {:.2e} (<= 1e-6), min W1 = {min1:.2e}, min W2 = {min2:.2e}",
            rep.relative_residual
        ),
    ))
}

fn c13() -> Res {
    let (p, u0) = base_problem(5.0)?;
    let gap = trace_consistency(
        &u0,
        &p,
        &Nonlinearity::tanh(),
        20.0,
        1e-3,
        TraceOptions::default(),
    )?;
    Ok(outcome(
        13,
        gap.relative < 1e-3,
        format!(
            "sup gap = {:.3e}, relative = {:.3e} (< 1e-3)",
            gap.max_gap, gap.relative
        ),
    ))
}

fn dichotomy_options() -> SimOptions {
    SimOptions {
        t_end: 200.0,
        dt: 1e-3,
        n_modes: 128,
        ..SimOptions::default()
    }
}

fn c14() -> Res {
    let (p, u0) = base_problem(0.0)?;
    let period = 2.0 * PI / critical_params_interval(&p)?.omega1;
    let f = Nonlinearity::tanh();
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [1.0, 5.0, 20.0] {
        let r = simulate(&u0, &p.with_beta(b), &f, &dichotomy_options())?;
        ok &= r.classification == Classification::Decayed;
        parts.push(format!("beta {b}: {}", r.classification.as_str()));
    }
    for b in [75.0, 80.0] {
        let r = simulate(&u0, &p.with_beta(b), &f, &dichotomy_options())?;
        let e = r.period.map(|t| rel(t, period));
        ok &= r.classification == Classification::LimitCycle && e.is_some_and(|e| e < 0.1);
        parts.push(format!(
            "beta {b}: {} period {:.5} (target {period:.5})",
            r.classification.as_str(),
            r.period.unwrap_or(f64::NAN)
        ));
    }
    Ok(outcome(14, ok, parts.join("; ")))
}

fn c15() -> Res {
    let (p, u0) = base_problem(0.0)?;
    let bc = critical_params_interval(&p)?.beta1;
    let below = [bc - 10.0, bc - 5.0, bc - 2.0];
    let above: Vec<f64> = (1..=10).map(|i| bc + 0.5 * i as f64).collect();
    let betas: Vec<f64> = below.iter().copied().chain(above.iter().copied()).collect();
    let scan = hopf_scan(
        &p,
        &u0,
        &Nonlinearity::tanh(),
        &betas,
        (bc + 0.5, bc + 5.0),
        &dichotomy_options(),
    )?;
    let zero_below = scan.amplitudes[..below.len()]
        .iter()
        .all(|a| *a == Some(0.0));
    let Some(fit) = scan.fit else {
        return Ok(outcome(
            15,
            false,
            "no limit cycles in the fit window".into(),
        ));
    };
    Ok(outcome(
        15,
        zero_below && fit.r_squared > 0.95 && fit.slope > 0.0,
        format!(
            "beta_c = {bc:.4}: R^2 = {:.5} (> 0.95), slope = {:.3e} (> 0), fitted onset {:.3}, amplitude zero below: {zero_below}",
            fit.r_squared, fit.slope, fit.beta_crossing
        ),
    ))
}

fn c16() -> Res {
    let ctl = SeriesControl::default();
    let mut worst: f64 = 0.0;
    for l in [2.0, 4.0, 8.0] {
        let tc = ctl.crossover(l);
        for x in [0.0, 1.0] {
            let a = heat_kernel_series(tc, x, l, &ctl)?.value;
            let b = heat_kernel_images(tc, x, l, &ctl)?.value;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(outcome(
        16,
        worst < 1e-12,
        format!("max |series - images| at crossover = {worst:.2e} (< 1e-12)"),
    ))
}

fn c17() -> Res {
    let p = ProblemParams::interval(4.0, 1.0, 0.0)?;
    let bh = beta_hat(&p)?;
    let (_, b1) = crossing_params(&p)?;
    Ok(outcome(
        17,
        bh.beta_hat > 0.0 && bh.beta_hat <= b1,
        format!(
            "beta_hat = {:.6}, beta1 = {b1:.6}, gap = {:.4e}",
            bh.beta_hat,
            b1 - bh.beta_hat
        ),
    ))
}

/// Constants the criteria are measured against.
pub fn reference_constants() -> Vec<(&'static str, f64)> {
    vec![
        ("b_pi", b_pi()),
        ("c_pi", c_pi()),
        ("d_pi", d_pi()),
        ("q(1)", q_line(1.0)),
        ("(3pi+4)/(3pi)", line_product()),
        ("y_s", t_pole()),
    ]
}
