mod discretize;
mod figures;
mod kernels;
mod popov;
mod selftest;
mod simulate;
mod spectrum;
mod sweep;
mod vie;

use crate::config::{config_err, Cli, Command, Settings};
use anyhow::Result;
use std::f64::consts::PI;
use thermoscope::modes::ModeVector;
use thermoscope::spectrum::{first_pair_seed, trace_pair, AxisCrossing, CharacteristicPoint};
use thermoscope::Length;

pub fn run(cli: Cli) -> Result<bool> {
    let s = cli.command.settings().resolve()?;
    match cli.command {
        Command::Kernels(_) => kernels::run(&s),
        Command::Spectrum(_) => spectrum::run(&s),
        Command::Popov(_) => popov::run(&s),
        Command::Discretize(_) => discretize::run(&s),
        Command::Vie(_) => vie::run(&s),
        Command::Simulate(_) => simulate::run(&s),
        Command::Sweep(_) => sweep::run(&s),
        Command::Figures(_) => figures::run(&s),
        Command::Selftest(_) => selftest::run(&s),
    }
}

pub struct PairPath {
    pub points: Vec<CharacteristicPoint>,
    pub crossing: Option<AxisCrossing>,
    pub diagnostics: Vec<String>,
}

/// First complex pair along an increasing gain grid. The branch is seeded at a node
/// with a well-separated pair and continued in both directions.
pub fn pair_path(length: Length, x0: f64, betas: &[f64]) -> Result<PairPath> {
    if betas.is_empty() || !betas.windows(2).all(|w| w[1] > w[0]) {
        return Err(config_err("gain grid must be strictly increasing"));
    }
    let ok = |b: f64| b * x0 > PI * 1.05;
    let pivot = betas
        .iter()
        .position(|&b| b * x0 >= 10.0)
        .or_else(|| betas.iter().rposition(|&b| ok(b)))
        .filter(|&i| ok(betas[i]))
        .ok_or_else(|| config_err(format!("gain grid must reach beyond pi/x0 = {}", PI / x0)))?;
    let seed = first_pair_seed(length, x0, betas[pivot])?;
    let up = trace_pair(&betas[pivot..], length, x0, seed)?;
    let mut points = Vec::with_capacity(betas.len());
    let mut diagnostics = Vec::new();
    let mut crossing = None;
    if pivot > 0 {
        let rev: Vec<f64> = betas[..=pivot].iter().rev().copied().collect();
        let down = trace_pair(&rev, length, x0, seed)?;
        points.extend(down.points.iter().skip(1).rev().copied());
        diagnostics.extend(down.diagnostic);
        crossing = down.crossing;
    }
    points.extend(up.points.iter().copied());
    diagnostics.extend(up.diagnostic);
    if up.crossing.is_some() {
        crossing = up.crossing;
    }
    Ok(PairPath {
        points,
        crossing,
        diagnostics,
    })
}

/// `amp * phi_mode` with room for `n_modes` coefficients.
pub fn initial_datum(s: &Settings, l: f64, default_modes: usize) -> Result<ModeVector> {
    let k = s.mode.unwrap_or(1);
    let n = s.n_modes.unwrap_or(default_modes).max(k);
    let mut u = ModeVector::single(k, n, l).map_err(|e| config_err(e.to_string()))?;
    let amp = s.amp.unwrap_or(1.0);
    for c in u.coeffs.iter_mut() {
        *c *= amp;
    }
    Ok(u)
}
