//! Command line, TOML run configuration and their merge. Flags win over the file.

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};
use std::fmt;
use std::path::PathBuf;
use thermoscope::{Length, ProblemParams};

#[derive(Debug, Parser)]
#[command(
    name = "thermoscope",
    version,
    about = "Kernels, spectra, Popov analysis and simulation for the heat equation with point feedback"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolvent, heat-kernel and transfer-function samples
    Kernels(Settings),
    /// First complex eigenvalue pair, its axis crossing and the critical constants
    Spectrum(Settings),
    /// Popov curve, critical parameters and the frequency criterion
    Popov(Settings),
    /// Eigenvalues and eigenfunctions of the discretized operator
    Discretize(Settings),
    /// Volterra equation for the sensor trace with Lyapunov bookkeeping
    Vie(Settings),
    /// Mode simulation of the nonlinear feedback system
    Simulate(Settings),
    /// Parameter sweeps written as one table
    Sweep(Settings),
    /// Data for the standard figures
    Figures(Settings),
    /// Run the acceptance checks
    Selftest(Settings),
}

impl Command {
    pub fn settings(&self) -> &Settings {
        match self {
            Command::Kernels(s)
            | Command::Spectrum(s)
            | Command::Popov(s)
            | Command::Discretize(s)
            | Command::Vie(s)
            | Command::Simulate(s)
            | Command::Sweep(s)
            | Command::Figures(s)
            | Command::Selftest(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Critical parameters and criterion over delta on the unit interval
    PopovDelta,
    /// Axis crossing of the first pair over L
    CrossingLength,
    /// First-pair trajectory over beta
    Trajectory,
    /// Limit-cycle amplitude over beta
    Hopf,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::PopovDelta => "popov-delta",
            SweepKind::CrossingLength => "crossing-length",
            SweepKind::Trajectory => "trajectory",
            SweepKind::Hopf => "hopf",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of these settings; flags given on the command line win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Half-length of the interval, a positive number or "inf"
    #[arg(long = "L", value_name = "L")]
    #[serde(rename = "L", default, deserialize_with = "de_length")]
    pub length: Option<Length>,
    /// Use the whole line (L = inf)
    #[arg(long, conflicts_with = "interval")]
    #[serde(default)]
    pub line: bool,
    /// Use a finite interval (default L = 4)
    #[arg(long)]
    #[serde(default)]
    pub interval: bool,
    /// Sensor position
    #[arg(long)]
    pub x0: Option<f64>,
    /// Feedback gain
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Grid level, 2^m - 1 interior points
    #[arg(long)]
    pub m: Option<u32>,
    /// Relative wall distance (L - x0)/L, selects the unit interval
    #[arg(long)]
    pub delta: Option<f64>,
    /// Popov slope
    #[arg(long)]
    pub q: Option<f64>,
    /// Tolerance of the embedded check
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_max: Option<f64>,
    /// Number of grid nodes between the min and max values, inclusive
    #[arg(long)]
    pub steps: Option<usize>,
    /// Explicit comma-separated grid, overrides min/max/steps
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub n_omega: Option<usize>,
    /// Real part of the resolvent parameter
    #[arg(long, allow_negative_numbers = true)]
    pub s_re: Option<f64>,
    /// Imaginary part of the resolvent parameter
    #[arg(long, allow_negative_numbers = true)]
    pub s_im: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_modes: Option<usize>,
    /// Initial datum is `amp * phi_mode`
    #[arg(long)]
    pub mode: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub amp: Option<f64>,
    /// Write every n-th time step
    #[arg(long)]
    pub stride: Option<usize>,
    /// Sweep type
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Verify the frequency criterion and fail if it does not hold
    #[arg(long)]
    #[serde(default)]
    pub check: bool,
    /// Track the discrete axis crossing instead of eigenfunctions
    #[arg(long)]
    #[serde(default)]
    pub crossing: bool,
    /// Single figure number
    #[arg(long)]
    pub figure: Option<u8>,
    /// All figures
    #[arg(long)]
    #[serde(default)]
    pub all: bool,
    /// Comma-separated subset of acceptance criteria
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u8>>,
}

fn de_length<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Length>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    let parsed = match Raw::deserialize(d)? {
        Raw::Num(v) if v > 0.0 && v.is_finite() => Ok(Length::Finite(v)),
        Raw::Num(v) => Err(format!("L must be positive, got {v}")),
        Raw::Text(s) => s.parse::<Length>().map_err(|e| e.to_string()),
    };
    parsed.map(Some).map_err(serde::de::Error::custom)
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Caps the rayon pool at `THERMOSCOPE_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("THERMOSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        config_err(format!(
            "THERMOSCOPE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(format!("thread pool: {e}")))
}

macro_rules! prefer_flags {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )*
    };
}

impl Settings {
    /// Settings with the config file, if any, filled in under the flags.
    pub fn resolve(&self) -> Result<Settings> {
        let mut s = self.clone();
        let Some(path) = &self.config else {
            return s.validated();
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut file: Settings =
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        prefer_flags!(s, file; length, x0, beta, m, delta, q, tol, out, beta_min, beta_max, steps, grid,
            omega_min, omega_max, n_omega, s_re, s_im, t_end, dt, n_modes, mode, amp, stride, kind, figure, only);
        s.line |= file.line;
        s.interval |= file.interval;
        s.check |= file.check;
        s.crossing |= file.crossing;
        s.all |= file.all;
        s.validated()
    }

    fn validated(self) -> Result<Settings> {
        if self.line && self.interval {
            return Err(config_err("--line and --interval are exclusive"));
        }
        for (name, v) in [
            ("tol", self.tol),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("q", self.q),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_err(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(g) = &self.grid {
            if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
                return Err(config_err(
                    "grid must be a non-empty list of finite numbers",
                ));
            }
        }
        Ok(self)
    }

    pub fn length(&self) -> Result<Length> {
        match (self.line, self.interval, self.length) {
            (true, _, Some(Length::Finite(l))) => {
                Err(config_err(format!("--line conflicts with L = {l}")))
            }
            (true, _, _) => Ok(Length::Infinite),
            (_, true, Some(Length::Infinite)) => Err(config_err("--interval needs a finite L")),
            (_, _, Some(l)) => Ok(l),
            _ => Ok(Length::Finite(4.0)),
        }
    }

    pub fn params(&self, default_beta: f64) -> Result<ProblemParams> {
        ProblemParams::new(
            self.length()?,
            self.x0.unwrap_or(1.0),
            self.beta.unwrap_or(default_beta),
        )
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn finite_params(&self, default_beta: f64) -> Result<ProblemParams> {
        let p = self.params(default_beta)?;
        if p.length.is_infinite() {
            return Err(config_err("this command needs a finite L"));
        }
        Ok(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("thermoscope-out"))
    }

    pub fn has_range(&self) -> bool {
        self.grid.is_some()
            || self.beta_min.is_some()
            || self.beta_max.is_some()
            || self.steps.is_some()
    }

    /// Explicit grid, or `steps` equispaced nodes from `beta_min` to `beta_max`.
    pub fn range(&self, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if let Some(g) = &self.grid {
            return Ok(g.clone());
        }
        let (a, b, n) = (
            self.beta_min.unwrap_or(lo),
            self.beta_max.unwrap_or(hi),
            self.steps.unwrap_or(n),
        );
        if n < 2 || !(b > a) {
            return Err(config_err(format!(
                "need max > min and at least two steps, got [{a}, {b}] with {n}"
            )));
        }
        Ok(linspace(a, b, n))
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let d = (n - 1) as f64;
    (0..n)
        .map(|i| (a * (d - i as f64) + b * i as f64) / d)
        .collect()
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else if i == 0 {
                a
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
