//! One-dimensional bracketing, maximization and complex Newton iteration.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Brent root of `f` on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
/// `tol` is relative to the bracket magnitude.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let scale = a.abs().max(b.abs()).max(1.0);
    let mut conv = roots::SimpleConvergency {
        eps: tol * scale,
        max_iter: 500,
    };
    roots::find_root_brent(a, b, &f, &mut conv).map_err(|e| Error::Search {
        lo: a,
        hi: b,
        what: e.to_string(),
    })
}

/// Scans `grid` for the first sign change of `f` accepted by `accept`, then polishes it.
pub fn first_sign_change(
    f: impl Fn(f64) -> f64,
    grid: &[f64],
    tol: f64,
    accept: impl Fn(f64) -> bool,
) -> Result<f64> {
    let mut prev = (grid[0], f(grid[0]));
    for &x in &grid[1..] {
        let fx = f(x);
        if prev.1 == 0.0 && accept(prev.0) {
            return Ok(prev.0);
        }
        if prev.1 * fx < 0.0 {
            let r = brent(&f, prev.0, x, tol)?;
            if accept(r) {
                return Ok(r);
            }
        }
        prev = (x, fx);
    }
    Err(Error::Search {
        lo: grid[0],
        hi: *grid.last().unwrap(),
        what: "no admissible sign change".into(),
    })
}

/// Geometric grid with `n` nodes from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` over a grid, refined by golden section around every local grid maximum.
pub fn grid_max(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = (grid[0], vals[0]);
    for i in 0..grid.len() {
        if vals[i] > best.1 {
            best = (grid[i], vals[i]);
        }
    }
    for i in 1..grid.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let (x, fx) = golden_max(&f, grid[i - 1], grid[i + 1], 1e-14);
            if fx > best.1 {
                best = (x, fx);
            }
        }
    }
    best
}

/// Complex Newton iteration with a central-difference derivative and step halving
/// whenever the residual fails to decrease.
pub fn newton(
    f: impl Fn(Complex64) -> Complex64,
    z0: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, f64)> {
    let mut z = z0;
    let mut fz = f(z);
    for _ in 0..max_iter {
        if fz.norm() < tol {
            return Ok((z, fz.norm()));
        }
        let h = 1e-7 * z.norm().max(1.0);
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        let step = fz / d;
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = z - damp * step;
            let fc = f(cand);
            if fc.norm().is_finite() && fc.norm() < fz.norm() {
                z = cand;
                fz = fc;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fz.norm() < tol {
        Ok((z, fz.norm()))
    } else {
        Err(Error::Divergence(format!(
            "newton from {z0} stalled at {z} with residual {:e}",
            fz.norm()
        )))
    }
}
