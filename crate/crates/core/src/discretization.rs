//! Spectral discretization of the perturbed operator in the sampled sine basis,
//! and a dense nonsymmetric eigensolver built on the real Schur form.

use crate::error::{domain, Error, Result};
use crate::modes::{lambda, phi};
use crate::params::{ComplexValue, ProblemParams};
use crate::spectrum::{AxisCrossing, CharacteristicPoint, EigenTrajectory, CROSSING_TOL};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub m: u32,
    pub l: f64,
    /// Interior points `-L + k 2L / 2^m`, `k = 1 .. 2^m - 1`.
    pub points: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(m: u32, l: f64) -> Result<Self> {
        if m < 2 || m > 12 {
            return Err(domain(format!("grid level m must lie in 2..=12, got {m}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(domain(format!("L must be positive and finite, got {l}")));
        }
        let n = 1usize << m;
        let h = 2.0 * l / n as f64;
        Ok(Self {
            m,
            l,
            points: (1..n).map(|k| -l + k as f64 * h).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Trapezoidal weight `2L / 2^m`.
    pub fn weight(&self) -> f64 {
        2.0 * self.l / (1u64 << self.m) as f64
    }

    /// Sampled spectral delta `sum_k phi_k(x_j) phi_k(y)` at the grid points.
    pub fn delta(&self, y: f64) -> Vec<f64> {
        let n = self.size();
        let modes: Vec<f64> = (1..=n).map(|k| phi(k, y, self.l)).collect();
        self.points
            .iter()
            .map(|&x| (1..=n).map(|k| phi(k, x, self.l) * modes[k - 1]).sum())
            .collect()
    }
}

/// `S(k, j) = phi_k(x_j)`; with `w = 2L/2^m`, `w S^T S = I`.
pub fn dst_matrix(grid: &SpectralGrid) -> DMatrix<f64> {
    let n = grid.size();
    DMatrix::from_fn(n, n, |k, j| phi(k + 1, grid.points[j], grid.l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub matrix: DMatrix<f64>,
    pub params: ProblemParams,
    pub grid: SpectralGrid,
}

impl DiscreteOperator {
    /// The adjoint, represented by the transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            params: self.params,
            grid: self.grid.clone(),
        }
    }
}

/// `A = w S^T diag(lambda_k^2) S + beta w delta_0 delta_x0^T` on the level-`m` grid.
pub fn build_operator(m: u32, p: &ProblemParams) -> Result<DiscreteOperator> {
    let l = p.finite_length()?;
    let grid = SpectralGrid::new(m, l)?;
    let s = dst_matrix(&grid);
    let w = grid.weight();
    let n = grid.size();
    let diag = DVector::from_fn(n, |k, _| lambda(k + 1, l).powi(2));
    let mut a = (s.transpose() * DMatrix::from_diagonal(&diag) * &s) * w;
    if p.beta != 0.0 {
        let d0 = DVector::from_vec(grid.delta(0.0));
        let dx0 = DVector::from_vec(grid.delta(p.x0));
        a += (d0 * dx0.transpose()) * (p.beta * w);
    }
    Ok(DiscreteOperator {
        matrix: a,
        params: *p,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: ComplexValue,
    pub vector: Vec<ComplexValue>,
    pub residual: f64,
}

/// Eigenvalues from the diagonal blocks of a real quasi-triangular matrix.
fn block_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = 0.5 * (a + d);
            let disc = Complex64::new(0.25 * (a - d) * (a - d) + b * c, 0.0).sqrt();
            let (e1, e2) = (half_tr + disc, half_tr - disc);
            // upper member first so pairs stay adjacent
            if e1.im >= e2.im {
                out.push(e1);
                out.push(e2);
            } else {
                out.push(e2);
                out.push(e1);
            }
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Solves `(T - sigma I) z = b` for quasi-upper-triangular `T` by block back substitution.
fn quasi_triangular_solve(t: &DMatrix<f64>, sigma: Complex64, b: &[Complex64]) -> Vec<Complex64> {
    let n = t.nrows();
    let mut z = b.to_vec();
    let mut i = n;
    while i > 0 {
        let two = i >= 2 && t[(i - 1, i - 2)] != 0.0;
        if two {
            let (r0, r1) = (i - 2, i - 1);
            let mut rhs0 = z[r0];
            let mut rhs1 = z[r1];
            for j in i..n {
                rhs0 -= t[(r0, j)] * z[j];
                rhs1 -= t[(r1, j)] * z[j];
            }
            let a = t[(r0, r0)] - sigma;
            let b01 = Complex64::new(t[(r0, r1)], 0.0);
            let c10 = Complex64::new(t[(r1, r0)], 0.0);
            let d = t[(r1, r1)] - sigma;
            let det = a * d - b01 * c10;
            z[r0] = (d * rhs0 - b01 * rhs1) / det;
            z[r1] = (a * rhs1 - c10 * rhs0) / det;
            i -= 2;
        } else {
            let r = i - 1;
            let mut rhs = z[r];
            for j in i..n {
                rhs -= t[(r, j)] * z[j];
            }
            z[r] = rhs / (t[(r, r)] - sigma);
            i -= 1;
        }
    }
    z
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
}

/// All eigenpairs of a dense real matrix, sorted by real part then by imaginary part
/// (upper member of a conjugate pair first).
pub fn eig_matrix(a: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(domain("eig needs a non-empty square matrix"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(domain("matrix has non-finite entries"));
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 100 * n)
        .ok_or(Error::Convergence { size: n })?;
    let (q, t) = schur.unpack();
    let values = block_eigenvalues(&t);
    let anorm = a.norm().max(f64::MIN_POSITIVE);
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let qc = q.map(|v| Complex64::new(v, 0.0));
    let mut pairs: Vec<EigenPair> = values
        .par_iter()
        .map(|&mu| {
            let sigma = mu + Complex64::new(1.0, 1.0) * (1e-13 * anorm);
            let mut z = vec![Complex64::new(1.0, 0.0); n];
            for _ in 0..3 {
                z = quasi_triangular_solve(&t, sigma, &z);
                normalize(&mut z);
            }
            let mut v: Vec<Complex64> = (&qc * DVector::from_vec(z)).iter().copied().collect();
            normalize(&mut v);
            let vv = DVector::from_vec(v.clone());
            let r = (&ac * &vv - vv.map(|c| c * mu)).norm();
            EigenPair {
                value: mu,
                vector: v,
                residual: r,
            }
        })
        .collect();
    pairs.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(y.value.im.total_cmp(&x.value.im))
    });
    Ok(pairs)
}

pub fn eig(op: &DiscreteOperator) -> Result<Vec<EigenPair>> {
    eig_matrix(&op.matrix)
}

/// Eigenvalues only, sorted as in [`eig_matrix`].
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 100 * n)
        .ok_or(Error::Convergence { size: n })?;
    let mut v = block_eigenvalues(&schur.unpack().1);
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(y.im.total_cmp(&x.im)));
    Ok(v)
}

/// Relative threshold below which an eigenvalue is treated as real.
const REAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub beta: f64,
    pub eigenvalue: f64,
    pub primal: Vec<f64>,
    pub adjoint: Vec<f64>,
    pub primal_positive: bool,
    pub adjoint_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionSweep {
    pub x: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    /// First gain whose primal eigenfunction takes both signs.
    pub primal_sign_loss: Option<f64>,
    pub adjoint_sign_loss: Option<f64>,
    /// Gain at which the leading eigenvalue turned complex, ending the sweep.
    pub terminus: Option<f64>,
}

fn leading_real_vector(a: &DMatrix<f64>) -> Result<Option<(f64, Vec<f64>)>> {
    let pairs = eig_matrix(a)?;
    let first = &pairs[0];
    if first.value.im.abs() > REAL_TOL * first.value.norm().max(1.0) {
        return Ok(None);
    }
    let mut v: Vec<f64> = first.vector.iter().map(|c| c.re).collect();
    let anchor = v.iter().copied().find(|x| x.abs() > 1e-300).unwrap_or(1.0);
    let scale = anchor.signum() / v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(Some((first.value.re, v)))
}

fn positive(v: &[f64]) -> bool {
    v.iter().all(|&x| x >= -1e-8)
}

/// Leading eigenfunctions of the operator and its adjoint along a gain list,
/// normalized to unit max norm and positive next to `x = -L`.
pub fn first_eigenfunction_sweep(
    m: u32,
    l: f64,
    x0: f64,
    betas: &[f64],
) -> Result<EigenfunctionSweep> {
    let grid = SpectralGrid::new(m, l)?;
    let mut sweep = EigenfunctionSweep {
        x: grid.points.clone(),
        entries: Vec::new(),
        primal_sign_loss: None,
        adjoint_sign_loss: None,
        terminus: None,
    };
    for &beta in betas {
        let op = build_operator(m, &ProblemParams::interval(l, x0, beta)?)?;
        let (Some((mu, primal)), Some((_, adjoint))) = (
            leading_real_vector(&op.matrix)?,
            leading_real_vector(&op.matrix.transpose())?,
        ) else {
            sweep.terminus = Some(beta);
            break;
        };
        let primal_positive = positive(&primal);
        let adjoint_positive = positive(&adjoint);
        if !primal_positive && sweep.primal_sign_loss.is_none() {
            sweep.primal_sign_loss = Some(beta);
        }
        if !adjoint_positive && sweep.adjoint_sign_loss.is_none() {
            sweep.adjoint_sign_loss = Some(beta);
        }
        sweep.entries.push(SweepEntry {
            beta,
            eigenvalue: mu,
            primal,
            adjoint,
            primal_positive,
            adjoint_positive,
        });
    }
    Ok(sweep)
}

fn to_point(mu: Complex64, beta: f64) -> CharacteristicPoint {
    // eigenvalue s of -A, upper member
    let s = Complex64::new(-mu.re, mu.im.abs());
    CharacteristicPoint {
        lambda: s.sqrt(),
        s,
        beta,
        residual: 0.0,
    }
}

fn upper_eigs(m: u32, l: f64, x0: f64, beta: f64) -> Result<Vec<Complex64>> {
    let op = build_operator(m, &ProblemParams::interval(l, x0, beta)?)?;
    Ok(eigenvalues(&op.matrix)?
        .into_iter()
        .filter(|z| z.im > REAL_TOL * z.norm().max(1.0))
        .collect())
}

fn nearest(cands: &[Complex64], target: Complex64) -> Option<Complex64> {
    cands
        .iter()
        .copied()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
}

/// Follows the complex pair of `A` with smallest real part over the gain grid and
/// bisects the gain at which its real part crosses zero.
pub fn crossing_scan_discrete(m: u32, l: f64, x0: f64, betas: &[f64]) -> Result<EigenTrajectory> {
    if betas.len() < 2 || !betas.windows(2).all(|w| w[1] > w[0]) {
        return Err(domain(
            "gain grid must be strictly increasing with at least two nodes",
        ));
    }
    let spectra: Vec<Vec<Complex64>> = betas
        .par_iter()
        .map(|&b| upper_eigs(m, l, x0, b))
        .collect::<Result<_>>()?;
    let mut traj = EigenTrajectory {
        betas: Vec::new(),
        points: Vec::new(),
        branch_id: 0,
        crossing: None,
        diagnostic: None,
    };
    let Some(mut cur) = spectra[0]
        .iter()
        .copied()
        .min_by(|a, b| a.re.total_cmp(&b.re))
    else {
        traj.diagnostic = Some(format!("no complex eigenvalue at beta = {}", betas[0]));
        return Ok(traj);
    };
    let mut path = vec![cur];
    for (i, cands) in spectra.iter().enumerate().skip(1) {
        let guess = if path.len() >= 2 {
            2.0 * cur - path[path.len() - 2]
        } else {
            cur
        };
        match nearest(cands, guess) {
            Some(z) => {
                let ambiguous: Vec<Complex64> = cands
                    .iter()
                    .copied()
                    .filter(|c| *c != z && (c - guess).norm() < 1.05 * (z - guess).norm())
                    .collect();
                if !ambiguous.is_empty() {
                    traj.diagnostic = Some(format!(
                        "ambiguous continuation at beta = {}: candidates {z} and {:?}",
                        betas[i], ambiguous
                    ));
                }
                cur = z;
                path.push(z);
            }
            None => {
                traj.diagnostic = Some(format!("pair became real at beta = {}", betas[i]));
                break;
            }
        }
    }
    for (k, z) in path.iter().enumerate() {
        traj.betas.push(betas[k]);
        traj.points.push(to_point(*z, betas[k]));
    }
    if let Some(i) = path
        .windows(2)
        .position(|w| w[0].re.signum() != w[1].re.signum())
    {
        let (mut ba, mut za) = (betas[i], path[i]);
        let (mut bb, mut zb) = (betas[i + 1], path[i + 1]);
        let mut found = None;
        for _ in 0..100 {
            let bm = 0.5 * (ba + bb);
            let guess = za + (zb - za) * ((bm - ba) / (bb - ba));
            let Some(zm) = nearest(&upper_eigs(m, l, x0, bm)?, guess) else {
                break;
            };
            if zm.re.abs() < CROSSING_TOL || bb - ba < 1e-12 * bm {
                found = Some((bm, zm));
                break;
            }
            if zm.re.signum() == za.re.signum() {
                ba = bm;
                za = zm;
            } else {
                bb = bm;
                zb = zm;
            }
        }
        traj.crossing = found.map(|(b, z)| AxisCrossing {
            beta: b,
            s: to_point(z, b).s,
        });
    }
    Ok(traj)
}
