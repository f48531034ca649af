use num_complex::Complex64;
use std::f64::consts::PI;
use thermoscope::kernels::transfer_iw;
use thermoscope::spectrum::*;
use thermoscope::{Length, ProblemParams};

const BETA1_LINE: f64 = 70.3134479617;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Onset gain from the closed form 2 g exp(g/m) / sin g, evaluated directly.
fn phi_direct(m: f64) -> f64 {
    let g = PI - m.atan();
    2.0 * g * (g / m).exp() / g.sin()
}

#[test]
fn line_characteristic_values() {
    let z = Complex64::new(1.0, 1.0) * (3.0 * PI / 4.0);
    assert!(characteristic_line(z, BETA1_LINE, 1.0).norm() < 1e-9);
    assert_eq!(
        characteristic_line(Complex64::new(1.0, 0.0), 0.0, 1.0),
        Complex64::new(2.0, 0.0)
    );
    let v = characteristic_line(Complex64::new(0.0, PI / 2.0), PI, 1.0);
    assert!(v.norm() < 1e-14);
}

#[test]
fn interval_characteristic_values() {
    let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
    let c = characteristic_interval(Complex64::new(PI / 8.0, 0.0), &p).unwrap();
    assert!(c.h.norm() < 1e-15);
    let q = p.with_beta(3.0);
    let c0 = characteristic_interval(Complex64::new(0.0, 0.0), &q).unwrap();
    assert!((c0.h.re - (2.0 + 3.0 * 3.0)).abs() < 1e-14);
    // J(alpha + i m alpha) is the conjugate of H(m alpha + i alpha)
    let (alpha, m) = (0.7, 2.3);
    let a = characteristic_interval(Complex64::new(alpha, m * alpha), &q).unwrap();
    let b = characteristic_interval(Complex64::new(m * alpha, alpha), &q).unwrap();
    assert!((a.j - b.h.conj()).norm() < 1e-12 * b.h.norm().max(1.0));
}

#[test]
fn sine_factor_roots_do_not_depend_on_gain() {
    let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
    for beta in [-5.0, 0.0, 12.0, 90.0] {
        let q = p.with_beta(beta);
        for k in 1..5 {
            let lam = Complex64::new(k as f64 * PI / 4.0, 0.0);
            let c = characteristic_interval(lam, &q).unwrap();
            assert!(c.sin_factor.norm() < 1e-14);
        }
    }
}

#[test]
fn ray_onsets() {
    let inf = ray_onset(f64::INFINITY, 1.0).unwrap();
    assert!((inf.beta_onset - PI).abs() < 1e-15);
    let one = ray_onset(1.0, 1.0).unwrap();
    assert!((one.beta_onset - BETA1_LINE).abs() < 1e-6);
    assert!((one.gamma0 - 3.0 * PI / 4.0).abs() < 1e-15);
    assert!((ray_onset(1.0, 2.0).unwrap().beta_onset - BETA1_LINE / 2.0).abs() < 1e-6);
    assert!((phi_onset(1e4) - PI).abs() < 1e-3);
    // analytic derivative of the closed form at m = 1
    let g = 3.0 * PI / 4.0;
    let dg = -0.5;
    let analytic = phi_direct(1.0) * (dg / g + (dg - g) - dg / g.tan());
    assert!(
        (phi_onset_derivative(1.0) - analytic).abs() < 1e-4,
        "{analytic}"
    );
    assert!(ray_onset(0.0, 1.0).is_err());
}

#[test]
fn onset_gain_is_monotone() {
    let ms: Vec<f64> = (0..400)
        .map(|i| 10f64.powf(-1.0 + 5.0 * i as f64 / 399.0))
        .collect();
    for w in ms.windows(2) {
        assert!(phi_onset(w[1]) < phi_onset(w[0]));
        assert!((phi_onset(w[0]) - phi_direct(w[0])).abs() < 1e-9 * phi_direct(w[0]));
    }
}

#[test]
fn ray_search_roots() {
    assert!(ray_search(1.0, 3.0, 1.0).is_none());
    assert!(ray_search(5.0, PI * 0.999, 1.0).is_none());
    let g = ray_search(1.0, 80.0, 1.0).unwrap();
    let resid = 80.0 * (-g).exp() * g.sin() - 2.0 * g;
    assert!(resid.abs() < 1e-10 && g >= 3.0 * PI / 4.0);
    // at the onset gain the root sits exactly at gamma0
    let onset = ray_search(1.0, phi_direct(1.0) * (1.0 + 1e-12), 1.0).unwrap();
    assert!((onset - 3.0 * PI / 4.0).abs() < 1e-6);
}

#[test]
fn line_pair_exact_is_a_root() {
    for beta in [4.0, 20.0, BETA1_LINE, 150.0] {
        let lam = line_pair_exact(beta, 1.0).unwrap();
        assert!(
            normalized_line(lam, beta, 1.0).norm() < 1e-12,
            "beta {beta}"
        );
        assert!(lam.im > 0.0);
    }
    let lam = line_pair_exact(BETA1_LINE, 1.0).unwrap();
    assert!((lam.re - lam.im).abs() < 1e-8);
    assert!(line_pair_exact(3.0, 1.0).is_err());
}

#[test]
fn real_line_spectrum() {
    let r = real_spectrum_line(1.0, 2);
    assert_eq!(r.len(), 6);
    for root in &r {
        let lam = Complex64::new(0.0, (-root.s).sqrt());
        assert!(characteristic_line(lam, root.beta, 1.0).norm() < 1e-12);
    }
    assert_eq!(r[0].branch, RealBranch::Plus);
    assert!((r[0].beta - PI).abs() < 1e-15);
    assert!((r[1].beta + 3.0 * PI).abs() < 1e-15);
}

#[test]
fn line_trajectory_crosses_at_beta1() {
    let betas = linspace(40.0, 100.0, 121);
    let seed = first_pair_seed(Length::Infinite, 1.0, betas[0]).unwrap();
    let t = trace_pair(&betas, Length::Infinite, 1.0, seed).unwrap();
    assert!(t.diagnostic.is_none());
    let c = t.crossing.unwrap();
    assert!((c.beta - BETA1_LINE).abs() < 1e-3);
    assert!((c.s.im - 9.0 * PI * PI / 8.0).abs() < 1e-4);
    // every traced point agrees with the exact ray solution
    for pt in &t.points {
        let exact = line_pair_exact(pt.beta, 1.0).unwrap();
        assert!((pt.lambda - exact).norm() < 1e-8);
        assert!(pt.residual <= ROOT_TOL);
    }
}

#[test]
fn interval_crossings_close_to_line() {
    for l in [4.0, 8.0, 16.0] {
        let betas = linspace(40.0, 100.0, 61);
        let len = Length::Finite(l);
        let seed = first_pair_seed(len, 1.0, betas[0]).unwrap();
        let t = trace_pair(&betas, len, 1.0, seed).unwrap();
        let c = t.crossing.expect("crossing");
        assert!(c.beta > 68.0 && c.beta < 73.0, "L={l}: {}", c.beta);
        let p = ProblemParams::interval(l, 1.0, 0.0).unwrap();
        let (w1, b1) = crossing_params(&p).unwrap();
        assert!((c.beta - b1).abs() < 1e-4 * b1, "L={l}: {} vs {b1}", c.beta);
        assert!((c.s.im - w1).abs() < 1e-4 * w1);
    }
}

#[test]
fn long_interval_tracks_line() {
    let betas = linspace(40.0, 100.0, 31);
    let line = trace_pair(
        &betas,
        Length::Infinite,
        1.0,
        first_pair_seed(Length::Infinite, 1.0, 40.0).unwrap(),
    )
    .unwrap();
    let len = Length::Finite(16.0);
    let long = trace_pair(&betas, len, 1.0, first_pair_seed(len, 1.0, 40.0).unwrap()).unwrap();
    for (a, b) in line.points.iter().zip(&long.points) {
        assert!((a.s - b.s).norm() < 5e-2, "{} vs {}", a.s, b.s);
    }
}

#[test]
fn trace_pair_validates_input() {
    let seed = first_pair_seed(Length::Infinite, 1.0, 40.0).unwrap();
    assert!(trace_pair(&[], Length::Infinite, 1.0, seed).is_err());
    assert!(trace_pair(&[40.0, 50.0, 45.0], Length::Infinite, 1.0, seed).is_err());
    // seed not a root at the first node
    assert!(trace_pair(&[60.0, 70.0], Length::Infinite, 1.0, seed).is_err());
}

#[test]
fn z_functions_zero_marks_crossing() {
    let line = ProblemParams::interval(16.0, 1.0, 0.0).unwrap();
    let (_, zi) = z_functions(3.0 * PI / 4.0, &line).unwrap();
    assert!(zi.abs() < 1e-15);
    for l in [4.0, 8.0] {
        let p = ProblemParams::interval(l, 1.0, 0.0).unwrap();
        let (w1, _) = crossing_params(&p).unwrap();
        let alpha = (w1 / 2.0).sqrt();
        let (zl, _) = z_functions(alpha, &p).unwrap();
        assert!(zl.abs() < 1e-9, "L={l}: {zl}");
        // sign of z_L follows the sign of Im G around the zero
        let g = |w: f64| transfer_iw(&p, w).unwrap().im;
        let z = |w: f64| z_functions((w / 2.0).sqrt(), &p).unwrap().0;
        let (a, b) = (w1 * 0.99, w1 * 1.01);
        assert!((g(a) * g(b) < 0.0) && (z(a) * z(b) < 0.0));
    }
    assert!(z_functions(0.0, &line).is_err());
}

#[test]
fn crossing_params_limits() {
    let line = ProblemParams::line(1.0, 0.0).unwrap();
    let (w, b) = crossing_params(&line).unwrap();
    assert!((w - 9.0 * PI * PI / 8.0).abs() < 1e-8);
    assert!((b - BETA1_LINE).abs() < 1e-6);
    let half = ProblemParams::line(0.5, 0.0).unwrap();
    let (w, _) = crossing_params(&half).unwrap();
    assert!((w - 9.0 * PI * PI / 2.0).abs() < 1e-7);
    // sensor near the wall: omega1 -> 2 pi^2 on the unit interval
    let near = ProblemParams::interval(1.0, 0.995, 0.0).unwrap();
    let (w, _) = crossing_params(&near).unwrap();
    assert!((w / (2.0 * PI * PI) - 1.0).abs() < 2e-2, "{w}");
}

#[test]
fn merge_gain_reports_value() {
    let b = merge_gain(4.0, 1.0, 0.0, 40.0, 6.0)
        .unwrap()
        .expect("merge");
    assert!(b > 0.0 && b < 40.0);
    let p = ProblemParams::interval(4.0, 1.0, b * 1.01).unwrap();
    let before = ProblemParams::interval(4.0, 1.0, b * 0.99).unwrap();
    let count = |p: &ProblemParams| {
        let v: Vec<f64> = (1..=20_000)
            .map(|i| {
                characteristic_interval(Complex64::new(6.0 * i as f64 / 20_000.0, 0.0), p)
                    .unwrap()
                    .h
                    .re
            })
            .collect();
        v.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    };
    assert!(count(&p) + 2 <= count(&before));
}

#[test]
fn polish_reflects_interval_roots() {
    let len = Length::Finite(4.0);
    let seed = first_pair_seed(len, 1.0, 70.0).unwrap();
    let r = polish(len, 1.0, 70.0, -seed.lambda).unwrap();
    assert!((r.lambda - seed.lambda).norm() < 1e-8);
    assert!(r.lambda.re >= 0.0 && r.lambda.im >= 0.0);
}
