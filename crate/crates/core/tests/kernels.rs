use approx::assert_relative_eq;
use num_complex::Complex64;
use std::f64::consts::PI;
use thermoscope::discretization::build_operator;
use thermoscope::kernels::*;
use thermoscope::modes::{phi, ModeVector};
use thermoscope::{Error, Length, ProblemParams, SeriesControl};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Green's function in the textbook sinh form, fine for moderate arguments.
fn naive_green(s: Complex64, x: f64, y: f64, l: f64) -> Complex64 {
    let r = s.sqrt();
    let (lo, hi) = (x.min(y), x.max(y));
    (r * (l + lo)).sinh() * (r * (l - hi)).sinh() / (r * (2.0 * r * l).sinh())
}

#[test]
fn free_kernel_values() {
    assert_relative_eq!(
        free_resolvent_kernel(c(1.0), 0.0).unwrap().re,
        0.5,
        epsilon = 1e-15
    );
    assert_relative_eq!(
        free_resolvent_kernel(c(4.0), 0.0).unwrap().re,
        0.25,
        epsilon = 1e-15
    );
    let v = free_resolvent_kernel(c(1.0), 1.0).unwrap();
    assert_relative_eq!(v.re, 0.18393972058572117, epsilon = 1e-15);
    assert_eq!(v.im, 0.0);
}

#[test]
fn branch_cut_is_rejected() {
    for s in [c(-1.0), c(0.0), c(-1e-300)] {
        assert!(matches!(
            free_resolvent_kernel(s, 0.3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            dirichlet_green(s, 0.0, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
    }
    // just above the cut is fine
    assert!(free_resolvent_kernel(Complex64::new(-1.0, 1e-12), 0.0).is_ok());
}

#[test]
fn dirichlet_green_boundary_symmetry_and_limit() {
    let s = Complex64::new(0.7, 0.4);
    assert_eq!(dirichlet_green(s, -2.0, 0.5, 2.0).unwrap().norm(), 0.0);
    assert_eq!(dirichlet_green(s, 0.5, 2.0, 2.0).unwrap().norm(), 0.0);
    let a = dirichlet_green(c(1.0), 0.3, 0.7, 4.0).unwrap();
    let b = dirichlet_green(c(1.0), 0.7, 0.3, 4.0).unwrap();
    assert_eq!(a, b);
    let v = dirichlet_green(c(1.0), 0.0, 0.0, 16.0).unwrap();
    assert!((v.re - 0.5).abs() < 1e-6);
    assert!(matches!(
        dirichlet_green(c(1.0), 4.5, 0.0, 4.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn dirichlet_green_matches_sinh_form() {
    for &(s, x, y, l) in &[
        (Complex64::new(1.0, 0.0), 0.3, -0.2, 1.0),
        (Complex64::new(2.0, 3.0), -0.9, 0.4, 2.0),
        (Complex64::new(-1.0, 0.5), 1.5, 0.1, 3.0),
    ] {
        let a = dirichlet_green(s, x, y, l).unwrap();
        let b = naive_green(s, x, y, l);
        assert!((a - b).norm() < 1e-13 * b.norm().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn dirichlet_green_matches_eigen_expansion() {
    // G = sum phi_k(x) phi_k(y) / (s + mu_k), tail ~ 1/N
    let (s, x, y, l) = (c(1.0), 0.3, -0.8, 2.0);
    let mut acc = 0.0;
    for k in 1..=200_000 {
        let mu = (k as f64 * PI / (2.0 * l)).powi(2);
        acc += phi(k, x, l) * phi(k, y, l) / (1.0 + mu);
    }
    let g = dirichlet_green(s, x, y, l).unwrap();
    assert!((g.re - acc).abs() < 1e-6, "{} vs {acc}", g.re);
}

#[test]
fn dirichlet_green_approaches_free_kernel_monotonically() {
    let s = c(0.5);
    let mut prev = f64::INFINITY;
    for l in [2.0, 4.0, 8.0, 16.0] {
        let d = (dirichlet_green(s, 0.3, -0.4, l).unwrap()
            - free_resolvent_kernel(s, 0.7).unwrap())
        .norm();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-6);
}

#[test]
fn perturbed_kernel_reduces_and_line_sign() {
    let p0 = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
    let s = Complex64::new(0.3, 0.2);
    assert_eq!(
        perturbed_resolvent_kernel(&p0, s, 0.4, -0.3).unwrap(),
        dirichlet_green(s, 0.4, -0.3, 4.0).unwrap()
    );
    let line = ProblemParams::line(1.0, 10.0).unwrap();
    let v = perturbed_resolvent_kernel(&line, c(25.0), 0.0, 1.0).unwrap();
    assert!(v.re < 0.0 && v.im == 0.0, "{v}");
}

#[test]
fn perturbed_kernel_pole_is_reported() {
    // on the line, 1 + beta e^{-x0 r}/(2r) = 0 at r = 1 for beta = -2e
    let p = ProblemParams::line(1.0, -2.0 * 1f64.exp()).unwrap();
    match perturbed_resolvent_kernel(&p, c(1.0), 0.0, 0.0) {
        Err(Error::Pole { s }) => assert_eq!(s, c(1.0)),
        other => panic!("expected pole, got {other:?}"),
    }
}

#[test]
fn perturbed_kernel_matches_discrete_resolvent() {
    // kernel of (s + A^m)^{-1} is the inverse divided by the weight; the rank-one
    // truncation error is O(2^-m), removed by one Richardson step
    let p = ProblemParams::interval(4.0, 1.0, 5.0).unwrap();
    let exact = perturbed_resolvent_kernel(&p, c(1.0), 0.5, 0.5).unwrap().re;
    let kernel_at = |m: u32| {
        let op = build_operator(m, &p).unwrap();
        let n = op.grid.size();
        let j = op
            .grid
            .points
            .iter()
            .position(|&x| (x - 0.5).abs() < 1e-12)
            .unwrap();
        let mut a = op.matrix.clone();
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        let inv = a.try_inverse().unwrap();
        inv[(j, j)] / op.grid.weight()
    };
    let (k9, k10) = (kernel_at(9), kernel_at(10));
    let extrapolated = 2.0 * k10 - k9;
    assert!(
        (extrapolated - exact).abs() < 1e-4,
        "{extrapolated} vs {exact} (raw {k9}, {k10})"
    );
}

#[test]
fn heat_kernel_boundary_and_dual_forms() {
    let ctl = SeriesControl::with_tol(1e-14);
    assert!(heat_kernel(1.0, 4.0, 4.0, &ctl).unwrap().value.abs() < 1e-14);
    assert!(heat_kernel(0.01, -4.0, 4.0, &ctl).unwrap().value.abs() < 1e-14);
    let a = heat_kernel_series(0.5, 1.0, 4.0, &ctl).unwrap();
    let b = heat_kernel_images(0.5, 1.0, 4.0, &ctl).unwrap();
    assert!((a.value - b.value).abs() < 1e-12);
    assert!(a.terms >= SeriesControl::MIN_TERMS && b.terms >= SeriesControl::MIN_TERMS);
}

#[test]
fn heat_kernel_large_time_is_first_mode() {
    let ctl = SeriesControl::default();
    let (t, x, l) = (60.0, 1.0, 4.0);
    let one = (PI * (x + l) / (2.0 * l)).sin() * (-t * PI * PI / (4.0 * l * l)).exp() / l;
    let v = heat_kernel(t, x, l, &ctl).unwrap().value;
    assert!((v - one).abs() < 1e-6 * one.abs());
}

#[test]
fn heat_kernel_rejects_bad_input_and_budget() {
    let ctl = SeriesControl::default();
    assert!(matches!(
        heat_kernel(0.0, 0.0, 1.0, &ctl),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        heat_kernel(-1.0, 0.0, 1.0, &ctl),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        heat_kernel(1.0, 2.0, 1.0, &ctl),
        Err(Error::Domain(_))
    ));
    let tight = SeriesControl {
        n_terms: 3,
        ..SeriesControl::default()
    };
    assert!(matches!(
        heat_kernel(1.0, 0.0, 1.0, &tight),
        Err(Error::SeriesBudget { terms: 3, .. })
    ));
}

#[test]
fn heat_kernel_time_derivative_matches_difference() {
    let ctl = SeriesControl::default();
    for t in [0.05, 0.3, 2.0, 10.0] {
        let h = 1e-5 * t;
        let fd = (heat_kernel(t + h, 1.0, 4.0, &ctl).unwrap().value
            - heat_kernel(t - h, 1.0, 4.0, &ctl).unwrap().value)
            / (2.0 * h);
        let d = heat_kernel_dt(t, 1.0, 4.0, &ctl).unwrap().value;
        assert!(
            (fd - d).abs() < 1e-7 * d.abs().max(1e-3),
            "t={t}: {fd} vs {d}"
        );
    }
}

#[test]
fn kernel_integral_matches_laplace_limit() {
    // int_0^inf k_L(t, x0) dt = (L - x0)/2, by Simpson in u = ln t
    let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
    let ctl = SeriesControl::default();
    let (a, b, n) = ((1e-4f64).ln(), (400f64).ln(), 4000);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let u = a + i as f64 * h;
        let t = u.exp();
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (-kernel_a(t, &p, &ctl).unwrap()).abs() * t;
    }
    acc *= h / 3.0;
    assert!((acc - 1.5).abs() < 1e-8, "{acc}");
    // transfer function tends to the same value as s -> 0+
    let g = transfer_function(&p, c(1e-10)).unwrap();
    assert!((g.re - 1.5).abs() < 1e-8);
}

#[test]
fn theta_identity_and_leading_term() {
    assert_eq!(theta1(0.3, 0.0, 1e-15).unwrap().value, 0.0);
    let (t, l, x0) = (0.8, 4.0, 1.0);
    let th = theta1(heat_nome(t, l), theta_angle(x0, l), 1e-16)
        .unwrap()
        .value;
    let k = heat_kernel(t, x0, l, &SeriesControl::default())
        .unwrap()
        .value;
    assert!((th / (2.0 * l) - k).abs() < 1e-10);
    let q: f64 = 1e-6;
    let v = theta1(q, PI / 2.0, 1e-300).unwrap().value;
    let lead = 2.0 * q.powf(0.25);
    assert!((v / lead - 1.0).abs() < 1e-5);
    assert!(matches!(theta1(1.0, 0.1, 1e-12), Err(Error::Domain(_))));
    assert!(matches!(theta1(0.0, 0.1, 1e-12), Err(Error::Domain(_))));
}

#[test]
fn transfer_function_values() {
    let line = ProblemParams::line(1.0, 0.0).unwrap();
    assert_relative_eq!(
        transfer_function(&line, c(1.0)).unwrap().re,
        0.18393972058572117,
        epsilon = 1e-15
    );
    let g = transfer_iw(&line, 9.0 * PI * PI / 8.0).unwrap();
    assert!(g.im.abs() < 1e-15);
    assert!((g.re + 1.0 / 70.3134).abs() < 1e-7);
    // small delta: G_delta / delta -> 1/2 as omega -> 0
    let delta = 1e-3;
    let p = ProblemParams::interval(1.0, 1.0 - delta, 0.0).unwrap();
    let v = transfer_iw(&p, 1e-8).unwrap() / delta;
    assert!((v.re - 0.5).abs() < 1e-3 && v.im.abs() < 1e-6);
}

#[test]
fn transfer_function_agrees_with_green() {
    let p = ProblemParams::interval(3.0, 1.2, 0.0).unwrap();
    let s = Complex64::new(0.4, 2.5);
    let g = transfer_function(&p, s).unwrap();
    let d = dirichlet_green(s, 1.2, 0.0, 3.0).unwrap();
    assert!((g - d).norm() < 1e-14);
}

#[test]
fn transfer_function_converges_to_line() {
    let s = Complex64::new(1.0, 5.0);
    let line = transfer_function(&ProblemParams::line(1.0, 0.0).unwrap(), s).unwrap();
    let far = transfer_function(&ProblemParams::interval(20.0, 1.0, 0.0).unwrap(), s).unwrap();
    assert!((line - far).norm() < 1e-12);
}

#[test]
fn kernel_fourier_relations() {
    let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
    let ctl = SeriesControl::default();
    let (a, ap) = kernel_fourier(&p, 5.0, &ctl).unwrap();
    assert_eq!(ap, Complex64::new(0.0, 5.0) * a);
    let g = transfer_iw(&p, 5.0).unwrap();
    assert!((g.re + a.re).abs() < 1e-10, "{} vs {}", g.re, -a.re);
    assert!((5.0 * g.im - ap.re).abs() < 1e-10);
    let (am, _) = kernel_fourier(&p, -5.0, &ctl).unwrap();
    assert!((am - a.conj()).norm() < 1e-15);
    assert!(matches!(
        kernel_fourier(&p, 0.0, &ctl),
        Err(Error::Domain(_))
    ));
    let line = ProblemParams::line(1.0, 0.0).unwrap();
    assert!(kernel_fourier(&line, 1.0, &ctl).is_err());
}

#[test]
fn forcing_cases() {
    let p = ProblemParams::interval(4.0, 1.0, 3.0).unwrap();
    let zero = ModeVector::zeros(16, 4.0);
    for t in [0.0, 0.5, 7.0] {
        assert_eq!(forcing(t, &p, &zero).unwrap(), 0.0);
    }
    let one = ModeVector::single(1, 16, 4.0).unwrap();
    let t = 2.5;
    let expect = phi(1, 1.0, 4.0) * (-t * PI * PI / 64.0).exp();
    assert_relative_eq!(forcing(t, &p, &one).unwrap(), expect, epsilon = 1e-15);
    // smooth data vanishing at the walls with its second derivative
    let u = |x: f64| (PI * (x + 4.0) / 8.0).sin().powi(3);
    let modes = ModeVector::project(u, 4.0, 64, 20_000).unwrap();
    assert!((forcing(0.0, &p, &modes).unwrap() - u(1.0)).abs() < 1e-9);
    let h = 1e-6;
    let fd =
        (forcing(1.0 + h, &p, &modes).unwrap() - forcing(1.0 - h, &p, &modes).unwrap()) / (2.0 * h);
    assert!((fd - forcing_prime(1.0, &p, &modes).unwrap()).abs() < 1e-8);
}

#[test]
fn params_validation() {
    assert!(ProblemParams::interval(1.0, 1.0, 0.0).is_err());
    assert!(ProblemParams::interval(1.0, 0.0, 0.0).is_err());
    assert!(ProblemParams::interval(-1.0, 0.5, 0.0).is_err());
    assert!(ProblemParams::line(1.0, f64::NAN).is_err());
    assert_eq!("inf".parse::<Length>().unwrap(), Length::Infinite);
    assert_eq!("4".parse::<Length>().unwrap(), Length::Finite(4.0));
    assert!("-2".parse::<Length>().is_err());
}
