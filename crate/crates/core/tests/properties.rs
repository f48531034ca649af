use num_complex::Complex64;
use proptest::prelude::*;
use thermoscope::kernels::*;
use thermoscope::params::principal_sqrt;
use thermoscope::popov::{popov_sample, PopovLine};
use thermoscope::spectrum::characteristic_interval;
use thermoscope::{ProblemParams, SeriesControl};

fn off_cut() -> impl Strategy<Value = Complex64> {
    (-50.0..50.0f64, -50.0..50.0f64)
        .prop_filter("off the cut", |(re, im)| im.abs() > 1e-6 || *re > 1e-6)
        .prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sqrt_is_principal(s in off_cut()) {
        let r = principal_sqrt(s).unwrap();
        prop_assert!(r.re > 0.0);
        prop_assert!((r * r - s).norm() < 1e-12 * s.norm().max(1.0));
    }

    #[test]
    fn green_is_symmetric(s in off_cut(), l in 0.5..8.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let (x, y) = (a * l, b * l);
        let g1 = dirichlet_green(s, x, y, l).unwrap();
        let g2 = dirichlet_green(s, y, x, l).unwrap();
        prop_assert!((g1 - g2).norm() <= 1e-14 * g1.norm().max(1e-300));
    }

    #[test]
    fn green_conjugate_symmetry(s in off_cut(), l in 0.5..8.0f64, a in -1.0..1.0f64) {
        let g = dirichlet_green(s, a * l, 0.0, l).unwrap();
        let gc = dirichlet_green(s.conj(), a * l, 0.0, l).unwrap();
        prop_assert!((g.conj() - gc).norm() <= 1e-14 * g.norm().max(1e-300));
    }

    #[test]
    fn characteristic_conjugate_symmetry(re in 0.01..5.0f64, im in 0.01..5.0f64, beta in -20.0..100.0f64, l in 1.5..8.0f64) {
        let p = ProblemParams::interval(l, 1.0, beta).unwrap();
        let lam = Complex64::new(re, im);
        let h = characteristic_interval(lam, &p).unwrap().h;
        let hc = characteristic_interval(lam.conj(), &p).unwrap().h;
        prop_assert!((h.conj() - hc).norm() <= 1e-12 * h.norm().max(1.0));
    }

    #[test]
    fn popov_function_decreases_with_gain(omega in 0.1..200.0f64, q in 0.01..1.0f64, b1 in 1.0..200.0f64, db in 0.1..50.0f64) {
        let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
        let s = popov_sample(&p, omega).unwrap();
        let lo = PopovLine::new(q, b1).unwrap().f_sample(&s);
        let hi = PopovLine::new(q, b1 + db).unwrap().f_sample(&s);
        prop_assert!(hi > lo);
    }

    #[test]
    fn heat_kernel_dual_forms_agree(t in 0.01..20.0f64, a in -0.99..0.99f64, l in 0.5..6.0f64) {
        let ctl = SeriesControl::with_tol(1e-15);
        let x = a * l;
        let s = heat_kernel_series(t, x, l, &ctl).unwrap().value;
        let i = heat_kernel_images(t, x, l, &ctl).unwrap().value;
        prop_assert!((s - i).abs() < 1e-12 * (1.0 / l).max(1.0 / t.sqrt()));
    }

    #[test]
    fn heat_kernel_is_positive_inside(t in 0.01..50.0f64, a in -0.95..0.95f64) {
        let v = heat_kernel(t, a * 4.0, 4.0, &SeriesControl::default()).unwrap().value;
        prop_assert!(v > 0.0);
    }

    #[test]
    fn derivative_transform_relation(omega in 0.05..100.0f64) {
        let p = ProblemParams::interval(4.0, 1.0, 0.0).unwrap();
        let (a, ap) = kernel_fourier(&p, omega, &SeriesControl::default()).unwrap();
        prop_assert!((ap - Complex64::new(0.0, omega) * a).norm() < 1e-15 * ap.norm().max(1e-300));
        let g = transfer_iw(&p, omega).unwrap();
        prop_assert!((g + a).norm() < 1e-9 * g.norm().max(1e-6));
    }
}
