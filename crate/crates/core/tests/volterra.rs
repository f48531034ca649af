use thermoscope::modes::ModeVector;
use thermoscope::popov::q_line;
use thermoscope::volterra::*;
use thermoscope::ProblemParams;

fn first_mode() -> ModeVector {
    ModeVector::single(1, 32, 4.0).unwrap()
}

fn problem(beta: f64, u0: ModeVector) -> VieProblem {
    VieProblem::new(
        ProblemParams::interval(4.0, 1.0, beta).unwrap(),
        u0,
        Nonlinearity::tanh(),
    )
    .unwrap()
}

#[test]
fn zero_data_gives_zero_trace() {
    let traj = solve_vie(&problem(40.0, ModeVector::zeros(16, 4.0)), 5.0, 0.01).unwrap();
    assert!(traj.y.iter().all(|&v| v == 0.0));
}

#[test]
fn zero_gain_returns_forcing() {
    let p = problem(0.0, first_mode());
    let traj = solve_vie(&p, 5.0, 0.01).unwrap();
    for (t, y) in traj.t.iter().zip(&traj.y) {
        assert!((y - p.forcing(*t).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn stable_gain_decays() {
    let traj = solve_vie(&problem(5.0, first_mode()), 50.0, 0.01).unwrap();
    assert!(traj.y.last().unwrap().abs() < 1e-3);
}

#[test]
fn decay_envelope_is_monotone_below_the_criterion() {
    // beta = 5 satisfies the frequency criterion with q = q(1)
    for u0 in [
        first_mode(),
        ModeVector::single(2, 32, 4.0).unwrap(),
        ModeVector::new(vec![1.0, -0.5, 0.3], 4.0).unwrap(),
    ] {
        let traj = solve_vie(&problem(5.0, u0), 40.0, 0.01).unwrap();
        let env: Vec<f64> = traj
            .y
            .chunks(400)
            .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for w in env[1..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{env:?}");
        }
    }
}

#[test]
fn quadrature_is_second_order() {
    let p = problem(20.0, first_mode());
    let at = |dt: f64| *solve_vie(&p, 2.0, dt).unwrap().y.last().unwrap();
    let (a, b, c) = (at(0.01), at(0.005), at(0.0025));
    let ratio = (a - b) / (b - c);
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn picard_iterates_converge() {
    // small data keeps the feedback in its linear range, where the contraction is slow
    let small = ModeVector::new(vec![1e-3], 4.0).unwrap();
    let p = problem(20.0, small);
    let r = picard_verify(&p, 1.0, 0.005, 30).unwrap();
    assert!(r.deviation < 1e-6, "{}", r.deviation);
    assert_eq!(r.deviations.len(), 31);
    // the gap ratios shrink, faster than any geometric rate
    let g: Vec<f64> = r.gaps.iter().copied().take_while(|&v| v > 1e-16).collect();
    assert!(g.len() >= 6, "{g:?}");
    let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
    assert!(ratios.last().unwrap() < &(0.5 * ratios[0]), "{ratios:?}");
    // at zero gain the first iterate already is the solution
    let z = picard_verify(&problem(0.0, first_mode()), 1.0, 0.01, 2).unwrap();
    assert_eq!(z.deviations[0], 0.0);
}

#[test]
fn lyapunov_balance() {
    let p = problem(30.0, first_mode());
    let traj = solve_vie(&p, 20.0, 0.005).unwrap();
    let rep = lyapunov(&p, &traj, q_line(1.0)).unwrap();
    assert!(rep.relative_residual < 1e-5, "{}", rep.relative_residual);
    assert!(rep.w1.iter().all(|&v| v >= -1e-15));
    assert!(rep.w2.iter().all(|&v| v >= 0.0));
    let z = problem(30.0, ModeVector::zeros(8, 4.0));
    let zt = solve_vie(&z, 2.0, 0.01).unwrap();
    let zr = lyapunov(&z, &zt, 0.1).unwrap();
    assert!(zr.w.iter().chain(&zr.v).chain(&zr.r).all(|&v| v == 0.0));
    assert!(lyapunov(&p, &traj, 0.0).is_err());
}

#[test]
fn sector_conditions() {
    let grid: Vec<f64> = (1..=200)
        .flat_map(|i| [i as f64 * 0.05, -(i as f64) * 0.05])
        .collect();
    assert!(sector_check(&Nonlinearity::tanh(), 10.0, &grid));
    assert!(!sector_check(
        &Nonlinearity::clipped_identity(),
        10.0,
        &grid
    ));
    assert!(!sector_check(&Nonlinearity::identity(), 10.0, &grid));
    let two_tanh = Nonlinearity::new(
        "2tanh",
        |w: f64| 2.0 * w.tanh(),
        |w: f64| 2.0 / w.cosh().powi(2),
        2.0,
        2.0,
    );
    assert!(two_tanh.is_err());
    let shifted = Nonlinearity::new(
        "shift",
        |w: f64| w.tanh() + 0.1,
        |w: f64| 1.0 / w.cosh().powi(2),
        2.0,
        1.0,
    );
    assert!(shifted.is_err());
}

#[test]
fn antiderivatives() {
    let t = Nonlinearity::tanh();
    let (beta, z) = (3.0, 0.7);
    let exact = (beta * z as f64).cosh().ln() / beta;
    assert!((t.f_beta(beta, z) - exact).abs() < 1e-14);
    assert!((t.f_beta(beta, 400.0) - (1200.0 - std::f64::consts::LN_2) / beta).abs() < 1e-10);
    // Simpson fallback when no antiderivative is given
    let plain =
        Nonlinearity::new("tanh", f64::tanh, |w: f64| 1.0 - w.tanh().powi(2), 1.0, 1.0).unwrap();
    assert!((plain.f_beta(beta, z) - exact).abs() < 1e-9);
}

#[test]
fn step_validation() {
    let p = problem(1.0, first_mode());
    assert!(solve_vie(&p, 1.0, 0.3).is_err());
    assert!(solve_vie(&p, 1.0, -0.1).is_err());
    let mismatched = VieProblem::new(
        ProblemParams::interval(4.0, 1.0, 1.0).unwrap(),
        ModeVector::zeros(4, 2.0),
        Nonlinearity::tanh(),
    );
    assert!(mismatched.is_err());
    assert!(VieProblem::new(
        ProblemParams::line(1.0, 1.0).unwrap(),
        ModeVector::zeros(4, 4.0),
        Nonlinearity::tanh()
    )
    .is_err());
}
