use super::initial_datum;
use crate::config::{config_err, Settings};
use crate::output::{length_value, num, Report};
use anyhow::Result;
use thermoscope::popov::q_line;
use thermoscope::volterra::{lyapunov, picard_verify, solve_vie, Nonlinearity, VieProblem};

pub fn run(s: &Settings) -> Result<bool> {
    let p = s.finite_params(5.0)?;
    let l = p.finite_length()?;
    let u0 = initial_datum(s, l, 32)?;
    let (t_end, dt) = (s.t_end.unwrap_or(50.0), s.dt.unwrap_or(1e-2));
    let stride = s.stride.unwrap_or(1).max(1);
    let q = s.q.unwrap_or(q_line(p.x0));
    let problem = VieProblem::new(p, u0, Nonlinearity::tanh())?;
    let traj = solve_vie(&problem, t_end, dt).map_err(|e| match e {
        thermoscope::Error::Domain(m) => config_err(m),
        e => e.into(),
    })?;
    let mut r = Report::new("vie", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", p.x0);
    r.param("beta", p.beta);
    r.param("t_end", t_end);
    r.param("dt", dt);
    r.param("q", q);
    r.param("mode", s.mode.unwrap_or(1));
    r.param("amp", s.amp.unwrap_or(1.0));

    let lyap = if p.beta > 0.0 {
        Some(lyapunov(&problem, &traj, q)?)
    } else {
        None
    };
    let idx: Vec<usize> = (0..traj.t.len()).step_by(stride).collect();
    match &lyap {
        Some(ly) => {
            let rows: Vec<Vec<String>> = idx
                .iter()
                .map(|&i| {
                    vec![
                        num(traj.t[i]),
                        num(traj.y[i]),
                        num(ly.w1[i]),
                        num(ly.w2[i]),
                        num(ly.v[i]),
                        num(ly.r[i]),
                    ]
                })
                .collect();
            r.csv(
                "vie_trajectory.csv",
                &["t [time]", "y [1]", "W1 [1]", "W2 [1]", "V [1]", "R [1]"],
                &rows,
            )?;
        }
        None => {
            let rows: Vec<Vec<String>> = idx
                .iter()
                .map(|&i| vec![num(traj.t[i]), num(traj.y[i])])
                .collect();
            r.csv("vie_trajectory.csv", &["t [time]", "y [1]"], &rows)?;
        }
    }
    let y_end = *traj.y.last().expect("non-empty trajectory");
    let y_max = traj.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    r.result("y_final", y_end);
    r.result("y_max_abs", y_max);
    if let Some(ly) = &lyap {
        let tol = s.tol.unwrap_or(1e-5);
        r.result("lyapunov_residual", ly.residual);
        r.result("lyapunov_relative_residual", ly.relative_residual);
        r.check(
            "Lyapunov balance",
            ly.relative_residual < tol,
            format!(
                "max |W - V - R| / max |W| = {:.3e} (< {tol:e})",
                ly.relative_residual
            ),
        );
    }
    let t_short = ((1.0f64.min(t_end) / dt).round().max(1.0)) * dt;
    let pic = picard_verify(&problem, t_short, dt, 30)?;
    r.result("picard_deviation", pic.deviation);
    r.check(
        "Picard agreement",
        pic.deviation < 1e-6,
        format!(
            "30 iterates on [0, {}]: max deviation {:.3e} (< 1e-6)",
            num(t_short),
            pic.deviation
        ),
    );
    r.finish()
}
