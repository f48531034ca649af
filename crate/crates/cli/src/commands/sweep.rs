use super::{initial_datum, pair_path, simulate::sim_options};
use crate::config::{config_err, linspace, Settings, SweepKind};
use crate::output::{num, opt, Report};
use anyhow::Result;
use rayon::prelude::*;
use thermoscope::pde_sim::simulate;
use thermoscope::popov::{critical_params_delta, verify_criterion, GridControl, PopovLine};
use thermoscope::spectrum::crossing_params;
use thermoscope::volterra::Nonlinearity;
use thermoscope::{Length, ProblemParams};

type Row = std::result::Result<Vec<String>, String>;

fn popov_delta(delta: f64) -> Row {
    let run = || -> thermoscope::Result<Vec<String>> {
        let c = critical_params_delta(delta)?;
        let p = ProblemParams::interval(1.0, 1.0 - delta, 0.0)?;
        let rep = verify_criterion(
            &p,
            PopovLine::new(c.q, c.beta1)?,
            None,
            GridControl::default(),
        )?;
        Ok(vec![
            num(delta),
            num(c.omega1),
            num(c.beta1),
            num(c.q),
            num(c.product),
            num(rep.max_f),
            rep.satisfied.to_string(),
        ])
    };
    run().map_err(|e| e.to_string())
}

fn crossing_length(l: f64, x0: f64) -> Row {
    let run = || -> anyhow::Result<Vec<String>> {
        let betas = linspace(40.0 / x0, 100.0 / x0, 61);
        let path = pair_path(Length::Finite(l), x0, &betas)?;
        let c = path
            .crossing
            .ok_or_else(|| anyhow::anyhow!("no crossing on [40, 100]/x0"))?;
        let (w1, b1) = crossing_params(&ProblemParams::interval(l, x0, 0.0)?)?;
        Ok(vec![num(l), num(c.beta), num(c.s.im), num(b1), num(w1)])
    };
    run().map_err(|e| e.to_string())
}

pub fn run(s: &Settings) -> Result<bool> {
    let kind = s.kind.ok_or_else(|| config_err("sweep needs --kind"))?;
    let mut r = Report::new("sweep", s.out_dir())?;
    r.param("kind", kind.as_str());
    let (header, grid, rows): (Vec<&str>, Vec<f64>, Vec<Row>) = match kind {
        SweepKind::PopovDelta => {
            let grid = s.range(0.05, 0.95, 19)?;
            if grid.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
                return Err(config_err("delta grid must lie in (0, 1)"));
            }
            let rows = grid.par_iter().map(|&d| popov_delta(d)).collect();
            (
                vec![
                    "delta [1]",
                    "omega1 [1/time]",
                    "beta1 [1/length]",
                    "q [time]",
                    "product [1]",
                    "max_f [1]",
                    "satisfied",
                ],
                grid,
                rows,
            )
        }
        SweepKind::CrossingLength => {
            let grid = s.grid.clone().unwrap_or_else(|| vec![4.0, 8.0, 16.0]);
            let x0 = s.x0.unwrap_or(1.0);
            if grid.iter().any(|&l| !(l > x0)) {
                return Err(config_err("every L must exceed x0"));
            }
            r.param("x0", x0);
            let rows = grid.par_iter().map(|&l| crossing_length(l, x0)).collect();
            (
                vec![
                    "L [length]",
                    "beta_crossing [1/length]",
                    "omega_crossing [1/time]",
                    "beta1 [1/length]",
                    "omega1 [1/time]",
                ],
                grid,
                rows,
            )
        }
        SweepKind::Trajectory => {
            let p = s.params(0.0)?;
            r.param("L", crate::output::length_value(p.length));
            r.param("x0", p.x0);
            let grid = s.range(3.0 / p.x0, 73.0 / p.x0, 141)?;
            let path = pair_path(p.length, p.x0, &grid)?;
            let rows = grid
                .iter()
                .map(|&b| match path.points.iter().find(|pt| pt.beta == b) {
                    Some(pt) => Ok(vec![num(b), num(pt.s.re), num(pt.s.im), num(pt.residual)]),
                    None => Err(path.diagnostics.join("; ")),
                })
                .collect();
            (
                vec![
                    "beta [1/length]",
                    "s_re [1/time]",
                    "s_im [1/time]",
                    "residual [1]",
                ],
                grid,
                rows,
            )
        }
        SweepKind::Hopf => {
            let p = s.finite_params(0.0)?;
            let l = p.finite_length()?;
            r.param("L", l);
            r.param("x0", p.x0);
            let opts = sim_options(s);
            let u0 = initial_datum(s, l, opts.n_modes)?;
            let grid = s.range(60.0 / p.x0, 80.0 / p.x0, 21)?;
            let f = Nonlinearity::tanh();
            let rows = grid
                .par_iter()
                .map(|&b| {
                    simulate(&u0, &p.with_beta(b), &f, &opts)
                        .map(|res| {
                            vec![
                                num(b),
                                res.classification.as_str().to_string(),
                                opt(res.amplitude),
                                opt(res.period),
                            ]
                        })
                        .map_err(|e| e.to_string())
                })
                .collect();
            (
                vec![
                    "beta [1/length]",
                    "classification",
                    "amplitude [1]",
                    "period [time]",
                ],
                grid,
                rows,
            )
        }
    };
    let width = header.len();
    let mut failures = Vec::new();
    let body: Vec<Vec<String>> = rows
        .into_iter()
        .zip(&grid)
        .enumerate()
        .map(|(i, (row, g))| match row {
            Ok(mut v) => {
                v.push("ok".into());
                v
            }
            Err(e) => {
                failures.push(serde_json::json!({"index": i, "value": g, "error": e}));
                let mut v = vec![num(*g)];
                v.resize(width, String::new());
                v.push(format!("error: {e}"));
                v
            }
        })
        .collect();
    let mut full = header.clone();
    full.push("status");
    r.csv(&format!("sweep_{}.csv", kind.as_str()), &full, &body)?;
    r.result("rows", body.len());
    r.check(
        "all rows computed",
        failures.is_empty(),
        format!("{} of {} rows failed", failures.len(), body.len()),
    );
    r.result("failures", failures);
    r.finish()
}
