use super::{initial_datum, pair_path};
use crate::config::{config_err, linspace, logspace, Settings};
use crate::output::{num, opt, Report};
use anyhow::Result;
use rayon::prelude::*;
use thermoscope::discretization::first_eigenfunction_sweep;
use thermoscope::pde_sim::{simulate, SimOptions};
use thermoscope::popov::{critical_params, critical_params_delta, popov_sample, PopovLine};
use thermoscope::volterra::Nonlinearity;
use thermoscope::{Length, ProblemParams};

const FIGURES: u8 = 6;

pub fn run(s: &Settings) -> Result<bool> {
    let ids: Vec<u8> = match (s.all, s.figure) {
        (true, None) => (1..=FIGURES).collect(),
        (false, Some(n)) if (1..=FIGURES).contains(&n) => vec![n],
        (false, Some(n)) => return Err(config_err(format!("figure {n} outside 1..={FIGURES}"))),
        (true, Some(_)) => return Err(config_err("--all and --figure are exclusive")),
        (false, None) => return Err(config_err("figures needs --all or --figure N")),
    };
    let mut r = Report::new("figures", s.out_dir())?;
    r.param("figures", &ids);
    for id in ids {
        match id {
            1 | 2 => eigenfunctions(s, &mut r, id)?,
            3 => crossing(&mut r)?,
            4 => popov_line(&mut r)?,
            5 => popov_delta(&mut r)?,
            _ => hopf(s, &mut r)?,
        }
    }
    r.finish()
}

fn eigenfunctions(s: &Settings, r: &mut Report, id: u8) -> Result<()> {
    let m = s.m.unwrap_or(8);
    let betas = s.grid.clone().unwrap_or_else(|| vec![-1.0, 0.0, 1.0, 2.0]);
    let sw = first_eigenfunction_sweep(m, 4.0, 1.0, &betas)?;
    let labels: Vec<String> = sw
        .entries
        .iter()
        .map(|e| format!("beta={} [1]", num(e.beta)))
        .collect();
    let mut header = vec!["x [length]"];
    header.extend(labels.iter().map(String::as_str));
    let rows: Vec<Vec<String>> =
        sw.x.iter()
            .enumerate()
            .map(|(j, x)| {
                let mut row = vec![num(*x)];
                row.extend(
                    sw.entries
                        .iter()
                        .map(|e| num(if id == 2 { e.adjoint[j] } else { e.primal[j] })),
                );
                row
            })
            .collect();
    let name = if id == 1 {
        "fig1_eigenfunctions.csv"
    } else {
        "fig2_adjoint_eigenfunctions.csv"
    };
    r.csv(name, &header, &rows)?;
    let key = if id == 1 { "fig1" } else { "fig2" };
    r.result(
        key,
        serde_json::json!({"primal_sign_loss": sw.primal_sign_loss, "adjoint_sign_loss": sw.adjoint_sign_loss, "terminus": sw.terminus}),
    );
    Ok(())
}

fn crossing(r: &mut Report) -> Result<()> {
    // beta in [3, 73)
    let betas: Vec<f64> = (0..140).map(|i| 3.0 + 0.5 * i as f64).collect();
    let paths: Vec<_> = [4.0, 8.0, 16.0]
        .par_iter()
        .map(|&l| pair_path(Length::Finite(l), 1.0, &betas).map(|p| (l, p)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut crossings = Vec::new();
    for (l, path) in &paths {
        for pt in &path.points {
            rows.push(vec![num(*l), num(pt.beta), num(pt.s.re), num(pt.s.im)]);
        }
        crossings.push(serde_json::json!({"L": l, "beta": path.crossing.map(|c| c.beta), "omega": path.crossing.map(|c| c.s.im)}));
    }
    r.csv(
        "fig3_crossing.csv",
        &[
            "L [length]",
            "beta [1/length]",
            "s_re [1/time]",
            "s_im [1/time]",
        ],
        &rows,
    )?;
    r.result("fig3", crossings);
    Ok(())
}

fn curve_rows(
    p: &ProblemParams,
    line: PopovLine,
    lo: f64,
    hi: f64,
    prefix: &[String],
) -> Result<Vec<Vec<String>>> {
    logspace(lo, hi, 2000)
        .into_iter()
        .map(|w| {
            let smp = popov_sample(p, w)?;
            let mut row = prefix.to_vec();
            row.extend([num(w), num(smp.x), num(smp.y), num(line.f_sample(&smp))]);
            Ok(row)
        })
        .collect()
}

fn popov_line(r: &mut Report) -> Result<()> {
    let p = ProblemParams::line(1.0, 0.0)?;
    let c = critical_params(&p)?;
    let rows = curve_rows(
        &p,
        PopovLine::new(c.q, c.beta1)?,
        1e-4 * c.omega1,
        40.0 * c.omega1,
        &[],
    )?;
    r.csv(
        "fig4_popov_line.csv",
        &["omega [1/time]", "x [1]", "y [1]", "F [1]"],
        &rows,
    )?;
    r.result(
        "fig4",
        serde_json::json!({"omega1": c.omega1, "beta1": c.beta1, "q": c.q}),
    );
    Ok(())
}

fn popov_delta(r: &mut Report) -> Result<()> {
    let deltas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let parts: Vec<Vec<Vec<String>>> = deltas
        .par_iter()
        .map(|&d| -> Result<Vec<Vec<String>>> {
            let c = critical_params_delta(d)?;
            let p = ProblemParams::interval(1.0, 1.0 - d, 0.0)?;
            curve_rows(
                &p,
                PopovLine::new(c.q, c.beta1)?,
                1e-4 * c.omega1,
                40.0 * c.omega1,
                &[num(d)],
            )
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = parts.into_iter().flatten().collect();
    r.csv(
        "fig5_popov_delta.csv",
        &["delta [1]", "omega [1/time]", "x [1]", "y [1]", "F [1]"],
        &rows,
    )?;
    Ok(())
}

fn hopf(s: &Settings, r: &mut Report) -> Result<()> {
    let p = ProblemParams::interval(4.0, 1.0, 0.0)?;
    let opts = SimOptions::default();
    let u0 = initial_datum(s, 4.0, opts.n_modes)?;
    let betas = linspace(66.0, 80.0, 29);
    let f = Nonlinearity::tanh();
    let runs: Vec<_> = betas
        .par_iter()
        .map(|&b| simulate(&u0, &p.with_beta(b), &f, &opts))
        .collect::<thermoscope::Result<_>>()?;
    let rows: Vec<Vec<String>> = betas
        .iter()
        .zip(&runs)
        .map(|(b, res)| {
            vec![
                num(*b),
                res.classification.as_str().to_string(),
                opt(res.amplitude),
                opt(res.amplitude.map(|a| a * a)),
                opt(res.period),
            ]
        })
        .collect();
    r.csv(
        "fig6_hopf.csv",
        &[
            "beta [1/length]",
            "classification",
            "amplitude [1]",
            "amplitude_sq [1]",
            "period [time]",
        ],
        &rows,
    )?;
    Ok(())
}
