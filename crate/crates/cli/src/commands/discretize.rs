use crate::config::Settings;
use crate::output::{length_value, num, or_none, say, Report};
use anyhow::Result;
use thermoscope::discretization::{
    build_operator, crossing_scan_discrete, eig, first_eigenfunction_sweep,
};

pub fn run(s: &Settings) -> Result<bool> {
    let p = s.finite_params(0.0)?;
    let l = p.finite_length()?;
    let m = s.m.unwrap_or(8);
    let op = build_operator(m, &p).map_err(|e| crate::config::config_err(e.to_string()))?;
    let mut r = Report::new("discretize", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", p.x0);
    r.param("beta", p.beta);
    r.param("m", m);

    let pairs = eig(&op)?;
    let norm = op.matrix.norm();
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                num(e.value.re),
                num(e.value.im),
                num(e.residual),
            ]
        })
        .collect();
    r.csv(
        "discretize_eigenvalues.csv",
        &[
            "index [1]",
            "mu_re [1/time]",
            "mu_im [1/time]",
            "residual [1/time]",
        ],
        &rows,
    )?;
    let max_res = pairs.iter().fold(0.0f64, |a, e| a.max(e.residual));
    let tol = s.tol.unwrap_or(1e-8);
    r.result("size", op.grid.size());
    r.result("frobenius_norm", norm);
    r.result("max_residual", max_res);
    r.result(
        "leading",
        pairs
            .iter()
            .take(6)
            .map(|e| [e.value.re, e.value.im])
            .collect::<Vec<_>>(),
    );
    r.check(
        "eigen residuals",
        max_res <= tol * norm,
        format!("max residual {max_res:.2e} (<= {tol:e} |A|)"),
    );

    if s.crossing {
        let betas = s.range(55.0 / p.x0, 85.0 / p.x0, 31)?;
        let t = crossing_scan_discrete(m, l, p.x0, &betas)?;
        let rows: Vec<Vec<String>> = t
            .points
            .iter()
            .map(|pt| vec![num(pt.beta), num(pt.s.re), num(pt.s.im)])
            .collect();
        r.csv(
            "discretize_trajectory.csv",
            &["beta [1/length]", "s_re [1/time]", "s_im [1/time]"],
            &rows,
        )?;
        r.result("diagnostic", &t.diagnostic);
        match t.crossing {
            Some(c) => {
                r.result(
                    "crossing",
                    serde_json::json!({"beta": c.beta, "s_re": c.s.re, "s_im": c.s.im}),
                );
                r.check(
                    "axis crossing",
                    true,
                    format!("beta = {}, omega = {}", num(c.beta), num(c.s.im)),
                );
            }
            None => r.check("axis crossing", false, "no crossing on the gain grid"),
        }
    } else if s.has_range() {
        let betas = s.range(-1.0, 2.0, 4)?;
        let sw = first_eigenfunction_sweep(m, l, p.x0, &betas)?;
        let labels: Vec<String> = sw
            .entries
            .iter()
            .map(|e| format!("beta={} [1]", num(e.beta)))
            .collect();
        let mut header = vec!["x [length]"];
        header.extend(labels.iter().map(String::as_str));
        for (name, adjoint) in [
            ("discretize_eigenfunctions.csv", false),
            ("discretize_adjoint_eigenfunctions.csv", true),
        ] {
            let rows: Vec<Vec<String>> =
                sw.x.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let mut row = vec![num(*x)];
                        row.extend(
                            sw.entries
                                .iter()
                                .map(|e| num(if adjoint { e.adjoint[j] } else { e.primal[j] })),
                        );
                        row
                    })
                    .collect();
            r.csv(name, &header, &rows)?;
        }
        r.result(
            "sweep",
            serde_json::json!({
                "eigenvalues": sw.entries.iter().map(|e| [e.beta, e.eigenvalue]).collect::<Vec<_>>(),
                "primal_sign_loss": sw.primal_sign_loss,
                "adjoint_sign_loss": sw.adjoint_sign_loss,
                "terminus": sw.terminus,
            }),
        );
        say(format!(
            "primal sign loss {}, adjoint sign loss {}, complex at {}",
            or_none(sw.primal_sign_loss),
            or_none(sw.adjoint_sign_loss),
            or_none(sw.terminus)
        ));
    }
    r.finish()
}
