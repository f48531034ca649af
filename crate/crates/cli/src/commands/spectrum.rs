use super::pair_path;
use crate::config::Settings;
use crate::output::{length_value, num, Report, ReportRow};
use anyhow::Result;
use std::f64::consts::PI;
use thermoscope::popov::{b_pi, c_pi};
use thermoscope::spectrum::{
    characteristic_line, crossing_params, merge_gain, real_spectrum_line, RealBranch, ROOT_TOL,
};
use thermoscope::{ComplexValue, Length};

pub fn run(s: &Settings) -> Result<bool> {
    let p = s.params(0.0)?;
    let x0 = p.x0;
    let betas = s.range(3.0 / x0, 73.0 / x0, 141)?;
    let tol = s.tol.unwrap_or(1e-6);
    let mut r = Report::new("spectrum", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", x0);
    r.param("beta_min", betas[0]);
    r.param("beta_max", betas[betas.len() - 1]);
    r.param("n_beta", betas.len());

    let path = pair_path(p.length, x0, &betas)?;
    let rows: Vec<Vec<String>> = path
        .points
        .iter()
        .map(|pt| vec![num(pt.beta), num(pt.s.re), num(pt.s.im), num(pt.residual)])
        .collect();
    r.csv(
        "spectrum_trajectory.csv",
        &[
            "beta [1/length]",
            "s_re [1/time]",
            "s_im [1/time]",
            "residual [1]",
        ],
        &rows,
    )?;
    let max_res = path.points.iter().fold(0.0f64, |m, pt| m.max(pt.residual));
    r.result("max_residual", max_res);
    r.result("diagnostics", &path.diagnostics);
    r.check(
        "root residuals",
        max_res <= ROOT_TOL,
        format!("max residual {max_res:.2e} (<= {ROOT_TOL:e})"),
    );
    let Some(cross) = path.crossing else {
        r.check(
            "axis crossing",
            false,
            "the first pair does not cross the imaginary axis on this grid",
        );
        return r.finish();
    };
    r.result(
        "crossing",
        serde_json::json!({"beta": cross.beta, "s_re": cross.s.re, "s_im": cross.s.im}),
    );

    let mut constants = Vec::new();
    match p.length {
        Length::Infinite => {
            let first = real_spectrum_line(x0, 3);
            let b0 = first
                .iter()
                .find(|q| q.branch == RealBranch::Plus)
                .expect("onset entry");
            let res =
                characteristic_line(ComplexValue::new(0.0, (-b0.s).sqrt()), b0.beta, x0).norm();
            constants.push(ReportRow::new(
                "beta0",
                "1/length",
                b0.beta,
                Some((PI / x0, "closed_form")),
            ));
            constants.push(ReportRow::new(
                "s_at_beta0",
                "1/time",
                b0.s,
                Some((-PI * PI / (4.0 * x0 * x0), "closed_form")),
            ));
            constants.push(ReportRow::new(
                "beta1",
                "1/length",
                cross.beta,
                Some((c_pi() / x0, "closed_form")),
            ));
            constants.push(ReportRow::new(
                "omega1",
                "1/time",
                cross.s.im,
                Some((b_pi() / (x0 * x0), "closed_form")),
            ));
            r.check(
                "real onset residual",
                res < 1e-10,
                format!("characteristic residual {res:.2e} at beta0"),
            );
            let rows: Vec<Vec<String>> = first
                .iter()
                .map(|q| {
                    let b = if q.branch == RealBranch::Plus {
                        "plus"
                    } else {
                        "minus"
                    };
                    vec![q.k.to_string(), b.to_string(), num(q.beta), num(q.s)]
                })
                .collect();
            r.csv(
                "spectrum_real.csv",
                &["k [1]", "branch", "beta [1/length]", "s [1/time]"],
                &rows,
            )?;
        }
        Length::Finite(l) => {
            let (w1, b1) = crossing_params(&p)?;
            constants.push(ReportRow::new(
                "beta1",
                "1/length",
                cross.beta,
                Some((b1, "independent_numerical")),
            ));
            constants.push(ReportRow::new(
                "omega1",
                "1/time",
                cross.s.im,
                Some((w1, "independent_numerical")),
            ));
            if let Some(bm) = merge_gain(l, x0, 0.0, 40.0 / x0, 6.0 / x0)? {
                constants.push(ReportRow::new("beta_merge", "1/length", bm, None));
            }
        }
    }
    for c in constants
        .iter()
        .filter(|c| c.quantity == "beta1" || c.quantity == "omega1")
    {
        let e = c.rel_err.unwrap_or(0.0);
        r.check(
            &format!("{} agreement", c.quantity),
            e < tol,
            format!("relative error {e:.2e} (< {tol:e})"),
        );
    }
    r.rows("spectrum_constants.csv", &constants)?;
    r.finish()
}
