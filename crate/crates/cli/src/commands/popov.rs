use crate::config::{config_err, logspace, Settings};
use crate::output::{length_value, num, Report, ReportRow};
use anyhow::Result;
use thermoscope::popov::{
    b_pi, beta_hat, c_pi, critical_params, line_product, popov_sample, q_line, verify_criterion,
    GridControl, PopovLine,
};
use thermoscope::spectrum::crossing_params;
use thermoscope::{Length, ProblemParams};

pub fn run(s: &Settings) -> Result<bool> {
    let p = match s.delta {
        Some(d) => {
            if s.length.is_some() || s.x0.is_some() || s.line {
                return Err(config_err("--delta selects the unit interval and cannot be combined with --L, --x0 or --line"));
            }
            if !(d > 0.0 && d < 1.0) {
                return Err(config_err(format!("delta must lie in (0, 1), got {d}")));
            }
            ProblemParams::interval(1.0, 1.0 - d, 0.0)?
        }
        None => s.params(0.0)?,
    };
    let crit = critical_params(&p)?;
    let q = s.q.unwrap_or(crit.q);
    let beta = s.beta.unwrap_or(crit.beta1);
    let line = PopovLine::new(q, beta).map_err(|e| config_err(e.to_string()))?;
    let tol = s.tol.unwrap_or(1e-10);
    let mut r = Report::new("popov", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", p.x0);
    r.param("q", q);
    r.param("beta", beta);

    let lo = s.omega_min.unwrap_or(1e-4 * crit.omega1);
    let hi = s.omega_max.unwrap_or(40.0 * crit.omega1);
    if !(lo > 0.0 && hi > lo) {
        return Err(config_err(format!("invalid frequency window [{lo}, {hi}]")));
    }
    let n = s.n_omega.unwrap_or(2000);
    let rows: Vec<Vec<String>> = logspace(lo, hi, n)
        .into_iter()
        .map(|w| {
            popov_sample(&p, w)
                .map(|smp| vec![num(w), num(smp.x), num(smp.y), num(line.f_sample(&smp))])
        })
        .collect::<thermoscope::Result<_>>()?;
    r.csv(
        "popov_curve.csv",
        &["omega [1/time]", "x [1]", "y [1]", "F [1]"],
        &rows,
    )?;

    let ctl = GridControl {
        n_nodes: n,
        tol,
        ..GridControl::default()
    };
    let rep = verify_criterion(&p, line, Some((lo, hi)), ctl)?;
    r.result(
        "criterion",
        serde_json::json!({"max_f": rep.max_f, "argmax_omega": rep.argmax_omega, "satisfied": rep.satisfied}),
    );

    let mut constants = Vec::new();
    match p.length {
        Length::Infinite => {
            let x0 = p.x0;
            constants.push(ReportRow::new(
                "omega1",
                "1/time",
                crit.omega1,
                Some((b_pi() / (x0 * x0), "closed_form")),
            ));
            constants.push(ReportRow::new(
                "beta1",
                "1/length",
                crit.beta1,
                Some((c_pi() / x0, "closed_form")),
            ));
            constants.push(ReportRow::new(
                "q",
                "time",
                crit.q,
                Some((q_line(x0), "closed_form")),
            ));
            let closed = (3.0 * std::f64::consts::PI + 4.0) / (3.0 * std::f64::consts::PI);
            constants.push(ReportRow::new(
                "product",
                "1",
                crit.product,
                Some((closed, "closed_form")),
            ));
            let e = (crit.product - closed).abs();
            r.check(
                "invariant product",
                e < 1e-12,
                format!(
                    "omega1 q = {} vs (3pi+4)/(3pi), diff {e:.2e}",
                    num(line_product())
                ),
            );
        }
        Length::Finite(_) => {
            let (w1, b1) = crossing_params(&p)?;
            constants.push(ReportRow::new(
                "omega1",
                "1/time",
                crit.omega1,
                Some((w1, "independent_numerical")),
            ));
            constants.push(ReportRow::new(
                "beta1",
                "1/length",
                crit.beta1,
                Some((b1, "independent_numerical")),
            ));
            constants.push(ReportRow::new("q", "time", crit.q, None));
            constants.push(ReportRow::new("product", "1", crit.product, None));
            let bh = beta_hat(&p)?;
            constants.push(ReportRow::new(
                "beta_hat",
                "1/length",
                bh.beta_hat,
                Some((crit.beta1, "independent_numerical")),
            ));
            r.result(
                "beta_hat",
                serde_json::json!({"beta_hat": bh.beta_hat, "m": bh.m, "argmax_omega": bh.argmax_omega, "gap": crit.beta1 - bh.beta_hat}),
            );
        }
    }
    if s.q.is_none() && s.beta.is_none() {
        let f1 = line.f_sample(&popov_sample(&p, crit.omega1)?);
        r.check(
            "tangency at omega1",
            f1.abs() < 1e-8,
            format!("F(omega1) = {f1:.3e}"),
        );
    }
    if s.check {
        r.check(
            "frequency criterion",
            rep.satisfied,
            format!(
                "max F = {:.3e} at omega = {} (<= {tol:e})",
                rep.max_f,
                num(rep.argmax_omega)
            ),
        );
    }
    r.rows("popov_constants.csv", &constants)?;
    r.finish()
}
