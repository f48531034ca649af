use crate::config::{linspace, logspace, Settings};
use crate::output::{length_value, num, Report};
use anyhow::Result;
use thermoscope::kernels::{
    dirichlet_green, free_resolvent_kernel, heat_kernel, heat_kernel_images, heat_kernel_series,
    kernel_a, kernel_a_prime, perturbed_resolvent_kernel, transfer_function, transfer_iw,
};
use thermoscope::{ComplexValue, Length, SeriesControl};

pub fn run(s: &Settings) -> Result<bool> {
    let p = s.params(0.0)?;
    let sv = ComplexValue::new(s.s_re.unwrap_or(1.0), s.s_im.unwrap_or(0.0));
    let mut r = Report::new("kernels", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", p.x0);
    r.param("beta", p.beta);
    r.param("s_re", sv.re);
    r.param("s_im", sv.im);

    let span = match p.length {
        Length::Finite(l) => l,
        Length::Infinite => 10.0 * p.x0,
    };
    let mut rows = Vec::new();
    for x in linspace(-span, span, 401) {
        let g = match p.length {
            Length::Finite(l) => dirichlet_green(sv, x, 0.0, l)?,
            Length::Infinite => free_resolvent_kernel(sv, x)?,
        };
        let gp = perturbed_resolvent_kernel(&p, sv, x, 0.0)?;
        rows.push(vec![num(x), num(g.re), num(g.im), num(gp.re), num(gp.im)]);
    }
    r.csv(
        "kernels_resolvent.csv",
        &[
            "x [length]",
            "unperturbed_re [1]",
            "unperturbed_im [1]",
            "perturbed_re [1]",
            "perturbed_im [1]",
        ],
        &rows,
    )?;

    let w_lo = s.omega_min.unwrap_or(1e-2 / (p.x0 * p.x0));
    let w_hi = s.omega_max.unwrap_or(1e3 / (p.x0 * p.x0));
    let rows: Vec<Vec<String>> = logspace(w_lo, w_hi, s.n_omega.unwrap_or(400))
        .into_iter()
        .map(|w| transfer_iw(&p, w).map(|g| vec![num(w), num(g.re), num(g.im)]))
        .collect::<thermoscope::Result<_>>()?;
    r.csv(
        "kernels_transfer.csv",
        &["omega [1/time]", "re [1]", "im [1]"],
        &rows,
    )?;

    let g0 = free_resolvent_kernel(sv, 0.0)?;
    let closed = 0.5 / sv.sqrt();
    r.result("free_kernel_at_origin", [g0.re, g0.im]);
    r.check(
        "free kernel at the origin",
        (g0 - closed).norm() <= 1e-14 * closed.norm(),
        format!(
            "{} {} vs 1/(2 sqrt s) = {} {}",
            num(g0.re),
            num(g0.im),
            num(closed.re),
            num(closed.im)
        ),
    );

    if let Length::Finite(l) = p.length {
        let ctl = SeriesControl::default();
        let mut rows = Vec::new();
        let mut max_dual = 0.0f64;
        for t in logspace(1e-3, 1e2, 400) {
            let k = heat_kernel(t, p.x0, l, &ctl)?;
            let a = kernel_a(t, &p, &ctl)?;
            let ap = kernel_a_prime(t, &p, &ctl)?;
            let tight = SeriesControl::with_tol(1e-15);
            let d = (heat_kernel_series(t, p.x0, l, &tight)?.value
                - heat_kernel_images(t, p.x0, l, &tight)?.value)
                .abs();
            max_dual = max_dual.max(d);
            rows.push(vec![
                num(t),
                num(k.value),
                num(a),
                num(ap),
                k.terms.to_string(),
            ]);
        }
        r.csv(
            "kernels_heat.csv",
            &[
                "t [time]",
                "k [1/length]",
                "a [1/length]",
                "a_prime [1/length/time]",
                "terms [1]",
            ],
            &rows,
        )?;
        let tol = s.tol.unwrap_or(1e-10);
        r.result("heat_kernel_dual_max_diff", max_dual);
        r.check(
            "dual heat-kernel forms",
            max_dual < tol,
            format!("max |series - images| = {max_dual:.3e} (< {tol:e})"),
        );
        let g_small = transfer_function(&p, ComplexValue::new(1e-10, 0.0))?.re;
        let expect = 0.5 * (l - p.x0);
        r.result("transfer_at_zero", g_small);
        r.check(
            "kernel integral",
            (g_small - expect).abs() < 1e-8,
            format!("G(0+) = {g_small:.12}, (L - x0)/2 = {expect}"),
        );
    }
    r.finish()
}
