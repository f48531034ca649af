use super::initial_datum;
use crate::config::{config_err, Settings};
use crate::output::{length_value, num, say, Report};
use anyhow::Result;
use thermoscope::pde_sim::{simulate, SimOptions};
use thermoscope::volterra::Nonlinearity;

pub fn sim_options(s: &Settings) -> SimOptions {
    let d = SimOptions::default();
    SimOptions {
        t_end: s.t_end.unwrap_or(d.t_end),
        dt: s.dt.unwrap_or(d.dt),
        n_modes: s.n_modes.unwrap_or(d.n_modes),
        snapshot_stride: None,
        decay_tol: s.tol.unwrap_or(d.decay_tol),
    }
}

pub fn run(s: &Settings) -> Result<bool> {
    let p = s.finite_params(75.0)?;
    let l = p.finite_length()?;
    let opts = sim_options(s);
    let u0 = initial_datum(s, l, opts.n_modes)?;
    let res = simulate(&u0, &p, &Nonlinearity::tanh(), &opts).map_err(|e| match e {
        thermoscope::Error::Domain(m) => config_err(m),
        e => e.into(),
    })?;
    let mut r = Report::new("simulate", s.out_dir())?;
    r.param("L", length_value(p.length));
    r.param("x0", p.x0);
    r.param("beta", p.beta);
    r.param("t_end", opts.t_end);
    r.param("dt", opts.dt);
    r.param("n_modes", opts.n_modes);
    r.param("mode", s.mode.unwrap_or(1));
    r.param("amp", s.amp.unwrap_or(1.0));
    let stride = s.stride.unwrap_or(10).max(1);
    let rows: Vec<Vec<String>> = (0..res.t.len())
        .step_by(stride)
        .map(|i| vec![num(res.t[i]), num(res.y[i])])
        .collect();
    r.csv("simulate_trace.csv", &["t [time]", "y [1]"], &rows)?;
    r.result("classification", res.classification.as_str());
    r.result("period", res.period);
    r.result("amplitude", res.amplitude);
    r.result("y_final", *res.y.last().expect("non-empty trace"));
    say(format!("classification {}", res.classification.as_str()));
    if let (Some(per), Some(amp)) = (res.period, res.amplitude) {
        say(format!("period {} amplitude {}", num(per), num(amp)));
    }
    r.finish()
}
