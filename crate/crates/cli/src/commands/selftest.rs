use crate::config::{config_err, Settings};
use crate::output::{say, Report};
use anyhow::Result;
use thermoscope::acceptance::{run as run_one, NAMES};

pub fn run(s: &Settings) -> Result<bool> {
    let ids: Vec<u8> = match &s.only {
        Some(v) => v.clone(),
        None => (1..=NAMES.len() as u8).collect(),
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i as usize > NAMES.len()) {
        return Err(config_err(format!(
            "criterion {bad} outside 1..={}",
            NAMES.len()
        )));
    }
    let mut r = Report::new("selftest", s.out_dir())?;
    r.param("criteria", &ids);
    let mut n_pass = 0;
    for &id in &ids {
        let o = run_one(id);
        n_pass += o.passed as usize;
        r.check(&format!("{:02} {}", o.id, o.name), o.passed, o.detail);
    }
    r.result("passed_count", n_pass);
    r.result("total", ids.len());
    let passed = r.finish()?;
    say(format!("{n_pass} of {} criteria passed", ids.len()));
    Ok(passed)
}
