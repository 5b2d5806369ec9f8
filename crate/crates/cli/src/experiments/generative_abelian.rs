//! Invariant law of the orbit-restarted `U(1)` zero mode.

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};
use symlab_core::dynamics::{run_generative, solve_sym, AbelianZeroMode, GenerativeConfig, TriggerNorm};
use symlab_core::lattice::{GaugeField, TorusGrid};
use symlab_core::lie::GroupKind;
use symlab_core::stats::{ks_one_sample, ks_two_sample, loglog_slope, Ensemble};

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{CliError, Context, Result};

use super::per_seed;

/// CDF on `[−π, π)` of a centred normal of variance `var` wrapped onto the circle.
pub fn wrapped_normal_cdf(x: f64, var: f64) -> f64 {
    let nd = Normal::new(0.0, var.sqrt()).expect("positive variance");
    let k_max = (6.0 * var.sqrt() / (2.0 * PI)).ceil() as i64 + 1;
    (-k_max..=k_max).map(|k| nd.cdf(x + 2.0 * PI * k as f64) - nd.cdf(-PI + 2.0 * PI * k as f64)).sum()
}

fn zero_mode(a: &GaugeField) -> f64 {
    a.zero_modes()[0].get(0, 0).im
}

/// Checkpoints for the free zero mode's variance.
const WINDOWS: usize = 10;

pub fn run(s: &Settings) -> Result<Outcome> {
    if s.group != GroupKind::U1 {
        return Err(CliError::Config(format!("generative-abelian needs group = u1, got {}", s.group)));
    }
    let grid = TorusGrid::new(s.d, s.n)?;
    let gen = GenerativeConfig { norm: if s.trigger == "sup" { TriggerNorm::Sup } else { TriggerNorm::ZeroMode }, slack: s.slack };
    let per: Vec<(f64, usize, Vec<f64>)> = per_seed(s, |seed| {
        let mut cfg = s.sim_config(s.d, s.n, seed)?;
        let steps = cfg.steps();
        let a0 = GaugeField::zeros(grid, GroupKind::U1);
        let restarted = run_generative(&cfg, &a0, &AbelianZeroMode, &gen).context(format!("restarted run, seed {seed}"))?;
        let last = restarted.last().ok_or_else(|| CliError::Output("empty trajectory".into()))?;
        cfg.sample_every = (steps as usize / WINDOWS).max(1);
        let free = solve_sym(&cfg, &a0).context(format!("free run, seed {seed}"))?;
        let modes = free.states.iter().skip(1).map(zero_mode).collect();
        Ok((zero_mode(last), restarted.jumps.len(), modes))
    })?;
    let seeds: Vec<u64> = s.seeds.clone().collect();
    let horizon = s.horizon;
    let restarted = Ensemble::new("restarted_zero_mode", per.iter().map(|p| p.0).collect(), seeds.clone())?;
    let ks = ks_one_sample(&restarted, |x| wrapped_normal_cdf(x, horizon))?;

    let windows = per[0].2.len();
    let times: Vec<f64> = (1..=windows).map(|k| horizon * k as f64 / windows as f64).collect();
    let free: Vec<Ensemble> = (0..windows)
        .map(|k| Ensemble::new(format!("free_zero_mode_{k}"), per.iter().map(|p| p.2[k]).collect(), seeds.clone()))
        .collect::<symlab_core::Result<_>>()?;
    // Known centre, so the second moment is the variance.
    let variances: Vec<f64> = free.iter().map(|e| e.samples.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).collect();
    let (slope, _) = loglog_slope(&times, &variances)?;
    let drift = ks_two_sample(&free[0], &free[windows - 1])?;

    let mut table = Table::new("zero_modes", &["seed", "restarted_final", "jumps"])
        .meta("experiment", "generative-abelian")
        .meta("n", s.n)
        .meta("horizon", horizon)
        .meta("trigger", &s.trigger)
        .meta("slack", s.slack)
        .meta("ks_statistic", ks.statistic)
        .meta("ks_p_value", ks.p_value);
    for (seed, p) in seeds.iter().zip(&per) {
        table.push(vec![seed.to_string(), num(p.0), p.1.to_string()]);
    }
    let mut vt = Table::new("free_variance", &["t", "variance"]).meta("slope", slope).meta("window_ks_p_value", drift.p_value);
    for (t, v) in times.iter().zip(&variances) {
        vt.push(vec![num(*t), num(*v)]);
    }
    let mut out = Outcome::default();
    out.checks.push(Check::new("restarted_ks_p_value", ks.p_value, ks.p_value > 0.01, "> 0.01"));
    out.checks.push(Check::new("free_window_ks_p_value", drift.p_value, drift.p_value < 1e-6, "< 1e-6"));
    out.checks.push(Check::new("free_variance_slope", slope, (slope - 1.0).abs() <= 0.1, "1 ± 0.1"));
    out.json.push(("ks_restarted".into(), ks.to_json()));
    out.json.push(("ks_free_windows".into(), drift.to_json()));
    out.charts.push(Chart {
        name: "free_variance".into(),
        title: "variance of the unrestarted zero mode".into(),
        x_label: "t".into(),
        y_label: "variance".into(),
        log_x: true,
        log_y: true,
        series: vec![Series { label: "empirical".into(), points: times.iter().copied().zip(variances.iter().copied()).collect() }],
    });
    out.tables.push(table);
    out.tables.push(vt);
    Ok(out)
}
