//! Pathwise `A(t)^{g(t)} = B(t)` for the coupled system at fixed ε.

use symlab_core::dynamics::{solve_coupled_bg, solve_sym};
use symlab_core::gauge::gauge_transform;
use symlab_core::stats::loglog_slope;

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{CliError, Context, Result};

use super::{per_seed, smooth_connection, smooth_gauge};

/// Number of equally spaced comparison times.
const CHECKPOINTS: u64 = 8;

struct Level {
    n: usize,
    dt: f64,
    residual: f64,
    scale: f64,
}

fn run_level(s: &Settings, n: usize, seed: u64, base_n: usize) -> Result<Level> {
    let mut cfg = s.sim_config(2, n, seed)?;
    let h = cfg.grid.h();
    if s.dt.is_none() {
        // Largest stable step that lands on every checkpoint.
        let per = (s.horizon / (CHECKPOINTS as f64 * s.cfl * h * h)).ceil().max(1.0);
        cfg.dt = s.horizon / (CHECKPOINTS as f64 * per);
    }
    cfg.noise_base_n = Some(s.noise_base_n.unwrap_or(base_n));
    cfg.sample_every = (cfg.steps() / CHECKPOINTS).max(1) as usize;
    let a0 = smooth_connection(cfg.grid, cfg.group, 0.5);
    let g0 = smooth_gauge(cfg.grid, cfg.group, 0.5);
    let b0 = gauge_transform(&a0, &g0).context("initial transform")?;
    let a = solve_sym(&cfg, &a0).context(format!("A at n = {n}"))?;
    let b = solve_coupled_bg(&cfg, &b0, &g0).context(format!("coupled system at n = {n}"))?;
    if a.states.len() != b.trajectory.states.len() {
        return Err(CliError::Output(format!("blow-up at n = {n}: {:?} / {:?}", a.status, b.trajectory.status)));
    }
    let (mut residual, mut scale): (f64, f64) = (0.0, 0.0);
    for k in 0..a.states.len() {
        let ag = gauge_transform(&a.states[k], &b.gauge[k]).context("A^g")?;
        residual = residual.max(ag.sub(&b.trajectory.states[k]).sup_norm());
        scale = scale.max(b.trajectory.states[k].sup_norm());
    }
    Ok(Level { n, dt: cfg.dt, residual, scale })
}

pub fn run(s: &Settings) -> Result<Outcome> {
    if s.d != 2 {
        return Err(CliError::Config("gauge-covariance-2d needs d = 2".into()));
    }
    if s.sizes.len() < 2 {
        return Err(CliError::Config("gauge-covariance-2d needs at least two sizes".into()));
    }
    let base_n = *s.sizes.iter().max().expect("non-empty");
    let seeds: Vec<Vec<Level>> = per_seed(s, |seed| s.sizes.iter().map(|&n| run_level(s, n, seed, base_n)).collect())?;
    let mut table = Table::new("residuals", &["seed", "n", "h", "dt", "residual", "field_scale"])
        .meta("experiment", "gauge-covariance-2d")
        .meta("eps", s.eps)
        .meta("mollifier", &s.mollifier)
        .meta("horizon", s.horizon);
    let mut out = Outcome::default();
    let mut worst_order = f64::INFINITY;
    let mut worst_rel: f64 = 0.0;
    let mut series = Vec::new();
    for (seed, levels) in s.seeds.clone().zip(&seeds) {
        for l in levels {
            table.push(vec![seed.to_string(), l.n.to_string(), num(1.0 / l.n as f64), num(l.dt), num(l.residual), num(l.scale)]);
        }
        let hs: Vec<f64> = levels.iter().map(|l| 1.0 / l.n as f64).collect();
        let rs: Vec<f64> = levels.iter().map(|l| l.residual.max(1e-300)).collect();
        let order = if hs.len() >= 3 {
            loglog_slope(&hs, &rs)?.0
        } else {
            (rs[0] / rs[1]).ln() / (hs[0] / hs[1]).ln()
        };
        worst_order = worst_order.min(order);
        let finest = levels.iter().max_by_key(|l| l.n).expect("non-empty");
        worst_rel = worst_rel.max(finest.residual / finest.scale);
        series.push(Series { label: format!("seed {seed}"), points: hs.iter().copied().zip(rs).collect() });
    }
    out.checks.push(Check::new("order", worst_order, worst_order >= 1.8, "≥ 1.8"));
    out.checks.push(Check::new("relative_residual_finest", worst_rel, worst_rel < 1e-2, "< 1e-2"));
    out.charts.push(Chart {
        name: "residuals".into(),
        title: "sup_t |A^g − B|_∞ vs h".into(),
        x_label: "h".into(),
        y_label: "residual".into(),
        log_x: true,
        log_y: true,
        series,
    });
    out.tables.push(table);
    Ok(out)
}
