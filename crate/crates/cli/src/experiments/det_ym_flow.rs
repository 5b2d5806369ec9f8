//! Energy decay and gauge covariance of the deterministic flow.

use symlab_core::dynamics::det_ym_flow_stepper;
use symlab_core::gauge::{gauge_transform, wilson_loop, Path};
use symlab_core::lattice::{ym_energy, TorusGrid};

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{Context, Result};

use super::{smooth_connection, smooth_gauge};

pub fn run(s: &Settings) -> Result<Outcome> {
    let grid = TorusGrid::new(s.d, s.n)?;
    let cfg = s.sim_config(s.d, s.n, s.seeds.start)?;
    let a = smooth_connection(grid, s.group, 1.0);
    let g = smooth_gauge(grid, s.group, 0.5);
    let ag = gauge_transform(&a, &g).context("initial transform")?;
    let mut fa = det_ym_flow_stepper(&cfg, &a).context("flow of a")?;
    let mut fg = det_ym_flow_stepper(&cfg, &ag).context("flow of a^g")?;
    let steps = cfg.steps();
    let mut energy = Table::new("energy", &["t", "energy", "energy_transformed"])
        .meta("experiment", "det-ym-flow")
        .meta("n", s.n)
        .meta("dt", cfg.dt);
    let mut prev = (ym_energy(fa.state()), ym_energy(fg.state()));
    energy.push(vec![num(0.0), num(prev.0), num(prev.1)]);
    let mut worst_increase = f64::MIN;
    let mut curve = vec![(0.0, prev.0)];
    for _ in 0..steps {
        fa.step().context("flow step")?;
        fg.step().context("flow step")?;
        let e = (ym_energy(fa.state()), ym_energy(fg.state()));
        worst_increase = worst_increase.max(e.0 - prev.0).max(e.1 - prev.1);
        prev = e;
        energy.push(vec![num(fa.time()), num(e.0), num(e.1)]);
        curve.push((fa.time(), e.0));
    }
    let sides = [0.125, 0.25, 0.375];
    let bases = [[0.0, 0.0, 0.0], [0.25, 0.125, 0.0], [0.5, 0.375, 0.0], [0.625, 0.75, 0.0]];
    let loops = Path::rectangle_catalogue(s.d, &sides, &bases)?;
    let substeps = s.substeps.unwrap_or(s.n);
    let mut wl = Table::new("wilson_loops", &["loop", "side", "w", "w_transformed", "relative_gap"]).meta("t", fa.time());
    let mut worst_gap: f64 = 0.0;
    for (k, l) in loops.iter().enumerate() {
        let w1 = wilson_loop(fa.state(), l, substeps).context("Wilson loop")?;
        let w2 = wilson_loop(fg.state(), l, substeps).context("Wilson loop")?;
        let gap = (w1 - w2).norm() / w1.norm();
        worst_gap = worst_gap.max(gap);
        wl.push(vec![k.to_string(), num(sides[k / bases.len()]), num(w1.re), num(w2.re), num(gap)]);
    }
    let mut out = Outcome::default();
    out.checks.push(Check::new("energy_max_increase", worst_increase.max(0.0), worst_increase <= 1e-8, "≤ 1e-8 per step"));
    out.checks.push(Check::new("wilson_loop_relative_gap", worst_gap, worst_gap <= 1e-2, "≤ 1e-2"));
    out.charts.push(Chart {
        name: "energy".into(),
        title: "S(F_t(a))".into(),
        x_label: "t".into(),
        y_label: "energy".into(),
        log_x: false,
        log_y: false,
        series: vec![Series { label: "S".into(), points: curve }],
    });
    out.tables.push(energy);
    out.tables.push(wl);
    Ok(out)
}
