//! Two `U(1)` solutions whose initial data differ by a full turn of the
//! zero mode, driven by the same noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use symlab_core::dynamics::SymStepper;
use symlab_core::lattice::{GaugeField, TorusGrid};
use symlab_core::lie::{GroupKind, Mat};
use symlab_core::observables::abelian_loop_observable;

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{CliError, Context, Result};

use super::per_seed;

struct Run {
    /// `(t, shift residual, gap residual)` per step.
    rows: Vec<(f64, f64, f64)>,
    /// `max_t |I[B]/I[A] − 1|` with no bare mass.
    massless_gap: f64,
}

fn shift_residual(a: &GaugeField, b: &GaugeField, want: f64) -> f64 {
    let d = b.sub(a);
    let mut worst: f64 = 0.0;
    for i in 0..d.grid().d() {
        let target = if i == 0 { want } else { 0.0 };
        for z in d.comp(i).data() {
            worst = worst.max((z.im - target).abs()).max(z.re.abs());
        }
    }
    worst
}

fn pair(s: &Settings, grid: TorusGrid, seed: u64, mass: f64) -> Result<(SymStepper, SymStepper)> {
    let mut cfg = s.sim_config(grid.d(), grid.n(), seed)?;
    cfg.bare_mass = crate::config::algebra_map(GroupKind::U1, &[mass])?;
    let a0 = GaugeField::zeros(grid, GroupKind::U1);
    let b0 = GaugeField::from_fn(grid, GroupKind::U1, |i, _| Mat::scalar(1, Complex64::new(0.0, if i == 0 { 2.0 * PI } else { 0.0 })));
    Ok((SymStepper::new(&cfg, a0).context("A")?, SymStepper::new(&cfg, b0).context("B")?))
}

fn run_seed(s: &Settings, grid: TorusGrid, mass: f64, seed: u64) -> Result<Run> {
    let (mut a, mut b) = pair(s, grid, seed, mass)?;
    let steps = a.config().steps();
    let mut rows = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        a.step().context("A step")?;
        b.step().context("B step")?;
        let t = a.time();
        let grown = 2.0 * PI * (mass * t).exp();
        let res = shift_residual(a.state(), b.state(), grown);
        let (ia, ib) = (abelian_loop_observable(a.state())?, abelian_loop_observable(b.state())?);
        let gap = (ib - ia * Complex64::from_polar(1.0, grown)).norm();
        rows.push((t, res, gap));
    }
    let (mut a, mut b) = pair(s, grid, seed, 0.0)?;
    let mut massless_gap: f64 = 0.0;
    for _ in 0..steps {
        a.step().context("A step")?;
        b.step().context("B step")?;
        let (ia, ib) = (abelian_loop_observable(a.state())?, abelian_loop_observable(b.state())?);
        massless_gap = massless_gap.max((ib / ia - 1.0).norm());
    }
    Ok(Run { rows, massless_gap })
}

pub fn run(s: &Settings) -> Result<Outcome> {
    if s.group != GroupKind::U1 {
        return Err(CliError::Config(format!("abelian-uniqueness needs group = u1, got {}", s.group)));
    }
    if s.bare_mass.len() != 1 {
        return Err(CliError::Config("abelian-uniqueness needs a scalar bare_mass".into()));
    }
    let mass = s.bare_mass[0];
    let grid = TorusGrid::new(s.d, s.n)?;
    let runs = per_seed(s, |seed| run_seed(s, grid, mass, seed))?;
    let mut table = Table::new("shift", &["seed", "t", "shift_residual", "phase_gap_residual"])
        .meta("experiment", "abelian-uniqueness")
        .meta("bare_mass", mass)
        .meta("n", s.n);
    let (mut worst_shift, mut worst_gap, mut worst_massless): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (seed, r) in s.seeds.clone().zip(&runs) {
        for &(t, res, gap) in &r.rows {
            worst_shift = worst_shift.max(res);
            worst_gap = worst_gap.max(gap);
            table.push(vec![seed.to_string(), num(t), num(res), num(gap)]);
        }
        worst_massless = worst_massless.max(r.massless_gap);
    }
    let mut out = Outcome::default();
    out.checks.push(Check::new("shift_residual", worst_shift, worst_shift <= 1e-10, "≤ 1e-10"));
    out.checks.push(Check::new("phase_gap_residual", worst_gap, worst_gap <= 1e-8, "≤ 1e-8"));
    out.checks.push(Check::new("massless_gap", worst_massless, worst_massless <= 1e-12, "≤ 1e-12"));
    out.charts.push(Chart {
        name: "shift".into(),
        title: "B − A − 2π e^{tC̊} e₁".into(),
        x_label: "t".into(),
        y_label: "sup residual".into(),
        log_x: false,
        log_y: true,
        series: vec![Series { label: format!("seed {}", s.seeds.start), points: runs[0].rows.iter().map(|r| (r.0, r.1.max(1e-18))).collect() }],
    });
    out.tables.push(table);
    Ok(out)
}
