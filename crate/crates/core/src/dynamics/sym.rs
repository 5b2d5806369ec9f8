//! The renormalised stochastic Yang–Mills flow and its deterministic version.

use crate::error::{invalid, Error, Result};
use crate::lattice::calculus::nonlinearity;
use crate::lattice::GaugeField;
use crate::lie::AlgebraMap;

use super::config::{CountertermSource, NoiseKind, SimConfig};
use super::integrator::{apply_map, blow_up, mass_propagator, Etd, NoiseDriver, NoiseSample};
use super::{Status, Trajectory};

/// Exponential step of `∂_t A = ΔA + N(A) + C A + noise` given a mass
/// propagator `e^{dt C}` and extra frozen forcing.
pub(crate) fn advance(
    etd: &Etd,
    a: &GaugeField,
    prop: Option<&AlgebraMap>,
    noise: &NoiseSample,
    extra: Option<&GaugeField>,
) -> GaugeField {
    let massive = prop.map(|p| apply_map(p, a));
    let x = massive.as_ref().unwrap_or(a);
    let mut forcing = (!a.group().is_abelian()).then(|| nonlinearity(a));
    let mut add = |f: &GaugeField| {
        forcing = Some(match forcing.take() {
            Some(g) => g.add(f),
            None => f.clone(),
        })
    };
    if let NoiseSample::Smooth(xi) = noise {
        add(xi);
    }
    if let Some(e) = extra {
        add(e);
    }
    let white = match noise {
        NoiseSample::White(w) => Some(w),
        _ => None,
    };
    etd.step(x, forcing.as_ref(), white)
}

/// One exponential step of the renormalised flow with mass `c`.
///
/// Fails with a numerical error carrying the offending component when the
/// new state is non-finite or exceeds `r_max` in sup norm.
pub fn step_sym(a: &GaugeField, noise: &NoiseSample, c: &AlgebraMap, dt: f64, r_max: f64) -> Result<GaugeField> {
    if c.dim() != a.group().algebra_dim() {
        return Err(invalid("mass matrix does not match the algebra"));
    }
    let etd = Etd::new(a.grid(), dt);
    let prop = mass_propagator(c, dt);
    let next = advance(&etd, a, prop.as_ref(), noise, None);
    match blow_up(&next, r_max) {
        None => Ok(next),
        Some((reason, comp)) => Err(Error::Numerical {
            message: format!("blow-up: {reason}"),
            diagnostics: vec![("component".into(), comp.map_or(-1.0, |c| c as f64))],
        }),
    }
}

/// Incremental integrator of the renormalised flow.
///
/// Exposes each step so callers can observe or modify the state between
/// steps (restarts, per-step diagnostics).
pub struct SymStepper {
    cfg: SimConfig,
    state: GaugeField,
    step: u64,
    etd: Etd,
    prop: Option<AlgebraMap>,
    noise: NoiseDriver,
    status: Status,
}

impl SymStepper {
    /// Validates the configuration and initial data.
    pub fn new(cfg: &SimConfig, a0: GaugeField) -> Result<Self> {
        cfg.validate()?;
        Self::with_mass(cfg, a0, cfg.mass()?)
    }

    pub(crate) fn with_mass(cfg: &SimConfig, a0: GaugeField, mass: AlgebraMap) -> Result<Self> {
        cfg.check_field(a0.grid(), a0.group())?;
        if a0.has_non_finite() {
            return Err(invalid("initial data must be finite"));
        }
        Ok(SymStepper {
            cfg: cfg.clone(),
            state: a0,
            step: 0,
            etd: Etd::new(cfg.grid, cfg.dt),
            prop: mass_propagator(&mass, cfg.dt),
            noise: NoiseDriver::new(cfg)?,
            status: Status::Running,
        })
    }

    /// Current state.
    pub fn state(&self) -> &GaugeField {
        &self.state
    }

    /// Current time.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    /// Steps taken.
    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Current status.
    pub fn status(&self) -> &Status {
        &self.status
    }

    /// Configuration.
    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Advances one step. On blow-up the (invalid) state is kept and the
    /// symptom returned; call [`SymStepper::bury`] to absorb it.
    pub fn advance(&mut self) -> Result<Option<(String, Option<usize>)>> {
        if matches!(self.status, Status::Cemetery { .. }) {
            return Err(Error::InvalidInput("the run is in the cemetery state".into()));
        }
        let noise = self.noise.sample(self.step, None)?;
        self.state = advance(&self.etd, &self.state, self.prop.as_ref(), &noise, None);
        self.step += 1;
        Ok(blow_up(&self.state, self.cfg.r_max))
    }

    /// Replaces the current state (used by restarts).
    pub fn set_state(&mut self, a: GaugeField) -> Result<()> {
        self.cfg.check_field(a.grid(), a.group())?;
        self.state = a;
        Ok(())
    }

    /// Moves to the absorbing cemetery state.
    pub fn bury(&mut self, reason: String, component: Option<usize>) {
        self.status = Status::Cemetery { time: self.time(), step: self.step, reason, component };
    }

    /// Advances one step, absorbing on blow-up.
    pub fn step(&mut self) -> Result<&Status> {
        if let Some((reason, comp)) = self.advance()? {
            self.bury(reason, comp);
        }
        Ok(&self.status)
    }
}

/// Integrates the renormalised flow to the horizon or blow-up, recording
/// every `sample_every` steps.
pub fn solve_sym(cfg: &SimConfig, a0: &GaugeField) -> Result<Trajectory> {
    let mut st = SymStepper::new(cfg, a0.clone())?;
    let mut traj = Trajectory::new();
    traj.record(0.0, st.state());
    let total = cfg.steps();
    while st.steps() < total {
        if let Status::Cemetery { .. } = st.step()? {
            traj.status = st.status().clone();
            return Ok(traj);
        }
        if st.steps() % cfg.sample_every as u64 == 0 || st.steps() == total {
            traj.record(st.time(), st.state());
        }
    }
    traj.status = Status::Horizon;
    Ok(traj)
}

fn det_config(cfg: &SimConfig, dt: f64) -> SimConfig {
    let mut c = cfg.clone();
    c.dt = dt;
    c.noise = NoiseKind::None;
    c.counterterm = CountertermSource::User(AlgebraMap::zero(cfg.group.algebra_dim()));
    c.bare_mass = AlgebraMap::zero(cfg.group.algebra_dim());
    c
}

/// Stepper of the noiseless flow `∂_t A = ΔA + N(A)` with the configured step.
pub fn det_ym_flow_stepper(cfg: &SimConfig, a: &GaugeField) -> Result<SymStepper> {
    SymStepper::new(&det_config(cfg, cfg.dt), a.clone())
}

/// The regularising flow `F_t(a)`; the step is shortened so that `t` is hit
/// exactly.
pub fn solve_det_ym_flow(cfg: &SimConfig, a: &GaugeField, t: f64) -> Result<GaugeField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("flow time must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    let steps = (t / cfg.dt - 1e-9).ceil().max(1.0) as u64;
    let mut st = SymStepper::new(&det_config(cfg, t / steps as f64), a.clone())?;
    for _ in 0..steps {
        if let Status::Cemetery { reason, step, .. } = st.step()? {
            return Err(Error::Numerical {
                message: format!("deterministic flow blew up: {reason}"),
                diagnostics: vec![("step".into(), *step as f64)],
            });
        }
    }
    Ok(st.state().clone())
}
