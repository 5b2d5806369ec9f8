//! The generative process: the flow restarted at a selected orbit
//! representative whenever it drifts too far along the gauge orbit.

use crate::error::{Error, Result};
use crate::gauge::abelian_representative;
use crate::lattice::GaugeField;

use super::config::SimConfig;
use super::integrator::blow_up;
use super::sym::SymStepper;
use super::{Jump, Status, Trajectory};

/// A rule picking a representative of the gauge orbit of a field.
pub trait OrbitSelection {
    /// Short identifier for manifests.
    fn name(&self) -> &str;
    /// A gauge-equivalent field.
    fn select(&self, a: &GaugeField) -> Result<GaugeField>;
}

/// `U(1)` rule: shift each zero mode into `[−π, π)` by an exact form.
#[derive(Clone, Copy, Debug, Default)]
pub struct AbelianZeroMode;

impl OrbitSelection for AbelianZeroMode {
    fn name(&self) -> &str {
        "abelian-zero-mode"
    }

    fn select(&self, a: &GaugeField) -> Result<GaugeField> {
        Ok(abelian_representative(a)?.0)
    }
}

/// Norm compared against the representative to trigger a restart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TriggerNorm {
    /// Sup norm over sites and components.
    Sup,
    /// Largest zero-mode norm over components.
    ZeroMode,
}

impl TriggerNorm {
    fn eval(self, a: &GaugeField) -> f64 {
        match self {
            TriggerNorm::Sup => a.sup_norm(),
            TriggerNorm::ZeroMode => a.zero_modes().iter().map(|m| m.norm()).fold(0.0, f64::max),
        }
    }
}

/// Restart rule: jump when `‖A‖ > slack + ‖selection(A)‖`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenerativeConfig {
    /// Norm used in the comparison.
    pub norm: TriggerNorm,
    /// Allowed excess over the representative.
    pub slack: f64,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        GenerativeConfig { norm: TriggerNorm::Sup, slack: 2.0 }
    }
}

/// Runs the flow from `a0`, restarting at `selection(A)` whenever the trigger
/// fires, with the noise stream continuing across jumps.
///
/// A blow-up first tries a restart; the run is absorbed only if the
/// representative also exceeds the threshold.
pub fn run_generative(
    cfg: &SimConfig,
    a0: &GaugeField,
    selection: &dyn OrbitSelection,
    gen: &GenerativeConfig,
) -> Result<Trajectory> {
    if !(gen.slack >= 0.0) {
        return Err(crate::error::config("trigger slack must be ≥ 0"));
    }
    let mut st = SymStepper::new(cfg, a0.clone())?;
    let mut traj = Trajectory::new();
    traj.record(0.0, st.state());
    let total = cfg.steps();
    let select = |a: &GaugeField, t: f64| {
        selection.select(a).map_err(|e| Error::Numerical {
            message: format!("orbit selection '{}' failed at t = {t}: {e}", selection.name()),
            diagnostics: vec![("time".into(), t), ("sup_norm".into(), a.sup_norm())],
        })
    };
    while st.steps() < total {
        let blown = st.advance()?;
        let t = st.time();
        let rep = select(st.state(), t)?;
        let jump = match &blown {
            Some(_) => true,
            None => gen.norm.eval(st.state()) > gen.slack + gen.norm.eval(&rep),
        };
        if jump {
            if let Some((reason, comp)) = blow_up(&rep, cfg.r_max) {
                st.bury(reason, comp);
                traj.status = st.status().clone();
                return Ok(traj);
            }
            traj.jumps.push(Jump { time: t, pre: st.state().clone(), post: rep.clone() });
            st.set_state(rep)?;
        }
        if st.steps() % cfg.sample_every as u64 == 0 || st.steps() == total {
            traj.record(t, st.state());
        }
    }
    traj.status = Status::Horizon;
    Ok(traj)
}
