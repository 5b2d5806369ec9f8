//! Time integrators: the renormalised stochastic Yang–Mills flow, the exact
//! stochastic heat equation sampler, the coupled gauge systems, the
//! deterministic flow and the orbit-restarting generative process.
//!
//! Every solver uses the same exponential step: the Laplacian is integrated
//! exactly per Fourier mode, the mass term `C` by `e^{dt C}` pointwise, and
//! the remaining forcing `F` (brackets, mollified noise, `(dg)g^{-1}` terms)
//! by the exact integral `dt φ₁(μ dt) F̂` of a frozen forcing. White-noise
//! increments receive the Ornstein–Uhlenbeck multiplier, so linear equations
//! are sampled exactly in law.

mod config;
mod coupled;
mod generative;
mod integrator;
mod she;
mod sym;

pub use config::{CountertermSource, NoiseKind, SimConfig};
pub use coupled::{solve_bar_a, solve_coupled_ag, solve_coupled_bg, CoupledTrajectory};
pub use generative::{run_generative, AbelianZeroMode, GenerativeConfig, OrbitSelection, TriggerNorm};
pub use integrator::NoiseSample;
pub use she::{sample_gff, solve_she_exact, solve_she_exact_with};
pub use sym::{det_ym_flow_stepper, solve_det_ym_flow, solve_sym, step_sym, SymStepper};

use serde::{Deserialize, Serialize};

use crate::lattice::GaugeField;

/// Terminal status of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Status {
    /// Still being integrated.
    Running,
    /// Reached the configured horizon.
    Horizon,
    /// Absorbed after blow-up; no states follow.
    Cemetery {
        /// Time of the offending step.
        time: f64,
        /// Index of the offending step.
        step: u64,
        /// What was detected.
        reason: String,
        /// Offending component, if known.
        component: Option<usize>,
    },
}

/// A restart of the generative process.
#[derive(Clone, Debug)]
pub struct Jump {
    /// Jump time `ς_j`.
    pub time: f64,
    /// State just before the jump.
    pub pre: GaugeField,
    /// Selected representative.
    pub post: GaugeField,
}

/// Sampled states of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample times.
    pub times: Vec<f64>,
    /// States at the sample times.
    pub states: Vec<GaugeField>,
    /// Terminal status.
    pub status: Status,
    /// Restarts (generative runs only).
    pub jumps: Vec<Jump>,
    /// Non-fatal events, e.g. re-unitarisation of a drifting gauge field.
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub(crate) fn new() -> Self {
        Trajectory { times: Vec::new(), states: Vec::new(), status: Status::Running, jumps: Vec::new(), warnings: Vec::new() }
    }

    pub(crate) fn record(&mut self, t: f64, a: &GaugeField) {
        self.times.push(t);
        self.states.push(a.clone());
    }

    /// Last recorded state.
    pub fn last(&self) -> Option<&GaugeField> {
        self.states.last()
    }

    /// JSON summary: status, sample times and jump times.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "times": self.times,
            "jump_times": self.jumps.iter().map(|j| j.time).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }
}
