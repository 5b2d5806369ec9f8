//! Run configuration and counterterm resolution.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{config, invalid, Result};
use crate::lattice::TorusGrid;
use crate::lie::{AlgebraMap, GroupKind};
use crate::noise::{renorm_constants, Mollifier, MollifierProfile, QuadConfig, RenormConstants, TruncatedHeatKernel};

/// Driving noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    /// Deterministic dynamics.
    None,
    /// Lattice white noise.
    White,
    /// `χ^ε ∗ ξ` at scale `eps`.
    Mollified {
        /// Mollification scale.
        eps: f64,
        /// Mollifier shape.
        profile: MollifierProfile,
    },
}

/// Origin of the divergent part of the mass counterterm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CountertermSource {
    /// `λ c_sym^ε` from quadrature (2D, mollified noise).
    Computed,
    /// A fixed map, e.g. a lattice-calibrated value.
    User(AlgebraMap),
    /// `λ (c_div/ε + c_fin)`, the 3D form.
    Divergent {
        /// Coefficient of `1/ε`.
        c_div: f64,
        /// Finite part.
        c_fin: f64,
    },
}

/// Configuration shared by all solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Lattice.
    pub grid: TorusGrid,
    /// Structure group.
    pub group: GroupKind,
    /// Time step.
    pub dt: f64,
    /// Stability factor: `dt ≤ cfl·h²`, `cfl ≤ 1/4`.
    pub cfl: f64,
    /// Driving noise.
    pub noise: NoiseKind,
    /// Cutoff radius of the truncated heat kernel.
    pub kernel_radius: f64,
    /// Bare mass `C̊`.
    pub bare_mass: AlgebraMap,
    /// Bare mass `C̊_1` of the coupled system (defaults to `C̊`).
    pub bare_mass_1: Option<AlgebraMap>,
    /// Bare mass `C̊_2` of the `(dg)g^{-1}` term of the coupled system.
    pub bare_mass_2: Option<AlgebraMap>,
    /// Divergent counterterm.
    pub counterterm: CountertermSource,
    /// Override of `Č`.
    pub check_c: Option<AlgebraMap>,
    /// Final time.
    pub horizon: f64,
    /// Blow-up threshold on the sup norm.
    pub r_max: f64,
    /// Noise seed.
    pub seed: u64,
    /// Resolution on which noise is drawn before block averaging.
    pub noise_base_n: Option<usize>,
    /// Record every this many steps.
    pub sample_every: usize,
    /// Quadrature settings for computed constants.
    pub quad: QuadConfig,
    /// Polar re-unitarisation period of gauge transformations.
    pub reunitarise_every: usize,
}

impl SimConfig {
    /// White-noise run with zero bare mass and default settings.
    pub fn new(grid: TorusGrid, group: GroupKind, dt: f64) -> Self {
        let dim = group.algebra_dim();
        SimConfig {
            grid,
            group,
            dt,
            cfl: 0.25,
            noise: NoiseKind::White,
            kernel_radius: TruncatedHeatKernel::DEFAULT_RADIUS,
            bare_mass: AlgebraMap::zero(dim),
            bare_mass_1: None,
            bare_mass_2: None,
            counterterm: CountertermSource::Computed,
            check_c: None,
            horizon: 0.0,
            r_max: 1e4,
            seed: 0,
            noise_base_n: None,
            sample_every: 1,
            quad: QuadConfig::default(),
            reunitarise_every: 100,
        }
    }

    /// Number of steps to the horizon.
    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    /// Checks every invariant except the step-size bound.
    pub(crate) fn validate_basic(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(config(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(config(format!("horizon must be ≥ 0, got {}", self.horizon)));
        }
        if !(self.r_max > 0.0) {
            return Err(config("blow-up threshold must be positive"));
        }
        if self.sample_every == 0 || self.reunitarise_every == 0 {
            return Err(config("sampling and re-unitarisation periods must be ≥ 1"));
        }
        let dim = self.group.algebra_dim();
        for m in [Some(&self.bare_mass), self.bare_mass_1.as_ref(), self.bare_mass_2.as_ref(), self.check_c.as_ref()].into_iter().flatten() {
            if m.dim() != dim {
                return Err(config(format!("mass matrix has dimension {} but the algebra has {dim}", m.dim())));
            }
        }
        if let CountertermSource::User(m) = &self.counterterm {
            if m.dim() != dim {
                return Err(config("user counterterm has the wrong dimension"));
            }
        }
        if let Some(b) = self.noise_base_n {
            if b < self.grid.n() || b % self.grid.n() != 0 {
                return Err(config(format!("noise base resolution {b} must be a multiple of n = {}", self.grid.n())));
            }
        }
        if let NoiseKind::Mollified { eps, profile } = &self.noise {
            profile.validate()?;
            let need = (2.0 * self.grid.h()).max(2.0 * self.dt.sqrt());
            if !(*eps >= need * (1.0 - 1e-12)) {
                return Err(config(format!("ε = {eps} is under-resolved: need ε ≥ max(2h, 2√dt) = {need}")));
            }
        }
        Ok(())
    }

    /// Checks all invariants including `dt ≤ cfl·h²`, `cfl ≤ 1/4`.
    pub fn validate(&self) -> Result<()> {
        self.validate_basic()?;
        if !(self.cfl > 0.0 && self.cfl <= 0.25) {
            return Err(config(format!("cfl must lie in (0, 1/4], got {}", self.cfl)));
        }
        let h = self.grid.h();
        if self.dt > self.cfl * h * h * (1.0 + 1e-12) {
            return Err(config(format!("dt = {} exceeds cfl·h² = {}", self.dt, self.cfl * h * h)));
        }
        Ok(())
    }

    /// Mollification scale, if any.
    pub fn eps(&self) -> Option<f64> {
        match &self.noise {
            NoiseKind::Mollified { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    /// The configured mollifier, if any.
    pub fn mollifier(&self) -> Result<Option<Mollifier>> {
        match &self.noise {
            NoiseKind::Mollified { eps, profile } => Ok(Some(Mollifier::new(profile.clone(), *eps, self.grid.d())?)),
            _ => Ok(None),
        }
    }

    /// The truncated heat kernel.
    pub fn kernel(&self) -> Result<TruncatedHeatKernel> {
        TruncatedHeatKernel::new(self.grid.d(), self.kernel_radius)
    }

    /// Coarse noise bins per step multiple: mollified noise is refreshed every
    /// `factor` steps, on bins of width `Δ = factor·dt ≈ ε²/16`.
    pub fn coarse_factor(&self) -> usize {
        match self.eps() {
            Some(eps) => ((eps * eps / (16.0 * self.dt)) * (1.0 + 1e-9)).floor().max(1.0) as usize,
            None => 1,
        }
    }

    /// Renormalisation constants for the configured mollifier (cached).
    pub fn renorm(&self) -> Result<Option<RenormConstants>> {
        let Some(chi) = self.mollifier()? else { return Ok(None) };
        static CACHE: OnceLock<Mutex<HashMap<String, RenormConstants>>> = OnceLock::new();
        let key = serde_json::to_string(&(self.grid.d(), self.kernel_radius, &self.noise, &self.quad))?;
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().expect("cache").get(&key) {
            return Ok(Some(c.clone()));
        }
        let c = renorm_constants(&self.kernel()?, &chi, &self.quad)?;
        cache.lock().expect("cache").insert(key, c.clone());
        Ok(Some(c))
    }

    /// The divergent counterterm `C^ε_BPHZ`.
    pub fn bphz(&self) -> Result<AlgebraMap> {
        let alg = self.group.algebra();
        let dim = alg.dim();
        match &self.counterterm {
            CountertermSource::User(m) => Ok(m.clone()),
            CountertermSource::Divergent { c_div, c_fin } => {
                let eps = self.eps().ok_or_else(|| config("a 1/ε counterterm needs mollified noise"))?;
                Ok(alg.casimir().scale(c_div / eps + c_fin))
            }
            CountertermSource::Computed => {
                if alg.casimir().is_zero() {
                    return Ok(AlgebraMap::zero(dim));
                }
                if self.grid.d() != 2 {
                    return Err(config("no computed counterterm in 3D: use counterterm = divergent or user"));
                }
                match self.renorm()? {
                    Some(c) => Ok(c.bphz(self.group)),
                    None => Err(config("a computed counterterm needs mollified noise")),
                }
            }
        }
    }

    /// `C = C^ε_BPHZ + C̊`.
    pub fn mass(&self) -> Result<AlgebraMap> {
        Ok(self.bphz()?.add(&self.bare_mass))
    }

    /// `λ c̃^ε`.
    pub fn bar_c(&self) -> Result<AlgebraMap> {
        let alg = self.group.algebra();
        if alg.casimir().is_zero() {
            return Ok(AlgebraMap::zero(alg.dim()));
        }
        if self.grid.d() != 2 {
            return Err(config("c̃ is only available in 2D"));
        }
        let c = self.renorm()?.ok_or_else(|| config("c̃ needs mollified noise"))?;
        Ok(alg.casimir().scale(c.c_tilde))
    }

    /// `Č = λ(c̃ − c_sym − c̃⁰)` or the configured override.
    pub fn check_c_map(&self) -> Result<AlgebraMap> {
        if let Some(m) = &self.check_c {
            return Ok(m.clone());
        }
        let alg = self.group.algebra();
        if alg.casimir().is_zero() {
            return Ok(AlgebraMap::zero(alg.dim()));
        }
        if self.grid.d() != 2 {
            return Err(config("Č is only available in 2D"));
        }
        let c = self.renorm()?.ok_or_else(|| config("Č needs mollified noise"))?;
        Ok(alg.casimir().scale(c.check_scalar()))
    }

    /// Grid and group of a field agree with the configuration.
    pub(crate) fn check_field(&self, grid: TorusGrid, group: GroupKind) -> Result<()> {
        if grid != self.grid || group != self.group {
            return Err(invalid("initial data do not match the configured grid and group"));
        }
        Ok(())
    }

    /// JSON echo for manifests.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}
