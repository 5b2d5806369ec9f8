//! Coupled gauge systems: `(B, g)` with rotated noise, `(A, g)` in the
//! left-invariant convention, and `(Ā, ḡ)` with noise rotated before
//! mollification.

use crate::error::Result;
use crate::gauge::{left_log_derivative, right_log_derivative};
use crate::lattice::{GaugeField, GroupField, MatField};
use crate::lie::{with_size, AlgebraMap, Fixed};

use super::config::SimConfig;
use super::integrator::{adjoint, apply_map, blow_up, gauge_velocity, mass_propagator, Etd, NoiseDriver, NoiseSample};
use super::sym::advance;
use super::{Status, Trajectory};

/// Unitarity defect above which a gauge field is projected back with a warning.
const TOL_GROUP: f64 = 1e-9;

/// States of a coupled run: the gauge field trajectory and the matching
/// gauge transformations at the same sample times.
#[derive(Clone, Debug)]
pub struct CoupledTrajectory {
    /// Gauge field samples and terminal status.
    pub trajectory: Trajectory,
    /// Gauge transformations at the sample times.
    pub gauge: Vec<GroupField>,
}

#[derive(Clone, Copy, PartialEq)]
enum System {
    Bg,
    Ag,
    BarA,
}

fn as_field(x: &GaugeField, comps: Vec<MatField>) -> GaugeField {
    GaugeField::from_components_unchecked(x.group(), comps).expect("shapes agree")
}

fn rotate(noise: NoiseSample, g: &MatField) -> NoiseSample {
    match noise {
        NoiseSample::None => NoiseSample::None,
        NoiseSample::White(w) => NoiseSample::White(adjoint(g, &w)),
        NoiseSample::Smooth(x) => NoiseSample::Smooth(adjoint(g, &x)),
    }
}

/// `g ← exp(dt r) g` (right) or `g ← g exp(dt r)` (left), pointwise.
fn flow_group(g: &mut GroupField, r: &MatField, dt: f64, left: bool) {
    with_size!(r.mat_dim(), N => flow_group_fixed::<N>(g, r, dt, left));
}

fn flow_group_fixed<const N: usize>(g: &mut GroupField, r: &MatField, dt: f64, left: bool) {
    let rd = r.data();
    let v = g.values_mut().data_mut();
    for s in 0..r.grid().sites() {
        let e = (Fixed::<N>::at(rd, s) * dt).exp();
        let x = Fixed::<N>::at(v, s);
        (if left { x * e } else { e * x }).put(v, s);
    }
}

fn run(cfg: &SimConfig, x0: &GaugeField, g0: &GroupField, system: System) -> Result<CoupledTrajectory> {
    cfg.validate()?;
    cfg.check_field(x0.grid(), x0.group())?;
    cfg.check_field(g0.grid(), g0.group())?;
    if x0.has_non_finite() {
        return Err(crate::error::invalid("initial data must be finite"));
    }
    let (m1, m2): (AlgebraMap, Option<AlgebraMap>) = match system {
        System::Bg => {
            let m1 = cfg.bphz()?.add(cfg.bare_mass_1.as_ref().unwrap_or(&cfg.bare_mass));
            let m2 = match &cfg.bare_mass_2 {
                None => m1.clone(),
                Some(c2) => cfg.bar_c()?.add(c2),
            };
            (m1, Some(m2))
        }
        System::Ag => (cfg.mass()?, None),
        System::BarA => (cfg.mass()?, Some(cfg.bare_mass.add(&cfg.check_c_map()?.scale(-1.0)))),
    };
    let prop = mass_propagator(&m1, cfg.dt);
    let m2 = m2.filter(|m| !m.is_zero());
    let mut noise = match system {
        System::BarA => NoiseDriver::pushed(cfg, g0.values())?,
        _ => NoiseDriver::new(cfg)?,
    };
    let etd = Etd::new(cfg.grid, cfg.dt);
    let mut x = x0.clone();
    let mut g = g0.clone();
    let mut out = CoupledTrajectory { trajectory: Trajectory::new(), gauge: Vec::new() };
    out.trajectory.record(0.0, &x);
    out.gauge.push(g.clone());
    let total = cfg.steps();
    for k in 0..total {
        let t = (k + 1) as f64 * cfg.dt;
        let logs = match system {
            System::Ag => left_log_derivative(&g),
            _ => right_log_derivative(&g),
        };
        let logs = match logs {
            Ok(l) => l,
            Err(e) => {
                out.trajectory.status =
                    Status::Cemetery { time: t - cfg.dt, step: k, reason: format!("gauge transformation unresolved: {e}"), component: None };
                return Ok(out);
            }
        };
        let sample = match system {
            System::Bg => rotate(noise.sample(k, None)?, g.values()),
            System::Ag => noise.sample(k, None)?,
            System::BarA => noise.sample(k, Some(g.values()))?,
        };
        let r = gauge_velocity(&x, &logs);
        let extra = m2.as_ref().map(|m| apply_map(m, &as_field(&x, logs)));
        x = advance(&etd, &x, prop.as_ref(), &sample, extra.as_ref());
        flow_group(&mut g, &r, cfg.dt, system == System::Ag);
        let step = k + 1;
        let defect = g.unitary_defect();
        if defect > TOL_GROUP {
            out.trajectory.warnings.push(format!("step {step}: gauge transformation re-unitarised (defect {defect:.2e})"));
            g.reunitarise();
        } else if step % cfg.reunitarise_every as u64 == 0 {
            g.reunitarise();
        }
        if let Some((reason, component)) = blow_up(&x, cfg.r_max) {
            out.trajectory.status = Status::Cemetery { time: t, step, reason, component };
            return Ok(out);
        }
        if step % cfg.sample_every as u64 == 0 || step == total {
            out.trajectory.record(t, &x);
            out.gauge.push(g.clone());
        }
    }
    out.trajectory.status = Status::Horizon;
    Ok(out)
}

/// Co-evolves `B` driven by `Ad_g ξ^ε` and the gauge transformation `g`
/// with `(∂_t g)g^{-1} = ∂_j h_j + [B_j, h_j]`, `h = (dg)g^{-1}`.
///
/// The mass `C^ε_BPHZ + C̊_1` acts on `B`; the `h` term carries the same
/// matrix unless `C̊_2` is configured, in which case it carries `λc̃ + C̊_2`.
/// Started from `B(0) = A(0)^{g(0)}` the pair tracks `A^g` for the solution
/// `A` of the flow driven by `ξ^ε`.
pub fn solve_coupled_bg(cfg: &SimConfig, b0: &GaugeField, g0: &GroupField) -> Result<CoupledTrajectory> {
    run(cfg, b0, g0, System::Bg)
}

/// Co-evolves the flow `A` driven by `ξ^ε` and `g` in left-invariant form,
/// `g^{-1}∂_t g = ∂_j ℓ_j + [A_j, ℓ_j]`, `ℓ = g^{-1}dg`.
///
/// In the continuum this is the same `g` as in [`solve_coupled_bg`], so
/// `A(t)^{g(t)}` is a second discretisation of `B(t)`.
pub fn solve_coupled_ag(cfg: &SimConfig, a0: &GaugeField, g0: &GroupField) -> Result<CoupledTrajectory> {
    run(cfg, a0, g0, System::Ag)
}

/// Co-evolves `Ā` driven by `χ^ε ∗ (Ad_ḡ ξ)` and `ḡ`, with mass
/// `C^ε_BPHZ + C̊` on `Ā` and `C̊ − Č` on `(dḡ)ḡ^{-1}`.
///
/// The raw noise of each coarse bin is rotated by `ḡ` at the start of the
/// bin, so the mollifier must be non-anticipative.
pub fn solve_bar_a(cfg: &SimConfig, a0: &GaugeField, g0: &GroupField) -> Result<CoupledTrajectory> {
    run(cfg, a0, g0, System::BarA)
}
