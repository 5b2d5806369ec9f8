//! Exponential time step and noise drivers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::spectral::{combine_multipliers, laplacian_symbol};
use crate::lattice::{GaugeField, MatField, TorusGrid};
use crate::lie::{with_size, AlgebraMap, Fixed, GroupKind};
use crate::noise::{coords_to_field, CoordField, MollifiedStream, NoiseStream};

use super::config::{NoiseKind, SimConfig};

/// Noise entering one step.
#[derive(Clone, Debug)]
pub enum NoiseSample {
    /// No noise.
    None,
    /// White-noise increment `dt·ξ` over the step.
    White(GaugeField),
    /// Mollified noise `ξ^ε`, frozen over the step.
    Smooth(GaugeField),
}

/// Fourier multipliers of the exponential step.
#[derive(Debug)]
pub(crate) struct Etd {
    decay: Vec<f64>,
    phi1: Vec<f64>,
    ou: Vec<f64>,
}

impl Etd {
    pub(crate) fn new(grid: TorusGrid, dt: f64) -> Self {
        let mu: Arc<Vec<f64>> = laplacian_symbol(grid);
        let mut decay = Vec::with_capacity(mu.len());
        let mut phi1 = Vec::with_capacity(mu.len());
        let mut ou = Vec::with_capacity(mu.len());
        for &m in mu.iter() {
            let x = m * dt;
            decay.push((-x).exp());
            if x < 1e-12 {
                phi1.push(dt);
                ou.push(1.0);
            } else {
                phi1.push(dt * -(-x).exp_m1() / x);
                ou.push((-(-2.0 * x).exp_m1() / (2.0 * x)).sqrt());
            }
        }
        Etd { decay, phi1, ou }
    }

    /// `e^{dtΔ} x + dt φ₁(−dtΔ) f + OU(−dtΔ) w`, componentwise.
    pub(crate) fn step(&self, x: &GaugeField, forcing: Option<&GaugeField>, white: Option<&GaugeField>) -> GaugeField {
        let comps = (0..x.grid().d())
            .map(|i| {
                let mut inputs: Vec<(&MatField, &[f64])> = vec![(x.comp(i), &self.decay)];
                if let Some(f) = forcing {
                    inputs.push((f.comp(i), &self.phi1));
                }
                if let Some(w) = white {
                    inputs.push((w.comp(i), &self.ou));
                }
                combine_multipliers(&inputs, true)
            })
            .collect();
        GaugeField::from_components_unchecked(x.group(), comps).expect("shapes agree")
    }
}

/// Applies a linear map on `𝔤` at every site and component.
pub(crate) fn apply_map(m: &AlgebraMap, a: &GaugeField) -> GaugeField {
    let alg = a.group().algebra();
    let mut out = a.clone();
    for i in 0..a.grid().d() {
        let c = out.comp_mut(i);
        if let Some(k) = m.as_scalar() {
            c.data_mut().iter_mut().for_each(|v| *v *= k);
            continue;
        }
        for s in 0..c.grid().sites() {
            let v = m.apply(alg, &c.get(s));
            c.set(s, &v);
        }
    }
    out
}

/// `e^{dt C}` or `None` when `C = 0`.
pub(crate) fn mass_propagator(c: &AlgebraMap, dt: f64) -> Option<AlgebraMap> {
    (!c.is_zero()).then(|| c.exp(dt))
}

/// First blow-up symptom of a state, if any.
pub(crate) fn blow_up(a: &GaugeField, r_max: f64) -> Option<(String, Option<usize>)> {
    for (i, c) in a.comps().iter().enumerate() {
        if c.has_non_finite() {
            return Some(("non-finite value".into(), Some(i)));
        }
        let norm = c.sup_norm();
        if norm > r_max {
            return Some((format!("sup norm {norm:.3e} exceeds threshold {r_max:.3e}"), Some(i)));
        }
    }
    None
}

/// Pointwise `Ad_g X` for every component.
pub(crate) fn adjoint(g: &MatField, x: &GaugeField) -> GaugeField {
    with_size!(g.mat_dim(), N => adjoint_fixed::<N>(g, x))
}

fn adjoint_fixed<const N: usize>(g: &MatField, x: &GaugeField) -> GaugeField {
    let mut out = x.clone();
    let gd = g.data();
    for i in 0..x.grid().d() {
        let c = out.comp_mut(i).data_mut();
        for s in 0..g.grid().sites() {
            let gs = Fixed::<N>::at(gd, s);
            (gs * Fixed::at(c, s) * gs.dagger()).anti_hermitian_part().put(c, s);
        }
    }
    out
}

fn rotate_coords(g: &MatField, group: GroupKind, c: &CoordField) -> CoordField {
    let grid = g.grid();
    let alg = group.algebra();
    let dim = alg.dim();
    let field = adjoint(g, &coords_to_field(grid, group, c));
    (0..grid.d())
        .map(|i| {
            let mut out = vec![0.0; grid.sites() * dim];
            let comp = field.comp(i);
            for s in 0..grid.sites() {
                alg.coords(&comp.get(s), &mut out[s * dim..(s + 1) * dim]);
            }
            out
        })
        .collect()
}

/// Source of the per-step noise.
pub(crate) enum NoiseDriver {
    None,
    White { stream: NoiseStream, dt: f64 },
    Mollified { stream: MollifiedStream, factor: u64, current: Option<(i64, GaugeField)> },
    /// Raw bins are rotated by a gauge field before mollification.
    Pushed { raw: NoiseStream, stream: MollifiedStream, factor: u64, current: Option<(i64, GaugeField)> },
}

impl NoiseDriver {
    pub(crate) fn new(cfg: &SimConfig) -> Result<Self> {
        let base = cfg.noise_base_n.unwrap_or(cfg.grid.n());
        Ok(match &cfg.noise {
            NoiseKind::None => NoiseDriver::None,
            NoiseKind::White => {
                NoiseDriver::White { stream: NoiseStream::with_base(cfg.seed, cfg.grid, base, cfg.group, cfg.dt)?, dt: cfg.dt }
            }
            NoiseKind::Mollified { .. } => {
                let factor = cfg.coarse_factor();
                let chi = cfg.mollifier()?.expect("mollified");
                let raw = NoiseStream::with_base(cfg.seed, cfg.grid, base, cfg.group, factor as f64 * cfg.dt)?;
                NoiseDriver::Mollified { stream: MollifiedStream::new(raw, &chi)?, factor: factor as u64, current: None }
            }
        })
    }

    /// Mollification of `Ad_g ξ` with `g` frozen at the start of each bin;
    /// bins before time zero are rotated by `g0`.
    pub(crate) fn pushed(cfg: &SimConfig, g0: &MatField) -> Result<Self> {
        let chi = cfg.mollifier()?.ok_or_else(|| crate::error::config("this solver needs mollified noise"))?;
        let factor = cfg.coarse_factor();
        let base = cfg.noise_base_n.unwrap_or(cfg.grid.n());
        let delta = factor as f64 * cfg.dt;
        let raw = NoiseStream::with_base(cfg.seed, cfg.grid, base, cfg.group, delta)?;
        let mut stream = MollifiedStream::pushed(cfg.grid, cfg.group, &chi, delta)?;
        let (first, _) = stream.lattice_mollifier().bins_for(0);
        for b in first..0 {
            let rotated = rotate_coords(g0, cfg.group, &raw.coords(b));
            stream.push(b, &rotated);
        }
        Ok(NoiseDriver::Pushed { raw, stream, factor: factor as u64, current: None })
    }

    /// Noise for step `k`; `g` is the current gauge field for pushed drivers.
    pub(crate) fn sample(&mut self, k: u64, g: Option<&MatField>) -> Result<NoiseSample> {
        match self {
            NoiseDriver::None => Ok(NoiseSample::None),
            NoiseDriver::White { stream, dt } => {
                let mut c = stream.coords(k as i64);
                c.iter_mut().flatten().for_each(|v| *v *= *dt);
                Ok(NoiseSample::White(coords_to_field(stream.grid(), stream.group(), &c)))
            }
            NoiseDriver::Mollified { stream, factor, current } => {
                let c = (k / *factor) as i64;
                if current.as_ref().map(|p| p.0) != Some(c) {
                    *current = Some((c, stream.field(c)?));
                }
                Ok(NoiseSample::Smooth(current.as_ref().expect("set").1.clone()))
            }
            NoiseDriver::Pushed { raw, stream, factor, current } => {
                let c = (k / *factor) as i64;
                if current.as_ref().map(|p| p.0) != Some(c) {
                    let g = g.ok_or_else(|| Error::InvalidInput("rotated noise needs the gauge field".into()))?;
                    stream.push(c, &rotate_coords(g, raw.group(), &raw.coords(c)));
                    *current = Some((c, stream.field(c)?));
                }
                Ok(NoiseSample::Smooth(current.as_ref().expect("set").1.clone()))
            }
        }
    }
}

/// `Σ_j (∂_j h_j + [X_j, h_j])` for the `g`-flow.
pub(crate) fn gauge_velocity(x: &GaugeField, h: &[MatField]) -> MatField {
    with_size!(x.group().matrix_dim(), N => gauge_velocity_fixed::<N>(x, h))
}

fn gauge_velocity_fixed<const N: usize>(x: &GaugeField, h: &[MatField]) -> MatField {
    let grid = x.grid();
    let abelian = x.group().is_abelian();
    let special = matches!(x.group(), GroupKind::SpecialUnitary(_));
    let mut r = MatField::zeros(grid, N);
    for (j, hj) in h.iter().enumerate() {
        let dh = crate::lattice::partial_derivative(hj, j).expect("axis in range");
        r.axpy(1.0, &dh);
        if !abelian {
            let (xj, hd, rd) = (x.comp(j).data(), hj.data(), r.data_mut());
            for s in 0..grid.sites() {
                let v = Fixed::<N>::at(rd, s) + Fixed::at(xj, s).commutator(&Fixed::at(hd, s));
                v.put(rd, s);
            }
        }
    }
    let rd = r.data_mut();
    for s in 0..grid.sites() {
        Fixed::<N>::at(rd, s).project(special).put(rd, s);
    }
    r
}
