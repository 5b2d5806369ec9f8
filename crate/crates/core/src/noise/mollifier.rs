//! Space-time mollifiers `χ^ε` and their action on lattice white noise.
//!
//! Profiles are products `χ(t, x) = η(t) Φ(|x|)` of a time bump and a radial
//! space bump, each of the form `exp(−a/(1 − y²))` on its support.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, invalid, Error, Result};
use crate::lattice::spectral::fft_with_scratch;
use crate::lattice::{GaugeField, TorusGrid};
use crate::lie::GroupKind;

use super::quad;
use super::white::{coords_to_field, CoordField, NoiseStream, WhiteNoise};

/// Shape of a unit-scale mollifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierProfile {
    /// Identifier recorded in outputs.
    pub id: String,
    /// Time support `(t_lo, t_hi)`.
    pub t_lo: f64,
    /// Upper end of the time support.
    pub t_hi: f64,
    /// Sharpness `a` of the time bump.
    pub t_sharp: f64,
    /// Sharpness of the spatial bump on the unit ball.
    pub x_sharp: f64,
}

fn bump(y: f64, a: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-a / (1.0 - y * y)).exp()
    }
}

impl MollifierProfile {
    /// Time-symmetric bump on `(−1, 1) × B`.
    pub fn symmetric() -> Self {
        MollifierProfile { id: "symmetric".into(), t_lo: -1.0, t_hi: 1.0, t_sharp: 1.0, x_sharp: 1.0 }
    }

    /// Non-anticipative bump on `(0, 1) × B`.
    pub fn causal() -> Self {
        MollifierProfile { id: "causal".into(), t_lo: 0.0, t_hi: 1.0, t_sharp: 1.0, x_sharp: 1.0 }
    }

    /// A second non-anticipative profile with different support and shape.
    pub fn causal_sharp() -> Self {
        MollifierProfile { id: "causal-sharp".into(), t_lo: 0.2, t_hi: 1.0, t_sharp: 2.0, x_sharp: 2.0 }
    }

    /// Looks up a shipped profile by id.
    pub fn by_id(id: &str) -> Result<Self> {
        match id {
            "symmetric" => Ok(Self::symmetric()),
            "causal" => Ok(Self::causal()),
            "causal-sharp" => Ok(Self::causal_sharp()),
            _ => Err(invalid(format!("unknown mollifier '{id}' (symmetric, causal, causal-sharp)"))),
        }
    }

    /// Validates the parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_hi > self.t_lo) || !(self.t_sharp > 0.0) || !(self.x_sharp > 0.0) {
            return Err(invalid(format!("invalid mollifier profile '{}'", self.id)));
        }
        Ok(())
    }

    /// Support in `(0, ∞)` in time.
    pub fn non_anticipative(&self) -> bool {
        self.t_lo >= 0.0
    }

    fn time_raw(&self, t: f64) -> f64 {
        let y = (2.0 * t - (self.t_lo + self.t_hi)) / (self.t_hi - self.t_lo);
        bump(y, self.t_sharp)
    }

    fn time_norm(&self) -> f64 {
        quad::integrate(self.t_lo, self.t_hi, 64, 16, |t| self.time_raw(t))
    }

    /// Unnormalised radial profile on the unit ball.
    pub(crate) fn space_raw(&self, r: f64) -> f64 {
        bump(r, self.x_sharp)
    }

    fn space_norm(&self, d: usize) -> f64 {
        let shell = if d == 2 { 2.0 * PI } else { 4.0 * PI };
        shell * quad::integrate(0.0, 1.0, 64, 16, |r| self.space_raw(r) * r.powi(d as i32 - 1))
    }
}

/// A mollifier at scale `ε` in dimension `d`.
#[derive(Clone, Debug)]
pub struct Mollifier {
    profile: MollifierProfile,
    eps: f64,
    d: usize,
    t_norm: f64,
    x_norm: f64,
}

impl Mollifier {
    /// Builds `χ^ε`.
    pub fn new(profile: MollifierProfile, eps: f64, d: usize) -> Result<Self> {
        profile.validate()?;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid(format!("mollifier scale must be positive, got {eps}")));
        }
        if !(2..=3).contains(&d) {
            return Err(invalid("mollifier dimension must be 2 or 3"));
        }
        let t_norm = profile.time_norm();
        let x_norm = profile.space_norm(d);
        Ok(Mollifier { profile, eps, d, t_norm, x_norm })
    }

    /// Profile.
    pub fn profile(&self) -> &MollifierProfile {
        &self.profile
    }

    /// Scale `ε`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Support in positive times.
    pub fn non_anticipative(&self) -> bool {
        self.profile.non_anticipative()
    }

    /// Unit-scale normalised time profile `η(τ)`.
    pub fn eta(&self, tau: f64) -> f64 {
        self.profile.time_raw(tau) / self.t_norm
    }

    /// Unit-scale normalised radial profile `Φ(r)`, `∫_{R^d} Φ = 1`.
    pub fn phi(&self, r: f64) -> f64 {
        self.profile.space_raw(r) / self.x_norm
    }

    /// `η_ε(t) = ε^{−2} η(t/ε²)`.
    pub fn eta_eps(&self, t: f64) -> f64 {
        let e2 = self.eps * self.eps;
        self.eta(t / e2) / e2
    }

    /// `χ^ε(t, x) = ε^{−2−d} χ(t/ε², x/ε)`.
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.eta_eps(t) * self.phi(r / self.eps) / self.eps.powi(self.d as i32)
    }

    /// Time support `(ε² t_lo, ε² t_hi)`.
    pub fn time_support(&self) -> (f64, f64) {
        let e2 = self.eps * self.eps;
        (self.profile.t_lo * e2, self.profile.t_hi * e2)
    }
}

/// Discretisation of `χ^ε` on a lattice with noise time step `dt`.
///
/// `ξ^ε(cΔ) = Σ_o ω_o S(ξ_{c−o})`, where `ξ_b` is the white noise on time bin
/// `[bΔ, (b+1)Δ)`, `ω_o ∝ η_ε((o − ½)Δ)` sums to one and `S` is convolution with
/// the normalised lattice restriction of `Φ^ε`.
#[derive(Clone, Debug)]
pub struct LatticeMollifier {
    grid: TorusGrid,
    offsets: Vec<(i64, f64)>,
    spatial: Vec<f64>,
    spatial_kernel: Vec<f64>,
    non_anticipative: bool,
}

impl LatticeMollifier {
    /// Requires `ε ≥ max(2h, 2√dt)`.
    pub fn new(grid: TorusGrid, chi: &Mollifier, dt: f64) -> Result<Self> {
        let eps = chi.eps();
        let need = (2.0 * grid.h()).max(2.0 * dt.sqrt());
        if eps < need * (1.0 - 1e-12) {
            return Err(config(format!(
                "mollifier scale ε = {eps} is under-resolved: need ε ≥ max(2h, 2√dt) = {need}"
            )));
        }
        if chi.dim() != grid.d() {
            return Err(invalid("mollifier and grid dimensions differ"));
        }
        let (lo, hi) = chi.time_support();
        let o_min = (lo / dt + 0.5).floor() as i64;
        let o_max = (hi / dt + 0.5).ceil() as i64;
        let mut offsets: Vec<(i64, f64)> = (o_min..=o_max)
            .map(|o| (o, chi.eta_eps((o as f64 - 0.5) * dt)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let tot: f64 = offsets.iter().map(|p| p.1).sum();
        offsets.iter_mut().for_each(|p| p.1 /= tot);

        let n = grid.n();
        let h = grid.h();
        let mut kernel = vec![0.0; grid.sites()];
        for (s, k) in kernel.iter_mut().enumerate() {
            let c = grid.coords(s);
            let r2: f64 = (0..grid.d())
                .map(|ax| {
                    let m = if c[ax] <= n / 2 { c[ax] as f64 } else { c[ax] as f64 - n as f64 };
                    (m * h) * (m * h)
                })
                .sum();
            *k = chi.phi(r2.sqrt() / eps);
        }
        let tot: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= tot);
        let mut buf: Vec<Complex64> = kernel.iter().map(|&k| k.into()).collect();
        let mut scratch = buf.clone();
        fft_with_scratch(grid, &mut buf, &mut scratch, false);
        let spatial = buf.iter().map(|z| z.re).collect();
        Ok(LatticeMollifier { grid, offsets, spatial, spatial_kernel: kernel, non_anticipative: chi.non_anticipative() })
    }

    /// Time taps `(offset o, weight ω_o)`.
    pub fn offsets(&self) -> &[(i64, f64)] {
        &self.offsets
    }

    /// Normalised spatial kernel on the lattice (sums to one).
    pub fn spatial_kernel(&self) -> &[f64] {
        &self.spatial_kernel
    }

    /// True when only strictly past bins are used.
    pub fn non_anticipative(&self) -> bool {
        self.non_anticipative
    }

    /// Range of bins needed for the value at coarse time `c`.
    pub fn bins_for(&self, c: i64) -> (i64, i64) {
        let lo = self.offsets.iter().map(|p| p.0).max().unwrap_or(0);
        let hi = self.offsets.iter().map(|p| p.0).min().unwrap_or(0);
        (c - lo, c - hi)
    }

    /// Spatial smoothing `S` applied to each coordinate array.
    pub fn smooth(&self, c: &CoordField, dim: usize) -> CoordField {
        let sites = self.grid.sites();
        let mut buf = vec![Complex64::new(0.0, 0.0); sites];
        let mut scratch = buf.clone();
        c.iter()
            .map(|arr| {
                let mut out = vec![0.0; arr.len()];
                let mut a = 0;
                while a < dim {
                    let pair = a + 1 < dim;
                    for s in 0..sites {
                        let im = if pair { arr[s * dim + a + 1] } else { 0.0 };
                        buf[s] = Complex64::new(arr[s * dim + a], im);
                    }
                    fft_with_scratch(self.grid, &mut buf, &mut scratch, false);
                    for (v, m) in buf.iter_mut().zip(&self.spatial) {
                        *v *= *m;
                    }
                    fft_with_scratch(self.grid, &mut buf, &mut scratch, true);
                    for s in 0..sites {
                        out[s * dim + a] = buf[s].re;
                        if pair {
                            out[s * dim + a + 1] = buf[s].im;
                        }
                    }
                    a += 2;
                }
                out
            })
            .collect()
    }
}

/// Streaming evaluation of `ξ^ε` at coarse times `cΔ`.
///
/// Smoothed bins are cached and evicted once no longer needed. In lazy mode
/// bins are drawn from a [`NoiseStream`]; in pushed mode the caller supplies
/// each bin (e.g. after an adjoint rotation) before it is needed.
#[derive(Debug)]
pub struct MollifiedStream {
    lm: LatticeMollifier,
    group: GroupKind,
    source: Option<NoiseStream>,
    cache: BTreeMap<i64, CoordField>,
}

impl MollifiedStream {
    /// Lazy mode over a noise stream whose step is the coarse noise step.
    pub fn new(stream: NoiseStream, chi: &Mollifier) -> Result<Self> {
        let lm = LatticeMollifier::new(stream.grid(), chi, stream.dt())?;
        Ok(MollifiedStream { lm, group: stream.group(), source: Some(stream), cache: BTreeMap::new() })
    }

    /// Pushed mode: requires a non-anticipative mollifier.
    pub fn pushed(grid: TorusGrid, group: GroupKind, chi: &Mollifier, dt: f64) -> Result<Self> {
        if !chi.non_anticipative() {
            return Err(config("rotating raw increments before mollification needs a non-anticipative mollifier"));
        }
        let lm = LatticeMollifier::new(grid, chi, dt)?;
        Ok(MollifiedStream { lm, group, source: None, cache: BTreeMap::new() })
    }

    /// The discretised mollifier.
    pub fn lattice_mollifier(&self) -> &LatticeMollifier {
        &self.lm
    }

    /// Supplies raw bin `b` (pushed mode).
    pub fn push(&mut self, bin: i64, raw: &CoordField) {
        let dim = self.group.algebra_dim();
        self.cache.insert(bin, self.lm.smooth(raw, dim));
    }

    /// Coordinates of `ξ^ε(cΔ)`.
    pub fn coords(&mut self, c: i64) -> Result<CoordField> {
        let (first, last) = self.lm.bins_for(c);
        let dim = self.group.algebra_dim();
        for b in first..=last {
            if !self.cache.contains_key(&b) {
                let src = self.source.as_ref().ok_or_else(|| Error::Numerical {
                    message: format!("noise bin {b} was not supplied before use"),
                    diagnostics: vec![("coarse_time".into(), c as f64)],
                })?;
                let smoothed = self.lm.smooth(&src.coords(b), dim);
                self.cache.insert(b, smoothed);
            }
        }
        while let Some((&k, _)) = self.cache.first_key_value() {
            if k < first {
                self.cache.pop_first();
            } else {
                break;
            }
        }
        let comps = self.cache[&first].len();
        let len = self.cache[&first][0].len();
        let mut out = vec![vec![0.0; len]; comps];
        for &(o, w) in self.lm.offsets() {
            let src = &self.cache[&(c - o)];
            for (dst, s) in out.iter_mut().zip(src) {
                for (x, y) in dst.iter_mut().zip(s) {
                    *x += w * y;
                }
            }
        }
        Ok(out)
    }

    /// `ξ^ε(cΔ)` as a gauge field.
    pub fn field(&mut self, c: i64) -> Result<GaugeField> {
        let grid = self.lm.grid;
        Ok(coords_to_field(grid, self.group, &self.coords(c)?))
    }
}

/// Mollified sequence produced from materialised white noise.
#[derive(Clone, Debug)]
pub struct MollifiedSequence {
    /// Coarse time index of the first entry.
    pub first_index: i64,
    /// Time step.
    pub dt: f64,
    /// `ξ^ε` at consecutive coarse times.
    pub fields: Vec<GaugeField>,
}

/// `ξ^ε = χ^ε ∗ ξ` at every time whose full stencil lies inside the sample.
pub fn mollify(xi: &WhiteNoise, chi: &Mollifier) -> Result<MollifiedSequence> {
    let group = xi.increments.first().map(|f| f.group()).ok_or_else(|| invalid("empty white noise"))?;
    let lm = LatticeMollifier::new(xi.grid, chi, xi.dt)?;
    let dim = group.algebra_dim();
    let steps = xi.increments.len() as i64;
    let smoothed: Vec<CoordField> = xi
        .increments
        .iter()
        .map(|f| lm.smooth(&(0..f.grid().d()).map(|i| f.coords(i)).collect::<Vec<_>>(), dim))
        .collect();
    let o_lo = lm.offsets().iter().map(|p| p.0).min().unwrap_or(0);
    let o_hi = lm.offsets().iter().map(|p| p.0).max().unwrap_or(0);
    let first = o_hi;
    let last = steps - 1 + o_lo;
    let mut fields = Vec::new();
    for c in first..=last {
        let mut acc = vec![vec![0.0; xi.grid.sites() * dim]; xi.grid.d()];
        for &(o, w) in lm.offsets() {
            for (dst, src) in acc.iter_mut().zip(&smoothed[(c - o) as usize]) {
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += w * y;
                }
            }
        }
        fields.push(coords_to_field(xi.grid, group, &acc));
    }
    Ok(MollifiedSequence { first_index: first, dt: xi.dt, fields })
}
