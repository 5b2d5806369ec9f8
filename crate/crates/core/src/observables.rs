//! Norms and metrics on gauge fields, estimated by dyadic sampling.
//!
//! Suprema over segments, triangles and heat-flow times are taken over
//! finite samples; every report carries the maximising witness.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, invalid, Error, Result};
use crate::lattice::spectral::{heat_multiplier, SpectralField};
use crate::lattice::{line_integral, partial_derivative, triangle_boundary_integral, GaugeField, LineSegment, MatField, TorusGrid, Triangle};
use crate::lie::GroupKind;
use crate::noise::stream_rng;

/// Exponents and sampling budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    pub delta: f64,
    pub alpha3: f64,
    pub theta: f64,
    /// Segments per dyadic length.
    pub segments: usize,
    /// Triangles per dyadic size.
    pub triangles: usize,
    /// Heat-flow times per octave.
    pub t_per_octave: usize,
    /// Seed of the sample positions.
    pub seed: u64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            alpha: 0.75,
            eta: -0.55,
            beta: -0.25,
            delta: 0.9,
            alpha3: 0.45,
            theta: 0.3,
            segments: 64,
            triangles: 64,
            t_per_octave: 2,
            seed: 0,
        }
    }
}

impl NormParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(config(what.to_string())) };
        check(self.alpha > 2.0 / 3.0 && self.alpha < 1.0, "alpha must lie in (2/3, 1)")?;
        check(self.eta < -0.5, "eta must be < -1/2")?;
        check(self.beta < 0.0, "beta must be < 0")?;
        check(self.delta > 1.0 + self.beta / 2.0 && self.delta < 1.0, "delta must lie in (1 + beta/2, 1)")?;
        check(self.alpha3 > 0.0 && self.alpha3 < 0.5, "alpha3 must lie in (0, 1/2)")?;
        check(self.theta > 0.0, "theta must be > 0")?;
        check(self.segments > 0 && self.triangles > 0 && self.t_per_octave > 0, "sampling budgets must be ≥ 1")
    }

    /// The same parameters with every budget doubled.
    pub fn doubled(&self) -> Self {
        NormParams { segments: 2 * self.segments, triangles: 2 * self.triangles, t_per_octave: 2 * self.t_per_octave, ..self.clone() }
    }
}

/// Where a sampled supremum was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Time { t: f64 },
    Segment { start: [f64; 3], direction: [f64; 3], t: Option<f64> },
    Triangle { vertex: [f64; 3], a: [f64; 3], b: [f64; 3] },
}

/// A sampled norm with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: String,
    pub value: f64,
    pub witness: Witness,
    /// Number of sampled objects (times, segments or triangles).
    pub samples: usize,
    pub params: NormParams,
}

impl NormReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    witness: usize,
}

impl Best {
    fn new() -> Self {
        Best { value: 0.0, witness: usize::MAX }
    }

    fn offer(&mut self, v: f64, i: usize) {
        if v > self.value || !v.is_finite() {
            self.value = v;
            self.witness = i;
        }
    }
}

/// Dyadic times `2^{-j/p}` from 1 down to `h²/4`.
fn time_grid(grid: TorusGrid, p: &NormParams) -> Vec<f64> {
    let t_min = grid.h() * grid.h() / 4.0;
    let step = 1.0 / p.t_per_octave as f64;
    (0..).map(|j| (-(j as f64) * step).exp2()).take_while(|&t| t >= t_min).collect()
}

/// Dyadic lengths from `top` down to `h`.
fn length_grid(grid: TorusGrid, top: f64) -> Vec<f64> {
    (0..).map(|j| top * (-(j as f64)).exp2()).take_while(|&l| l >= grid.h() * (1.0 - 1e-12)).collect()
}

fn random_unit(rng: &mut impl Rng, d: usize) -> [f64; 3] {
    loop {
        let mut v = [0.0; 3];
        for c in v.iter_mut().take(d) {
            *c = rng.random_range(-1.0..1.0);
        }
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn random_point(rng: &mut impl Rng, d: usize) -> [f64; 3] {
    let mut x = [0.0; 3];
    for c in x.iter_mut().take(d) {
        *c = rng.random();
    }
    x
}

/// Segment samples at one length; the stream depends only on the length
/// index, so larger budgets extend smaller ones.
fn segments_at(d: usize, level: usize, len: f64, p: &NormParams) -> Vec<LineSegment> {
    let mut rng = stream_rng(p.seed, level as i64);
    (0..p.segments)
        .map(|_| {
            let x = random_point(&mut rng, d);
            let v = random_unit(&mut rng, d).map(|c| c * len);
            LineSegment::new(d, x, v).expect("length within range")
        })
        .collect()
}

fn quad_points(grid: TorusGrid, len: f64) -> usize {
    ((4.0 * len * grid.n() as f64).ceil() as usize + 1).max(3)
}

fn segment_sup(a: &GaugeField, top: f64, exponent: f64, p: &NormParams) -> Result<(f64, Option<LineSegment>, usize)> {
    let grid = a.grid();
    let mut best = Best::new();
    let mut all = Vec::new();
    for (level, len) in length_grid(grid, top).into_iter().enumerate() {
        let m = quad_points(grid, len);
        for seg in segments_at(grid.d(), level, len, p) {
            let v = line_integral(a, &seg, m)?.norm() / len.powf(exponent);
            best.offer(v, all.len());
            all.push(seg);
        }
    }
    Ok((best.value, all.get(best.witness).copied(), all.len()))
}

fn seg_witness(s: Option<LineSegment>, t: Option<f64>) -> Witness {
    s.map_or(Witness::None, |s| Witness::Segment { start: s.start(), direction: s.direction(), t })
}

/// Heat-flow characterisation of a negative Hölder–Besov norm of a list of
/// matrix fields: `sup_t t^{-γ/2} max_f ‖P_t f‖_∞`.
pub fn holder_besov_norm_fields(fields: &[&MatField], gamma: f64, p: &NormParams) -> Result<(f64, f64)> {
    if !(gamma > -2.0 && gamma < 0.0) {
        return Err(Error::Domain(format!("regularity exponent must lie in (-2, 0), got {gamma}")));
    }
    let Some(first) = fields.first() else { return Ok((0.0, 1.0)) };
    let grid = first.grid();
    let spectra: Vec<SpectralField> = fields.iter().map(|f| SpectralField::new(f, false)).collect();
    let mut best = (0.0f64, 1.0);
    for t in time_grid(grid, p) {
        let mult = heat_multiplier(grid, t);
        let sup = spectra.iter().map(|s| s.synthesize(&mult).sup_norm()).fold(0.0, f64::max);
        let v = t.powf(-gamma / 2.0) * sup;
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// `|A|_{C^γ}` for `γ ∈ (−2, 0)`: supremum over dyadic `t ∈ (0, 1]` of
/// `t^{−γ/2} ‖P_t A‖_∞`.
pub fn holder_besov_norm(a: &GaugeField, gamma: f64, p: &NormParams) -> Result<NormReport> {
    p.validate()?;
    let comps: Vec<&MatField> = a.comps().iter().collect();
    let (value, t) = holder_besov_norm_fields(&comps, gamma, p)?;
    Ok(NormReport {
        norm: format!("holder-besov({gamma})"),
        value,
        witness: Witness::Time { t },
        samples: time_grid(a.grid(), p).len(),
        params: p.clone(),
    })
}

/// `|A|_{gr α} = sup_ℓ |A(ℓ)| / |ℓ|^α` over sampled segments with dyadic
/// lengths in `[h, 1/4]`.
pub fn norm_gr_alpha(a: &GaugeField, p: &NormParams) -> Result<NormReport> {
    p.validate()?;
    let (value, seg, samples) = segment_sup(a, LineSegment::MAX_LENGTH, p.alpha, p)?;
    Ok(NormReport { norm: "gr-alpha".into(), value, witness: seg_witness(seg, None), samples, params: p.clone() })
}

fn triangles_at(d: usize, level: usize, len: f64, p: &NormParams) -> Vec<(Triangle, [f64; 3], [f64; 3], [f64; 3])> {
    let mut rng = stream_rng(p.seed ^ 0x7472_6961, level as i64);
    (0..p.triangles)
        .map(|_| {
            let x = random_point(&mut rng, d);
            let u = random_unit(&mut rng, d);
            let w = loop {
                let w = random_unit(&mut rng, d);
                let dot: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
                if dot.abs() < 0.9 {
                    break w;
                }
            };
            let r: f64 = rng.random_range(0.5..1.0);
            let a = u.map(|c| c * len);
            let b = w.map(|c| c * len * r);
            (Triangle::from_vertices(d, x, a, b).expect("sides within range"), x, a, b)
        })
        .collect()
}

/// `|A|_α = |A|_{gr α} + sup_P |A(∂P)| / |P|^{α/2}` over sampled triangles.
pub fn norm_alpha(a: &GaugeField, p: &NormParams) -> Result<NormReport> {
    let gr = norm_gr_alpha(a, p)?;
    let grid = a.grid();
    let mut best = Best::new();
    let mut all = Vec::new();
    // Sides up to 2·len must stay below 1/4.
    for (level, len) in length_grid(grid, LineSegment::MAX_LENGTH / 2.0).into_iter().enumerate() {
        let m = quad_points(grid, 2.0 * len);
        for (tri, x, u, w) in triangles_at(grid.d(), level, len, p) {
            let v = triangle_boundary_integral(a, &tri, m)?.norm() / tri.area().powf(p.alpha / 2.0);
            best.offer(v, all.len());
            all.push(Witness::Triangle { vertex: x, a: u, b: w });
        }
    }
    let witness = all.get(best.witness).cloned().unwrap_or(gr.witness);
    Ok(NormReport { norm: "alpha".into(), value: gr.value + best.value, witness, samples: gr.samples + all.len(), params: p.clone() })
}

struct Flow {
    group: GroupKind,
    spectra: Vec<SpectralField>,
}

impl Flow {
    fn new(a: &GaugeField) -> Self {
        Flow { group: a.group(), spectra: a.comps().iter().map(|c| SpectralField::new(c, true)).collect() }
    }

    fn at(&self, t: f64) -> GaugeField {
        let mult = heat_multiplier(self.spectra[0].grid(), t);
        GaugeField::from_components(self.group, self.spectra.iter().map(|s| s.synthesize(&mult)).collect())
            .expect("heat flow preserves shape")
    }
}

/// `sup_{t∈(0,1)} sup_{|ℓ|<t^θ} |(P_t A)(ℓ)| / |ℓ|^{α₃}`.
pub fn heatgr_norm(a: &GaugeField, p: &NormParams) -> Result<NormReport> {
    p.validate()?;
    let grid = a.grid();
    let flow = Flow::new(a);
    let mut best = (0.0, None, None);
    let mut samples = 0;
    for t in time_grid(grid, p).into_iter().filter(|&t| t < 1.0) {
        let top = LineSegment::MAX_LENGTH.min(t.powf(p.theta) * (1.0 - 1e-9));
        if top < grid.h() {
            continue;
        }
        let (v, seg, n) = segment_sup(&flow.at(t), top, p.alpha3, p)?;
        samples += n;
        if v > best.0 {
            best = (v, seg, Some(t));
        }
    }
    Ok(NormReport { norm: "heat-gr".into(), value: best.0, witness: seg_witness(best.1, best.2), samples, params: p.clone() })
}

/// The array of products `A_i ∂_j A_k` of the quadratic term.
fn products(a: &GaugeField) -> Result<Vec<MatField>> {
    let d = a.grid().d();
    let derivs: Vec<Vec<MatField>> =
        (0..d).map(|k| (0..d).map(|j| partial_derivative(a.comp(k), j)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let grid = a.grid();
    let mut out = Vec::with_capacity(d * d * d);
    for i in 0..d {
        for dk in derivs.iter() {
            for dkj in dk.iter() {
                let mut m = MatField::zeros(grid, a.group().matrix_dim());
                for s in 0..grid.sites() {
                    m.set(s, &a.comp(i).get(s).matmul(&dkj.get(s)));
                }
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// `Θ(A, B) = |A − B|_{C^η} + sup_t t^δ |P_tA·∂P_tA − P_tB·∂P_tB|_{C^β}`.
///
/// The witness is the time attaining the product term.
pub fn theta_metric(a: &GaugeField, b: &GaugeField, p: &NormParams) -> Result<NormReport> {
    p.validate()?;
    if a.grid() != b.grid() || a.group() != b.group() {
        return Err(invalid("fields live on different grids or groups"));
    }
    let first = holder_besov_norm(&a.sub(b), p.eta, p)?.value;
    let (fa, fb) = (Flow::new(a), Flow::new(b));
    let mut best = (0.0, 1.0);
    let times: Vec<f64> = time_grid(a.grid(), p).into_iter().filter(|&t| t < 1.0).collect();
    for &t in &times {
        let pa = products(&fa.at(t))?;
        let pb = products(&fb.at(t))?;
        let diff: Vec<MatField> = pa
            .into_iter()
            .zip(&pb)
            .map(|(mut x, y)| {
                x.axpy(-1.0, y);
                x
            })
            .collect();
        let refs: Vec<&MatField> = diff.iter().collect();
        let v = t.powf(p.delta) * holder_besov_norm_fields(&refs, p.beta, p)?.0;
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(NormReport {
        norm: "theta".into(),
        value: first + best.0,
        witness: Witness::Time { t: best.1 },
        samples: times.len(),
        params: p.clone(),
    })
}

/// `I[A] = exp(i ∫ A_1)` for `U(1)`, with `A_1 = i c` read as the real `c`.
pub fn abelian_loop_observable(a: &GaugeField) -> Result<Complex64> {
    if a.group() != GroupKind::U1 {
        return Err(Error::Unsupported(format!("I[A] is defined for u1, not {}", a.group())));
    }
    let grid = a.grid();
    let total: f64 = a.comp(0).data().iter().map(|z| z.im).sum::<f64>() * grid.cell_volume();
    Ok(Complex64::from_polar(1.0, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Mat;
    use std::f64::consts::PI;

    fn u1(grid: TorusGrid, f: impl Fn(usize, [f64; 3]) -> f64) -> GaugeField {
        GaugeField::from_fn(grid, GroupKind::U1, |i, x| Mat::scalar(1, Complex64::new(0.0, f(i, x))))
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let z = GaugeField::zeros(grid, GroupKind::SU2);
        let p = NormParams { segments: 8, triangles: 8, ..Default::default() };
        assert_eq!(norm_gr_alpha(&z, &p).unwrap().value, 0.0);
        assert_eq!(norm_alpha(&z, &p).unwrap().value, 0.0);
    }

    #[test]
    fn constants_are_fixed_by_the_heat_flow() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let a = u1(grid, |i, _| if i == 0 { -1.3 } else { 0.4 });
        let r = holder_besov_norm(&a, -0.5, &NormParams::default()).unwrap();
        assert!((r.value - 1.3).abs() < 1e-12);
        assert_eq!(r.witness, Witness::Time { t: 1.0 });
    }

    #[test]
    fn exponent_range_is_enforced() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let a = GaugeField::zeros(grid, GroupKind::U1);
        assert!(holder_besov_norm(&a, 0.1, &NormParams::default()).is_err());
        assert!(NormParams { alpha: 0.5, ..Default::default() }.validate().is_err());
        assert!(NormParams { delta: 0.8, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn loop_observable_ignores_full_turns() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let a = u1(grid, |_, x| 0.3 + (2.0 * PI * x[0]).sin());
        let b = u1(grid, |_, x| 0.3 + 2.0 * PI + (2.0 * PI * x[0]).sin());
        let (ia, ib) = (abelian_loop_observable(&a).unwrap(), abelian_loop_observable(&b).unwrap());
        assert!((ia - ib).norm() < 1e-12);
        assert!((ia - Complex64::from_polar(1.0, 0.3)).norm() < 1e-12);
        assert!(abelian_loop_observable(&GaugeField::zeros(grid, GroupKind::SU2)).is_err());
    }
}
