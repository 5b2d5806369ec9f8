//! Renormalisation constants of the mollified 2D/3D equation.
//!
//! All constants are computed in spatial Fourier variables. With `a(t)`,
//! `b(t)` the Fourier symbols of `K^ε = χ^ε ∗ K` and `K ∗ K^ε` at wave number
//! `κ` (divided by `Φ̂(εκ)`), each constant is a radial integral
//! `∫ μ_d(κ) Φ̂(εκ)² I(κ) dκ` of a time integral `I`. The time integrals are
//! split into the mollifier window, an exponential zone in which `K` is the
//! plain heat kernel and closed forms apply, and the cutoff zone.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lie::{AlgebraMap, GroupKind};

use super::kernel::TruncatedHeatKernel;
use super::mollifier::{Mollifier, MollifierProfile};
use super::quad::{self, ChebTable};

/// Quadrature settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Maximal relative change between the two refinement levels.
    pub tol: f64,
    /// Panel width in `ln κ` at level one.
    pub log_kappa_panel: f64,
    /// Gauss–Legendre order in `ln κ`.
    pub kappa_order: usize,
    /// Outer time panels across the mollifier window at level one.
    pub window_panels: usize,
    /// Outer time panels across the cutoff zone at level one.
    pub cutoff_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { tol: 1e-4, log_kappa_panel: 1.0, kappa_order: 16, window_panels: 8, cutoff_panels: 24 }
    }
}

/// The scalar renormalisation constants at one scale `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormConstants {
    /// Dimension.
    pub d: usize,
    /// Mollification scale.
    pub eps: f64,
    /// Kernel cutoff radius.
    pub r_k: f64,
    /// Kernel identifier.
    pub kernel: String,
    /// Mollifier identifier.
    pub mollifier: String,
    /// `ĉ = ∫ ∂_j K^ε (∂_j K ∗ K^ε)` (no sum over `j`).
    pub c_hat: f64,
    /// `c̄ = ∫ (K^ε)²`.
    pub c_bar: f64,
    /// `c_sym = 4ĉ − c̄`.
    pub c_sym: f64,
    /// `c̃ = ∫ χ^ε (K ∗ K^ε)`.
    pub c_tilde: f64,
    /// `c̃⁰ = (K ∗ K^ε)(0)`.
    pub c_tilde0: f64,
    /// `−∫ (K ∗ K^ε)(Q ∗ χ^ε) − ∫ (Q ∗ K^ε) K^ε`.
    pub q_form: f64,
    /// Largest relative change between refinement levels.
    pub refinement_change: f64,
    /// Quadrature settings.
    pub quad: QuadConfig,
    /// Casimir `λ` when a group has been attached.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<AlgebraMap>,
}

impl RenormConstants {
    /// Attaches the Casimir of `group` for output.
    pub fn with_group(mut self, group: GroupKind) -> Self {
        self.lambda = Some(group.algebra().casimir().clone());
        self
    }

    /// `λ c_sym`, the 2D BPHZ mass.
    pub fn bphz(&self, group: GroupKind) -> AlgebraMap {
        group.algebra().casimir().scale(self.c_sym)
    }

    /// `c̃ − c_sym − c̃⁰`.
    pub fn check_scalar(&self) -> f64 {
        self.c_tilde - self.c_sym - self.c_tilde0
    }

    /// Serialises to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `Č` at scale `ε` in both available forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckC {
    /// `λ (c̃ − c_sym − c̃⁰)` as a multiple of the identity.
    pub value: f64,
    /// `λ` times the `Q`-form, reported for non-anticipative mollifiers.
    pub q_form: Option<f64>,
    /// The scalar `λ`.
    pub casimir: f64,
    /// Underlying constants.
    pub constants: RenormConstants,
}

fn casimir_scalar(group: GroupKind) -> Result<f64> {
    group
        .algebra()
        .casimir()
        .as_scalar()
        .ok_or_else(|| Error::Unsupported(format!("Casimir of {group} is not a multiple of the identity")))
}

/// `Č` estimate `λ(c̃ − c_sym − c̃⁰)` in two dimensions.
pub fn check_c_2d(kernel: &TruncatedHeatKernel, chi: &Mollifier, group: GroupKind, quad: &QuadConfig) -> Result<CheckC> {
    if kernel.dim() != 2 {
        return Err(invalid("check_c_2d requires d = 2"));
    }
    let lam = casimir_scalar(group)?;
    let c = renorm_constants(kernel, chi, quad)?.with_group(group);
    let q_form = chi.non_anticipative().then(|| lam * c.q_form);
    Ok(CheckC { value: lam * c.check_scalar(), q_form, casimir: lam, constants: c })
}

/// `λ c̃`, the complete mass counterterm of the coupled 2D system.
pub fn bar_c_2d(kernel: &TruncatedHeatKernel, chi: &Mollifier, group: GroupKind, quad: &QuadConfig) -> Result<f64> {
    if kernel.dim() != 2 {
        return Err(invalid("bar_c_2d requires d = 2"));
    }
    let lam = casimir_scalar(group)?;
    Ok(lam * renorm_constants(kernel, chi, quad)?.c_tilde)
}

/// Computes all constants at two refinement levels and checks agreement.
pub fn renorm_constants(kernel: &TruncatedHeatKernel, chi: &Mollifier, quad: &QuadConfig) -> Result<RenormConstants> {
    if kernel.dim() != chi.dim() {
        return Err(invalid("kernel and mollifier dimensions differ"));
    }
    if !(quad.tol > 0.0) || quad.kappa_order == 0 || quad.window_panels == 0 || quad.cutoff_panels == 0 || !(quad.log_kappa_panel > 0.0) {
        return Err(invalid("invalid quadrature configuration"));
    }
    let coarse = Evaluator::new(kernel, chi, quad, 1).integrate();
    let fine = Evaluator::new(kernel, chi, quad, 2).integrate();
    let names = ["c_hat", "c_bar", "c_tilde", "c_tilde0", "q_form"];
    let scale = fine[1].abs().max(fine[0].abs());
    let mut worst = 0.0f64;
    let mut diagnostics = vec![("eps".to_string(), chi.eps())];
    for k in 0..5 {
        let denom = fine[k].abs().max(1e-9 * scale);
        let change = if denom == 0.0 { 0.0 } else { (coarse[k] - fine[k]).abs() / denom };
        worst = worst.max(change);
        diagnostics.push((format!("{}_change", names[k]), change));
        diagnostics.push((names[k].to_string(), fine[k]));
    }
    if !(worst <= quad.tol) {
        return Err(Error::Numerical { message: format!("renormalisation quadrature did not converge (change {worst:.3e})"), diagnostics });
    }
    let [c_hat, c_bar, c_tilde, c_tilde0, q_form] = fine;
    Ok(RenormConstants {
        d: kernel.dim(),
        eps: chi.eps(),
        r_k: kernel.radius(),
        kernel: kernel.id(),
        mollifier: chi.profile().id.clone(),
        c_hat,
        c_bar,
        c_sym: 4.0 * c_hat - c_bar,
        c_tilde,
        c_tilde0,
        q_form,
        refinement_change: worst,
        quad: quad.clone(),
        lambda: None,
    })
}

/// Radial Fourier transform of the normalised spatial profile.
struct ProfileTransform {
    nodes: Vec<(f64, f64)>,
    s_max: f64,
}

impl ProfileTransform {
    fn eval(&self, s: f64) -> f64 {
        if s > self.s_max {
            return 0.0;
        }
        self.nodes.iter().map(|&(x, w)| w * (s * x).cos()).sum()
    }
}

fn profile_transform(p: &MollifierProfile, d: usize) -> Arc<ProfileTransform> {
    static CACHE: OnceLock<Mutex<HashMap<(String, u64, usize), Arc<ProfileTransform>>>> = OnceLock::new();
    let key = (p.id.clone(), p.x_sharp.to_bits(), d);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let mut xs = Vec::new();
    quad::composite(0.0, 1.0, 512, 16, &mut xs);
    // Marginal of Φ on the hyperplane x_1 = x.
    let marginal = |x: f64| -> f64 {
        if d == 2 {
            let top = (1.0 - x * x).max(0.0).sqrt();
            2.0 * quad::integrate(0.0, top, 16, 16, |y| p.space_raw((x * x + y * y).sqrt()))
        } else {
            2.0 * PI * quad::integrate(x, 1.0, 16, 16, |r| p.space_raw(r) * r)
        }
    };
    let mut nodes: Vec<(f64, f64)> = xs.iter().map(|&(x, w)| (x, 2.0 * w * marginal(x))).collect();
    let norm: f64 = nodes.iter().map(|n| n.1).sum();
    nodes.iter_mut().for_each(|n| n.1 /= norm);
    let mut t = ProfileTransform { nodes, s_max: f64::INFINITY };
    let mut s_max = 0.0;
    let mut s = 0.0;
    while s < 4000.0 {
        if t.eval(s).abs() > 1e-12 {
            s_max = s;
        }
        s += 0.5;
    }
    t.s_max = s_max + 0.5;
    let t = Arc::new(t);
    cache.lock().unwrap().insert(key, t.clone());
    t
}

/// Self-convolutions of the temporal cutoff on `[T/4, 2T]`.
struct CutoffTables {
    quarter: f64,
    horizon: f64,
    phi2: ChebTable,
    psi: ChebTable,
}

impl CutoffTables {
    /// `∫ φ(r − s) φ(s) ds`.
    fn phi2(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else if r <= self.quarter {
            r
        } else if r >= 2.0 * self.horizon {
            0.0
        } else {
            self.phi2.eval(r)
        }
    }

    /// `∫ φ'(r − s) φ(s) ds`.
    fn psi(&self, r: f64) -> f64 {
        if r <= self.quarter || r >= 2.0 * self.horizon {
            0.0
        } else {
            self.psi.eval(r)
        }
    }
}

fn cutoff_tables(k: &TruncatedHeatKernel) -> Arc<CutoffTables> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CutoffTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = k.radius().to_bits();
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let big_t = k.horizon();
    let quarter = 0.25 * big_t;
    let phi2 = ChebTable::new(quarter, 2.0 * big_t, 128, 16, |r| {
        quad::integrate(0.0, r.min(big_t), 64, 16, |s| k.phi(r - s) * k.phi(s))
    });
    let psi = ChebTable::new(quarter, 2.0 * big_t, 128, 16, |r| {
        let lo = (r - big_t).max(0.0);
        let hi = (r - quarter).min(big_t);
        quad::integrate(lo, hi.max(lo), 64, 16, |s| k.dphi(r - s) * k.phi(s))
    });
    let t = Arc::new(CutoffTables { quarter, horizon: big_t, phi2, psi });
    cache.lock().unwrap().insert(key, t.clone());
    t
}

/// Exponent beyond which a factor `e^{−x}` is dropped.
const EXP_CUT: f64 = 46.0;

/// Inner symbols at one time: `a`, `b`, `(Q ∗ χ)`, `(Q ∗ K^ε)`.
#[derive(Clone, Copy, Default)]
struct Symbols {
    a: f64,
    b: f64,
    q_eta: f64,
    q_a: f64,
}

/// Per-κ time integrals.
#[derive(Clone, Copy, Default)]
struct TimeIntegrals {
    aa: f64,
    ab: f64,
    eta_b: f64,
    b_q: f64,
    qa_a: f64,
    b0: f64,
}

struct CutoffZone {
    t_nodes: Vec<(f64, f64)>,
    v_nodes: Vec<(f64, f64)>,
    // Per (t, v): weighted η_ε(v) times φ, Φ2, φ', Ψ at t − v.
    weights: Vec<[f64; 4]>,
    start: f64,
}

struct Evaluator<'a> {
    kernel: &'a TruncatedHeatKernel,
    chi: &'a Mollifier,
    quad: &'a QuadConfig,
    level: usize,
    lo: f64,
    hi: f64,
    tables: Arc<CutoffTables>,
    transform: Arc<ProfileTransform>,
    cutoff: Option<CutoffZone>,
    window_nodes: Vec<(f64, f64)>,
}

impl<'a> Evaluator<'a> {
    fn new(kernel: &'a TruncatedHeatKernel, chi: &'a Mollifier, quad: &'a QuadConfig, level: usize) -> Self {
        let (lo, hi) = chi.time_support();
        let tables = cutoff_tables(kernel);
        let transform = profile_transform(chi.profile(), chi.dim());
        let mut window_nodes = Vec::new();
        quad::composite(lo, hi, quad.window_panels * level, 16, &mut window_nodes);
        let mut ev = Evaluator { kernel, chi, quad, level, lo, hi, tables, transform, cutoff: None, window_nodes };
        ev.cutoff = Some(ev.build_cutoff_zone());
        ev
    }

    fn build_cutoff_zone(&self) -> CutoffZone {
        let big_t = self.kernel.horizon();
        let start = self.hi.max(0.25 * big_t + self.lo);
        let end = big_t + self.hi;
        let panels = self.quad.cutoff_panels * self.level;
        let width = (end - start) / panels as f64;
        let mut t_nodes = Vec::new();
        let mut tmp = Vec::new();
        // Geometric grading towards the start of the zone, then uniform panels.
        let mut edges = vec![start];
        for k in (0..20).rev() {
            edges.push(start + width * 0.5f64.powi(k + 1));
        }
        edges.push(start + width);
        for w in edges.windows(2) {
            quad::composite(w[0], w[1], 1, 16, &mut tmp);
            t_nodes.extend_from_slice(&tmp);
        }
        quad::composite(start + width, end, panels - 1, 16, &mut tmp);
        t_nodes.extend_from_slice(&tmp);
        let mut v_nodes = Vec::new();
        quad::composite(self.lo, self.hi, 4 * self.level, 12, &mut v_nodes);
        let weights = t_nodes
            .par_iter()
            .flat_map_iter(|&(t, _)| {
                v_nodes.iter().map(move |&(v, wv)| {
                    let r = t - v;
                    let e = wv * self.chi.eta_eps(v);
                    [e * self.kernel.phi(r), e * self.tables.phi2(r), e * self.kernel.dphi(r), e * self.tables.psi(r)]
                })
            })
            .collect();
        CutoffZone { t_nodes, v_nodes, weights, start }
    }

    /// Symbols at time `t` by direct quadrature over the mollifier window.
    fn symbols_at(&self, t: f64, k2: f64, nodes: &mut Vec<(f64, f64)>) -> Symbols {
        let top = t.min(self.hi);
        let start = self.lo.max(t - EXP_CUT / k2);
        if top <= start {
            return Symbols::default();
        }
        let max_width = ((self.hi - self.lo) / 8.0).min(12.0 / k2) / self.level as f64;
        let panels = ((top - start) / max_width).ceil().max(1.0) as usize;
        quad::composite(start, top, panels, 12, nodes);
        let mut s = Symbols::default();
        for &(v, w) in nodes.iter() {
            let r = t - v;
            let e = w * self.chi.eta_eps(v) * (-r * k2).exp();
            s.a += e * self.kernel.phi(r);
            s.b += e * self.tables.phi2(r);
            s.q_eta += e * self.kernel.dphi(r);
            s.q_a += e * self.tables.psi(r);
        }
        s
    }

    fn time_integrals(&self, kappa: f64) -> TimeIntegrals {
        let k2 = kappa * kappa;
        let mut out = TimeIntegrals::default();
        let mut nodes = Vec::new();
        for &(t, w) in &self.window_nodes {
            let s = self.symbols_at(t, k2, &mut nodes);
            out.aa += w * s.a * s.a;
            out.ab += w * s.a * s.b;
            out.eta_b += w * self.chi.eta_eps(t) * s.b;
            out.b_q += w * s.b * s.q_eta;
            out.qa_a += w * s.q_a * s.a;
        }
        if self.lo < 0.0 {
            out.b0 = self.symbols_at(0.0, k2, &mut nodes).b;
        }
        let big_t = self.kernel.horizon();
        let e_end = 0.25 * big_t + self.lo;
        if e_end > self.hi {
            let end = self.symbols_at(self.hi, k2, &mut nodes);
            let (j0, j1) = exp_moments(2.0 * k2, e_end - self.hi);
            out.aa += end.a * end.a * j0;
            out.ab += end.a * end.b * j0 + end.a * end.a * j1;
        }
        let zone = self.cutoff.as_ref().expect("cutoff zone");
        if k2 * (zone.start - self.hi) < EXP_CUT {
            let ev: Vec<f64> = zone.v_nodes.iter().map(|&(v, _)| (-(self.hi - v) * k2).exp()).collect();
            let nv = ev.len();
            for (ti, &(t, w)) in zone.t_nodes.iter().enumerate() {
                let x = (t - self.hi) * k2;
                if x > EXP_CUT {
                    continue;
                }
                let row = &zone.weights[ti * nv..(ti + 1) * nv];
                let mut s = [0.0; 4];
                for (wt, e) in row.iter().zip(&ev) {
                    for c in 0..4 {
                        s[c] += wt[c] * e;
                    }
                }
                let f = (-x).exp();
                let (a, b, q_eta, q_a) = (f * s[0], f * s[1], f * s[2], f * s[3]);
                out.aa += w * a * a;
                out.ab += w * a * b;
                out.b_q += w * b * q_eta;
                out.qa_a += w * q_a * a;
            }
        }
        out
    }

    /// `[ĉ, c̄, c̃, c̃⁰, Q-form]`.
    fn integrate(&self) -> [f64; 5] {
        let d = self.chi.dim();
        let eps = self.chi.eps();
        let u0 = (1e-5 / self.kernel.radius()).ln();
        let u1 = (self.transform.s_max / eps).ln();
        let width = self.quad.log_kappa_panel / self.level as f64;
        let panels = ((u1 - u0) / width).ceil().max(1.0) as usize;
        let mut nodes = Vec::new();
        quad::composite(u0, u1, panels, self.quad.kappa_order, &mut nodes);
        let terms: Vec<[f64; 5]> = nodes
            .par_iter()
            .map(|&(u, w)| {
                let kappa = u.exp();
                let mu = if d == 2 { kappa / (2.0 * PI) } else { kappa * kappa / (2.0 * PI * PI) };
                let ph = self.transform.eval(eps * kappa);
                let ti = self.time_integrals(kappa);
                let m = w * kappa * mu;
                let m2 = m * ph * ph;
                [
                    m2 * kappa * kappa / d as f64 * ti.ab,
                    m2 * ti.aa,
                    m2 * ti.eta_b,
                    m * ph * ti.b0,
                    -m2 * (ti.b_q + ti.qa_a),
                ]
            })
            .collect();
        let mut acc = [0.0; 5];
        for t in &terms {
            for k in 0..5 {
                acc[k] += t[k];
            }
        }
        acc
    }
}

/// `(∫_0^L e^{−cs} ds, ∫_0^L s e^{−cs} ds)`.
fn exp_moments(c: f64, l: f64) -> (f64, f64) {
    let x = c * l;
    let j0 = -(-x).exp_m1() / c;
    let j1 = if x < 1e-3 {
        // Series of 1 − e^{−x}(1 + x) = x²/2 − x³/3 + x⁴/8 − …
        l * l * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0)
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (c * c)
    };
    (j0, j1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_moments() {
        for &(c, l) in &[(2.0, 0.3), (1e-6, 0.5), (50.0, 1.0)] {
            let (j0, j1) = exp_moments(c, l);
            let r0 = quad::integrate(0.0, l, 64, 16, |s| (-c * s).exp());
            let r1 = quad::integrate(0.0, l, 64, 16, |s| s * (-c * s).exp());
            assert!((j0 - r0).abs() < 1e-12 * r0.abs().max(1.0));
            assert!((j1 - r1).abs() < 1e-10 * r1.abs());
        }
    }

    #[test]
    fn profile_transform_is_normalised_and_even() {
        let p = MollifierProfile::causal();
        for d in [2, 3] {
            let t = profile_transform(&p, d);
            assert!((t.eval(0.0) - 1.0).abs() < 1e-14);
            assert!(t.s_max > 10.0 && t.s_max < 4000.0);
            assert!(t.eval(3.0) < 1.0);
        }
    }

    #[test]
    fn cutoff_self_convolution_tables() {
        let k = TruncatedHeatKernel::new(2, 0.25).unwrap();
        let t = cutoff_tables(&k);
        let big_t = k.horizon();
        let r = 0.7 * big_t;
        let direct = quad::integrate(0.0, r, 256, 16, |s| k.phi(r - s) * k.phi(s));
        assert!((t.phi2(r) - direct).abs() < 1e-9);
        assert!((t.phi2(0.2 * big_t) - 0.2 * big_t).abs() < 1e-15);
        assert_eq!(t.psi(0.2 * big_t), 0.0);
    }
}
