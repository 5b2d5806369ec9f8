use std::f64::consts::PI;

use symlab_core::lattice::TorusGrid;
use symlab_core::lie::GroupKind;
use symlab_core::noise::{
    check_c_2d, mollify, renorm_constants, sample_white_noise, Mollifier, MollifierProfile, MollifiedStream, NoiseStream,
    QuadConfig, TruncatedHeatKernel,
};
use symlab_core::Error;

/// Composite Gauss–Legendre (independent of the library implementation).
fn gl(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    // 8-point rule.
    const X: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let h = (b - a) / panels as f64;
    let mut out = Vec::new();
    for p in 0..panels {
        let m = a + (p as f64 + 0.5) * h;
        for k in 0..4 {
            out.push((m - 0.5 * h * X[k], 0.5 * h * W[k]));
            out.push((m + 0.5 * h * X[k], 0.5 * h * W[k]));
        }
    }
    out
}

/// `∫ (K^ε)²` by real-space quadrature in 2D, using the Gaussian semigroup
/// identity `∫ G(s, x − y) G(s', x − y') dx = G(s + s', y − y')`.
fn brute_force_c_bar(k: &TruncatedHeatKernel, chi: &Mollifier) -> f64 {
    let eps = chi.eps();
    // Autocorrelation of the unit-scale profile at radius r.
    let rs = gl(0.0, 2.0, 24);
    let disc_r = gl(0.0, 1.0, 16);
    let disc_a = gl(0.0, 2.0 * PI, 16);
    let auto: Vec<f64> = rs
        .iter()
        .map(|&(r, _)| {
            let mut s = 0.0;
            for &(q, wq) in &disc_r {
                for &(th, wt) in &disc_a {
                    let (y0, y1) = (q * th.cos(), q * th.sin());
                    let z = ((y0 - r).powi(2) + y1 * y1).sqrt();
                    s += wq * wt * q * chi.phi(q) * chi.phi(z);
                }
            }
            s
        })
        .collect();
    let spatial = |sigma: f64| -> f64 {
        rs.iter()
            .zip(&auto)
            .map(|(&(r, w), a)| w * 2.0 * PI * r * a * (-(eps * r).powi(2) / (4.0 * sigma)).exp() / (4.0 * PI * sigma))
            .sum()
    };
    let (lo, hi) = chi.time_support();
    let vs = gl(lo, hi, 8);
    let big_t = k.horizon();
    let mut total = 0.0;
    for &(v, wv) in &vs {
        for &(v2, wv2) in &vs {
            let start = v.max(v2);
            let mut edges = vec![start];
            let mut e = eps * eps / 64.0;
            while e < big_t {
                edges.push(start + e);
                e *= 2.0;
            }
            edges.push(start + big_t);
            let mut inner = 0.0;
            for win in edges.windows(2) {
                for (t, wt) in gl(win[0], win[1], 1) {
                    inner += wt * k.phi(t - v) * k.phi(t - v2) * spatial(2.0 * t - v - v2);
                }
            }
            total += wv * wv2 * chi.eta_eps(v) * chi.eta_eps(v2) * inner;
        }
    }
    total
}

#[test]
fn c_bar_matches_real_space_quadrature() {
    let k = TruncatedHeatKernel::new(2, 0.25).unwrap();
    let mut lib = Vec::new();
    let mut brute = Vec::new();
    let epss = [0.25 / 8.0, 0.25 / 16.0, 0.25 / 32.0];
    for &eps in &epss {
        let chi = Mollifier::new(MollifierProfile::causal(), eps, 2).unwrap();
        lib.push(renorm_constants(&k, &chi, &QuadConfig::default()).unwrap().c_bar);
        brute.push(brute_force_c_bar(&k, &chi));
    }
    for (a, b) in lib.iter().zip(&brute) {
        assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
    }
    let slope = |v: &[f64]| (v[2] - v[0]) / 4.0f64.ln();
    let (s_lib, s_ref) = (slope(&lib), slope(&brute));
    assert!((s_lib / s_ref - 1.0).abs() < 0.15, "{s_lib} vs {s_ref}");
}

#[test]
fn white_noise_moments_and_determinism() {
    let grid = TorusGrid::new(2, 32).unwrap();
    let dt = 1e-3;
    let xi = sample_white_noise(7, grid, GroupKind::SU2, dt, 8).unwrap();
    let again = sample_white_noise(7, grid, GroupKind::SU2, dt, 8).unwrap();
    assert_eq!(xi.increments, again.increments);
    let mut vals = Vec::new();
    for f in &xi.increments {
        for i in 0..2 {
            vals.extend(f.coords(i));
        }
    }
    let n = vals.len() as f64;
    let target = 1.0 / (dt * grid.cell_volume());
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 4.0 * (target / n).sqrt());
    // Relative standard error of a Gaussian sample variance is sqrt(2/n).
    assert!((var / target - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
}

#[test]
fn mollified_variance_matches_l2_norm_of_mollifier() {
    let grid = TorusGrid::new(2, 64).unwrap();
    let eps = 0.125;
    let dt = eps * eps / 16.0;
    let chi = Mollifier::new(MollifierProfile::causal(), eps, 2).unwrap();
    let (lo, hi) = chi.time_support();
    // ∫(χ^ε)² = ∫η_ε² · 2π∫(Φ^ε)² r dr.
    let time: f64 = gl(lo, hi, 64).iter().map(|&(t, w)| w * chi.eta_eps(t).powi(2)).sum();
    let space: f64 = gl(0.0, eps, 64).iter().map(|&(r, w)| w * 2.0 * PI * r * (chi.phi(r / eps) / (eps * eps)).powi(2)).sum();
    let oracle = time * space;
    let stream = NoiseStream::new(3, grid, GroupKind::SU2, dt).unwrap();
    let mut ms = MollifiedStream::new(stream, &chi).unwrap();
    let (mut sum, mut count) = (0.0, 0.0);
    for c in 0..160 {
        for comp in ms.coords(c).unwrap() {
            sum += comp.iter().map(|v| v * v).sum::<f64>();
            count += comp.len() as f64;
        }
    }
    let var = sum / count;
    assert!((var / oracle - 1.0).abs() < 0.1, "{var} vs {oracle}");
}

#[test]
fn materialised_and_streamed_mollification_agree() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let eps = 0.25;
    let dt = eps * eps / 16.0;
    let chi = Mollifier::new(MollifierProfile::symmetric(), eps, 2).unwrap();
    let xi = sample_white_noise(11, grid, GroupKind::U1, dt, 60).unwrap();
    let seq = mollify(&xi, &chi).unwrap();
    let mut ms = MollifiedStream::new(NoiseStream::new(11, grid, GroupKind::U1, dt).unwrap(), &chi).unwrap();
    for (k, f) in seq.fields.iter().enumerate() {
        let g = ms.field(seq.first_index + k as i64).unwrap();
        assert!(f.sub(&g).sup_norm() < 1e-9 * f.sup_norm());
    }
    // Linearity in the noise.
    let mut doubled = xi.clone();
    for f in &mut doubled.increments {
        *f = f.scaled(2.0);
    }
    let seq2 = mollify(&doubled, &chi).unwrap();
    for (a, b) in seq.fields.iter().zip(&seq2.fields) {
        assert!(b.sub(&a.scaled(2.0)).sup_norm() < 1e-9 * b.sup_norm());
    }
}

#[test]
fn non_anticipative_mollification_ignores_future_bins() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let eps = 0.25;
    let dt = eps * eps / 16.0;
    let chi = Mollifier::new(MollifierProfile::causal(), eps, 2).unwrap();
    let src = NoiseStream::new(5, grid, GroupKind::SU2, dt).unwrap();
    let mut a = MollifiedStream::pushed(grid, GroupKind::SU2, &chi, dt).unwrap();
    let mut b = MollifiedStream::pushed(grid, GroupKind::SU2, &chi, dt).unwrap();
    let c = 40;
    for bin in 0..c + 20 {
        let raw = src.coords(bin);
        a.push(bin, &raw);
        let other = if bin < c { raw } else { src.coords(bin + 1000) };
        b.push(bin, &other);
    }
    assert_eq!(a.coords(c).unwrap(), b.coords(c).unwrap());
    let sym = Mollifier::new(MollifierProfile::symmetric(), eps, 2).unwrap();
    assert!(matches!(MollifiedStream::pushed(grid, GroupKind::SU2, &sym, dt), Err(Error::Config(_))));
}

#[test]
fn mollifier_riemann_sums_are_normalised() {
    for &(n, eps, tol) in &[(32usize, 0.125, 5e-3), (64, 0.0625, 5e-3), (64, 0.25, 1e-6)] {
        let grid = TorusGrid::new(2, n).unwrap();
        let chi = Mollifier::new(MollifierProfile::causal_sharp(), eps, 2).unwrap();
        let h = grid.h();
        let mut space = 0.0;
        for s in 0..grid.sites() {
            let c = grid.coords(s);
            let wrap = |k: usize| if k <= n / 2 { k as f64 * h } else { (k as f64 - n as f64) * h };
            space += chi.phi((wrap(c[0]).powi(2) + wrap(c[1]).powi(2)).sqrt() / eps) / (eps * eps) * h * h;
        }
        assert!((space - 1.0).abs() < tol, "{n} {eps} {space}");
    }
}

#[test]
fn causal_constants_and_check_c_forms() {
    let k = TruncatedHeatKernel::new(2, 0.25).unwrap();
    let quad = QuadConfig::default();
    let eps = 0.25 / 16.0;
    let causal = Mollifier::new(MollifierProfile::causal(), eps, 2).unwrap();
    let a = renorm_constants(&k, &causal, &quad).unwrap();
    let b = renorm_constants(&k, &causal, &quad).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.c_tilde0, 0.0);
    assert_eq!(a.c_sym, 4.0 * a.c_hat - a.c_bar);
    let back: symlab_core::noise::RenormConstants = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(back, a);

    let cc = check_c_2d(&k, &causal, GroupKind::SU2, &quad).unwrap();
    let q = cc.q_form.unwrap();
    assert!((cc.value - q).abs() < 1e-2 * q.abs(), "{} vs {q}", cc.value);
    assert!((cc.casimir + 4.0).abs() < 1e-12);
    let bar = symlab_core::noise::bar_c_2d(&k, &causal, GroupKind::SU2, &quad).unwrap();
    assert!((cc.casimir * a.c_sym + cc.value - bar).abs() < 1e-12);

    let u1 = check_c_2d(&k, &causal, GroupKind::U1, &quad).unwrap();
    assert_eq!(u1.value, 0.0);
    assert_eq!(symlab_core::noise::bar_c_2d(&k, &causal, GroupKind::U1, &quad).unwrap(), 0.0);

    let sym = Mollifier::new(MollifierProfile::symmetric(), eps, 2).unwrap();
    let s = check_c_2d(&k, &sym, GroupKind::SU2, &quad).unwrap();
    assert!(s.q_form.is_none());
    assert!(s.constants.c_tilde0 > 0.0);
}

#[test]
fn unreachable_tolerance_is_a_numerical_error() {
    let k = TruncatedHeatKernel::new(2, 0.25).unwrap();
    let chi = Mollifier::new(MollifierProfile::causal(), 0.25 / 8.0, 2).unwrap();
    let quad = QuadConfig { tol: 1e-14, ..QuadConfig::default() };
    match renorm_constants(&k, &chi, &quad) {
        Err(Error::Numerical { diagnostics, .. }) => assert!(diagnostics.iter().any(|(k, _)| k == "c_bar_change")),
        other => panic!("expected numerical error, got {other:?}"),
    }
}
