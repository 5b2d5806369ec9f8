use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use symlab_core::dynamics::sample_gff;
use symlab_core::gauge::{abelian_representative, gauge_transform};
use symlab_core::lattice::{triangle_boundary_integral, GaugeField, GroupField, TorusGrid, Triangle};
use symlab_core::lie::{GroupKind, Mat};
use symlab_core::observables::{
    abelian_loop_observable, heatgr_norm, holder_besov_norm, norm_alpha, norm_gr_alpha, theta_metric, NormParams, Witness,
};
use symlab_core::stats::loglog_slope;

fn u1(grid: TorusGrid, mut f: impl FnMut(usize, [f64; 3]) -> f64) -> GaugeField {
    GaugeField::from_fn(grid, GroupKind::U1, |i, x| Mat::scalar(1, Complex64::new(0.0, f(i, x))))
}

fn smooth_su2(grid: TorusGrid) -> GaugeField {
    let alg = GroupKind::SU2.algebra();
    GaugeField::from_fn(grid, GroupKind::SU2, |i, x| {
        let t = 2.0 * PI;
        alg.from_coords(&[0.6 * (t * x[0] + i as f64).sin(), 0.5 * (t * x[1]).cos(), 0.4 * (t * (x[0] + x[1])).sin()])
    })
}

fn white(grid: TorusGrid, seed: u64) -> GaugeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / grid.cell_volume().sqrt();
    u1(grid, |_, _| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
}

fn params() -> NormParams {
    NormParams { segments: 32, triangles: 32, ..NormParams::default() }
}

#[test]
fn constant_field_gr_norm_is_attained_at_the_longest_segments() {
    let grid = TorusGrid::new(2, 32).unwrap();
    let c = 1.3;
    let a = u1(grid, |i, _| if i == 0 { c } else { 0.0 });
    let p = NormParams::default();
    let r = norm_gr_alpha(&a, &p).unwrap();
    // |A(ℓ)|/|ℓ|^α = c|v_0|·|ℓ|^{1−α}, largest at |ℓ| = 1/4 along the first axis.
    let bound = c * 0.25f64.powf(1.0 - p.alpha);
    assert!(r.value <= bound * (1.0 + 1e-9) && r.value > 0.95 * bound, "{} vs {bound}", r.value);
    let Witness::Segment { direction, .. } = r.witness else { panic!("segment witness expected") };
    let len = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((len - 0.25).abs() < 1e-12);
}

#[test]
fn single_mode_holder_besov_closed_form() {
    let grid = TorusGrid::new(2, 32).unwrap();
    let h = grid.h();
    let k = 3.0;
    let a = u1(grid, |i, x| if i == 0 { (2.0 * PI * k * x[0]).sin() } else { 0.0 });
    let mu = 2.0 / (h * h) * (1.0 - (2.0 * PI * k * h).cos());
    let p = NormParams::default();
    for gamma in [-0.5, -1.0, -1.5] {
        // sup_x |e^{−μt} sin| = e^{−μt} since the grid hits the crests.
        let want = (0..)
            .map(|j| (-(j as f64) / p.t_per_octave as f64).exp2())
            .take_while(|&t| t >= h * h / 4.0)
            .map(|t| t.powf(-gamma / 2.0) * (-mu * t).exp())
            .fold(0.0, f64::max);
        let got = holder_besov_norm(&a, gamma, &p).unwrap().value;
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
        let t_star = -gamma / (2.0 * mu);
        let continuum = t_star.powf(-gamma / 2.0) * (-mu * t_star).exp();
        assert!(got <= continuum * (1.0 + 1e-12) && got > 0.8 * continuum);
    }
    assert!(holder_besov_norm(&a, 0.2, &p).is_err());
    assert!(holder_besov_norm(&a, -2.0, &p).is_err());
}

#[test]
fn white_noise_norm_grows_with_the_exponent() {
    let a = white(TorusGrid::new(2, 32).unwrap(), 3);
    let p = NormParams::default();
    let vals: Vec<f64> = [-1.9, -1.5, -1.0, -0.5, -0.1].iter().map(|&g| holder_besov_norm(&a, g, &p).unwrap().value).collect();
    // Small exponents are dominated by the zero mode at t = 1.
    assert!(vals.windows(2).all(|w| w[0] <= w[1]) && vals[4] > 10.0 * vals[0], "{vals:?}");
}

#[test]
fn gff_norm_is_stable_under_doubled_budgets() {
    let grid = TorusGrid::new(2, 32).unwrap();
    let p = params();
    for seed in 0..3 {
        let a = sample_gff(seed, grid, GroupKind::SU2);
        let (r1, r2) = (norm_gr_alpha(&a, &p).unwrap(), norm_gr_alpha(&a, &p.doubled()).unwrap());
        assert!(r2.value >= r1.value && r2.samples == 2 * r1.samples);
        assert!((r2.value - r1.value) / r1.value < 0.1, "{} -> {}", r1.value, r2.value);
        let (h1, h2) = (heatgr_norm(&a, &p).unwrap(), heatgr_norm(&a, &p.doubled()).unwrap());
        assert!((h2.value - h1.value).abs() / h1.value < 0.1, "{} -> {}", h1.value, h2.value);
    }
}

#[test]
fn exact_forms_have_no_triangle_term() {
    // A = dω with ω = sin 2πx cos 2πy integrates to zero round every triangle.
    let grid = TorusGrid::new(2, 64).unwrap();
    let a = u1(grid, |i, x| {
        let (s, c) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).cos());
        let (cx, sy) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).sin());
        if i == 0 { 2.0 * PI * cx * c } else { -2.0 * PI * s * sy }
    });
    let p = params();
    let (full, gr) = (norm_alpha(&a, &p).unwrap().value, norm_gr_alpha(&a, &p).unwrap().value);
    assert!(full >= gr);
    assert!(full - gr < 0.02 * gr, "{full} vs {gr}");
    let b = smooth_su2(grid);
    let (full, gr) = (norm_alpha(&b, &p).unwrap().value, norm_gr_alpha(&b, &p).unwrap().value);
    assert!(full > gr);
}

#[test]
fn gff_flux_variance_scales_with_area() {
    let grid = TorusGrid::new(2, 128).unwrap();
    let areas: Vec<f64> = (6..=9).map(|k| (-(k as f64)).exp2()).collect();
    let (samples, placements) = (40, 8);
    let mut second = vec![0.0; areas.len()];
    for seed in 0..samples {
        let a = sample_gff(seed, grid, GroupKind::U1);
        for (k, &area) in areas.iter().enumerate() {
            let l = (2.0 * area).sqrt() * (1.0 - 1e-9);
            for j in 0..placements {
                let x = [0.1 + 0.11 * j as f64, 0.05 + 0.37 * j as f64, 0.0];
                let tri = Triangle::from_vertices(2, x, [l, 0.0, 0.0], [0.0, l, 0.0]).unwrap();
                let m = (8.0 * l * grid.n() as f64).ceil() as usize + 1;
                second[k] += triangle_boundary_integral(&a, &tri, m).unwrap().norm().powi(2);
            }
        }
    }
    let (s, _) = loglog_slope(&areas, &second).unwrap();
    assert!((s - 1.0).abs() < 0.1, "slope {s}");
}

#[test]
fn heat_gr_norm_basics() {
    let p = params();
    let grid = TorusGrid::new(2, 32).unwrap();
    assert_eq!(heatgr_norm(&GaugeField::zeros(grid, GroupKind::SU2), &p).unwrap().value, 0.0);
    // |P_tA(ℓ)| ≤ ‖A‖_∞|ℓ| since the heat flow is a contraction.
    let a = smooth_su2(grid);
    let r = heatgr_norm(&a, &p).unwrap();
    let bound = a.sup_norm() * 0.25f64.powf(1.0 - p.alpha3);
    assert!(r.value > 0.0 && r.value <= bound * (1.0 + 1e-9), "{} vs {bound}", r.value);
    assert!(matches!(r.witness, Witness::Segment { t: Some(_), .. }));
    let grid3 = TorusGrid::new(3, 8).unwrap();
    let b = sample_gff(1, grid3, GroupKind::SU2);
    let r3 = heatgr_norm(&b, &NormParams { segments: 8, ..p }).unwrap();
    assert!(r3.value.is_finite() && r3.value > 0.0);
}

#[test]
fn theta_metric_properties() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let p = params();
    let (a, b) = (sample_gff(4, grid, GroupKind::SU2), smooth_su2(grid));
    assert_eq!(theta_metric(&a, &a, &p).unwrap().value, 0.0);
    let (ab, ba) = (theta_metric(&a, &b, &p).unwrap().value, theta_metric(&b, &a, &p).unwrap().value);
    assert!((ab - ba).abs() < 1e-12 * ab);
    // Θ(cA, 0) = c|A|_{C^η} + c²·(product term).
    let zero = GaugeField::zeros(grid, GroupKind::SU2);
    let lin = holder_besov_norm(&b, p.eta, &p).unwrap().value;
    let quad = theta_metric(&b, &zero, &p).unwrap().value - lin;
    let quad2 = theta_metric(&b.scaled(2.0), &zero, &p).unwrap().value - 2.0 * lin;
    assert!(quad > 0.0 && (quad2 - 4.0 * quad).abs() < 1e-9 * quad2, "{quad} {quad2}");
    assert!(theta_metric(&a, &u1(grid, |_, _| 0.0), &p).is_err());
}

#[test]
fn budgets_only_add_samples() {
    let grid = TorusGrid::new(2, 32).unwrap();
    let a = sample_gff(7, grid, GroupKind::SU2);
    let p = params();
    let (n1, n2) = (norm_alpha(&a, &p).unwrap(), norm_alpha(&a, &p.doubled()).unwrap());
    assert!(n2.value >= n1.value);
    let bad = NormParams { alpha: 0.5, ..p };
    assert!(norm_gr_alpha(&a, &bad).is_err());
}

#[test]
fn loop_observable_is_gauge_invariant() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let a = u1(grid, |i, x| 0.4 + (2.0 * PI * x[1]).sin() + if i == 0 { 7.0 } else { 0.0 });
    let want = Complex64::from_polar(1.0, 7.4);
    assert!((abelian_loop_observable(&a).unwrap() - want).norm() < 1e-12);
    let (rep, _) = abelian_representative(&a).unwrap();
    assert!((abelian_loop_observable(&rep).unwrap() - want).norm() < 1e-12);
    let g = GroupField::from_exp_fn(grid, GroupKind::U1, |x| {
        Mat::scalar(1, Complex64::new(0.0, 2.0 * PI * x[0] + 0.5 * (2.0 * PI * x[1]).cos()))
    });
    let ag = gauge_transform(&a, &g).unwrap();
    assert!((abelian_loop_observable(&ag).unwrap() - want).norm() < 1e-12);
    assert!(abelian_loop_observable(&smooth_su2(grid)).is_err());
}
