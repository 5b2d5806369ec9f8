use std::f64::consts::PI;

use num_complex::Complex64;
use symlab_core::dynamics::{
    run_generative, sample_gff, solve_bar_a, solve_coupled_ag, solve_coupled_bg, solve_det_ym_flow, solve_she_exact,
    solve_sym, step_sym, AbelianZeroMode, CountertermSource, GenerativeConfig, NoiseKind, NoiseSample, SimConfig,
    Status, TriggerNorm,
};
use symlab_core::gauge::gauge_transform;
use symlab_core::lattice::{ym_energy, GaugeField, GroupField, TorusGrid};
use symlab_core::lie::{AlgebraMap, GroupKind, Mat};
use symlab_core::noise::MollifierProfile;

fn smooth_su2(grid: TorusGrid, amp: f64) -> GaugeField {
    let alg = GroupKind::SU2.algebra();
    GaugeField::from_fn(grid, GroupKind::SU2, |i, x| {
        let t = 2.0 * PI;
        alg.from_coords(&[
            amp * (t * x[0]).sin() + 0.3 * amp * i as f64,
            amp * (t * x[1] + 0.4).cos(),
            amp * (t * (x[0] + x[1])).sin() * 0.5,
        ])
    })
}

fn smooth_gauge(grid: TorusGrid) -> GroupField {
    let alg = GroupKind::SU2.algebra();
    GroupField::from_exp_fn(grid, GroupKind::SU2, |x| {
        let t = 2.0 * PI;
        alg.from_coords(&[0.4 * (t * x[0]).cos(), 0.3 * (t * x[1]).sin(), 0.2 * (t * (x[0] - x[1])).cos()])
    })
}

fn u1_field(grid: TorusGrid, f: impl Fn(usize, [f64; 3]) -> f64) -> GaugeField {
    GaugeField::from_fn(grid, GroupKind::U1, |i, x| Mat::scalar(1, Complex64::new(0.0, f(i, x))))
}

/// `Â(k) = h^d Σ_x a(x) e^{-2πi k·x}` for the first coordinate of component `i`.
fn fourier_coeff(a: &GaugeField, i: usize, k: [i64; 2]) -> Complex64 {
    let grid = a.grid();
    let c = a.coords(i);
    let dim = a.group().algebra_dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..grid.sites() {
        let x = grid.point(s);
        let ph = -2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
        acc += Complex64::from_polar(c[s * dim], ph);
    }
    acc * grid.cell_volume()
}

fn symbol(grid: TorusGrid, k: [i64; 2]) -> f64 {
    let h = grid.h();
    k.iter().map(|&kj| 2.0 / (h * h) * (1.0 - (2.0 * PI * kj as f64 * h).cos())).sum()
}

fn white_cfg(grid: TorusGrid, group: GroupKind, horizon: f64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(grid, group, 0.25 * grid.h() * grid.h());
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.counterterm = CountertermSource::User(AlgebraMap::zero(group.algebra_dim()));
    cfg
}

#[test]
fn solver_is_deterministic() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let cfg = white_cfg(grid, GroupKind::SU2, 0.01, 7);
    let a0 = smooth_su2(grid, 0.5);
    let r1 = solve_sym(&cfg, &a0).unwrap();
    let r2 = solve_sym(&cfg, &a0).unwrap();
    assert_eq!(r1.times, r2.times);
    assert_eq!(r1.states, r2.states);
    let mut other = cfg.clone();
    other.seed = 8;
    assert_ne!(solve_sym(&other, &a0).unwrap().last(), r1.last());
}

#[test]
fn states_stay_in_the_algebra() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let mut cfg = white_cfg(grid, GroupKind::SU2, 0.02, 3);
    cfg.sample_every = 10;
    let traj = solve_sym(&cfg, &smooth_su2(grid, 0.8)).unwrap();
    for s in &traj.states {
        assert!(s.anti_hermitian_defect() < 1e-10 * cfg.steps() as f64);
    }
}

#[test]
fn abelian_zero_mode_is_brownian() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let t = 0.25;
    let samples: Vec<f64> = (0..400)
        .map(|seed| {
            let cfg = white_cfg(grid, GroupKind::U1, t, seed);
            let traj = solve_sym(&cfg, &GaugeField::zeros(grid, GroupKind::U1)).unwrap();
            traj.last().unwrap().zero_modes()[0].get(0, 0).im
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = t * (2.0 / (n - 1.0)).sqrt();
    assert!((var - t).abs() < 4.0 * se, "variance {var} vs {t}");
    assert!(mean.abs() < 4.0 * (t / n).sqrt());
}

#[test]
fn abelian_mass_gives_exponential_zero_mode() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let c = -1.5;
    let mut cfg = white_cfg(grid, GroupKind::U1, 0.5, 0);
    cfg.noise = NoiseKind::None;
    cfg.bare_mass = AlgebraMap::scalar(1, c);
    let a0 = u1_field(grid, |i, x| 0.7 + i as f64 + 0.2 * (2.0 * PI * x[1]).sin());
    let traj = solve_sym(&cfg, &a0).unwrap();
    let t = *traj.times.last().unwrap();
    for i in 0..2 {
        let m = traj.last().unwrap().zero_modes()[i].get(0, 0).im;
        let want = (0.7 + i as f64) * (c * t).exp();
        assert!((m - want).abs() < 1e-12, "{m} vs {want}");
    }
}

#[test]
fn abelian_flow_is_affine_in_initial_data() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let cfg = white_cfg(grid, GroupKind::U1, 0.05, 11);
    let a = u1_field(grid, |i, x| (2.0 * PI * x[i]).sin());
    let b = u1_field(grid, |_, x| 0.5 * (4.0 * PI * (x[0] + x[1])).cos());
    let ra = solve_sym(&cfg, &a).unwrap();
    let rb = solve_sym(&cfg, &b).unwrap();
    for (t, (sa, sb)) in ra.times.iter().zip(ra.states.iter().zip(&rb.states)) {
        let want = a.sub(&b).heat(*t).unwrap();
        assert!(sa.sub(sb).sub(&want).sup_norm() < 1e-10);
    }
}

#[test]
fn step_is_zero_at_the_fixed_point_and_flags_blow_up() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let zero = GaugeField::zeros(grid, GroupKind::SU2);
    let c = AlgebraMap::zero(3);
    let next = step_sym(&zero, &NoiseSample::None, &c, 1e-3, 1e4).unwrap();
    assert_eq!(next.sup_norm(), 0.0);
    let big = smooth_su2(grid, 10.0);
    assert!(matches!(step_sym(&big, &NoiseSample::None, &c, 1e-3, 1.0), Err(symlab_core::Error::Numerical { .. })));
}

#[test]
fn cemetery_is_absorbing() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let mut cfg = white_cfg(grid, GroupKind::U1, 1.0, 1);
    cfg.r_max = 0.5;
    let traj = solve_sym(&cfg, &GaugeField::zeros(grid, GroupKind::U1)).unwrap();
    let Status::Cemetery { time, .. } = traj.status else { panic!("expected blow-up, got {:?}", traj.status) };
    assert!(traj.times.iter().all(|&t| t < time));
    assert!(traj.states.iter().all(|s| s.sup_norm() <= 0.5));
}

#[test]
fn exact_sampler_relaxes_to_the_free_field() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let k = [1, 2];
    let want = 0.5 / symbol(grid, k);
    let mut cfg = SimConfig::new(grid, GroupKind::U1, 0.01);
    cfg.horizon = 0.3;
    cfg.sample_every = 30;
    let m = 600;
    let (mut she, mut gff) = (0.0, 0.0);
    for seed in 0..m {
        cfg.seed = seed;
        let traj = solve_she_exact(&cfg, &GaugeField::zeros(grid, GroupKind::U1)).unwrap();
        she += fourier_coeff(traj.last().unwrap(), 0, k).norm_sqr();
        gff += fourier_coeff(&sample_gff(seed, grid, GroupKind::U1), 1, k).norm_sqr();
    }
    let (she, gff) = (she / m as f64, gff / m as f64);
    // |Â|² is exponential with mean `want`, so the standard error is want/√m.
    let se = want / (m as f64).sqrt();
    assert!((she - want).abs() < 4.0 * se, "exact sampler {she} vs {want}");
    assert!((gff - want).abs() < 4.0 * se, "free field {gff} vs {want}");
}

#[test]
fn gff_has_no_zero_mode() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let a = sample_gff(5, grid, GroupKind::SU2);
    for z in a.zero_modes() {
        assert!(z.norm() < 1e-12);
    }
    assert_eq!(a, sample_gff(5, grid, GroupKind::SU2));
}

#[test]
fn trivial_gauge_reduces_coupled_system_to_the_flow() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let cfg = white_cfg(grid, GroupKind::SU2, 0.01, 4);
    let a0 = smooth_su2(grid, 0.5);
    let id = GroupField::identity(grid, GroupKind::SU2);
    let sym = solve_sym(&cfg, &a0).unwrap();
    let bg = solve_coupled_bg(&cfg, &a0, &id).unwrap();
    assert_eq!(bg.trajectory.times, sym.times);
    for (b, a) in bg.trajectory.states.iter().zip(&sym.states) {
        assert!(b.sub(a).sup_norm() < 1e-12);
    }
    for g in &bg.gauge {
        assert!(g.values().sub_identity_norm() < 1e-12);
    }
}

trait IdentityDistance {
    fn sub_identity_norm(&self) -> f64;
}

impl IdentityDistance for symlab_core::lattice::MatField {
    fn sub_identity_norm(&self) -> f64 {
        (0..self.grid().sites())
            .map(|s| (self.get(s) - Mat::identity(self.mat_dim())).max_abs())
            .fold(0.0, f64::max)
    }
}

#[test]
fn trivial_gauge_reduces_bar_a_to_the_flow() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let mut cfg = white_cfg(grid, GroupKind::SU2, 0.01, 9);
    cfg.noise = NoiseKind::Mollified { eps: 0.25, profile: MollifierProfile::causal() };
    let a0 = smooth_su2(grid, 0.5);
    let id = GroupField::identity(grid, GroupKind::SU2);
    let sym = solve_sym(&cfg, &a0).unwrap();
    let bar = solve_bar_a(&cfg, &a0, &id).unwrap();
    for (b, a) in bar.trajectory.states.iter().zip(&sym.states) {
        assert!(b.sub(a).sup_norm() < 1e-12);
    }
    cfg.noise = NoiseKind::Mollified { eps: 0.25, profile: MollifierProfile::symmetric() };
    assert!(solve_bar_a(&cfg, &a0, &id).is_err());
}

fn covariance_residual(n: usize) -> (f64, f64) {
    let grid = TorusGrid::new(2, n).unwrap();
    let mut cfg = white_cfg(grid, GroupKind::SU2, 0.01, 21);
    cfg.noise = NoiseKind::Mollified { eps: 0.125, profile: MollifierProfile::causal() };
    cfg.noise_base_n = Some(32);
    cfg.sample_every = 8;
    let a0 = smooth_su2(grid, 0.5);
    let g0 = smooth_gauge(grid);
    let b0 = gauge_transform(&a0, &g0).unwrap();
    let sym = solve_sym(&cfg, &a0).unwrap();
    let bg = solve_coupled_bg(&cfg, &b0, &g0).unwrap();
    let ag = solve_coupled_ag(&cfg, &a0, &g0).unwrap();
    assert_eq!(bg.trajectory.status, Status::Horizon);
    let mut res: f64 = 0.0;
    let mut conv: f64 = 0.0;
    for k in 0..sym.states.len() {
        let ag_b = gauge_transform(&ag.trajectory.states[k], &ag.gauge[k]).unwrap();
        let sym_b = gauge_transform(&sym.states[k], &bg.gauge[k]).unwrap();
        res = res.max(sym_b.sub(&bg.trajectory.states[k]).sup_norm());
        conv = conv.max(ag_b.sub(&bg.trajectory.states[k]).sup_norm());
    }
    (res, conv)
}

#[test]
fn coupled_system_tracks_the_gauge_transformed_flow() {
    let (r16, c16) = covariance_residual(16);
    let (r32, c32) = covariance_residual(32);
    assert!(r32 < 0.4 * r16, "residual {r16} -> {r32}");
    assert!(c32 < 0.4 * c16, "convention gap {c16} -> {c32}");
    assert!(r32 < 0.05);
}

#[test]
fn abelian_coupled_field_differs_by_a_heat_flowed_exact_form() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let cfg = white_cfg(grid, GroupKind::U1, 0.02, 2);
    let a0 = u1_field(grid, |i, x| 0.3 * (2.0 * PI * x[1 - i]).cos());
    let g0 = GroupField::from_exp_fn(grid, GroupKind::U1, |x| {
        Mat::scalar(1, Complex64::new(0.0, 0.5 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos()))
    });
    let b0 = gauge_transform(&a0, &g0).unwrap();
    let sym = solve_sym(&cfg, &a0).unwrap();
    let bg = solve_coupled_bg(&cfg, &b0, &g0).unwrap();
    let d_omega = b0.sub(&a0);
    for (k, t) in sym.times.iter().enumerate() {
        let diff = bg.trajectory.states[k].sub(&sym.states[k]);
        assert!(diff.sub(&d_omega.heat(*t).unwrap()).sup_norm() < 1e-9, "t = {t}");
    }
}

#[test]
fn deterministic_flow_basics() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let cfg = white_cfg(grid, GroupKind::SU2, 0.0, 0);
    let a = smooth_su2(grid, 0.8);
    assert_eq!(solve_det_ym_flow(&cfg, &a, 0.0).unwrap(), a);
    let mut last = ym_energy(&a);
    for k in 1..=8 {
        let e = ym_energy(&solve_det_ym_flow(&cfg, &a, 0.005 * k as f64).unwrap());
        assert!(e <= last + 1e-12, "energy increased: {last} -> {e}");
        last = e;
    }
    let ucfg = white_cfg(grid, GroupKind::U1, 0.0, 0);
    let u = u1_field(grid, |i, x| (2.0 * PI * (x[0] + 2.0 * x[1])).sin() + i as f64);
    let flowed = solve_det_ym_flow(&ucfg, &u, 0.013).unwrap();
    assert!(flowed.sub(&u.heat(0.013).unwrap()).sup_norm() < 1e-10);
    assert!(solve_det_ym_flow(&cfg, &a, -1.0).is_err());
}

#[test]
fn generative_restart_reduces_the_zero_mode() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let mut cfg = white_cfg(grid, GroupKind::U1, 0.05, 3);
    cfg.noise = NoiseKind::None;
    let a0 = u1_field(grid, |i, x| if i == 0 { 10.0 * PI + 0.3 * (2.0 * PI * x[1]).sin() } else { 0.1 });
    for gen in [GenerativeConfig::default(), GenerativeConfig { norm: TriggerNorm::ZeroMode, slack: 0.0 }] {
        let traj = run_generative(&cfg, &a0, &AbelianZeroMode, &gen).unwrap();
        let jump = &traj.jumps[0];
        for z in jump.post.zero_modes() {
            let c = z.get(0, 0).im;
            assert!((-PI..PI).contains(&c), "zero mode {c}");
        }
        let shift = jump.pre.sub(&jump.post);
        let z = shift.zero_modes();
        let constant = GaugeField::from_fn(grid, GroupKind::U1, |i, _| z[i]);
        assert!(shift.sub(&constant).sup_norm() < 1e-12);
        assert!((z[0].get(0, 0).im - 10.0 * PI).abs() < 1e-9);
        assert_eq!(traj.jumps.len(), 1);
        assert_eq!(traj.status, Status::Horizon);
    }
}
