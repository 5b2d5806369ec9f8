//! Exact-in-law sampling of the stochastic heat equation and its invariant
//! Gaussian free field.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lattice::spectral::{fft_with_scratch, laplacian_symbol};
use crate::lattice::{GaugeField, TorusGrid};
use crate::lie::GroupKind;
use crate::noise::{coords_to_field, stream_rng, CoordField, NoiseStream};

use super::config::{NoiseKind, SimConfig};
use super::{Status, Trajectory};

/// Real coordinate channels packed pairwise into complex arrays.
struct Packed {
    grid: TorusGrid,
    d: usize,
    dim: usize,
    pairs: Vec<Vec<Complex64>>,
}

impl Packed {
    fn channels(d: usize, dim: usize) -> usize {
        d * dim
    }

    fn from_coords(grid: TorusGrid, dim: usize, c: &CoordField) -> Self {
        let d = c.len();
        let sites = grid.sites();
        let total = Self::channels(d, dim);
        let get = |ch: usize, s: usize| if ch < total { c[ch / dim][s * dim + ch % dim] } else { 0.0 };
        let pairs = (0..total.div_ceil(2))
            .map(|p| (0..sites).map(|s| Complex64::new(get(2 * p, s), get(2 * p + 1, s))).collect())
            .collect();
        Packed { grid, d, dim, pairs }
    }

    fn to_coords(&self) -> CoordField {
        let sites = self.grid.sites();
        let total = Self::channels(self.d, self.dim);
        let mut out = vec![vec![0.0; sites * self.dim]; self.d];
        for (p, arr) in self.pairs.iter().enumerate() {
            for (half, ch) in [2 * p, 2 * p + 1].into_iter().enumerate() {
                if ch >= total {
                    continue;
                }
                let (i, a) = (ch / self.dim, ch % self.dim);
                for s in 0..sites {
                    out[i][s * self.dim + a] = if half == 0 { arr[s].re } else { arr[s].im };
                }
            }
        }
        out
    }

    fn transform(&mut self, inverse: bool) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.grid.sites()];
        for arr in &mut self.pairs {
            fft_with_scratch(self.grid, arr, &mut scratch, inverse);
        }
    }
}

fn field_coords(a: &GaugeField) -> CoordField {
    (0..a.grid().d()).map(|i| a.coords(i)).collect()
}

/// Exact sampler of `∂_t A = ΔA + ξ` started from `a0`, calling `observe`
/// every `sample_every` steps (and at time zero).
///
/// Each Fourier mode is an independent Ornstein–Uhlenbeck process advanced
/// with its exact transition law, so the step is not restricted by `h²`;
/// the zero mode receives plain Brownian increments. Brackets and masses are
/// ignored: the equation is linear for every `𝔤`.
pub fn solve_she_exact_with(cfg: &SimConfig, a0: &GaugeField, mut observe: impl FnMut(f64, &GaugeField)) -> Result<Status> {
    cfg.validate_basic()?;
    cfg.check_field(a0.grid(), a0.group())?;
    let grid = cfg.grid;
    let dim = cfg.group.algebra_dim();
    let dt = cfg.dt;
    let mu = laplacian_symbol(grid);
    let decay: Vec<f64> = mu.iter().map(|m| (-m * dt).exp()).collect();
    let ou: Vec<f64> = mu
        .iter()
        .map(|&m| {
            let x = m * dt;
            if x < 1e-12 {
                1.0
            } else {
                (-(-2.0 * x).exp_m1() / (2.0 * x)).sqrt()
            }
        })
        .collect();
    let base = cfg.noise_base_n.unwrap_or(grid.n());
    let stream = match cfg.noise {
        NoiseKind::None => None,
        _ => Some(NoiseStream::with_base(cfg.seed, grid, base, cfg.group, dt)?),
    };
    let mut state = Packed::from_coords(grid, dim, &field_coords(a0));
    state.transform(false);
    observe(0.0, a0);
    let total = cfg.steps();
    for k in 0..total {
        for arr in &mut state.pairs {
            for (v, m) in arr.iter_mut().zip(&decay) {
                *v *= *m;
            }
        }
        if let Some(stream) = &stream {
            let mut w = stream.coords(k as i64);
            w.iter_mut().flatten().for_each(|v| *v *= dt);
            let mut wp = Packed::from_coords(grid, dim, &w);
            wp.transform(false);
            for (arr, warr) in state.pairs.iter_mut().zip(&wp.pairs) {
                for ((v, x), m) in arr.iter_mut().zip(warr).zip(&ou) {
                    *v += x * m;
                }
            }
        }
        let step = k + 1;
        if step % cfg.sample_every as u64 == 0 || step == total {
            let mut snap = Packed { grid, d: state.d, dim, pairs: state.pairs.clone() };
            snap.transform(true);
            observe(step as f64 * dt, &coords_to_field(grid, cfg.group, &snap.to_coords()));
        }
    }
    Ok(Status::Horizon)
}

/// [`solve_she_exact_with`] collecting the samples into a trajectory.
pub fn solve_she_exact(cfg: &SimConfig, a0: &GaugeField) -> Result<Trajectory> {
    let mut traj = Trajectory::new();
    let status = solve_she_exact_with(cfg, a0, |t, a| traj.record(t, a))?;
    traj.status = status;
    Ok(traj)
}

/// Direct sample of the stationary law of the heat equation modulo zero
/// modes: independent Fourier modes of variance `1/(2μ_k)` per algebra
/// coefficient, zero mode set to zero.
pub fn sample_gff(seed: u64, grid: TorusGrid, group: GroupKind) -> GaugeField {
    let dim = group.algebra_dim();
    let mut rng = stream_rng(seed, i64::MIN);
    let sd = 1.0 / grid.cell_volume().sqrt();
    let c: CoordField = (0..grid.d())
        .map(|_| (0..grid.sites() * dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mu = laplacian_symbol(grid);
    let mult: Vec<f64> = mu.iter().map(|&m| if m > 0.0 { (0.5 / m).sqrt() } else { 0.0 }).collect();
    let mut p = Packed::from_coords(grid, dim, &c);
    p.transform(false);
    for arr in &mut p.pairs {
        for (v, m) in arr.iter_mut().zip(&mult) {
            *v *= *m;
        }
    }
    p.transform(true);
    coords_to_field(grid, group, &p.to_coords())
}
