//! Space-time white noise on the lattice from counter-based random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::lattice::{GaugeField, MatField, TorusGrid};
use crate::lie::GroupKind;

/// Algebra coordinates of a 1-form: one `[site][a]` array per component.
pub type CoordField = Vec<Vec<f64>>;

/// Random stream for time bin `bin` of the given seed.
///
/// Each bin has its own ChaCha stream, so any bin can be generated
/// independently and deterministically.
pub fn stream_rng(seed: u64, bin: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(bin as u64);
    rng
}

/// Lazily generated white noise `ξ` on a time grid of step `dt`.
///
/// Values are drawn on a base lattice of `base_n ≥ n` points per side and
/// block-averaged onto the target grid, so runs at different resolutions
/// sharing a seed and base resolution see the same continuum noise.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    seed: u64,
    grid: TorusGrid,
    base: TorusGrid,
    group: GroupKind,
    dt: f64,
}

impl NoiseStream {
    /// Noise generated directly on `grid`.
    pub fn new(seed: u64, grid: TorusGrid, group: GroupKind, dt: f64) -> Result<Self> {
        Self::with_base(seed, grid, grid.n(), group, dt)
    }

    /// Noise generated on a finer base grid and averaged onto `grid`.
    pub fn with_base(seed: u64, grid: TorusGrid, base_n: usize, group: GroupKind, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid(format!("noise time step must be positive, got {dt}")));
        }
        if base_n < grid.n() || base_n % grid.n() != 0 {
            return Err(invalid(format!("noise base resolution {base_n} must be a multiple of n = {}", grid.n())));
        }
        let base = TorusGrid::new(grid.d(), base_n)?;
        Ok(NoiseStream { seed, grid, base, group, dt })
    }

    /// Target grid.
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Structure group.
    pub fn group(&self) -> GroupKind {
        self.group
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `ξ` on time bin `bin`: per-coefficient variance `1/(dt·h^d)`.
    pub fn coords(&self, bin: i64) -> CoordField {
        let dim = self.group.algebra_dim();
        let d = self.grid.d();
        let mut rng = stream_rng(self.seed, bin);
        let sd = 1.0 / (self.dt * self.base.cell_volume()).sqrt();
        let base_sites = self.base.sites();
        let raw: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..base_sites * dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        if self.base == self.grid {
            return raw;
        }
        let r = self.base.n() / self.grid.n();
        let norm = 1.0 / (r.pow(d as u32)) as f64;
        raw.into_iter()
            .map(|comp| {
                let mut out = vec![0.0; self.grid.sites() * dim];
                for bs in 0..base_sites {
                    let c = self.base.coords(bs);
                    let ts = self.grid.index([c[0] / r, c[1] / r, c[2] / r]);
                    for a in 0..dim {
                        out[ts * dim + a] += comp[bs * dim + a] * norm;
                    }
                }
                out
            })
            .collect()
    }

    /// `ξ` on time bin `bin` as a gauge field.
    pub fn field(&self, bin: i64) -> GaugeField {
        coords_to_field(self.grid, self.group, &self.coords(bin))
    }
}

/// Converts per-component coordinate arrays into a gauge field.
pub fn coords_to_field(grid: TorusGrid, group: GroupKind, c: &CoordField) -> GaugeField {
    let alg = group.algebra();
    let dim = alg.dim();
    let n = group.matrix_dim();
    let comps = c
        .iter()
        .map(|arr| {
            let mut f = MatField::zeros(grid, n);
            for s in 0..grid.sites() {
                f.set(s, &alg.from_coords(&arr[s * dim..(s + 1) * dim]));
            }
            f
        })
        .collect();
    GaugeField::from_components_unchecked(group, comps).expect("shapes agree by construction")
}

/// Materialised white noise over a fixed number of steps.
#[derive(Clone, Debug)]
pub struct WhiteNoise {
    /// Seed.
    pub seed: u64,
    /// Grid.
    pub grid: TorusGrid,
    /// Time step.
    pub dt: f64,
    /// `ξ` per step, one gauge field each.
    pub increments: Vec<GaugeField>,
}

/// Samples `steps` white-noise slices. Step `k` equals `NoiseStream::field(k)`.
pub fn sample_white_noise(seed: u64, grid: TorusGrid, group: GroupKind, dt: f64, steps: usize) -> Result<WhiteNoise> {
    let s = NoiseStream::new(seed, grid, group, dt)?;
    Ok(WhiteNoise { seed, grid, dt, increments: (0..steps as i64).map(|k| s.field(k)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_average_preserves_variance_scale() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let fine = NoiseStream::with_base(3, grid, 32, GroupKind::U1, 0.5).unwrap();
        let v: Vec<f64> = (0..40).flat_map(|b| fine.coords(b).remove(0)).collect();
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        let expect = 1.0 / (0.5 * grid.cell_volume());
        assert!((var / expect - 1.0).abs() < 0.06, "{var} vs {expect}");
    }

    #[test]
    fn rejects_incompatible_base() {
        let grid = TorusGrid::new(2, 12).unwrap();
        assert!(NoiseStream::with_base(0, grid, 16, GroupKind::U1, 0.1).is_err());
        assert!(NoiseStream::new(0, grid, GroupKind::U1, 0.0).is_err());
    }
}
