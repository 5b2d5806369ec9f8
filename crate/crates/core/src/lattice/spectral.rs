//! Discrete Fourier transforms on the torus and spectral multipliers.
//!
//! Forward transforms are unnormalised, inverse transforms divide by `n^d`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{MatField, TorusGrid};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        })
        .clone()
}

/// In-place `d`-dimensional FFT of a scalar lattice array.
pub fn fft(grid: TorusGrid, data: &mut [Complex64], inverse: bool) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
    fft_with_scratch(grid, data, &mut scratch, inverse);
}

/// As [`fft`], reusing a caller-provided scratch buffer of the same length.
pub fn fft_with_scratch(grid: TorusGrid, data: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let sites = grid.sites();
    debug_assert_eq!(data.len(), sites);
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    for axis in 0..grid.d() {
        let s = grid.stride(axis);
        if s == 1 {
            plan.process(data);
            continue;
        }
        let block = n * s;
        let mut line = 0;
        for outer in (0..sites).step_by(block) {
            for inner in 0..s {
                let base = outer + inner;
                let dst = &mut scratch[line * n..(line + 1) * n];
                for (j, v) in dst.iter_mut().enumerate() {
                    *v = data[base + j * s];
                }
                line += 1;
            }
        }
        plan.process(scratch);
        line = 0;
        for outer in (0..sites).step_by(block) {
            for inner in 0..s {
                let base = outer + inner;
                let src = &scratch[line * n..(line + 1) * n];
                for (j, v) in src.iter().enumerate() {
                    data[base + j * s] = *v;
                }
                line += 1;
            }
        }
    }
    if inverse {
        let f = 1.0 / sites as f64;
        data.iter_mut().for_each(|v| *v *= f);
    }
}

/// Discrete Laplacian symbol `μ_k = (2/h²) Σ_j (1 − cos(2π k_j h)) ≥ 0` per
/// DFT index, so the stencil Laplacian acts as `−μ_k`.
pub fn laplacian_symbol(grid: TorusGrid) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<TorusGrid, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard
        .entry(grid)
        .or_insert_with(|| {
            let n = grid.n();
            let h = grid.h();
            let one_d: Vec<f64> = (0..n)
                .map(|k| 2.0 / (h * h) * (1.0 - (2.0 * std::f64::consts::PI * k as f64 * h).cos()))
                .collect();
            Arc::new(
                (0..grid.sites())
                    .map(|idx| {
                        let c = grid.coords(idx);
                        (0..grid.d()).map(|ax| one_d[c[ax]]).sum()
                    })
                    .collect(),
            )
        })
        .clone()
}

/// Euclidean wave vector `2π k` (signed) of a DFT index.
pub fn wave_vector(grid: TorusGrid, idx: usize) -> [f64; 3] {
    let c = grid.coords(idx);
    let mut k = [0.0; 3];
    for ax in 0..grid.d() {
        k[ax] = 2.0 * std::f64::consts::PI * grid.wave_number(c[ax]) as f64;
    }
    k
}

/// Index of the mode `−k`.
pub fn negated_index(grid: TorusGrid, idx: usize) -> usize {
    let n = grid.n();
    let c = grid.coords(idx);
    let mut m = [0; 3];
    for ax in 0..grid.d() {
        m[ax] = (n - c[ax]) % n;
    }
    grid.index(m)
}

/// Entries processed by spectral operations: the upper triangle for
/// anti-Hermitian fields (the lower one is recovered from it), everything
/// otherwise.
fn entry_plan(n: usize, anti_hermitian: bool) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !anti_hermitian || i <= j {
                v.push((i, j));
            }
        }
    }
    v
}

fn gather(field: &MatField, e: usize, buf: &mut [Complex64]) {
    let k = field.mat_dim() * field.mat_dim();
    for (s, v) in buf.iter_mut().enumerate() {
        *v = field.data()[s * k + e];
    }
}

fn scatter(field: &mut MatField, e: usize, buf: &[Complex64]) {
    let k = field.mat_dim() * field.mat_dim();
    let data = field.data_mut();
    for (s, v) in buf.iter().enumerate() {
        data[s * k + e] = *v;
    }
}

fn complete_anti_hermitian(field: &mut MatField) {
    let n = field.mat_dim();
    let k = n * n;
    for chunk in field.data_mut().chunks_mut(k) {
        for i in 0..n {
            chunk[i * n + i].re = 0.0;
            for j in i + 1..n {
                chunk[j * n + i] = -chunk[i * n + j].conj();
            }
        }
    }
}

/// Applies a real Fourier multiplier `m(k)` to every matrix entry.
///
/// With `anti_hermitian` set, the multiplier must be even in `k`; only the
/// upper triangle is transformed and the result is exactly anti-Hermitian.
pub fn apply_multiplier(field: &mut MatField, mult: &[f64], anti_hermitian: bool) {
    let grid = field.grid();
    let sites = grid.sites();
    let mut buf = vec![Complex64::new(0.0, 0.0); sites];
    let mut scratch = buf.clone();
    let n = field.mat_dim();
    for (i, j) in entry_plan(n, anti_hermitian) {
        let e = i * n + j;
        gather(field, e, &mut buf);
        fft_with_scratch(grid, &mut buf, &mut scratch, false);
        for (v, m) in buf.iter_mut().zip(mult) {
            *v *= *m;
        }
        fft_with_scratch(grid, &mut buf, &mut scratch, true);
        scatter(field, e, &buf);
    }
    if anti_hermitian {
        complete_anti_hermitian(field);
    }
}

/// `Σ_i FFT^{-1}[m_i · FFT(f_i)]` for fields of equal shape, with one inverse
/// transform per entry. The anti-Hermitian flag behaves as in
/// [`apply_multiplier`].
pub fn combine_multipliers(inputs: &[(&MatField, &[f64])], anti_hermitian: bool) -> MatField {
    let first = inputs.first().expect("at least one input").0;
    let grid = first.grid();
    let n = first.mat_dim();
    let sites = grid.sites();
    let mut out = MatField::zeros(grid, n);
    let mut acc = vec![Complex64::new(0.0, 0.0); sites];
    let mut buf = acc.clone();
    let mut scratch = acc.clone();
    for (i, j) in entry_plan(n, anti_hermitian) {
        let e = i * n + j;
        acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (f, m) in inputs {
            gather(f, e, &mut buf);
            fft_with_scratch(grid, &mut buf, &mut scratch, false);
            for ((a, b), mk) in acc.iter_mut().zip(&buf).zip(m.iter()) {
                *a += b * mk;
            }
        }
        fft_with_scratch(grid, &mut acc, &mut scratch, true);
        scatter(&mut out, e, &acc);
    }
    if anti_hermitian {
        complete_anti_hermitian(&mut out);
    }
    out
}

/// Per-entry DFTs of a matrix field, kept for repeated multiplier application.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    n: usize,
    anti_hermitian: bool,
    entries: Vec<(usize, Vec<Complex64>)>,
}

impl SpectralField {
    /// Transforms every (relevant) entry of `field`.
    pub fn new(field: &MatField, anti_hermitian: bool) -> Self {
        let grid = field.grid();
        let n = field.mat_dim();
        let mut scratch = vec![Complex64::new(0.0, 0.0); grid.sites()];
        let entries = entry_plan(n, anti_hermitian)
            .into_iter()
            .map(|(i, j)| {
                let e = i * n + j;
                let mut buf = vec![Complex64::new(0.0, 0.0); grid.sites()];
                gather(field, e, &mut buf);
                fft_with_scratch(grid, &mut buf, &mut scratch, false);
                (e, buf)
            })
            .collect();
        SpectralField { grid, n, anti_hermitian, entries }
    }

    /// Grid.
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Transformed entry arrays `(entry index, DFT)`.
    pub fn entries(&self) -> &[(usize, Vec<Complex64>)] {
        &self.entries
    }

    /// Inverse transform after multiplying by `mult`.
    pub fn synthesize(&self, mult: &[f64]) -> MatField {
        let mut out = MatField::zeros(self.grid, self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.sites()];
        let mut scratch = buf.clone();
        for (e, spec) in &self.entries {
            for ((b, s), m) in buf.iter_mut().zip(spec).zip(mult) {
                *b = s * m;
            }
            fft_with_scratch(self.grid, &mut buf, &mut scratch, true);
            scatter(&mut out, *e, &buf);
        }
        if self.anti_hermitian {
            complete_anti_hermitian(&mut out);
        }
        out
    }
}

/// Heat multiplier `e^{−tμ_k}`.
pub fn heat_multiplier(grid: TorusGrid, t: f64) -> Vec<f64> {
    laplacian_symbol(grid).iter().map(|mu| (-t * mu).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip_3d() {
        let grid = TorusGrid::new(3, 8).unwrap();
        let orig: Vec<Complex64> =
            (0..grid.sites()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos())).collect();
        let mut d = orig.clone();
        fft(grid, &mut d, false);
        fft(grid, &mut d, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn fft_of_plane_wave_is_delta() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let mut d: Vec<Complex64> = (0..grid.sites())
            .map(|i| {
                let x = grid.point(i);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (3.0 * x[0] - 2.0 * x[1]))
            })
            .collect();
        fft(grid, &mut d, false);
        let peak = grid.index([3, 14, 0]);
        for (i, v) in d.iter().enumerate() {
            let expect = if i == peak { grid.sites() as f64 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-9 && v.im.abs() < 1e-9);
        }
    }

    #[test]
    fn symbol_has_zero_mode_and_nyquist() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let mu = laplacian_symbol(grid);
        assert_eq!(mu[0], 0.0);
        let h = grid.h();
        let nyq = grid.index([4, 4, 0]);
        assert!((mu[nyq] - 8.0 / (h * h)).abs() < 1e-9);
        let idx = grid.index([3, 5, 0]);
        assert_eq!(negated_index(grid, idx), grid.index([5, 3, 0]));
    }
}
