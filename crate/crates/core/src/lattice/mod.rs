//! Periodic lattices, matrix-valued lattice fields and discrete calculus.

pub(crate) mod calculus;
mod io;
pub(crate) mod lines;
pub mod spectral;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lie::{with_size, Fixed, GroupKind, Mat, TOL_ALG};

pub use calculus::{curvature, heat_semigroup, laplacian, partial_derivative, ym_drift, ym_energy, Curvature};
pub use io::{read_field, write_field, FieldMetadata};
pub use lines::{line_integral, triangle_boundary_integral, LineSegment, Triangle};

/// Uniform grid on the unit torus `T^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
}

impl TorusGrid {
    /// `d ∈ {2, 3}`, `n ≥ 8` and even.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(invalid(format!("dimension d = {d} must be 2 or 3")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(invalid(format!("points per side n = {n} must be even and ≥ 8")));
        }
        Ok(TorusGrid { d, n })
    }

    /// Spatial dimension.
    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Points per side.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice spacing `1/n`.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Cell volume `h^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    /// Number of lattice sites `n^d`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Index stride of `axis` (row-major, last axis fastest).
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Integer coordinates of a site.
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        let mut r = idx;
        for ax in (0..self.d).rev() {
            c[ax] = r % self.n;
            r /= self.n;
        }
        c
    }

    /// Site index of integer coordinates (taken modulo `n`).
    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        (0..self.d).fold(0, |acc, ax| acc * self.n + c[ax] % self.n)
    }

    /// Physical position of a site in `[0,1)^d`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let h = self.h();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Neighbour at offset `+1` along `axis` with periodic wrap.
    #[inline]
    pub fn next(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let c = (idx / s) % self.n;
        if c + 1 == self.n {
            idx + s - self.n * s
        } else {
            idx + s
        }
    }

    /// Neighbour at offset `−1` along `axis` with periodic wrap.
    #[inline]
    pub fn prev(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let c = (idx / s) % self.n;
        if c == 0 {
            idx + self.n * s - s
        } else {
            idx - s
        }
    }

    /// Signed wave number of index `k ∈ [0, n)`.
    #[inline]
    pub fn wave_number(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }
}

/// A lattice array of `N × N` complex matrices, stored entry-contiguous per site.
#[derive(Clone, Debug, PartialEq)]
pub struct MatField {
    grid: TorusGrid,
    n: usize,
    data: Vec<Complex64>,
}

impl MatField {
    /// Zero field.
    pub fn zeros(grid: TorusGrid, n: usize) -> Self {
        MatField { grid, n, data: vec![Complex64::new(0.0, 0.0); grid.sites() * n * n] }
    }

    /// Field from a per-site function of the physical position.
    pub fn from_fn(grid: TorusGrid, n: usize, mut f: impl FnMut([f64; 3]) -> Mat) -> Self {
        let mut out = Self::zeros(grid, n);
        for s in 0..grid.sites() {
            out.set(s, &f(grid.point(s)));
        }
        out
    }

    /// Wraps raw storage.
    pub fn from_raw(grid: TorusGrid, n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.sites() * n * n {
            return Err(invalid("raw field length does not match grid and matrix size"));
        }
        Ok(MatField { grid, n, data })
    }

    /// Grid.
    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Matrix size.
    #[inline]
    pub fn mat_dim(&self) -> usize {
        self.n
    }

    /// Raw storage.
    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Mutable raw storage.
    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Matrix at a site.
    #[inline]
    pub fn get(&self, site: usize) -> Mat {
        let k = self.n * self.n;
        Mat::from_slice(self.n, &self.data[site * k..(site + 1) * k])
    }

    /// Overwrites the matrix at a site.
    #[inline]
    pub fn set(&mut self, site: usize, m: &Mat) {
        let k = self.n * self.n;
        m.write_to(&mut self.data[site * k..(site + 1) * k]);
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: f64, other: &MatField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// `s·self`.
    pub fn scaled(&self, s: f64) -> MatField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest Frobenius norm over sites.
    pub fn sup_norm(&self) -> f64 {
        let k = self.n * self.n;
        self.data
            .chunks(k)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Spatial average `h^d Σ_x f(x)`.
    pub fn mean(&self) -> Mat {
        let mut acc = Mat::zeros(self.n);
        for s in 0..self.grid.sites() {
            acc += self.get(s);
        }
        acc.scale(1.0 / self.grid.sites() as f64)
    }

    /// True when any entry is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}

/// Discrete `𝔤`-valued 1-form `(A_1, …, A_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    group: GroupKind,
    comps: Vec<MatField>,
}

impl GaugeField {
    /// The zero connection.
    pub fn zeros(grid: TorusGrid, group: GroupKind) -> Self {
        let n = group.matrix_dim();
        GaugeField { group, comps: (0..grid.d()).map(|_| MatField::zeros(grid, n)).collect() }
    }

    /// Builds from a function `(component, position) ↦ matrix`, projecting
    /// each value onto `𝔤`.
    pub fn from_fn(grid: TorusGrid, group: GroupKind, mut f: impl FnMut(usize, [f64; 3]) -> Mat) -> Self {
        let alg = group.algebra();
        let n = group.matrix_dim();
        let comps = (0..grid.d())
            .map(|i| MatField::from_fn(grid, n, |x| alg.project(&f(i, x))))
            .collect();
        GaugeField { group, comps }
    }

    /// Builds from algebra coordinates `(component, position) ↦ [c_a]`.
    pub fn from_coords_fn(grid: TorusGrid, group: GroupKind, mut f: impl FnMut(usize, [f64; 3]) -> Vec<f64>) -> Self {
        let alg = group.algebra();
        let n = group.matrix_dim();
        let comps = (0..grid.d()).map(|i| MatField::from_fn(grid, n, |x| alg.from_coords(&f(i, x)))).collect();
        GaugeField { group, comps }
    }

    /// Wraps components after validating anti-Hermiticity.
    pub fn from_components(group: GroupKind, comps: Vec<MatField>) -> Result<Self> {
        let g = Self::from_components_unchecked(group, comps)?;
        let defect = g.anti_hermitian_defect();
        if defect > TOL_ALG * (1.0 + g.sup_norm()) {
            return Err(invalid(format!("gauge field is not anti-Hermitian (defect {defect:.3e})")));
        }
        Ok(g)
    }

    pub(crate) fn from_components_unchecked(group: GroupKind, comps: Vec<MatField>) -> Result<Self> {
        let grid = comps.first().ok_or_else(|| invalid("gauge field needs components"))?.grid();
        if comps.len() != grid.d() || comps.iter().any(|c| c.grid() != grid || c.mat_dim() != group.matrix_dim()) {
            return Err(invalid("gauge field components do not match grid or group"));
        }
        Ok(GaugeField { group, comps })
    }

    /// Structure group.
    #[inline]
    pub fn group(&self) -> GroupKind {
        self.group
    }

    /// Grid.
    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.comps[0].grid()
    }

    /// Component `A_i` (0-based).
    #[inline]
    pub fn comp(&self, i: usize) -> &MatField {
        &self.comps[i]
    }

    /// Mutable component.
    #[inline]
    pub fn comp_mut(&mut self, i: usize) -> &mut MatField {
        &mut self.comps[i]
    }

    /// All components.
    pub fn comps(&self) -> &[MatField] {
        &self.comps
    }

    /// Largest `|A_i(x)|` over components and sites.
    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(MatField::sup_norm).fold(0.0, f64::max)
    }

    /// Largest `|A + A†|` entry.
    pub fn anti_hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for s in 0..c.grid().sites() {
                worst = worst.max(c.get(s).anti_hermitian_defect());
            }
        }
        worst
    }

    /// `self − other`.
    pub fn sub(&self, o: &GaugeField) -> GaugeField {
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&o.comps) {
            a.axpy(-1.0, b);
        }
        out
    }

    /// `self + other`.
    pub fn add(&self, o: &GaugeField) -> GaugeField {
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&o.comps) {
            a.axpy(1.0, b);
        }
        out
    }

    /// `s·self`.
    pub fn scaled(&self, s: f64) -> GaugeField {
        GaugeField { group: self.group, comps: self.comps.iter().map(|c| c.scaled(s)).collect() }
    }

    /// Spatial means `∫ A_i` (the zero modes).
    pub fn zero_modes(&self) -> Vec<Mat> {
        self.comps.iter().map(MatField::mean).collect()
    }

    /// Real algebra coordinates of component `i`, laid out `[site][a]`.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        let alg = self.group.algebra();
        let k = alg.dim();
        let c = &self.comps[i];
        let mut out = vec![0.0; c.grid().sites() * k];
        for s in 0..c.grid().sites() {
            alg.coords(&c.get(s), &mut out[s * k..(s + 1) * k]);
        }
        out
    }

    /// True when any entry is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.comps.iter().any(MatField::has_non_finite)
    }

    /// Re-imposes exact anti-Hermiticity (and tracelessness for `SU(N)`).
    pub fn reproject(&mut self) {
        let alg = self.group.algebra();
        for c in &mut self.comps {
            for s in 0..c.grid().sites() {
                let m = alg.project(&c.get(s));
                c.set(s, &m);
            }
        }
    }
}

/// Discrete gauge transformation `g: T^d → G`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupField {
    group: GroupKind,
    values: MatField,
}

impl GroupField {
    /// `g ≡ Id`.
    pub fn identity(grid: TorusGrid, group: GroupKind) -> Self {
        let n = group.matrix_dim();
        GroupField { group, values: MatField::from_fn(grid, n, |_| Mat::identity(n)) }
    }

    /// Builds `g(x) = exp(X(x))` from an algebra-valued function.
    pub fn from_exp_fn(grid: TorusGrid, group: GroupKind, mut f: impl FnMut([f64; 3]) -> Mat) -> Self {
        let alg = group.algebra();
        let n = group.matrix_dim();
        GroupField { group, values: MatField::from_fn(grid, n, |x| alg.project(&f(x)).exp()) }
    }

    /// Wraps values after validating unitarity.
    pub fn from_values(group: GroupKind, values: MatField) -> Result<Self> {
        if values.mat_dim() != group.matrix_dim() {
            return Err(invalid("group field matrix size does not match group"));
        }
        let g = GroupField { group, values };
        let d = g.unitary_defect();
        if d > TOL_ALG {
            return Err(invalid(format!("group field is not unitary (defect {d:.3e})")));
        }
        Ok(g)
    }

    /// Structure group.
    pub fn group(&self) -> GroupKind {
        self.group
    }

    /// Grid.
    pub fn grid(&self) -> TorusGrid {
        self.values.grid()
    }

    /// Value at a site.
    #[inline]
    pub fn get(&self, site: usize) -> Mat {
        self.values.get(site)
    }

    /// Underlying matrix field.
    pub fn values(&self) -> &MatField {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut MatField {
        &mut self.values
    }

    /// Largest `|g g† − Id|` entry.
    pub fn unitary_defect(&self) -> f64 {
        let d = self.values.data();
        with_size!(self.group.matrix_dim(), N => {
            (0..self.grid().sites()).map(|s| Fixed::<N>::at(d, s).unitary_defect()).fold(0.0, f64::max)
        })
    }

    /// Pointwise product `self·o`.
    pub fn mul(&self, o: &GroupField) -> GroupField {
        let mut v = self.values.clone();
        for s in 0..self.grid().sites() {
            v.set(s, &self.get(s).matmul(&o.get(s)));
        }
        GroupField { group: self.group, values: v }
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> GroupField {
        let mut v = self.values.clone();
        for s in 0..self.grid().sites() {
            v.set(s, &self.get(s).dagger());
        }
        GroupField { group: self.group, values: v }
    }

    /// Polar re-unitarisation of every value (and determinant fix for `SU(N)`).
    pub fn reunitarise(&mut self) {
        let n = self.group.matrix_dim();
        for s in 0..self.grid().sites() {
            let mut u = self.values.get(s).polar_unitary();
            if let GroupKind::SpecialUnitary(_) = self.group {
                let phase = u.det().arg() / n as f64;
                u = u.scale_c(Complex64::from_polar(1.0, -phase));
            }
            self.values.set(s, &u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(TorusGrid::new(2, 6).is_err());
        assert!(TorusGrid::new(2, 9).is_err());
        assert!(TorusGrid::new(4, 8).is_err());
        assert!(TorusGrid::new(3, 8).is_ok());
    }

    #[test]
    fn neighbours_wrap() {
        let g = TorusGrid::new(3, 8).unwrap();
        for idx in [0usize, 7, 63, 511, 200] {
            for ax in 0..3 {
                assert_eq!(g.prev(g.next(idx, ax), ax), idx);
                let mut c = g.coords(idx);
                c[ax] = (c[ax] + 1) % 8;
                assert_eq!(g.index(c), g.next(idx, ax));
            }
        }
    }

    #[test]
    fn wave_numbers_are_signed() {
        let g = TorusGrid::new(2, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|k| g.wave_number(k)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }
}
