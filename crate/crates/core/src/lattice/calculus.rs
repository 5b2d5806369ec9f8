//! Finite-difference calculus, curvature and the Yang–Mills drift.

use crate::error::{invalid, Result};
use crate::lie::{inner, with_size, Fixed};

use super::spectral::{apply_multiplier, heat_multiplier};
use super::{GaugeField, MatField};

/// Central difference `(f(x+he_j) − f(x−he_j))/(2h)` along a 0-based axis.
pub fn partial_derivative(f: &MatField, axis: usize) -> Result<MatField> {
    let grid = f.grid();
    if axis >= grid.d() {
        return Err(invalid(format!("axis {axis} out of range for d = {}", grid.d())));
    }
    Ok(central_diff(f, axis))
}

pub(crate) fn central_diff(f: &MatField, axis: usize) -> MatField {
    let grid = f.grid();
    let k = f.mat_dim() * f.mat_dim();
    let inv = 0.5 * grid.n() as f64;
    let mut out = MatField::zeros(grid, f.mat_dim());
    let src = f.data();
    let dst = out.data_mut();
    for s in 0..grid.sites() {
        let (p, m) = (grid.next(s, axis), grid.prev(s, axis));
        for e in 0..k {
            dst[s * k + e] = (src[p * k + e] - src[m * k + e]) * inv;
        }
    }
    out
}

/// `(2d+1)`-point stencil Laplacian.
pub fn laplacian(f: &MatField) -> MatField {
    let grid = f.grid();
    let k = f.mat_dim() * f.mat_dim();
    let inv_h2 = (grid.n() * grid.n()) as f64;
    let mut out = MatField::zeros(grid, f.mat_dim());
    let src = f.data();
    let dst = out.data_mut();
    for s in 0..grid.sites() {
        for ax in 0..grid.d() {
            let (p, m) = (grid.next(s, ax), grid.prev(s, ax));
            for e in 0..k {
                dst[s * k + e] += (src[p * k + e] - src[s * k + e] * 2.0 + src[m * k + e]) * inv_h2;
            }
        }
    }
    out
}

/// Exact discrete heat flow `e^{tΔ_h} f`, applied per Fourier mode.
pub fn heat_semigroup(f: &MatField, t: f64) -> Result<MatField> {
    if t < 0.0 || !t.is_finite() {
        return Err(invalid(format!("heat flow time must be ≥ 0, got {t}")));
    }
    let mut out = f.clone();
    if t > 0.0 {
        apply_multiplier(&mut out, &heat_multiplier(f.grid(), t), false);
    }
    Ok(out)
}

impl GaugeField {
    /// Heat flow of every component; exactly anti-Hermitian output.
    pub fn heat(&self, t: f64) -> Result<GaugeField> {
        if t < 0.0 || !t.is_finite() {
            return Err(invalid(format!("heat flow time must be ≥ 0, got {t}")));
        }
        let mut out = self.clone();
        if t > 0.0 {
            let mult = heat_multiplier(self.grid(), t);
            for c in &mut out.comps {
                apply_multiplier(c, &mult, true);
            }
        }
        Ok(out)
    }
}

/// Antisymmetric array `F_ij` of curvature components.
#[derive(Clone, Debug)]
pub struct Curvature {
    d: usize,
    f: Vec<MatField>,
}

impl Curvature {
    /// `F_ij` (0-based indices).
    pub fn get(&self, i: usize, j: usize) -> &MatField {
        &self.f[i * self.d + j]
    }

    /// Spatial dimension.
    pub fn d(&self) -> usize {
        self.d
    }
}

/// All first derivatives `D[i][j] = ∂_j A_i`.
pub(crate) fn derivatives(a: &GaugeField) -> Vec<Vec<MatField>> {
    let d = a.grid().d();
    (0..d).map(|i| (0..d).map(|j| central_diff(a.comp(i), j)).collect()).collect()
}

/// `F_ij = ∂_iA_j − ∂_jA_i + [A_i, A_j]` with `F_ji = −F_ij` exactly.
pub fn curvature(a: &GaugeField) -> Curvature {
    let grid = a.grid();
    let d = grid.d();
    let n = a.group().matrix_dim();
    let abelian = a.group().is_abelian();
    let der = derivatives(a);
    let mut f: Vec<MatField> = (0..d * d).map(|_| MatField::zeros(grid, n)).collect();
    for i in 0..d {
        for j in i + 1..d {
            let mut fij = MatField::zeros(grid, n);
            for s in 0..grid.sites() {
                let mut m = der[j][i].get(s) - der[i][j].get(s);
                if !abelian {
                    m += a.comp(i).get(s).commutator(&a.comp(j).get(s));
                }
                fij.set(s, &m);
            }
            f[j * d + i] = fij.scaled(-1.0);
            f[i * d + j] = fij;
        }
    }
    Curvature { d, f }
}

/// SYM drift `ΔA_i + Σ_j [A_j, 2∂_jA_i − ∂_iA_j + [A_j, A_i]]`.
pub fn ym_drift(a: &GaugeField) -> GaugeField {
    let mut out = GaugeField {
        group: a.group(),
        comps: a.comps().iter().map(laplacian).collect(),
    };
    if !a.group().is_abelian() {
        let nl = nonlinearity(a);
        for (o, c) in out.comps.iter_mut().zip(nl.comps()) {
            o.axpy(1.0, c);
        }
    }
    out
}

/// Bracket part of the drift, `Σ_j [A_j, 2∂_jA_i − ∂_iA_j + [A_j, A_i]]`.
pub(crate) fn nonlinearity(a: &GaugeField) -> GaugeField {
    let mut out = GaugeField::zeros(a.grid(), a.group());
    if a.group().is_abelian() {
        return out;
    }
    let der = derivatives(a);
    with_size!(a.group().matrix_dim(), N => nonlinearity_fixed::<N>(a, &der, &mut out));
    out
}

fn nonlinearity_fixed<const N: usize>(a: &GaugeField, der: &[Vec<MatField>], out: &mut GaugeField) {
    let grid = a.grid();
    let d = grid.d();
    let src: Vec<&[_]> = a.comps().iter().map(|c| c.data()).collect();
    for s in 0..grid.sites() {
        let mut aj = [Fixed::<N>::ZERO; 3];
        for j in 0..d {
            aj[j] = Fixed::at(src[j], s);
        }
        for i in 0..d {
            let mut acc = Fixed::<N>::ZERO;
            for j in 0..d {
                if i == j {
                    // 2∂_iA_i − ∂_iA_i + [A_i, A_i] = ∂_iA_i.
                    acc += aj[j].commutator(&Fixed::at(der[i][i].data(), s));
                    continue;
                }
                let inner_term = Fixed::at(der[i][j].data(), s) * 2.0 - Fixed::at(der[j][i].data(), s) + aj[j].commutator(&aj[i]);
                acc += aj[j].commutator(&inner_term);
            }
            acc.put(out.comps[i].data_mut(), s);
        }
    }
}

/// Lattice Yang–Mills action `h^d Σ_x Σ_{i<j} ⟨F_ij, F_ij⟩`.
pub fn ym_energy(a: &GaugeField) -> f64 {
    let f = curvature(a);
    let grid = a.grid();
    let d = grid.d();
    let mut total = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            let fij = f.get(i, j);
            for s in 0..grid.sites() {
                let m = fij.get(s);
                total += inner(&m, &m);
            }
        }
    }
    total * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusGrid;
    use crate::lie::{GroupKind, Mat};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_sine_matches_symbol() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let h = grid.h();
        let f = MatField::from_fn(grid, 1, |x| Mat::scalar(1, Complex64::new((2.0 * PI * x[0]).sin(), 0.0)));
        let df = partial_derivative(&f, 0).unwrap();
        let factor = (2.0 * PI * h).sin() / (2.0 * PI * h);
        for s in 0..grid.sites() {
            let x = grid.point(s);
            let expect = 2.0 * PI * (2.0 * PI * x[0]).cos() * factor;
            assert!((df.get(s).get(0, 0).re - expect).abs() < 1e-12);
        }
        assert!(partial_derivative(&f, 2).is_err());
    }

    #[test]
    fn heat_rejects_negative_time() {
        let grid = TorusGrid::new(2, 8).unwrap();
        assert!(heat_semigroup(&MatField::zeros(grid, 1), -1.0).is_err());
    }

    #[test]
    fn constant_su2_curvature_is_bracket() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let alg = GroupKind::SU2.algebra();
        let e = &alg.basis().elements;
        let a = GaugeField::from_fn(grid, GroupKind::SU2, |i, _| *e[i].matrix());
        let f = curvature(&a);
        let expect = e[0].matrix().commutator(e[1].matrix());
        assert!((f.get(0, 1).get(5) - expect).max_abs() < 1e-15);
        assert!((f.get(1, 0).get(5) + expect).max_abs() < 1e-15);
    }
}
