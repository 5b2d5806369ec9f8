//! Gauge transformations, holonomies, Wilson loops and the Abelian orbit
//! representative.

mod path;

pub use path::{holonomy, holonomy_conjugation_identity, wilson_loop, Path, PathKind};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lattice::{GaugeField, GroupField, MatField};
use crate::lie::{with_size, Fixed, GroupKind, Mat, LOG_RADIUS};

fn checked_log<const N: usize>(m: &Fixed<N>, site: usize, axis: usize) -> Result<Fixed<N>> {
    let diff = *m - Fixed::identity();
    // The Frobenius norm bounds the operator norm from above.
    if diff.norm_sqr() >= LOG_RADIUS * LOG_RADIUS {
        let dist = diff.to_mat().op_norm();
        if dist >= LOG_RADIUS {
            return Err(Error::Domain(format!(
                "gauge transformation varies too fast between neighbouring sites (site {site}, axis {axis}, |Δg| = {dist:.3})"
            )));
        }
    }
    Ok(m.log_near_identity().anti_hermitian_part())
}

/// `h_j = (∂_j g) g^{-1}` as the symmetric average of the forward and backward
/// logarithmic differences `log(g(x ± e_j) g(x)^{-1})`.
///
/// The result lies in `𝔤` exactly and equals the central difference up to
/// `O(h²)`; for `U(1)` it is the exact lattice derivative of the phase.
pub fn right_log_derivative(g: &GroupField) -> Result<Vec<MatField>> {
    log_derivative(g, false)
}

/// `ℓ_j = g^{-1} ∂_j g`, the left-invariant analogue of [`right_log_derivative`].
pub fn left_log_derivative(g: &GroupField) -> Result<Vec<MatField>> {
    log_derivative(g, true)
}

fn log_derivative(g: &GroupField, left: bool) -> Result<Vec<MatField>> {
    with_size!(g.group().matrix_dim(), N => log_derivative_fixed::<N>(g, left))
}

fn log_derivative_fixed<const N: usize>(g: &GroupField, left: bool) -> Result<Vec<MatField>> {
    let grid = g.grid();
    let scale = grid.n() as f64;
    let special = matches!(g.group(), GroupKind::SpecialUnitary(_));
    let src = g.values().data();
    let mut out = Vec::with_capacity(grid.d());
    for axis in 0..grid.d() {
        // Forward log at each site, reused as the backward log of the next one.
        let mut fwd = MatField::zeros(grid, N);
        for s in 0..grid.sites() {
            let (x, xp) = (Fixed::<N>::at(src, s), Fixed::<N>::at(src, grid.next(s, axis)));
            let m = if left { x.dagger() * xp } else { xp * x.dagger() };
            checked_log(&m, s, axis)?.put(fwd.data_mut(), s);
        }
        let mut h = MatField::zeros(grid, N);
        let f = fwd.data();
        for s in 0..grid.sites() {
            let v = (Fixed::<N>::at(f, s) + Fixed::at(f, grid.prev(s, axis))) * (0.5 * scale);
            v.project(special).put(h.data_mut(), s);
        }
        out.push(h);
    }
    Ok(out)
}

/// `A^g = Ad_g A − (dg) g^{-1}`.
///
/// Fails with a domain error when `g` is not resolved by the grid, i.e. when
/// neighbouring values are too far apart for the logarithm.
pub fn gauge_transform(a: &GaugeField, g: &GroupField) -> Result<GaugeField> {
    if a.grid() != g.grid() || a.group() != g.group() {
        return Err(invalid("gauge field and gauge transformation live on different grids or groups"));
    }
    let h = right_log_derivative(g)?;
    let grid = a.grid();
    let comps = (0..grid.d())
        .map(|i| {
            let mut c = MatField::zeros(grid, a.group().matrix_dim());
            for s in 0..grid.sites() {
                let gs = g.get(s);
                let m = gs.matmul(&a.comp(i).get(s)).matmul(&gs.dagger()) - h[i].get(s);
                c.set(s, &m.anti_hermitian_part());
            }
            c
        })
        .collect();
    GaugeField::from_components_unchecked(a.group(), comps)
}

/// Sup-norm of `(A^g)^u − A^{ug}`.
pub fn group_action_property_check(a: &GaugeField, g: &GroupField, u: &GroupField) -> Result<f64> {
    let left = gauge_transform(&gauge_transform(a, g)?, u)?;
    let right = gauge_transform(a, &u.mul(g))?;
    Ok(left.sub(&right).sup_norm())
}

/// Shifts the zero mode of each component of a `U(1)` field into `[−π, π)`.
///
/// Returns the representative and the realising `g(x) = exp(2πi Σ k_i x_i)`.
pub fn abelian_representative(a: &GaugeField) -> Result<(GaugeField, GroupField)> {
    if a.group() != GroupKind::U1 {
        return Err(Error::Unsupported(format!("orbit representative is only available for u1, not {}", a.group())));
    }
    let grid = a.grid();
    let means = a.zero_modes();
    let mut out = a.clone();
    let mut k = [0.0f64; 3];
    for (i, m) in means.iter().enumerate() {
        let c = m.get(0, 0).im;
        k[i] = ((c + PI) / (2.0 * PI)).floor();
        if k[i] != 0.0 {
            let shift = Complex64::new(0.0, 2.0 * PI * k[i]);
            for v in out.comp_mut(i).data_mut() {
                *v -= shift;
            }
        }
    }
    let g = GroupField::from_exp_fn(grid, GroupKind::U1, |x| {
        let phase: f64 = (0..grid.d()).map(|i| 2.0 * PI * k[i] * x[i]).sum();
        Mat::scalar(1, Complex64::new(0.0, phase))
    });
    Ok((out, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusGrid;

    #[test]
    fn abelian_phase_derivative_is_exact() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let g = GroupField::from_exp_fn(grid, GroupKind::U1, |x| Mat::scalar(1, Complex64::new(0.0, 2.0 * PI * (x[0] + 3.0 * x[1]))));
        let h = right_log_derivative(&g).unwrap();
        for s in 0..grid.sites() {
            assert!((h[0].get(s).get(0, 0) - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
            assert!((h[1].get(s).get(0, 0) - Complex64::new(0.0, 6.0 * PI)).norm() < 1e-12);
        }
    }

    #[test]
    fn rough_gauge_transformation_is_a_domain_error() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let g = GroupField::from_exp_fn(grid, GroupKind::U1, |x| Mat::scalar(1, Complex64::new(0.0, 2.0 * PI * 3.0 * x[0])));
        assert!(matches!(right_log_derivative(&g), Err(Error::Domain(_))));
    }
}
