//! Line segments, triangles, and their integrals against lattice 1-forms.

use crate::error::{invalid, Result};
use crate::lie::{AlgebraElement, Mat};

use super::{GaugeField, TorusGrid};

/// Straight segment `ℓ = (x, v)` with `|v| ≤ 1/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSegment {
    d: usize,
    x: [f64; 3],
    v: [f64; 3],
}

impl LineSegment {
    /// Largest admissible segment length.
    pub const MAX_LENGTH: f64 = 0.25;

    /// Validates `|v| ≤ 1/4`; `x` is reduced into `[0,1)^d`.
    pub fn new(d: usize, x: [f64; 3], v: [f64; 3]) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(invalid("segments live in dimension 2 or 3"));
        }
        let mut xs = [0.0; 3];
        let mut vs = [0.0; 3];
        for k in 0..d {
            xs[k] = x[k].rem_euclid(1.0);
            vs[k] = v[k];
        }
        let seg = LineSegment { d, x: xs, v: vs };
        if seg.length() > Self::MAX_LENGTH * (1.0 + 1e-12) {
            return Err(invalid(format!("segment length {} exceeds 1/4", seg.length())));
        }
        Ok(seg)
    }

    /// Base point.
    pub fn start(&self) -> [f64; 3] {
        self.x
    }

    /// Direction vector.
    pub fn direction(&self) -> [f64; 3] {
        self.v
    }

    /// End point reduced into `[0,1)^d`.
    pub fn end(&self) -> [f64; 3] {
        let mut e = [0.0; 3];
        for k in 0..self.d {
            e[k] = (self.x[k] + self.v[k]).rem_euclid(1.0);
        }
        e
    }

    /// `|ℓ| = |v|`.
    pub fn length(&self) -> f64 {
        self.v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Opposite orientation `(x + v, −v)`.
    pub fn reversed(&self) -> LineSegment {
        let mut v = self.v;
        v.iter_mut().for_each(|c| *c = -*c);
        LineSegment { d: self.d, x: self.end(), v }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Oriented triangle `P = (ℓ_1, ℓ_2, ℓ_3)` with closed boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    sides: [LineSegment; 3],
    area: f64,
}

impl Triangle {
    /// Triangle with vertices `x`, `x + a`, `x + b`.
    pub fn from_vertices(d: usize, x: [f64; 3], a: [f64; 3], b: [f64; 3]) -> Result<Self> {
        let mut ba = [0.0; 3];
        let mut nb = [0.0; 3];
        let mut xa = [0.0; 3];
        let mut xb = [0.0; 3];
        for k in 0..3 {
            ba[k] = b[k] - a[k];
            nb[k] = -b[k];
            xa[k] = x[k] + a[k];
            xb[k] = x[k] + b[k];
        }
        let sides = [LineSegment::new(d, x, a)?, LineSegment::new(d, xa, ba)?, LineSegment::new(d, xb, nb)?];
        Self::new(sides)
    }

    /// Validates closure on the torus and computes the area.
    pub fn new(sides: [LineSegment; 3]) -> Result<Self> {
        let d = sides[0].d;
        for i in 0..3 {
            let e = sides[i].end();
            let s = sides[(i + 1) % 3].start();
            for k in 0..d {
                let gap = (e[k] - s[k]).rem_euclid(1.0);
                if gap.min(1.0 - gap) > 1e-9 {
                    return Err(invalid(format!("triangle boundary is open between sides {} and {}", i + 1, (i + 1) % 3 + 1)));
                }
            }
        }
        let (a, b) = (sides[0].v, sides[2].v);
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let area = 0.5 * cross.iter().map(|c| c * c).sum::<f64>().sqrt();
        if area <= 0.0 {
            return Err(invalid("degenerate triangle"));
        }
        Ok(Triangle { sides, area })
    }

    /// The three boundary segments.
    pub fn sides(&self) -> &[LineSegment; 3] {
        &self.sides
    }

    /// `|P|`.
    pub fn area(&self) -> f64 {
        self.area
    }
}

/// Multilinear interpolation weights for a point: `(site, weight)` pairs.
pub(crate) fn interpolation_stencil(grid: TorusGrid, p: [f64; 3], out: &mut [(usize, f64); 8]) -> usize {
    let n = grid.n();
    let d = grid.d();
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for k in 0..d {
        let u = p[k].rem_euclid(1.0) * n as f64;
        let fl = u.floor();
        base[k] = (fl as usize) % n;
        frac[k] = u - fl;
    }
    let corners = 1usize << d;
    for (c, slot) in out.iter_mut().enumerate().take(corners) {
        let mut w = 1.0;
        let mut idx = [0usize; 3];
        for k in 0..d {
            if (c >> k) & 1 == 1 {
                w *= frac[k];
                idx[k] = (base[k] + 1) % n;
            } else {
                w *= 1.0 - frac[k];
                idx[k] = base[k];
            }
        }
        *slot = (grid.index(idx), w);
    }
    corners
}

/// Multilinear interpolation of a matrix field.
#[cfg(test)]
pub(crate) fn interpolate(f: &super::MatField, p: [f64; 3]) -> Mat {
    let mut st = [(0usize, 0.0); 8];
    let c = interpolation_stencil(f.grid(), p, &mut st);
    let mut acc = Mat::zeros(f.mat_dim());
    for &(s, w) in &st[..c] {
        acc.axpy(w, &f.get(s));
    }
    acc
}

/// Matrix-valued line integral, no algebra check; used internally.
pub(crate) fn line_integral_mat(a: &GaugeField, seg: &LineSegment, m: usize) -> Mat {
    let grid = a.grid();
    let d = grid.d();
    let n = a.group().matrix_dim();
    let mut acc = Mat::zeros(n);
    let mut st = [(0usize, 0.0); 8];
    let intervals = (m - 1) as f64;
    for q in 0..m {
        let t = q as f64 / intervals;
        let w = if q == 0 || q == m - 1 { 0.5 } else { 1.0 } / intervals;
        let mut p = [0.0; 3];
        for k in 0..d {
            p[k] = seg.x[k] + t * seg.v[k];
        }
        let corners = interpolation_stencil(grid, p, &mut st);
        for &(s, cw) in &st[..corners] {
            for i in 0..d {
                if seg.v[i] != 0.0 {
                    acc.axpy(w * cw * seg.v[i], &a.comp(i).get(s));
                }
            }
        }
    }
    acc
}

/// `A(ℓ) = ∫_0^1 Σ_i A_i(x + tv) v_i dt` by the composite trapezoid rule with
/// `m ≥ 2` nodes and multilinear interpolation.
pub fn line_integral(a: &GaugeField, seg: &LineSegment, m: usize) -> Result<AlgebraElement> {
    if m < 2 {
        return Err(invalid("line integral needs at least 2 quadrature points"));
    }
    if seg.d != a.grid().d() {
        return Err(invalid("segment and field dimensions differ"));
    }
    Ok(AlgebraElement(line_integral_mat(a, seg, m)))
}

/// `A(∂P) = Σ_i A(ℓ_i)`.
pub fn triangle_boundary_integral(a: &GaugeField, p: &Triangle, m: usize) -> Result<AlgebraElement> {
    let mut acc = Mat::zeros(a.group().matrix_dim());
    for s in &p.sides {
        acc += line_integral(a, s, m)?.0;
    }
    Ok(AlgebraElement(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MatField;
    use crate::lie::GroupKind;

    #[test]
    fn rejects_long_segments_and_open_triangles() {
        assert!(LineSegment::new(2, [0.0; 3], [0.3, 0.0, 0.0]).is_err());
        let s1 = LineSegment::new(2, [0.1, 0.1, 0.0], [0.1, 0.0, 0.0]).unwrap();
        let s2 = LineSegment::new(2, [0.2, 0.1, 0.0], [0.0, 0.1, 0.0]).unwrap();
        let s3 = LineSegment::new(2, [0.2, 0.25, 0.0], [-0.1, -0.1, 0.0]).unwrap();
        assert!(Triangle::new([s1, s2, s3]).is_err());
    }

    #[test]
    fn triangle_area() {
        let t = Triangle::from_vertices(2, [0.9, 0.9, 0.0], [0.2, 0.0, 0.0], [0.0, 0.1, 0.0]).unwrap();
        assert!((t.area() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = MatField::from_fn(grid, 1, |x| Mat::scalar(1, (x[0] + 2.0 * x[1]).into()));
        let v = interpolate(&f, [0.3, 0.41, 0.0]).get(0, 0).re;
        assert!((v - (0.3 + 0.82)).abs() < 1e-12);
        let a = GaugeField::zeros(grid, GroupKind::U1);
        assert!(line_integral(&a, &LineSegment::new(2, [0.0; 3], [0.1, 0.0, 0.0]).unwrap(), 1).is_err());
    }
}
