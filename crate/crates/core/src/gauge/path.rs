//! Piecewise-linear paths on the torus and parallel transport along them.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::lines::line_integral_mat;
use crate::lattice::{GaugeField, GroupField, LineSegment};
use crate::lie::{GroupElement, Mat};

use super::gauge_transform;

/// How the sample points were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Corners of a polygon.
    PiecewiseLinear,
    /// Dense samples of a smooth curve.
    Smooth,
}

/// Path through sample points, joined by minimal-image straight pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    d: usize,
    points: Vec<[f64; 3]>,
    kind: PathKind,
}

fn minimal_image(a: [f64; 3], b: [f64; 3], d: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    for k in 0..d {
        let mut dv = (b[k] - a[k]).rem_euclid(1.0);
        if dv >= 0.5 {
            dv -= 1.0;
        }
        v[k] = dv;
    }
    v
}

impl Path {
    /// Validates that consecutive points are less than half the torus apart
    /// in every coordinate, so the joining piece is unambiguous.
    pub fn new(d: usize, points: Vec<[f64; 3]>, kind: PathKind) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(invalid("paths live in dimension 2 or 3"));
        }
        if points.len() < 2 {
            return Err(invalid("a path needs at least two points"));
        }
        for w in points.windows(2) {
            for k in 0..d {
                let raw = (w[1][k] - w[0][k]).rem_euclid(1.0);
                let dist = raw.min(1.0 - raw);
                if dist >= 0.5 - 1e-12 || !w[1][k].is_finite() {
                    return Err(invalid(format!("consecutive path points {:?} and {:?} are half a torus apart", w[0], w[1])));
                }
            }
        }
        Ok(Path { d, points, kind })
    }

    /// Parses CSV rows of 2 or 3 torus coordinates; `#` starts a comment.
    pub fn from_csv(text: &str, kind: PathKind) -> Result<Self> {
        let mut points = Vec::new();
        let mut d = 0;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| invalid(format!("path line {}: {e}", no + 1)))?;
            if d == 0 {
                d = vals.len();
            }
            if vals.len() != d || !(2..=3).contains(&d) {
                return Err(invalid(format!("path line {}: expected {} coordinates", no + 1, d.max(2))));
            }
            let mut p = [0.0; 3];
            p[..d].copy_from_slice(&vals);
            points.push(p);
        }
        Path::new(d.max(2), points, kind)
    }

    /// Axis-parallel rectangle with corner `x`, sides `a` along `axes.0` and
    /// `b` along `axes.1`, traversed counter-clockwise in that plane.
    pub fn rectangle(d: usize, x: [f64; 3], axes: (usize, usize), a: f64, b: f64) -> Result<Self> {
        if axes.0 >= d || axes.1 >= d || axes.0 == axes.1 {
            return Err(invalid("rectangle axes must be two distinct axes"));
        }
        let mut p = vec![x; 5];
        p[1][axes.0] += a;
        p[2][axes.0] += a;
        p[2][axes.1] += b;
        p[3][axes.1] += b;
        Path::new(d, p, PathKind::PiecewiseLinear)
    }

    /// Square loops in the `(0, 1)` plane with the given side lengths at the
    /// given base points.
    pub fn rectangle_catalogue(d: usize, sides: &[f64], bases: &[[f64; 3]]) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for &s in sides {
            for &x in bases {
                out.push(Path::rectangle(d, x, (0, 1), s, s)?);
            }
        }
        Ok(out)
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Sample points.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Regularity metadata.
    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Displacement of each piece.
    pub fn pieces(&self) -> Vec<([f64; 3], [f64; 3])> {
        self.points.windows(2).map(|w| (w[0], minimal_image(w[0], w[1], self.d))).collect()
    }

    /// Total displacement, in the universal cover.
    pub fn displacement(&self) -> [f64; 3] {
        let mut t = [0.0; 3];
        for (_, v) in self.pieces() {
            for k in 0..3 {
                t[k] += v[k];
            }
        }
        t
    }

    /// End point equals start point on the torus.
    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.points[0], *self.points.last().expect("non-empty"));
        minimal_image(a, b, self.d).iter().all(|c| c.abs() < 1e-12)
    }

    /// Same loop started at point `k` (closed paths only).
    pub fn rotated(&self, k: usize) -> Result<Self> {
        if !self.is_closed() {
            return Err(invalid("only closed paths can be rotated"));
        }
        let m = self.points.len() - 1;
        let pts = (0..=m).map(|i| self.points[(i + k) % m]).collect();
        Path::new(self.d, pts, self.kind)
    }
}

/// Parallel transport `dy = y dℓ_A`, `y_0 = 1`, by the product
/// `y ← y exp(A(ℓ_k))` over `substeps` equal sub-segments of every piece.
pub fn holonomy(a: &GaugeField, path: &Path, substeps: usize) -> Result<GroupElement> {
    if substeps == 0 {
        return Err(invalid("holonomy needs at least one substep per piece"));
    }
    let grid = a.grid();
    if path.dim() != grid.d() {
        return Err(invalid("path and field dimensions differ"));
    }
    let n = a.group().matrix_dim();
    let mut y = Mat::identity(n);
    for (x, v) in path.pieces() {
        let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        // Sub-segments must also respect the segment length bound.
        let parts = substeps.max((len / LineSegment::MAX_LENGTH).ceil() as usize);
        for p in 0..parts {
            let mut start = [0.0; 3];
            let mut dv = [0.0; 3];
            for k in 0..grid.d() {
                start[k] = x[k] + v[k] * p as f64 / parts as f64;
                dv[k] = v[k] / parts as f64;
            }
            let seg = LineSegment::new(grid.d(), start, dv)?;
            let m = ((2.0 * seg.length() * grid.n() as f64).ceil() as usize + 1).max(2);
            y = y.matmul(&line_integral_mat(a, &seg, m).exp());
        }
    }
    Ok(GroupElement(y))
}

/// Normalised trace `Tr(hol(A, γ))/N` of a closed path.
pub fn wilson_loop(a: &GaugeField, path: &Path, substeps: usize) -> Result<Complex64> {
    if !path.is_closed() {
        return Err(invalid("Wilson loops need a closed path"));
    }
    let y = holonomy(a, path, substeps)?;
    Ok(y.matrix().trace() / a.group().matrix_dim() as f64)
}

fn grid_site(g: &GroupField, p: [f64; 3]) -> Result<usize> {
    let grid = g.grid();
    let mut c = [0usize; 3];
    for k in 0..grid.d() {
        let u = p[k].rem_euclid(1.0) * grid.n() as f64;
        let r = u.round();
        if (u - r).abs() > 1e-9 {
            return Err(invalid(format!("path endpoint {p:?} is not a grid point")));
        }
        c[k] = (r as usize) % grid.n();
    }
    Ok(grid.index(c))
}

/// `‖g(y) − hol(A^g, γ)^{-1} g(x) hol(A, γ)‖` for `γ` from `x` to `y`.
pub fn holonomy_conjugation_identity(a: &GaugeField, g: &GroupField, path: &Path, substeps: usize) -> Result<f64> {
    let pts = path.points();
    let sx = grid_site(g, pts[0])?;
    let sy = grid_site(g, *pts.last().expect("non-empty"))?;
    let ag = gauge_transform(a, g)?;
    let h_a = holonomy(a, path, substeps)?;
    let h_ag = holonomy(&ag, path, substeps)?;
    let rhs = h_ag.inverse().matrix().matmul(&g.get(sx)).matmul(h_a.matrix());
    Ok((g.get(sy) - rhs).norm())
}
