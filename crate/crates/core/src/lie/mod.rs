//! Matrix Lie groups `G ⊂ U(N)` and their algebras `𝔤 ⊂ 𝔲(N)`.
//!
//! The inner product is fixed to `⟨X, Y⟩ = −Tr(XY)` throughout.

mod fixed;
mod mat;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use mat::{Mat, MAX_N};
pub(crate) use fixed::{with_size, Fixed};

/// Tolerance for algebra and group membership checks.
pub const TOL_ALG: f64 = 1e-10;
/// Principal-branch radius for [`log_map`], in operator norm.
pub const LOG_RADIUS: f64 = 1.0;

/// Structure group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// `U(N)`.
    Unitary(usize),
    /// `SU(N)`, `N ≥ 2`.
    SpecialUnitary(usize),
}

impl GroupKind {
    /// `U(1)`.
    pub const U1: GroupKind = GroupKind::Unitary(1);
    /// `SU(2)`.
    pub const SU2: GroupKind = GroupKind::SpecialUnitary(2);

    /// Matrix size `N`.
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::Unitary(n) | GroupKind::SpecialUnitary(n) => n,
        }
    }

    /// Real dimension of the algebra.
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupKind::Unitary(n) => n * n,
            GroupKind::SpecialUnitary(n) => n * n - 1,
        }
    }

    /// True when the algebra is commutative.
    pub fn is_abelian(self) -> bool {
        self == GroupKind::U1
    }

    /// Cached algebra data for this group.
    pub fn algebra(self) -> &'static LieAlgebra {
        static CACHE: OnceLock<Mutex<HashMap<GroupKind, &'static LieAlgebra>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry(self)
            .or_insert_with(|| Box::leak(Box::new(LieAlgebra::build(self))))
    }

    fn validate(self) -> Result<Self> {
        let n = self.matrix_dim();
        match self {
            GroupKind::SpecialUnitary(n) if n < 2 => Err(invalid("SU(N) requires N ≥ 2")),
            _ if n == 0 || n > MAX_N => Err(invalid(format!("matrix size {n} outside 1..={MAX_N}"))),
            _ => Ok(self),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Unitary(n) => write!(f, "u{n}"),
            GroupKind::SpecialUnitary(n) => write!(f, "su{n}"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| invalid(format!("unknown group '{s}'")))
        };
        let g = if let Some(rest) = s.strip_prefix("su") {
            GroupKind::SpecialUnitary(parse(rest)?)
        } else if let Some(rest) = s.strip_prefix('u') {
            GroupKind::Unitary(parse(rest)?)
        } else {
            return Err(invalid(format!("unknown group '{s}' (expected uN or suN)")));
        };
        g.validate()
    }
}

/// Orthonormal basis and structure data of a matrix Lie algebra.
#[derive(Debug)]
pub struct LieAlgebra {
    /// Group this algebra belongs to.
    pub kind: GroupKind,
    basis: AlgebraBasis,
    casimir: AlgebraMap,
}

impl LieAlgebra {
    fn build(kind: GroupKind) -> Self {
        let n = kind.matrix_dim();
        let spanning = canonical_spanning_set(kind);
        let mut ortho: Vec<Mat> = Vec::new();
        for v in spanning {
            let mut w = v;
            for e in &ortho {
                let c = inner(&w, e);
                w.axpy(-c, e);
            }
            let nrm = inner(&w, &w).sqrt();
            if nrm > 1e-12 {
                ortho.push(w.scale(1.0 / nrm));
            }
        }
        assert_eq!(ortho.len(), kind.algebra_dim(), "basis construction for {kind}");
        let basis = AlgebraBasis { n, elements: ortho.into_iter().map(AlgebraElement).collect() };
        let casimir = casimir_adjoint(&basis).expect("orthonormal by construction");
        LieAlgebra { kind, basis, casimir }
    }

    /// The cached orthonormal basis.
    pub fn basis(&self) -> &AlgebraBasis {
        &self.basis
    }

    /// Casimir operator in the adjoint representation.
    pub fn casimir(&self) -> &AlgebraMap {
        &self.casimir
    }

    /// Real dimension.
    pub fn dim(&self) -> usize {
        self.basis.elements.len()
    }

    /// Matrix size.
    pub fn matrix_dim(&self) -> usize {
        self.basis.n
    }

    /// Coordinates `⟨X, e_a⟩` in the orthonormal basis. Works for complexified
    /// arguments too (bilinear extension).
    #[inline]
    pub fn coords_c(&self, x: &Mat, out: &mut [Complex64]) {
        for (o, e) in out.iter_mut().zip(&self.basis.elements) {
            *o = -trace_product(x, &e.0);
        }
    }

    /// Real coordinates of an algebra element.
    #[inline]
    pub fn coords(&self, x: &Mat, out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.basis.elements) {
            *o = -trace_product(x, &e.0).re;
        }
    }

    /// `Σ_a c_a e_a`.
    #[inline]
    pub fn from_coords(&self, c: &[f64]) -> Mat {
        let mut m = Mat::zeros(self.basis.n);
        for (ca, e) in c.iter().zip(&self.basis.elements) {
            m.axpy(*ca, &e.0);
        }
        m
    }

    /// Orthogonal projection of an arbitrary matrix onto `𝔤`.
    pub fn project(&self, m: &Mat) -> Mat {
        let a = m.anti_hermitian_part();
        match self.kind {
            GroupKind::Unitary(_) => a,
            GroupKind::SpecialUnitary(n) => a - Mat::scalar(n, a.trace() / n as f64),
        }
    }
}

fn canonical_spanning_set(kind: GroupKind) -> Vec<Mat> {
    let n = kind.matrix_dim();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let mut sym = Mat::zeros(n);
            sym.set(p, q, i);
            sym.set(q, p, i);
            out.push(sym);
            let mut asym = Mat::zeros(n);
            asym.set(p, q, one);
            asym.set(q, p, -one);
            out.push(asym);
        }
    }
    match kind {
        GroupKind::Unitary(_) => {
            for p in 0..n {
                let mut d = Mat::zeros(n);
                d.set(p, p, i);
                out.push(d);
            }
        }
        GroupKind::SpecialUnitary(_) => {
            for p in 0..n - 1 {
                let mut d = Mat::zeros(n);
                d.set(p, p, i);
                d.set(p + 1, p + 1, -i);
                out.push(d);
            }
        }
    }
    out
}

#[inline]
fn trace_product(x: &Mat, y: &Mat) -> Complex64 {
    let n = x.dim();
    let (a, b) = (x.as_slice(), y.as_slice());
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[i * n + k] * b[k * n + i];
        }
    }
    s
}

#[inline]
pub(crate) fn inner(x: &Mat, y: &Mat) -> f64 {
    -trace_product(x, y).re
}

/// Element of `𝔤 ⊂ 𝔲(N)`: an anti-Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement(pub(crate) Mat);

impl AlgebraElement {
    /// Validates anti-Hermiticity within [`TOL_ALG`].
    pub fn new(m: Mat) -> Result<Self> {
        let d = m.anti_hermitian_defect();
        if d > TOL_ALG * (1.0 + m.max_abs()) {
            return Err(invalid(format!("matrix is not anti-Hermitian (defect {d:.3e})")));
        }
        Ok(AlgebraElement(m))
    }

    /// Zero element of `𝔲(n)`.
    pub fn zero(n: usize) -> Self {
        AlgebraElement(Mat::zeros(n))
    }

    /// `u(1)` element `i·c`.
    pub fn u1(c: f64) -> Self {
        AlgebraElement(Mat::scalar(1, Complex64::new(0.0, c)))
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    /// Norm induced by the inner product.
    pub fn norm(&self) -> f64 {
        inner(&self.0, &self.0).max(0.0).sqrt()
    }

    /// Sum.
    pub fn add(&self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 + o.0)
    }

    /// Real scaling.
    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement(self.0.scale(s))
    }
}

/// Element of `G ⊂ U(N)`: a unitary matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(pub(crate) Mat);

impl GroupElement {
    /// Validates unitarity within [`TOL_ALG`].
    pub fn new(m: Mat) -> Result<Self> {
        let d = m.unitary_defect();
        if d > TOL_ALG {
            return Err(invalid(format!("matrix is not unitary (defect {d:.3e})")));
        }
        Ok(GroupElement(m))
    }

    /// Validates unitarity and, for `SU(N)`, unit determinant.
    pub fn new_in(kind: GroupKind, m: Mat) -> Result<Self> {
        let g = Self::new(m)?;
        if let GroupKind::SpecialUnitary(_) = kind {
            let det = m.det();
            if (det - Complex64::new(1.0, 0.0)).norm() > TOL_ALG {
                return Err(invalid(format!("determinant {det} ≠ 1 for {kind}")));
            }
        }
        Ok(g)
    }

    /// Identity of `U(n)`.
    pub fn identity(n: usize) -> Self {
        GroupElement(Mat::identity(n))
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    /// Group product.
    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        GroupElement(self.0.matmul(&o.0))
    }

    /// Inverse (`g†`).
    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.dagger())
    }
}

/// Orthonormal basis of `𝔤`.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    n: usize,
    /// Basis elements.
    pub elements: Vec<AlgebraElement>,
}

impl AlgebraBasis {
    /// Validates orthonormality.
    pub fn new(elements: Vec<AlgebraElement>) -> Result<Self> {
        let n = elements.first().map(|e| e.0.dim()).ok_or_else(|| invalid("empty basis"))?;
        for (a, ea) in elements.iter().enumerate() {
            if ea.0.dim() != n {
                return Err(invalid("basis elements have mixed dimensions"));
            }
            for (b, eb) in elements.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                let g = inner(&ea.0, &eb.0);
                if (g - expected).abs() > TOL_ALG {
                    return Err(invalid(format!("basis not orthonormal: ⟨e{a}, e{b}⟩ = {g}")));
                }
            }
        }
        Ok(AlgebraBasis { n, elements })
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// True for the zero algebra (never produced by the library).
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Real linear map on `𝔤`, stored as a matrix in the orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraMap {
    dim: usize,
    entries: Vec<f64>,
}

impl AlgebraMap {
    /// Zero map.
    pub fn zero(dim: usize) -> Self {
        AlgebraMap { dim, entries: vec![0.0; dim * dim] }
    }

    /// `c·Id`.
    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c;
        }
        m
    }

    /// From row-major entries.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(invalid(format!("expected {} entries, got {}", dim * dim, entries.len())));
        }
        Ok(AlgebraMap { dim, entries })
    }

    /// Dimension of `𝔤`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry `(a, b)`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim + b]
    }

    /// If the map is `c·Id`, returns `c`.
    pub fn as_scalar(&self) -> Option<f64> {
        let c = self.entries.first().copied().unwrap_or(0.0);
        let ok = (0..self.dim).all(|a| {
            (0..self.dim).all(|b| self.get(a, b) == if a == b { c } else { 0.0 })
        });
        ok.then_some(c)
    }

    /// True when every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// `self + other`.
    pub fn add(&self, o: &AlgebraMap) -> AlgebraMap {
        assert_eq!(self.dim, o.dim);
        AlgebraMap {
            dim: self.dim,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    /// `s·self`.
    pub fn scale(&self, s: f64) -> AlgebraMap {
        AlgebraMap { dim: self.dim, entries: self.entries.iter().map(|a| a * s).collect() }
    }

    /// Composition `self ∘ o`.
    pub fn compose(&self, o: &AlgebraMap) -> AlgebraMap {
        let p = self.to_dmatrix() * o.to_dmatrix();
        Self::from_dmatrix(&p)
    }

    /// Matrix exponential `e^{t·self}`.
    pub fn exp(&self, t: f64) -> AlgebraMap {
        if let Some(c) = self.as_scalar() {
            return AlgebraMap::scalar(self.dim, (c * t).exp());
        }
        Self::from_dmatrix(&(self.to_dmatrix() * t).exp())
    }

    /// Applies the map to a (possibly complexified) element of `𝔤`.
    pub fn apply(&self, alg: &LieAlgebra, x: &Mat) -> Mat {
        if let Some(c) = self.as_scalar() {
            return x.scale(c);
        }
        let mut cx = [Complex64::new(0.0, 0.0); MAX_N * MAX_N];
        alg.coords_c(x, &mut cx[..self.dim]);
        let mut out = Mat::zeros(x.dim());
        for a in 0..self.dim {
            let mut y = Complex64::new(0.0, 0.0);
            for b in 0..self.dim {
                y += cx[b] * self.get(a, b);
            }
            out += alg.basis.elements[a].0.scale_c(y);
        }
        out
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    fn from_dmatrix(m: &DMatrix<f64>) -> AlgebraMap {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                entries.push(m[(a, b)]);
            }
        }
        AlgebraMap { dim, entries }
    }
}

fn check_same(x: &Mat, y: &Mat) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim())));
    }
    Ok(())
}

/// Lie bracket `XY − YX`.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_same(&x.0, &y.0)?;
    Ok(AlgebraElement(x.0.commutator(&y.0)))
}

/// Inner product `−Tr(XY)`.
pub fn ad_inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_same(&x.0, &y.0)?;
    Ok(inner(&x.0, &y.0))
}

/// Adjoint action `g X g⁻¹`.
pub fn adjoint_action(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    check_same(&g.0, &x.0)?;
    let d = g.0.unitary_defect();
    if d > TOL_ALG {
        return Err(invalid(format!("g is not unitary (defect {d:.3e})")));
    }
    Ok(AlgebraElement(g.0.matmul(&x.0).matmul(&g.0.dagger())))
}

/// Exponential map `𝔤 → G`.
pub fn exp_map(x: &AlgebraElement) -> GroupElement {
    GroupElement(x.0.exp())
}

/// Principal logarithm `G → 𝔤`, defined for `‖g − Id‖ < LOG_RADIUS`.
pub fn log_map(g: &GroupElement) -> Result<AlgebraElement> {
    let n = g.0.dim();
    let dist = (g.0 - Mat::identity(n)).op_norm();
    if dist >= LOG_RADIUS {
        return Err(Error::Domain(format!(
            "‖g − Id‖ = {dist:.4} outside the principal-branch radius {LOG_RADIUS}"
        )));
    }
    Ok(AlgebraElement(g.0.log_near_identity().anti_hermitian_part()))
}

/// Casimir operator `Σ_a ad_{e_a} ∘ ad_{e_a}` in the given orthonormal basis.
pub fn casimir_adjoint(basis: &AlgebraBasis) -> Result<AlgebraMap> {
    let basis = AlgebraBasis::new(basis.elements.clone())?;
    let dim = basis.len();
    let mut m = AlgebraMap::zero(dim);
    for b in 0..dim {
        let eb = basis.elements[b].0;
        let mut acc = Mat::zeros(basis.n);
        for ea in &basis.elements {
            acc += ea.0.commutator(&ea.0.commutator(&eb));
        }
        for (a, ea) in basis.elements.iter().enumerate() {
            m.entries[a * dim + b] = inner(&ea.0, &acc);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_basis_is_pauli_ordered() {
        let alg = GroupKind::SU2.algebra();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        let e1 = Mat::from_rows(&[&[0.0.into(), i * s], &[i * s, 0.0.into()]]);
        assert!((alg.basis().elements[0].0 - e1).max_abs() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_and_traceless() {
        let alg = GroupKind::SpecialUnitary(3).algebra();
        let mut m = Mat::zeros(3);
        for (k, v) in m.as_mut_slice().iter_mut().enumerate() {
            *v = Complex64::new(k as f64 * 0.3 - 1.0, (k * k) as f64 * 0.1);
        }
        let p = alg.project(&m);
        assert!(p.trace().norm() < 1e-14);
        assert!((alg.project(&p) - p).max_abs() < 1e-15);
    }

    #[test]
    fn coords_round_trip() {
        let alg = GroupKind::Unitary(3).algebra();
        let c: Vec<f64> = (0..9).map(|k| (k as f64).sin()).collect();
        let x = alg.from_coords(&c);
        let mut back = vec![0.0; 9];
        alg.coords(&x, &mut back);
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn parses_group_names() {
        assert_eq!("su2".parse::<GroupKind>().unwrap(), GroupKind::SU2);
        assert_eq!("U1".parse::<GroupKind>().unwrap(), GroupKind::U1);
        assert!("su1".parse::<GroupKind>().is_err());
        assert!("so3".parse::<GroupKind>().is_err());
    }
}
