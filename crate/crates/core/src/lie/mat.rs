//! Small dense complex matrices (N ≤ 4) stored inline.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Largest supported matrix dimension.
pub const MAX_N: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An `n × n` complex matrix with `n ≤ MAX_N`, row-major, no heap storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    e: [Complex64; MAX_N * MAX_N],
}

impl Mat {
    /// Zero matrix of size `n`.
    #[inline]
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "matrix size {n} unsupported");
        Mat { n, e: [ZERO; MAX_N * MAX_N] }
    }

    /// Identity matrix of size `n`.
    #[inline]
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = ONE;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, c: Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = c;
        }
        m
    }

    /// Builds from `n*n` row-major entries.
    #[inline]
    pub fn from_slice(n: usize, s: &[Complex64]) -> Self {
        let mut m = Self::zeros(n);
        m.e[..n * n].copy_from_slice(&s[..n * n]);
        m
    }

    /// Builds from a nested row list.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "ragged matrix rows");
            for (j, v) in r.iter().enumerate() {
                m.e[i * n + j] = *v;
            }
        }
        m
    }

    /// Matrix dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.e[..self.n * self.n]
    }

    /// Mutable row-major entries.
    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        let k = self.n * self.n;
        &mut self.e[..k]
    }

    /// Copies the entries into `out`.
    #[inline]
    pub fn write_to(&self, out: &mut [Complex64]) {
        out.copy_from_slice(self.as_slice());
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.e[i * self.n + j]
    }

    /// Sets entry `(i, j)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.e[i * self.n + j] = v;
    }

    /// Conjugate transpose.
    #[inline]
    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.e[j * n + i] = self.e[i * n + j].conj();
            }
        }
        m
    }

    /// Trace.
    #[inline]
    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.e[i * self.n + i]).sum()
    }

    /// Real scaling.
    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for v in m.as_mut_slice() {
            *v *= s;
        }
        m
    }

    /// Complex scaling.
    #[inline]
    pub fn scale_c(&self, s: Complex64) -> Self {
        let mut m = *self;
        for v in m.as_mut_slice() {
            *v *= s;
        }
        m
    }

    /// `self += s * other`.
    #[inline]
    pub fn axpy(&mut self, s: f64, other: &Mat) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *a += b * s;
        }
    }

    /// Matrix product.
    #[inline]
    pub fn matmul(&self, o: &Mat) -> Mat {
        debug_assert_eq!(self.n, o.n);
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.e[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.e[i * n + j] += a * o.e[k * n + j];
                }
            }
        }
        m
    }

    /// Commutator `self·o − o·self`.
    #[inline]
    pub fn commutator(&self, o: &Mat) -> Mat {
        self.matmul(o) - o.matmul(self)
    }

    /// Frobenius norm squared.
    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute entry.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    /// Anti-Hermitian part `(M − M†)/2`.
    #[inline]
    pub fn anti_hermitian_part(&self) -> Mat {
        let n = self.n;
        let mut m = *self;
        for i in 0..n {
            for j in 0..n {
                m.e[i * n + j] = (self.e[i * n + j] - self.e[j * n + i].conj()) * 0.5;
            }
        }
        m
    }

    /// Largest deviation from anti-Hermiticity, `max |M + M†|`.
    pub fn anti_hermitian_defect(&self) -> f64 {
        (*self + self.dagger()).max_abs()
    }

    /// Largest deviation from unitarity, `max |M M† − I|`.
    #[inline]
    pub fn unitary_defect(&self) -> f64 {
        (self.matmul(&self.dagger()) - Mat::identity(self.n)).max_abs()
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let n = self.n;
        match n {
            1 => return self.e[0].norm(),
            2 => {
                // σ² are the roots of s² − |M|_F² s + |det M|² = 0.
                let f = self.e[..4].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let d = self.det().norm_sqr();
                return (0.5 * (f + (f * f - 4.0 * d).max(0.0).sqrt())).sqrt();
            }
            _ => {}
        }
        let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j));
        dm.singular_values().iter().cloned().fold(0.0, f64::max)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        match n {
            1 => return self.e[0],
            2 => return self.e[0] * self.e[3] - self.e[1] * self.e[2],
            _ => {}
        }
        let mut a = *self;
        let mut det = ONE;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a.get(x, c).norm().total_cmp(&a.get(y, c).norm()))
                .unwrap_or(c);
            if a.get(p, c) == ZERO {
                return ZERO;
            }
            if p != c {
                for j in 0..n {
                    let t = a.get(c, j);
                    a.set(c, j, a.get(p, j));
                    a.set(p, j, t);
                }
                det = -det;
            }
            let piv = a.get(c, c);
            det *= piv;
            for r in c + 1..n {
                let f = a.get(r, c) / piv;
                for j in c..n {
                    let v = a.get(r, j) - f * a.get(c, j);
                    a.set(r, j, v);
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` if singular.
    pub fn inverse(&self) -> Option<Mat> {
        let n = self.n;
        let mut a = *self;
        let mut inv = Mat::identity(n);
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a.get(x, c).norm().total_cmp(&a.get(y, c).norm()))?;
            if a.get(p, c).norm() < 1e-300 {
                return None;
            }
            for j in 0..n {
                let (t, u) = (a.get(c, j), inv.get(c, j));
                a.set(c, j, a.get(p, j));
                inv.set(c, j, inv.get(p, j));
                a.set(p, j, t);
                inv.set(p, j, u);
            }
            let piv = a.get(c, c).inv();
            for j in 0..n {
                a.set(c, j, a.get(c, j) * piv);
                inv.set(c, j, inv.get(c, j) * piv);
            }
            for r in 0..n {
                if r != c {
                    let f = a.get(r, c);
                    if f != ZERO {
                        for j in 0..n {
                            a.set(r, j, a.get(r, j) - f * a.get(c, j));
                            inv.set(r, j, inv.get(r, j) - f * inv.get(c, j));
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// Matrix exponential.
    ///
    /// Closed forms for `n ≤ 2`; otherwise scaling and squaring with a
    /// degree-18 Taylor polynomial.
    pub fn exp(&self) -> Mat {
        match self.n {
            1 => {
                let mut m = *self;
                m.e[0] = self.e[0].exp();
                m
            }
            2 => exp2(self),
            _ => exp_scaling_squaring(self),
        }
    }

    /// Principal logarithm for matrices close to the identity.
    ///
    /// No radius check; callers are responsible for staying on the principal
    /// branch.
    pub fn log_near_identity(&self) -> Mat {
        match self.n {
            1 => {
                let mut m = *self;
                m.e[0] = self.e[0].ln();
                m
            }
            2 if self.unitary_defect() < 1e-8 => log2_unitary(self),
            _ => log_inverse_scaling_squaring(self),
        }
    }

    /// Nearest unitary matrix (polar factor).
    pub fn polar_unitary(&self) -> Mat {
        let n = self.n;
        let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j));
        let svd = dm.svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            return *self;
        };
        let p = u * vt;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, p[(i, j)]);
            }
        }
        m
    }
}

fn exp2(x: &Mat) -> Mat {
    let half_tr = x.trace() * 0.5;
    let y = *x - Mat::scalar(2, half_tr);
    // Cayley–Hamilton: Y² = −det(Y)·I for traceless Y.
    let s2 = -y.det();
    let s = s2.sqrt();
    let (c, sh) = if s.norm() < 1e-4 {
        // cosh s and sinh(s)/s by their Taylor series.
        let c = ONE + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
        let sh = ONE + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
        (c, sh)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    let mut m = y.scale_c(sh);
    m.e[0] += c;
    m.e[3] += c;
    m.scale_c(half_tr.exp())
}

fn exp_scaling_squaring(x: &Mat) -> Mat {
    let n = x.n;
    let norm = x.norm();
    let mut k = 0u32;
    if norm > 0.5 {
        k = (norm / 0.5).log2().ceil() as u32;
    }
    let a = x.scale(0.5f64.powi(k as i32));
    let mut term = Mat::identity(n);
    let mut sum = Mat::identity(n);
    for j in 1..=18 {
        term = term.matmul(&a).scale(1.0 / j as f64);
        sum += term;
    }
    for _ in 0..k {
        sum = sum.matmul(&sum);
    }
    sum
}

fn log2_unitary(u: &Mat) -> Mat {
    let det = u.det();
    let phi = det.arg() * 0.5;
    let v = u.scale_c(Complex64::from_polar(1.0, -phi));
    let cos_t = (v.trace().re * 0.5).clamp(-1.0, 1.0);
    let theta = cos_t.acos();
    let skew = (v - v.dagger()).scale(0.5);
    let skew = skew - Mat::scalar(2, skew.trace() * 0.5);
    let f = if theta < 1e-6 { 1.0 + theta * theta / 6.0 } else { theta / theta.sin() };
    skew.scale(f) + Mat::scalar(2, Complex64::new(0.0, phi))
}

fn log_inverse_scaling_squaring(g: &Mat) -> Mat {
    let n = g.n;
    let id = Mat::identity(n);
    let mut y = *g;
    let mut k = 0;
    while (y - id).norm() > 0.05 && k < 40 {
        y = sqrtm_denman_beavers(&y);
        k += 1;
    }
    let e = y - id;
    let mut pow = e;
    let mut sum = Mat::zeros(n);
    for j in 1..=40 {
        let c = if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64;
        sum.axpy(c, &pow);
        pow = pow.matmul(&e);
        if pow.norm() < 1e-18 {
            break;
        }
    }
    sum.scale(2f64.powi(k))
}

fn sqrtm_denman_beavers(a: &Mat) -> Mat {
    let mut y = *a;
    let mut z = Mat::identity(a.n);
    for _ in 0..60 {
        let (Some(yi), Some(zi)) = (y.inverse(), z.inverse()) else {
            break;
        };
        let ny = (y + zi).scale(0.5);
        let nz = (z + yi).scale(0.5);
        let diff = (ny - y).norm();
        y = ny;
        z = nz;
        if diff < 1e-15 * y.norm() {
            break;
        }
    }
    y
}

impl Add for Mat {
    type Output = Mat;
    #[inline]
    fn add(mut self, o: Mat) -> Mat {
        self += o;
        self
    }
}

impl AddAssign for Mat {
    #[inline]
    fn add_assign(&mut self, o: Mat) {
        debug_assert_eq!(self.n, o.n);
        for (a, b) in self.as_mut_slice().iter_mut().zip(o.as_slice()) {
            *a += b;
        }
    }
}

impl Sub for Mat {
    type Output = Mat;
    #[inline]
    fn sub(mut self, o: Mat) -> Mat {
        self -= o;
        self
    }
}

impl SubAssign for Mat {
    #[inline]
    fn sub_assign(&mut self, o: Mat) {
        debug_assert_eq!(self.n, o.n);
        for (a, b) in self.as_mut_slice().iter_mut().zip(o.as_slice()) {
            *a -= b;
        }
    }
}

impl Neg for Mat {
    type Output = Mat;
    #[inline]
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul for Mat {
    type Output = Mat;
    #[inline]
    fn mul(self, o: Mat) -> Mat {
        self.matmul(&o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, seed: u64) -> Mat {
        let mut m = Mat::zeros(n);
        let mut s = seed;
        for v in m.as_mut_slice() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            *v = c(a, b);
        }
        m
    }

    #[test]
    fn closed_form_op_norm_matches_svd() {
        for seed in 0..20 {
            let m = sample(2, seed).scale(1.0 + seed as f64);
            let dm = nalgebra::DMatrix::from_fn(2, 2, |i, j| m.get(i, j));
            let svd = dm.singular_values().iter().cloned().fold(0.0, f64::max);
            assert!((m.op_norm() - svd).abs() < 1e-12 * svd.max(1.0), "seed {seed}");
        }
        assert_eq!(Mat::identity(2).scale(3.0).op_norm(), 3.0);
    }

    #[test]
    fn closed_form_exp_matches_taylor() {
        for seed in 0..20 {
            let x = sample(2, seed).scale(3.0);
            let d = (exp2(&x) - exp_scaling_squaring(&x)).max_abs();
            assert!(d < 1e-11, "seed {seed}: {d}");
        }
    }

    #[test]
    fn inverse_and_det() {
        for n in 1..=4 {
            let m = sample(n, 7 + n as u64) + Mat::identity(n);
            let inv = m.inverse().unwrap();
            assert!((m.matmul(&inv) - Mat::identity(n)).max_abs() < 1e-12);
            let prod = m.det() * inv.det();
            assert!((prod - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn generic_log_inverts_exp() {
        for n in 2..=4 {
            let x = sample(n, 31 + n as u64).anti_hermitian_part().scale(0.8);
            let back = log_inverse_scaling_squaring(&x.exp());
            assert!((back - x).max_abs() < 1e-11);
        }
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let u = sample(3, 5).anti_hermitian_part().exp();
        assert!((u.polar_unitary() - u).max_abs() < 1e-12);
        let noisy = u + sample(3, 9).scale(1e-6);
        assert!(noisy.polar_unitary().unitary_defect() < 1e-13);
    }
}
