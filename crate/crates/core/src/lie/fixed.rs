//! Const-size matrices for per-site loops over lattice fields.
//!
//! [`Mat`] keeps `MAX_N × MAX_N` entries inline, so every copy moves the
//! whole buffer even for `U(1)` or `SU(2)`. Site loops dispatch once on the
//! matrix size with [`with_size!`] and then work on `Fixed<N>`.

use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_complex::Complex64;

use super::Mat;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An `N × N` complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Fixed<const N: usize>(pub(crate) [[Complex64; N]; N]);

impl<const N: usize> Fixed<N> {
    pub(crate) const ZERO: Self = Fixed([[ZERO; N]; N]);

    /// Reads `N²` row-major entries.
    #[inline]
    pub(crate) fn load(s: &[Complex64]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..N {
            m.0[i].copy_from_slice(&s[i * N..(i + 1) * N]);
        }
        m
    }

    /// Writes `N²` row-major entries.
    #[inline]
    pub(crate) fn store(&self, s: &mut [Complex64]) {
        for i in 0..N {
            s[i * N..(i + 1) * N].copy_from_slice(&self.0[i]);
        }
    }

    /// Reads the matrix at `site` of a flat field buffer.
    #[inline]
    pub(crate) fn at(data: &[Complex64], site: usize) -> Self {
        Self::load(&data[site * N * N..(site + 1) * N * N])
    }

    /// Writes the matrix at `site` of a flat field buffer.
    #[inline]
    pub(crate) fn put(&self, data: &mut [Complex64], site: usize) {
        self.store(&mut data[site * N * N..(site + 1) * N * N]);
    }

    #[inline]
    pub(crate) fn identity() -> Self {
        Self::scalar(ONE)
    }

    #[inline]
    pub(crate) fn scalar(c: Complex64) -> Self {
        let mut m = Self::ZERO;
        for i in 0..N {
            m.0[i][i] = c;
        }
        m
    }

    #[inline]
    pub(crate) fn dagger(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..N {
            for j in 0..N {
                m.0[j][i] = self.0[i][j].conj();
            }
        }
        m
    }

    #[inline]
    pub(crate) fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    #[inline]
    pub(crate) fn scale_c(&self, c: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= c);
        m
    }

    #[inline]
    pub(crate) fn commutator(&self, o: &Self) -> Self {
        *self * *o - *o * *self
    }

    #[inline]
    pub(crate) fn norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// `(M − M†)/2`.
    #[inline]
    pub(crate) fn anti_hermitian_part(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = (self.0[i][j] - self.0[j][i].conj()) * 0.5;
            }
        }
        m
    }

    /// Orthogonal projection onto `𝔲(N)`, or `𝔰𝔲(N)` when `special`.
    #[inline]
    pub(crate) fn project(&self, special: bool) -> Self {
        let a = self.anti_hermitian_part();
        if special {
            a - Self::scalar(a.trace() / N as f64)
        } else {
            a
        }
    }

    /// Largest `|M M† − I|` entry.
    #[inline]
    pub(crate) fn unitary_defect(&self) -> f64 {
        let d = *self * self.dagger() - Self::identity();
        d.0.iter().flatten().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    #[inline]
    pub(crate) fn to_mat(&self) -> Mat {
        let mut flat = [ZERO; 16];
        self.store(&mut flat);
        Mat::from_slice(N, &flat)
    }

    #[inline]
    pub(crate) fn from_mat(m: &Mat) -> Self {
        Self::load(m.as_slice())
    }

    /// Matrix exponential; closed form for `N ≤ 2`.
    #[inline]
    pub(crate) fn exp(&self) -> Self {
        match N {
            1 => Self::scalar(self.0[0][0].exp()),
            2 => self.exp2(),
            _ => Self::from_mat(&self.to_mat().exp()),
        }
    }

    fn exp2(&self) -> Self {
        let half_tr = self.trace() * 0.5;
        let y = *self - Self::scalar(half_tr);
        // Cayley–Hamilton: Y² = −det(Y)·I for traceless Y.
        let s2 = -(y.0[0][0] * y.0[1][1] - y.0[0][1] * y.0[1][0]);
        let s = s2.sqrt();
        let (c, sh) = if s.norm() < 1e-4 {
            let c = ONE + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
            let sh = ONE + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
            (c, sh)
        } else {
            (s.cosh(), s.sinh() / s)
        };
        (y.scale_c(sh) + Self::scalar(c)).scale_c(half_tr.exp())
    }

    /// Principal logarithm near the identity, as [`Mat::log_near_identity`].
    #[inline]
    pub(crate) fn log_near_identity(&self) -> Self {
        match N {
            1 => Self::scalar(self.0[0][0].ln()),
            2 if self.unitary_defect() < 1e-8 => self.log2_unitary(),
            _ => Self::from_mat(&self.to_mat().log_near_identity()),
        }
    }

    fn log2_unitary(&self) -> Self {
        let det = self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0];
        let phi = det.arg() * 0.5;
        let v = self.scale_c(Complex64::from_polar(1.0, -phi));
        let cos_t = (v.trace().re * 0.5).clamp(-1.0, 1.0);
        let theta = cos_t.acos();
        let skew = (v - v.dagger()) * 0.5;
        let skew = skew - Self::scalar(skew.trace() * 0.5);
        let f = if theta < 1e-6 { 1.0 + theta * theta / 6.0 } else { theta / theta.sin() };
        skew * f + Self::scalar(Complex64::new(0.0, phi))
    }
}

impl<const N: usize> Add for Fixed<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl<const N: usize> AddAssign for Fixed<N> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.0.iter_mut().flatten().zip(o.0.iter().flatten()).for_each(|(a, b)| *a += b);
    }
}

impl<const N: usize> Sub for Fixed<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self -= o;
        self
    }
}

impl<const N: usize> SubAssign for Fixed<N> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.0.iter_mut().flatten().zip(o.0.iter().flatten()).for_each(|(a, b)| *a -= b);
    }
}

impl<const N: usize> Mul for Fixed<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                for j in 0..N {
                    m.0[i][j] += a * o.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Mul<f64> for Fixed<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        self.0.iter_mut().flatten().for_each(|v| *v *= s);
        self
    }
}

/// Evaluates `$body` with the constant `$N` bound to the runtime matrix size.
macro_rules! with_size {
    ($n:expr, $N:ident => $body:expr) => {
        match $n {
            1 => {
                const $N: usize = 1;
                $body
            }
            2 => {
                const $N: usize = 2;
                $body
            }
            3 => {
                const $N: usize = 3;
                $body
            }
            4 => {
                const $N: usize = 4;
                $body
            }
            n => unreachable!("matrix size {n} unsupported"),
        }
    };
}
pub(crate) use with_size;

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> Mat {
        let mut m = Mat::zeros(n);
        let mut s = seed.wrapping_add(7);
        for v in m.as_mut_slice() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            *v = Complex64::new(a, b);
        }
        m
    }

    fn agrees<const N: usize>(seed: u64) {
        let (x, y) = (sample(N, seed), sample(N, seed + 100));
        let (fx, fy) = (Fixed::<N>::from_mat(&x), Fixed::<N>::from_mat(&y));
        let close = |a: Fixed<N>, b: Mat| (a.to_mat() - b).max_abs() < 1e-12;
        assert!(close(fx * fy, x.matmul(&y)));
        assert!(close(fx.commutator(&fy), x.commutator(&y)));
        assert!(close(fx.dagger(), x.dagger()));
        assert!(close(fx.anti_hermitian_part(), x.anti_hermitian_part()));
        assert!(close(fx.exp(), x.exp()));
        let u = x.anti_hermitian_part().scale(0.5).exp();
        assert!(close(Fixed::<N>::from_mat(&u).log_near_identity(), u.log_near_identity()));
        assert!((Fixed::<N>::from_mat(&u).unitary_defect() - u.unitary_defect()).abs() < 1e-15);
    }

    #[test]
    fn matches_dynamic_matrices() {
        for seed in 0..10 {
            agrees::<1>(seed);
            agrees::<2>(seed);
            agrees::<3>(seed);
            agrees::<4>(seed);
        }
    }

    #[test]
    fn dispatch_binds_the_size() {
        for n in 1..=4 {
            assert_eq!(with_size!(n, N => Fixed::<N>::identity().trace().re as usize), n);
        }
    }
}
