//! Gauss–Legendre rules and piecewise Chebyshev tables.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(compute_gl(n))).clone()
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre nodes on `[a, b]` with `panels` equal panels.
pub fn composite(a: f64, b: f64, panels: usize, order: usize, out: &mut Vec<(f64, f64)>) {
    out.clear();
    if b <= a || panels == 0 {
        return;
    }
    let rule = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            out.push((mid + half * x, half * w));
        }
    }
}

/// Integral of `f` over `[a, b]` by composite Gauss–Legendre.
pub fn integrate(a: f64, b: f64, panels: usize, order: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut nodes = Vec::new();
    composite(a, b, panels, order, &mut nodes);
    nodes.iter().map(|&(x, w)| w * f(x)).sum()
}

/// Piecewise Chebyshev interpolant of a smooth function on `[a, b]`.
#[derive(Clone, Debug)]
pub struct ChebTable {
    a: f64,
    width: f64,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ChebTable {
    /// Samples `f` at `order` Chebyshev points on each of `pieces` pieces.
    pub fn new(a: f64, b: f64, pieces: usize, order: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let nodes: Vec<f64> = (0..order).map(|j| (PI * (j as f64 + 0.5) / order as f64).cos()).collect();
        let bary: Vec<f64> = (0..order)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * (PI * (j as f64 + 0.5) / order as f64).sin()
            })
            .collect();
        let width = (b - a) / pieces as f64;
        let values = (0..pieces)
            .map(|p| {
                let mid = a + (p as f64 + 0.5) * width;
                nodes.iter().map(|x| f(mid + 0.5 * width * x)).collect()
            })
            .collect();
        ChebTable { a, width, nodes, bary, values }
    }

    /// Evaluates the interpolant; arguments outside `[a, b]` are clamped.
    pub fn eval(&self, x: f64) -> f64 {
        let pieces = self.values.len();
        let rel = ((x - self.a) / self.width).max(0.0);
        let p = (rel.floor() as usize).min(pieces - 1);
        let mid = self.a + (p as f64 + 0.5) * self.width;
        let u = ((x - mid) / (0.5 * self.width)).clamp(-1.0, 1.0);
        let vals = &self.values[p];
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..self.nodes.len() {
            let diff = u - self.nodes[j];
            if diff == 0.0 {
                return vals[j];
            }
            let c = self.bary[j] / diff;
            num += c * vals[j];
            den += c;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 16] {
            let (x, w) = &*gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn cheb_table_is_accurate() {
        let t = ChebTable::new(0.0, 3.0, 8, 16, |x| (2.0 * x).sin() * (-x).exp());
        for k in 0..100 {
            let x = 3.0 * k as f64 / 99.0;
            assert!((t.eval(x) - (2.0 * x).sin() * (-x).exp()).abs() < 1e-13);
        }
    }
}
