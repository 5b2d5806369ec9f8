//! Finite-sample estimators and tests for comparing ensembles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};

/// Samples of one scalar observable across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub name: String,
    pub samples: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Ensemble {
    /// At least two samples; seeds, when given, are distinct and one per sample.
    pub fn new(name: impl Into<String>, samples: Vec<f64>, seeds: Vec<u64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("an ensemble needs at least 2 samples"));
        }
        if !seeds.is_empty() {
            if seeds.len() != samples.len() {
                return Err(invalid("one seed per sample expected"));
            }
            let mut s = seeds.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid("ensemble seeds must be distinct"));
            }
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(invalid("ensemble samples must be finite"));
        }
        Ok(Ensemble { name: name.into(), samples, seeds })
    }

    /// Splits complex samples into real and imaginary ensembles.
    pub fn from_complex(name: &str, zs: &[num_complex::Complex64], seeds: Vec<u64>) -> Result<(Self, Self)> {
        Ok((
            Ensemble::new(format!("{name}.re"), zs.iter().map(|z| z.re).collect(), seeds.clone())?,
            Ensemble::new(format!("{name}.im"), zs.iter().map(|z| z.im).collect(), seeds)?,
        ))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (self.len() - 1) as f64
    }
}

/// Sample mean and normal-approximation half-width at confidence `level`.
pub fn mean_ci(e: &Ensemble, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if e.len() < 2 {
        return Err(invalid("need at least 2 samples"));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    Ok((e.mean(), z * (e.variance() / e.len() as f64).sqrt()))
}

/// Standard error of the mean of a stationary, correlated series, inflating
/// the naive error by `(1 + ρ)/(1 − ρ)` with `ρ` the lag-one autocorrelation.
pub fn mean_se_ar1(xs: &[f64]) -> Result<f64> {
    if xs.len() < 3 {
        return Err(invalid("need at least 3 samples"));
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    if var == 0.0 {
        return Ok(0.0);
    }
    let cov = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / n;
    let rho = (cov / var).clamp(-0.99, 0.99);
    Ok((var / n * (1.0 + rho) / (1.0 - rho)).sqrt())
}

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub sizes: Vec<usize>,
    pub seeds: Vec<Vec<u64>>,
}

impl KsReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small arguments.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=6).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let s: f64 =
        (1..=100).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * (k * k) as f64 * lambda * lambda).exp()).sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn asymptotic_p(d: f64, n_eff: f64) -> f64 {
    let root = n_eff.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * d)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample KS statistic `sup |F₁ − F₂|` with its asymptotic p-value.
pub fn ks_two_sample(e1: &Ensemble, e2: &Ensemble) -> Result<KsReport> {
    if e1.is_empty() || e2.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    let (a, b) = (sorted(&e1.samples), sorted(&e2.samples));
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    Ok(KsReport {
        statistic: d,
        p_value: asymptotic_p(d, n1 * n2 / (n1 + n2)),
        sizes: vec![a.len(), b.len()],
        seeds: vec![e1.seeds.clone(), e2.seeds.clone()],
    })
}

/// One-sample KS test against a continuous reference CDF.
pub fn ks_one_sample(e: &Ensemble, cdf: impl Fn(f64) -> f64) -> Result<KsReport> {
    if e.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    let a = sorted(&e.samples);
    let n = a.len() as f64;
    let d = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(KsReport { statistic: d, p_value: asymptotic_p(d, n), sizes: vec![a.len()], seeds: vec![e.seeds.clone()] })
}

/// Least-squares slope of `log y` against `log x` and its standard error.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(invalid("xs and ys differ in length"));
    }
    if xs.len() < 3 {
        return Err(invalid("a slope fit needs at least 3 points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct xs".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok((slope, (ssr / (n - 2.0) / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ensemble_has_zero_width() {
        let e = Ensemble::new("c", vec![2.5; 10], vec![]).unwrap();
        assert_eq!(mean_ci(&e, 0.95).unwrap(), (2.5, 0.0));
        assert!(mean_ci(&e, 1.0).is_err());
    }

    #[test]
    fn ensemble_invariants() {
        assert!(Ensemble::new("x", vec![1.0], vec![]).is_err());
        assert!(Ensemble::new("x", vec![1.0, 2.0], vec![3, 3]).is_err());
        assert!(Ensemble::new("x", vec![1.0, 2.0], vec![3]).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for l in [1.1, 1.18, 1.25] {
            let c = std::f64::consts::PI.powi(2) / (8.0 * l * l);
            let small: f64 =
                1.0 - (2.0 * std::f64::consts::PI).sqrt() / l * (1..=6).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>();
            let large: f64 = 2.0 * (1..=100).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * (k * k) as f64 * l * l).exp()).sum::<f64>();
            assert!((small - large).abs() < 1e-12);
        }
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let (s, se) = loglog_slope(&xs, &xs.map(|x| 3.0 / x)).unwrap();
        assert!((s + 1.0).abs() < 1e-12 && se < 1e-12);
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0, 0.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
