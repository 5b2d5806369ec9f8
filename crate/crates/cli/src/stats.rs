//! Streaming estimators used by the experiments.

/// Running sums for the mean of a stationary series and its AR(1)-corrected
/// standard error, without storing the series.
#[derive(Clone, Debug, Default)]
pub struct Ar1Acc {
    n: u64,
    sum: f64,
    sum_sq: f64,
    sum_lag: f64,
    first: f64,
    last: f64,
}

impl Ar1Acc {
    pub fn push(&mut self, x: f64) {
        if self.n == 0 {
            self.first = x;
        } else {
            self.sum_lag += self.last * x;
        }
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
        self.last = x;
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Same estimator as `symlab_core::stats::mean_se_ar1`.
    pub fn stderr(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 3 {
            return f64::NAN;
        }
        let m = self.mean();
        let var = (self.sum_sq / n - m * m).max(0.0);
        if var == 0.0 {
            return 0.0;
        }
        // Σ (x_t − m)(x_{t+1} − m) over consecutive pairs.
        let head = self.sum - self.last;
        let tail = self.sum - self.first;
        let cov = (self.sum_lag - m * (head + tail) + (n - 1.0) * m * m) / n;
        let rho = (cov / var).clamp(-0.99, 0.99);
        (var / n * (1.0 + rho) / (1.0 - rho)).sqrt()
    }
}
