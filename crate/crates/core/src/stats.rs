//! Sample statistics for the Monte Carlo estimators.

use libm::sqrt;

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            stderr: self.stderr * c.abs(),
        }
    }

    /// Difference in units of the combined standard error; infinite when
    /// the values differ with zero error.
    pub fn z_against(self, other: Estimate) -> f64 {
        z_score(self.value - other.value, combined(self.stderr, other.stderr))
    }
}

pub fn combined(a: f64, b: f64) -> f64 {
    sqrt(a * a + b * b)
}

pub fn z_score(diff: f64, stderr: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if stderr == 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / stderr
    }
}

/// Running sums; merged in index order so results are schedule-independent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn from_samples<I: IntoIterator<Item = f64>>(xs: I) -> Self {
        let mut m = Self::default();
        for x in xs {
            m.push(x);
        }
        m
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n == 0 {
            0.0
        } else {
            sqrt(self.variance() / self.n as f64)
        };
        Estimate {
            value: self.mean(),
            stderr: se,
        }
    }
}

/// Paired sums for ratio estimators.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairedMoments {
    pub x: Moments,
    pub y: Moments,
    pub sum_xy: f64,
}

impl PairedMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.x.push(x);
        self.y.push(y);
        self.sum_xy += x * y;
    }

    pub fn covariance(&self) -> f64 {
        let n = self.x.n as f64;
        if self.x.n < 2 {
            return 0.0;
        }
        (self.sum_xy - self.x.sum * self.y.sum / n) / (n - 1.0)
    }

    /// `E[x] / E[y]` with the delta-method standard error.
    pub fn ratio(&self) -> Estimate {
        let n = self.x.n as f64;
        let (mx, my) = (self.x.mean(), self.y.mean());
        if my == 0.0 || self.x.n == 0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let r = mx / my;
        let var = (self.x.variance() - 2.0 * r * self.covariance() + r * r * self.y.variance()) / (my * my);
        Estimate {
            value: r,
            stderr: sqrt(var.max(0.0) / n),
        }
    }

    /// `E[x] - c E[y]` with its standard error.
    pub fn linear(&self, c: f64) -> Estimate {
        let n = self.x.n as f64;
        let var = self.x.variance() - 2.0 * c * self.covariance() + c * c * self.y.variance();
        Estimate {
            value: self.x.mean() - c * self.y.mean(),
            stderr: sqrt(var.max(0.0) / n),
        }
    }
}

/// Standard error of an empirical frequency `k / n`.
pub fn proportion(k: u64, n: u64) -> Estimate {
    if n == 0 {
        return Estimate {
            value: 0.0,
            stderr: 0.0,
        };
    }
    let p = k as f64 / n as f64;
    Estimate {
        value: p,
        stderr: sqrt(p * (1.0 - p) / n as f64),
    }
}
