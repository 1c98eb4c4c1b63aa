//! Small numeric helpers shared by the estimators.

use std::f64::consts::PI;

/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Squared Euclidean distance between two equally sized slices.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `log(Σ exp(v))` evaluated without overflow. Returns `-inf` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Log density of an isotropic Gaussian `N(x | center, var·I)`.
#[inline]
pub fn isotropic_gaussian_log_pdf(x: &[f64], center: &[f64], var: f64) -> f64 {
    let d = x.len() as f64;
    -0.5 * d * (2.0 * PI * var).ln() - sq_dist(x, center) / (2.0 * var)
}

/// Streaming `log(Σ exp(v))` accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    #[inline]
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Arithmetic mean and unbiased standard deviation of one column of a row-major matrix.
pub(crate) fn column_mean_std(data: &[f64], dim: usize, col: usize) -> (f64, f64) {
    let m = data.len() / dim;
    let mean = data.iter().skip(col).step_by(dim).sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = data
        .iter()
        .skip(col)
        .step_by(dim)
        .map(|v| (v - mean) * (v - mean))
        .sum();
    (mean, (ss / (m - 1) as f64).sqrt())
}
