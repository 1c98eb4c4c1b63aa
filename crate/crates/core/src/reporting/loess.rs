//! Local linear regression with tricube weights.

use crate::error::{invalid, Error, Result};

pub const DEFAULT_SPAN: f64 = 0.3;

/// LOESS fit of `y` on `x` evaluated at every `x`.
///
/// Each fit uses the nearest `ceil(span · n)` points (at least 3) weighted by
/// `(1 − (dist/h)³)³`, with `h` the distance to the farthest of them. A
/// neighborhood whose `x` values are all equal yields the weighted mean.
pub fn loess_fit(x: &[f64], y: &[f64], span: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!("LOESS needs at least 10 points, got {n}")));
    }
    if !(span > 0.0 && span <= 1.0) {
        return invalid(format!("span must lie in (0, 1], got {span}"));
    }
    let q = ((span * n as f64).ceil() as usize).clamp(3, n);
    let mut dist = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut out = Vec::with_capacity(n);
    for &x0 in x {
        for (d, &xj) in dist.iter_mut().zip(x) {
            *d = (xj - x0).abs();
        }
        scratch.copy_from_slice(&dist);
        let (_, &mut h, _) = scratch.select_nth_unstable_by(q - 1, |a, b| a.total_cmp(b));
        // widen slightly so the q-th neighbor keeps a small positive weight
        let h = h * (1.0 + 1e-10);

        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        let weights: Vec<f64> = dist
            .iter()
            .map(|&d| {
                if h == 0.0 {
                    if d == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else if d < h {
                    let u = d / h;
                    let t = 1.0 - u * u * u;
                    t * t * t
                } else {
                    0.0
                }
            })
            .collect();
        for j in 0..n {
            sw += weights[j];
            sx += weights[j] * x[j];
            sy += weights[j] * y[j];
        }
        let (mx, my) = (sx / sw, sy / sw);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for j in 0..n {
            let dx = x[j] - mx;
            sxx += weights[j] * dx * dx;
            sxy += weights[j] * dx * (y[j] - my);
        }
        let scale = weights.iter().zip(x).map(|(w, v)| w * v * v).sum::<f64>() / sw;
        if sxx <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            out.push(my);
        } else {
            out.push(my + sxy / sxx * (x0 - mx));
        }
    }
    Ok(out)
}
