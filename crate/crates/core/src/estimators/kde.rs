//! Density-based estimators: fixed-bandwidth GKDE, the comparative adaptive
//! KDE estimator (CLAKDE) and the GC combiner.
//!
//! All densities are handled in the log domain; in ten or more dimensions the
//! kernel values underflow `f64` long before the estimates stop being
//! meaningful.

use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{invalid, Error, Result};
use crate::math::{column_mean_std, log_add_exp, sq_dist, LogSumExp, LN_2PI};

/// Log-ratio below which a term is dropped from a sum whose largest term is
/// 1; `e^-40` is far below `f64` resolution relative to that term.
const NEGLIGIBLE: f64 = -40.0;

/// Fixed GKDE bandwidths.
pub const GKDE_BANDWIDTHS: [f64; 5] = [0.0025, 0.05, 0.1, 0.25, 0.5];

/// Log of a Gaussian KDE with scalar bandwidth `h` over the rows of `refs`.
pub fn gaussian_kde_logpdf(query: &[f64], refs: &[f64], h: f64) -> Result<f64> {
    let d = query.len();
    if d == 0 || refs.is_empty() || refs.len() % d != 0 {
        return invalid("refs must be a nonempty m x d matrix matching the query");
    }
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("bandwidth must be positive, got {h}"));
    }
    let m = refs.len() / d;
    let inv = 0.5 / (h * h);
    let mut acc = LogSumExp::default();
    for r in refs.chunks_exact(d) {
        acc.push(-sq_dist(query, r) * inv);
    }
    Ok(acc.value() - (m as f64).ln() - d as f64 * h.ln() - 0.5 * d as f64 * LN_2PI)
}

/// Silverman's rule applied to the mean per-dimension standard deviation:
/// `(4/(d+2))^(1/(d+4)) · m^(-1/(d+4)) · mean(σ_j)`.
pub fn silverman_bandwidth(points: &[f64], dim: usize) -> Result<f64> {
    if dim == 0 || points.len() % dim != 0 {
        return invalid("points must form an m x d matrix");
    }
    let m = points.len() / dim;
    if m < 2 {
        return Err(Error::InsufficientData(format!("Silverman's rule needs 2 points, got {m}")));
    }
    let scale = (0..dim).map(|j| column_mean_std(points, dim, j).1).sum::<f64>() / dim as f64;
    if !(scale > 0.0) {
        return Err(Error::Degenerate("zero variance in every dimension".into()));
    }
    let d = dim as f64;
    Ok((4.0 / (d + 2.0)).powf(1.0 / (d + 4.0)) * (m as f64).powf(-1.0 / (d + 4.0)) * scale)
}

/// Bandwidth choice for one GKDE variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GkdeBandwidth {
    Fixed(f64),
    /// Silverman's rule, computed separately for each class.
    Silverman,
}

/// Fixed-bandwidth GKDE estimate.
pub fn gkde_estimate(data: &LabeledDataset, h: f64) -> Result<f64> {
    Ok(gkde_estimates(data, &[GkdeBandwidth::Fixed(h)])?[0])
}

/// GKDE estimates for several bandwidth choices, sharing one pass over the
/// pairwise distances.
///
/// For every point and class the class KDE is evaluated at the point; each
/// value is normalized by its sum over all points and weighted by the class
/// share, and the estimate is one minus the sum over points of the larger
/// weighted value.
pub fn gkde_estimates(data: &LabeledDataset, bandwidths: &[GkdeBandwidth]) -> Result<Vec<f64>> {
    let (n_a, n_b) = data.require_both_classes()?;
    let n = data.len();
    let d = data.dim();

    let mut per_class = Vec::with_capacity(bandwidths.len());
    for bw in bandwidths {
        let pair = match *bw {
            GkdeBandwidth::Fixed(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return invalid(format!("bandwidth must be positive, got {h}"));
                }
                [h, h]
            }
            GkdeBandwidth::Silverman => [
                silverman_bandwidth(&data.class_features(Label::A), d)?,
                silverman_bandwidth(&data.class_features(Label::B), d)?,
            ],
        };
        per_class.push(pair);
    }

    let counts = [n_a as f64, n_b as f64];
    // log normalizer of each class KDE, per bandwidth
    let log_norm: Vec<[f64; 2]> = per_class
        .iter()
        .map(|hs| {
            let mut out = [0.0; 2];
            for k in 0..2 {
                out[k] = -counts[k].ln() - d as f64 * hs[k].ln() - 0.5 * d as f64 * LN_2PI;
            }
            out
        })
        .collect();
    let inv: Vec<[f64; 2]> = per_class
        .iter()
        .map(|hs| [0.5 / (hs[0] * hs[0]), 0.5 / (hs[1] * hs[1])])
        .collect();

    // log_l[b][k][i] = log L_h(x_i; class k)
    let mut log_l = vec![[vec![0.0; n], vec![0.0; n]]; bandwidths.len()];
    let labels = data.labels();
    let mut dist = vec![0.0; n];
    for i in 0..n {
        let xi = data.row(i);
        let mut min = [f64::INFINITY; 2];
        for j in 0..n {
            let q = sq_dist(xi, data.row(j));
            dist[j] = q;
            let k = labels[j].index();
            if q < min[k] {
                min[k] = q;
            }
        }
        for (b, inv_b) in inv.iter().enumerate() {
            let mut sums = [0.0f64; 2];
            for j in 0..n {
                let k = labels[j].index();
                let z = -(dist[j] - min[k]) * inv_b[k];
                if z > NEGLIGIBLE {
                    sums[k] += z.exp();
                }
            }
            for k in 0..2 {
                log_l[b][k][i] = sums[k].ln() - min[k] * inv_b[k] + log_norm[b][k];
            }
        }
    }

    let mut out = Vec::with_capacity(bandwidths.len());
    for scores in &log_l {
        let mut log_total = [0.0; 2];
        for k in 0..2 {
            let mut acc = LogSumExp::default();
            for &v in &scores[k] {
                acc.push(v);
            }
            log_total[k] = acc.value();
        }
        let mut sum = 0.0;
        for i in 0..n {
            let wa = (scores[0][i] - log_total[0]).exp() * counts[0] / n as f64;
            let wb = (scores[1][i] - log_total[1]).exp() * counts[1] / n as f64;
            sum += wa.max(wb);
        }
        out.push(1.0 - sum);
    }
    Ok(out)
}

/// Adaptive KDE with a diagonal bandwidth per reference point.
///
/// The bandwidth of point `j` in dimension `l` is
/// `scale · r_j · σ_l / G`, where `r_j` is the distance from `x_j` to its
/// `⌈√m⌉`-th nearest neighbor after each dimension is rescaled to the
/// geometric-mean spread `G`, `σ_l` is the per-dimension standard deviation,
/// and `scale` maximizes the leave-one-out log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveDensityModel {
    pub dim: usize,
    /// Reference points, row-major `m × dim`.
    pub points: Vec<f64>,
    /// Per-point bandwidths before the global scale, row-major `m × dim`.
    pub base_bandwidths: Vec<f64>,
    pub scale: f64,
    pub label: Option<Label>,
    #[serde(skip)]
    inv_bandwidths: Vec<f64>,
    #[serde(skip)]
    log_norms: Vec<f64>,
}

/// Search interval for `ln(scale)`.
const LOG_SCALE_BRACKET: (f64, f64) = (-6.907_755_278_982_137, 6.907_755_278_982_137);
const LOG_SCALE_TOL: f64 = 1e-3;

impl AdaptiveDensityModel {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Effective bandwidth vector of reference point `j`.
    pub fn bandwidth(&self, j: usize) -> Vec<f64> {
        self.base_bandwidths[j * self.dim..(j + 1) * self.dim]
            .iter()
            .map(|b| b * self.scale)
            .collect()
    }

    /// Replaces the global scale (used for diagnostics and tests).
    pub fn with_scale(&self, scale: f64) -> AdaptiveDensityModel {
        let mut m = self.clone();
        m.scale = scale;
        m.refresh();
        m
    }

    fn refresh(&mut self) {
        let d = self.dim;
        self.inv_bandwidths = self
            .base_bandwidths
            .iter()
            .map(|b| 1.0 / (b * self.scale))
            .collect();
        self.log_norms = self
            .inv_bandwidths
            .chunks_exact(d)
            .map(|inv| inv.iter().map(|v| v.ln()).sum::<f64>() - 0.5 * d as f64 * LN_2PI)
            .collect();
    }

    /// Log density at `query`; with `exclude = Some(i)` reference point `i`
    /// is left out and the mixture renormalized over the remaining `m - 1`.
    pub fn log_pdf(&self, query: &[f64], exclude: Option<usize>) -> Result<f64> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        let m = self.len();
        if let Some(i) = exclude {
            if i >= m {
                return invalid(format!("exclude index {i} out of range for {m} points"));
            }
            if m < 2 {
                return Err(Error::InsufficientData("cannot exclude the only reference point".into()));
            }
        }
        Ok(self.log_pdf_unchecked(query, exclude))
    }

    fn log_pdf_unchecked(&self, query: &[f64], exclude: Option<usize>) -> f64 {
        let d = self.dim;
        let mut terms = Vec::with_capacity(self.len());
        let mut max = f64::NEG_INFINITY;
        for (j, (x, inv)) in self
            .points
            .chunks_exact(d)
            .zip(self.inv_bandwidths.chunks_exact(d))
            .enumerate()
        {
            if Some(j) == exclude {
                continue;
            }
            let mut q = 0.0;
            for l in 0..d {
                let z = (query[l] - x[l]) * inv[l];
                q += z * z;
            }
            let v = self.log_norms[j] - 0.5 * q;
            max = max.max(v);
            terms.push(v);
        }
        let sum: f64 = terms
            .iter()
            .map(|v| v - max)
            .filter(|&z| z > NEGLIGIBLE)
            .map(f64::exp)
            .sum();
        let count = if exclude.is_some() { self.len() - 1 } else { self.len() };
        max + sum.ln() - (count as f64).ln()
    }
}

/// Fits an [`AdaptiveDensityModel`] to a row-major `m × dim` matrix.
pub fn adaptive_kde_fit(points: &[f64], dim: usize) -> Result<AdaptiveDensityModel> {
    if dim == 0 || points.len() % dim != 0 {
        return invalid("points must form an m x d matrix");
    }
    let m = points.len() / dim;
    let min_m = 4.max(dim + 1);
    if m < min_m {
        return Err(Error::InsufficientData(format!(
            "adaptive KDE needs at least {min_m} points in {dim} dimensions, got {m}"
        )));
    }

    let sd: Vec<f64> = (0..dim).map(|l| column_mean_std(points, dim, l).1).collect();
    let sd_max = sd.iter().copied().fold(0.0, f64::max);
    if !(sd_max > 0.0) {
        return Err(Error::Degenerate("all points are identical".into()));
    }
    let sd: Vec<f64> = sd.iter().map(|s| s.max(sd_max * 1e-6)).collect();
    let geo = (sd.iter().map(|s| s.ln()).sum::<f64>() / dim as f64).exp();
    let weight: Vec<f64> = sd.iter().map(|s| geo / s).collect();

    // pairwise squared distances in the rescaled coordinates
    let mut delta = vec![0.0; m * m];
    for i in 0..m {
        let xi = &points[i * dim..(i + 1) * dim];
        for j in (i + 1)..m {
            let xj = &points[j * dim..(j + 1) * dim];
            let mut q = 0.0;
            for l in 0..dim {
                let z = (xi[l] - xj[l]) * weight[l];
                q += z * z;
            }
            delta[i * m + j] = q;
            delta[j * m + i] = q;
        }
    }

    let k = ((m as f64).sqrt().ceil() as usize).min(m - 1);
    let mut row = Vec::with_capacity(m - 1);
    let mut radius: Vec<f64> = (0..m)
        .map(|i| {
            row.clear();
            row.extend((0..m).filter(|&j| j != i).map(|j| delta[i * m + j]));
            let (_, kth, _) = row.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
            kth.sqrt()
        })
        .collect();
    let r_max = radius.iter().copied().fold(0.0, f64::max);
    if !(r_max > 0.0) {
        return Err(Error::Degenerate("nearest-neighbor radii are all zero".into()));
    }
    for r in &mut radius {
        *r = r.max(r_max * 1e-3);
    }

    // Q_ij = delta_ij / r_j^2, overwriting delta
    for i in 0..m {
        for j in 0..m {
            delta[i * m + j] /= radius[j] * radius[j];
        }
    }
    let log_r: Vec<f64> = radius.iter().map(|r| -(dim as f64) * r.ln()).collect();
    let loo = |t: f64| loo_log_likelihood(&delta, &log_r, m, dim, t);
    let t = golden_section_max(loo, LOG_SCALE_BRACKET.0, LOG_SCALE_BRACKET.1, LOG_SCALE_TOL);

    let mut base = Vec::with_capacity(m * dim);
    for r in &radius {
        for s in &sd {
            base.push(r * s / geo);
        }
    }
    let mut model = AdaptiveDensityModel {
        dim,
        points: points.to_vec(),
        base_bandwidths: base,
        scale: t.exp(),
        label: None,
        inv_bandwidths: Vec::new(),
        log_norms: Vec::new(),
    };
    model.refresh();
    Ok(model)
}

/// LOO log-likelihood at global scale `exp(t)`, up to terms that do not
/// depend on `t`.
fn loo_log_likelihood(q: &[f64], neg_d_log_r: &[f64], m: usize, dim: usize, t: f64) -> f64 {
    let kappa = 0.5 * (-2.0 * t).exp();
    let mut total = 0.0;
    for i in 0..m {
        let row = &q[i * m..(i + 1) * m];
        let mut max = f64::NEG_INFINITY;
        for j in 0..m {
            if j != i {
                let v = neg_d_log_r[j] - row[j] * kappa;
                if v > max {
                    max = v;
                }
            }
        }
        let mut sum = 0.0;
        for j in 0..m {
            let z = neg_d_log_r[j] - row[j] * kappa - max;
            if j != i && z > NEGLIGIBLE {
                sum += z.exp();
            }
        }
        total += max + sum.ln();
    }
    total - (m * dim) as f64 * t
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Leave-one-out log-likelihood of a fitted model on its own points.
pub fn loo_log_likelihood_of(model: &AdaptiveDensityModel) -> f64 {
    let d = model.dim;
    (0..model.len())
        .map(|i| model.log_pdf_unchecked(&model.points[i * d..(i + 1) * d], Some(i)))
        .sum()
}

/// Log-domain mean-density scores behind a CLAKDE estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparativeScores {
    /// `log g_AA`: class A scored leave-one-out under its own model.
    pub g_aa: f64,
    pub g_bb: f64,
    /// `log g_AB`: class A scored under the class-B model.
    pub g_ab: f64,
    pub g_ba: f64,
    /// Similarity ratio, clamped to `[0, 1]`.
    pub j_value: f64,
    pub ber_hat: f64,
}

fn mean_log_score(model: &AdaptiveDensityModel, points: &[f64], loo: bool) -> f64 {
    let d = model.dim;
    let mut acc = LogSumExp::default();
    let count = points.len() / d;
    for (i, x) in points.chunks_exact(d).enumerate() {
        acc.push(model.log_pdf_unchecked(x, loo.then_some(i)));
    }
    acc.value() - (count as f64).ln()
}

/// Comparative adaptive-KDE estimate: cross-class mean densities over
/// leave-one-out self-class mean densities, halved.
pub fn clakde_scores(data: &LabeledDataset) -> Result<ComparativeScores> {
    data.require_both_classes()?;
    let d = data.dim();
    let xa = data.class_features(Label::A);
    let xb = data.class_features(Label::B);
    let mut model_a = adaptive_kde_fit(&xa, d)?;
    model_a.label = Some(Label::A);
    let mut model_b = adaptive_kde_fit(&xb, d)?;
    model_b.label = Some(Label::B);

    let g_aa = mean_log_score(&model_a, &xa, true);
    let g_bb = mean_log_score(&model_b, &xb, true);
    let g_ab = mean_log_score(&model_b, &xa, false);
    let g_ba = mean_log_score(&model_a, &xb, false);

    let log_j = log_add_exp(g_ab, g_ba) - log_add_exp(g_aa, g_bb);
    let j_value = log_j.min(0.0).exp().clamp(0.0, 1.0);
    Ok(ComparativeScores {
        g_aa,
        g_bb,
        g_ab,
        g_ba,
        j_value,
        ber_hat: j_value / 2.0,
    })
}

pub fn clakde_estimate(data: &LabeledDataset) -> Result<f64> {
    Ok(clakde_scores(data)?.ber_hat)
}

/// Mean of the GHP lower bound and the CLAKDE estimate.
pub fn gc_estimate(ghp_lower: f64, clakde: f64) -> f64 {
    0.5 * (ghp_lower + clakde)
}
