//! The four synthetic two-class problems (GvG, TvT, TvS, SvS).
//!
//! Every class is a mixture of isotropic Gaussians with frozen centers, so
//! densities are known exactly and the Bayes classifier is available as an
//! oracle. Hypersphere classes place their centers uniformly at random on the
//! sphere surface; the draw comes from a dedicated stream and is stored in the
//! [`ScenarioSpec`], so ground truth and simulations share one distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{invalid, Error, Result};
use crate::math::{sq_dist, LogSumExp, LN_2PI};

/// Minimum component variance for plain Gaussian classes.
pub const VARIANCE_FLOOR: f64 = 0.01;
/// Minimum component variance for hypersphere classes.
pub const SPHERE_VARIANCE_FLOOR: f64 = 0.1;
/// Variance used when only the offset is searched.
pub const DEFAULT_VARIANCE: f64 = 0.3;

/// Nominal sphere-center counts; each is jittered by a uniform integer in `[-2, 2]`.
pub const SPHERE_CENTERS_WITH_CORE: usize = 190;
pub const SPHERE_CENTERS: usize = 200;
const SPHERE_JITTER: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// One Gaussian per class.
    GvG,
    /// Three-mode mixture against an interleaved two-mode mixture.
    TvT,
    /// Three-mode mixture against a hypersphere mixture.
    TvS,
    /// Hypersphere with a central Gaussian against a half-radius hypersphere.
    SvS,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::GvG, Family::TvT, Family::TvS, Family::SvS];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::GvG => "GvG",
            Family::TvT => "TvT",
            Family::TvS => "TvS",
            Family::SvS => "SvS",
        }
    }

    /// Smallest dimension the family is defined for.
    pub fn min_dim(self) -> usize {
        match self {
            Family::GvG | Family::TvT => 1,
            Family::TvS | Family::SvS => 2,
        }
    }

    fn variance_floor(self, label: Label) -> f64 {
        match (self, label) {
            (Family::TvS, Label::B) | (Family::SvS, _) => SPHERE_VARIANCE_FLOOR,
            _ => VARIANCE_FLOOR,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gvg" => Ok(Family::GvG),
            "tvt" => Ok(Family::TvT),
            "tvs" => Ok(Family::TvS),
            "svs" => Ok(Family::SvS),
            _ => invalid(format!("unknown scenario family `{s}`")),
        }
    }
}

/// Free parameters of a scenario before its centers are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub family: Family,
    pub d: usize,
    /// Offset between modes, in feature-space units. Unused by SvS.
    pub mu: f64,
    pub var_a: f64,
    pub var_b: f64,
    /// Class-A sphere radius; only SvS uses it.
    pub r_a: f64,
}

impl ScenarioParams {
    /// Parameters with the default variance on both classes.
    pub fn new(family: Family, d: usize, mu: f64) -> Self {
        ScenarioParams {
            family,
            d,
            mu,
            var_a: DEFAULT_VARIANCE,
            var_b: DEFAULT_VARIANCE,
            r_a: if family == Family::SvS { mu } else { 0.0 },
        }
    }

    pub fn with_variances(mut self, var_a: f64, var_b: f64) -> Self {
        self.var_a = var_a;
        self.var_b = var_b;
        self
    }

    pub fn with_radius(mut self, r_a: f64) -> Self {
        self.r_a = r_a;
        self
    }

    /// The single scalar that calibration searches over.
    pub fn control(&self) -> f64 {
        match self.family {
            Family::SvS => self.r_a,
            _ => self.mu,
        }
    }

    pub fn with_control(mut self, value: f64) -> Self {
        match self.family {
            Family::SvS => self.r_a = value,
            _ => self.mu = value,
        }
        self
    }

    fn validate(&self) -> Result<()> {
        let fam = self.family;
        if self.d == 0 {
            return invalid("d must be at least 1");
        }
        if self.d < fam.min_dim() {
            return invalid(format!("{fam} requires d >= {}", fam.min_dim()));
        }
        if !self.mu.is_finite() || self.mu < 0.0 {
            return invalid(format!("mu must be finite and nonnegative, got {}", self.mu));
        }
        for (var, label) in [(self.var_a, Label::A), (self.var_b, Label::B)] {
            if !var.is_finite() || var <= 0.0 {
                return invalid(format!("variance of class {label:?} must be positive, got {var}"));
            }
            let floor = fam.variance_floor(label);
            if var < floor {
                return invalid(format!(
                    "variance of class {label:?} in {fam} must be >= {floor}, got {var}"
                ));
            }
        }
        if fam == Family::SvS && !(self.r_a.is_finite() && self.r_a > 0.0) {
            return invalid(format!("SvS requires r_a > 0, got {}", self.r_a));
        }
        Ok(())
    }
}

/// One class of a scenario: an equal-variance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "MixtureRepr")]
pub struct ClassMixture {
    pub var: f64,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
    #[serde(skip)]
    log_weights: Vec<f64>,
}

#[derive(Deserialize)]
struct MixtureRepr {
    var: f64,
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl From<MixtureRepr> for ClassMixture {
    fn from(r: MixtureRepr) -> Self {
        ClassMixture::new(r.var, r.centers, r.weights)
    }
}

impl ClassMixture {
    fn new(var: f64, centers: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        let mut m = ClassMixture {
            var,
            centers,
            weights,
            cumulative: Vec::new(),
            log_weights: Vec::new(),
        };
        m.rebuild_cumulative();
        m
    }

    fn rebuild_cumulative(&mut self) {
        let mut acc = 0.0;
        self.cumulative = self
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        self.log_weights = self.weights.iter().map(|w| w.ln()).collect();
    }

    fn equal(var: f64, centers: Vec<Vec<f64>>) -> Self {
        let w = 1.0 / centers.len() as f64;
        let weights = vec![w; centers.len()];
        ClassMixture::new(var, centers, weights)
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let norm = -0.5 * d * (LN_2PI + self.var.ln());
        let inv = 0.5 / self.var;
        let mut acc = LogSumExp::default();
        for (c, lw) in self.centers.iter().zip(&self.log_weights) {
            acc.push(lw + norm - sq_dist(x, c) * inv);
        }
        acc.value()
    }

    fn pick_component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("mixture has components");
        let u: f64 = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.centers.len() - 1)
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) -> usize {
        let k = self.pick_component(rng);
        let sd = self.var.sqrt();
        for &c in &self.centers[k] {
            let z: f64 = rng.sample(StandardNormal);
            out.push(c + sd * z);
        }
        k
    }
}

/// A fully parameterized two-class distribution pair with frozen mixture centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario_id: String,
    pub family: Family,
    pub d: usize,
    pub mu: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub class_a: ClassMixture,
    pub class_b: ClassMixture,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            family: self.family,
            d: self.d,
            mu: self.mu,
            var_a: self.var_a,
            var_b: self.var_b,
            r_a: self.r_a,
        }
    }

    pub fn class(&self, label: Label) -> &ClassMixture {
        match label {
            Label::A => &self.class_a,
            Label::B => &self.class_b,
        }
    }

    /// Exact log density of `x` under the class distribution.
    pub fn log_pdf(&self, label: Label, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(self.class(label).log_pdf(x))
    }

    #[inline]
    pub(crate) fn log_pdf_unchecked(&self, label: Label, x: &[f64]) -> f64 {
        self.class(label).log_pdf(x)
    }

    /// Draws `count` i.i.d. points from one class.
    pub fn sample<R: Rng + ?Sized>(&self, label: Label, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mixture = self.class(label);
        (0..count)
            .map(|_| {
                let mut x = Vec::with_capacity(self.d);
                mixture.sample_into(rng, &mut x);
                x
            })
            .collect()
    }

    /// Like [`sample`](Self::sample) but also returns the mixture component of each draw.
    pub fn sample_with_components<R: Rng + ?Sized>(
        &self,
        label: Label,
        count: usize,
        rng: &mut R,
    ) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mixture = self.class(label);
        (0..count)
            .map(|_| {
                let mut x = Vec::with_capacity(self.d);
                let k = mixture.sample_into(rng, &mut x);
                (x, k)
            })
            .unzip()
    }

    pub(crate) fn sample_point_into<R: Rng + ?Sized>(&self, label: Label, rng: &mut R, out: &mut Vec<f64>) {
        self.class(label).sample_into(rng, out);
    }

    /// Draws `n_per_class` points from A, then `n_per_class` from B.
    pub fn sample_dataset<R: Rng + ?Sized>(&self, n_per_class: usize, rng: &mut R) -> LabeledDataset {
        let mut features = Vec::with_capacity(2 * n_per_class * self.d);
        let mut labels = Vec::with_capacity(2 * n_per_class);
        for label in [Label::A, Label::B] {
            for _ in 0..n_per_class {
                self.sample_point_into(label, rng, &mut features);
                labels.push(label);
            }
        }
        LabeledDataset::new(self.d, features, labels).expect("sampled points are finite")
    }

    /// The same scenario with class B replaced by a copy of class A.
    pub fn with_identical_classes(&self) -> ScenarioSpec {
        let mut spec = self.clone();
        spec.class_b = spec.class_a.clone();
        spec.var_b = spec.var_a;
        spec.r_b = spec.r_a;
        spec.scenario_id = format!("{}-identical", self.scenario_id);
        spec
    }

    fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        let body = serde_json::to_vec(&(
            self.family,
            self.d,
            self.mu,
            self.var_a,
            self.var_b,
            self.r_a,
            self.r_b,
            &self.class_a,
            &self.class_b,
        ))
        .expect("spec serializes");
        hasher.update(&body);
        let digest = hasher.finalize();
        let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
        format!("{}-d{}-{}", self.family.as_str().to_ascii_lowercase(), self.d, hex)
    }
}

/// Centers placed uniformly at random on the sphere of the given radius
/// (normalized isotropic Gaussian draws).
pub fn hypersphere_centers<R: Rng + ?Sized>(
    d: usize,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if d < 2 {
        return invalid(format!("hypersphere centers need d >= 2, got {d}"));
    }
    if !radius.is_finite() || radius < 0.0 {
        return invalid(format!("radius must be finite and nonnegative, got {radius}"));
    }
    if count == 0 {
        return invalid("hypersphere center count must be positive");
    }
    Ok(unit_directions(d, count, rng)
        .into_iter()
        .map(|u| u.into_iter().map(|v| v * radius).collect())
        .collect())
}

fn unit_directions<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // measure-zero, but a zero vector has no direction
        if norm < 1e-12 {
            continue;
        }
        out.push(v.into_iter().map(|x| x / norm).collect());
    }
    out
}

fn jittered_count<R: Rng + ?Sized>(nominal: usize, rng: &mut R) -> usize {
    let j = rng.gen_range(-SPHERE_JITTER..=SPHERE_JITTER);
    (nominal as i64 + j) as usize
}

fn diagonal(d: usize, per_coord: f64) -> Vec<f64> {
    vec![per_coord; d]
}

fn three_modes(d: usize, mu: f64) -> Vec<Vec<f64>> {
    let step = (mu * mu / d as f64).sqrt();
    vec![vec![0.0; d], diagonal(d, step), diagonal(d, -step)]
}

fn scale(dirs: &[Vec<f64>], radius: f64) -> Vec<Vec<f64>> {
    dirs.iter()
        .map(|u| u.iter().map(|v| v * radius).collect())
        .collect()
}

/// Builds a scenario, drawing any hypersphere centers from `center_rng`.
///
/// Identical parameters and stream state give identical specs. The sphere
/// sizes are drawn first and then the unit directions, so scenarios that differ
/// only in offset or radius share their directions when built from the same
/// stream state.
pub fn build_scenario<R: Rng + ?Sized>(params: ScenarioParams, center_rng: &mut R) -> Result<ScenarioSpec> {
    params.validate()?;
    let ScenarioParams {
        family,
        d,
        mu,
        var_a,
        var_b,
        r_a,
    } = params;

    let (class_a, class_b, r_a, r_b) = match family {
        Family::GvG => {
            let a = ClassMixture::equal(var_a, vec![vec![0.0; d]]);
            let b = ClassMixture::equal(var_b, vec![diagonal(d, (mu * mu / d as f64).sqrt())]);
            (a, b, 0.0, 0.0)
        }
        Family::TvT => {
            let a = ClassMixture::equal(var_a, three_modes(d, mu));
            let half = (0.25 * mu * mu / d as f64).sqrt();
            let b = ClassMixture::equal(var_b, vec![diagonal(d, half), diagonal(d, -half)]);
            (a, b, 0.0, 0.0)
        }
        Family::TvS => {
            let a = ClassMixture::equal(var_a, three_modes(d, mu));
            let n_b = jittered_count(SPHERE_CENTERS, center_rng);
            let r_b = mu / 2.0;
            let b = ClassMixture::equal(var_b, scale(&unit_directions(d, n_b, center_rng), r_b));
            (a, b, 0.0, r_b)
        }
        Family::SvS => {
            let n_a = jittered_count(SPHERE_CENTERS_WITH_CORE, center_rng);
            let n_b = jittered_count(SPHERE_CENTERS, center_rng);
            let dirs_a = unit_directions(d, n_a, center_rng);
            let dirs_b = unit_directions(d, n_b, center_rng);
            let r_b = r_a / 2.0;

            let mut centers = Vec::with_capacity(n_a + 1);
            centers.push(vec![0.0; d]);
            centers.extend(scale(&dirs_a, r_a));
            let mut weights = Vec::with_capacity(n_a + 1);
            weights.push(0.5);
            weights.extend(std::iter::repeat(0.5 / n_a as f64).take(n_a));
            let a = ClassMixture::new(var_a, centers, weights);
            let b = ClassMixture::equal(var_b, scale(&dirs_b, r_b));
            (a, b, r_a, r_b)
        }
    };

    let mut spec = ScenarioSpec {
        scenario_id: String::new(),
        family,
        d,
        mu,
        var_a,
        var_b,
        r_a,
        r_b,
        class_a,
        class_b,
    };
    spec.scenario_id = spec.fingerprint();
    Ok(spec)
}
