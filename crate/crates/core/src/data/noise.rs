use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Rng;

use super::Dataset;

/// How ε in `N(0, εI)` maps to the per-coordinate spread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseScale {
    /// ε is the per-coordinate variance (covariance εI), sd = √ε.
    #[default]
    Variance,
    /// ε is the per-coordinate standard deviation.
    StdDev,
}

impl NoiseScale {
    pub fn std_dev(self, epsilon: f64) -> f64 {
        match self {
            NoiseScale::Variance => epsilon.sqrt(),
            NoiseScale::StdDev => epsilon,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseScale::Variance => "variance",
            NoiseScale::StdDev => "sd",
        }
    }
}

impl fmt::Display for NoiseScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(NoiseScale::Variance),
            "sd" => Ok(NoiseScale::StdDev),
            other => Err(Error::InvalidArgument(format!(
                "unknown noise interpretation `{other}`, expected `variance` or `sd`"
            ))),
        }
    }
}

/// Adds independent Gaussian noise to every feature; labels are untouched.
pub fn add_input_noise(data: &Dataset, epsilon: f64, scale: NoiseScale, rng: &mut Rng) -> Result<Dataset> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("noise level {epsilon} must be a finite value >= 0")));
    }
    if epsilon == 0.0 {
        return Ok(data.clone());
    }
    let sd = scale.std_dev(epsilon);
    let mut x = data.x().clone();
    for v in x.as_mut_slice() {
        *v += sd * rng.normal();
    }
    data.with_features(x)
}

/// Replaces exactly `round(fraction · N)` labels, chosen without replacement,
/// each by a uniformly drawn different class.
pub fn corrupt_labels(data: &Dataset, fraction: f64, rng: &mut Rng) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("corruption fraction {fraction} outside [0, 1]")));
    }
    let classes = data.classes();
    let count = (fraction * data.len() as f64).round() as usize;
    if count == 0 {
        return Ok(data.clone());
    }
    if classes < 2 {
        return Err(Error::InvalidArgument("cannot corrupt labels with a single class".into()));
    }
    let mut labels = data.labels().to_vec();
    let mut chosen = rng.sample_indices(labels.len(), count);
    chosen.sort_unstable();
    for i in chosen {
        labels[i] = (labels[i] + 1 + rng.below(classes - 1)) % classes;
    }
    data.with_labels(labels)
}
