use nalgebra::DMatrix;

use crate::distributions::probit;
use crate::error::{Error, Result};

/// Class-conditional probabilities P(variable = 1 | class) used to centre the
/// latent class means, plus optional prior means for continuous variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalProbabilityPrior {
    /// C×p; entries of continuous columns are ignored.
    pub probs: DMatrix<f64>,
    /// Which columns are binary.
    pub binary: Vec<bool>,
    /// C×p latent means for continuous columns; zero when absent.
    pub continuous_prior_means: Option<DMatrix<f64>>,
}

impl ConditionalProbabilityPrior {
    pub fn new(probs: DMatrix<f64>, binary: Vec<bool>) -> Result<Self> {
        if probs.ncols() != binary.len() {
            return Err(Error::Config(format!(
                "probability table has {} columns for {} variables",
                probs.ncols(),
                binary.len()
            )));
        }
        if probs.nrows() == 0 {
            return Err(Error::Config("probability table has no classes".into()));
        }
        for ((c, j), &v) in index_iter(&probs) {
            if binary[j] && !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "probability {v} for class {c}, variable {j} is outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            probs,
            binary,
            continuous_prior_means: None,
        })
    }

    pub fn with_continuous_means(mut self, means: DMatrix<f64>) -> Result<Self> {
        if means.shape() != self.probs.shape() {
            return Err(Error::Config("continuous prior means have the wrong shape".into()));
        }
        self.continuous_prior_means = Some(means);
        Ok(self)
    }

    pub fn n_classes(&self) -> usize {
        self.probs.nrows()
    }

    /// Replace exact zeros by `fracs.0 · p_min` and exact ones by
    /// `1 − fracs.1 · (1 − p_max)`, where `p_min` and `p_max` are the smallest
    /// and largest binary entries strictly inside (0, 1).
    pub fn clamped(mut self, fracs: (f64, f64)) -> Result<Self> {
        if !(fracs.0 > 0.0 && fracs.0 < 1.0 && fracs.1 > 0.0 && fracs.1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "clamping fractions {fracs:?} must lie in (0, 1)"
            )));
        }
        let interior: Vec<f64> = index_iter(&self.probs)
            .filter(|((_, j), v)| self.binary[*j] && **v > 0.0 && **v < 1.0)
            .map(|(_, &v)| v)
            .collect();
        let needs = index_iter(&self.probs).any(|((_, j), &v)| self.binary[j] && (v == 0.0 || v == 1.0));
        if !needs {
            return Ok(self);
        }
        if interior.is_empty() {
            return Err(Error::Config(
                "cannot clamp: no probability strictly between 0 and 1".into(),
            ));
        }
        let p_min = interior.iter().copied().fold(f64::INFINITY, f64::min);
        let p_max = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = (fracs.0 * p_min, 1.0 - fracs.1 * (1.0 - p_max));
        let binary = &self.binary;
        for (j, mut col) in self.probs.column_iter_mut().enumerate() {
            if !binary[j] {
                continue;
            }
            for v in col.iter_mut() {
                if *v == 0.0 {
                    *v = lo;
                } else if *v == 1.0 {
                    *v = hi;
                }
            }
        }
        Ok(self)
    }

    /// Latent prior centres: the probit of each binary probability, and the
    /// supplied means (or zero) for continuous columns.
    pub fn build_mu0(&self) -> Result<DMatrix<f64>> {
        let (classes, p) = self.probs.shape();
        let mut out = DMatrix::zeros(classes, p);
        for c in 0..classes {
            for j in 0..p {
                out[(c, j)] = if self.binary[j] {
                    let v = self.probs[(c, j)];
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::Config(format!(
                            "probability {v} for class {c}, variable {j} must be strictly inside (0, 1); clamp first"
                        )));
                    }
                    probit(v)
                } else {
                    self.continuous_prior_means.as_ref().map_or(0.0, |m| m[(c, j)])
                };
            }
        }
        Ok(out)
    }
}

fn index_iter(m: &DMatrix<f64>) -> impl Iterator<Item = ((usize, usize), &f64)> {
    let rows = m.nrows();
    m.iter().enumerate().map(move |(k, v)| ((k % rows, k / rows), v))
}
