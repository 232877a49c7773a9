use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior on the latent correlation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Ω ~ Wishart(p + 1, I) in the expanded space: uniform marginal correlations.
    MarginalUniform,
    /// Continuous spike-and-slab on the off-diagonal inverse correlations.
    SpikeSlab,
}

/// How the Schur complement `v` is drawn in each spike-and-slab column update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VSampling {
    /// Treat the moment-matched normal as if it were the Gamma kernel.
    GaussianApprox,
    /// Keep the Gamma kernel; the normal is only the slice reference.
    ExactReweighted,
}

/// Degrees of freedom of the conjugate Wishart draw under the uniform prior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WishartDf {
    /// n + p + 1, from Wishart conjugacy.
    Standard,
    /// n + p + 2.
    PlusTwo,
}

/// Treatment of the latent values and means in the parameter-expanded R step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMode {
    /// Marginal augmentation that keeps the posterior invariant: the new
    /// scales are carried back into Z, μ and Λ, and the prior of μ and the
    /// flat prior of Λ enter the expanded-scale target.
    Exact,
    /// Draw Ω from the expanded conditional and project to R while holding Z,
    /// μ and Λ fixed. Slightly biased whenever the data constrain the scales.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeSlabHyper {
    pub v0: f64,
    pub v1: f64,
    pub lambda: f64,
    pub pi_delta: f64,
}

impl Default for SpikeSlabHyper {
    fn default() -> Self {
        Self {
            v0: 0.01,
            v1: 1.0,
            lambda: 10.0,
            pi_delta: 1e-4,
        }
    }
}

impl SpikeSlabHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.v1 >= self.v0 && self.v1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < v0 <= v1, got v0={}, v1={}",
                self.v0, self.v1
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.pi_delta > 0.0 && self.pi_delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pi_delta must lie in (0, 1], got {}",
                self.pi_delta
            )));
        }
        Ok(())
    }
}

/// Informative prior on the latent means: μ ~ N(mu0, sigma2 I).
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalPrior {
    pub mu0: DVector<f64>,
    pub sigma2: f64,
}

impl MarginalPrior {
    pub fn new(mu0: DVector<f64>, sigma2: f64) -> Result<Self> {
        let prior = Self { mu0, sigma2 };
        prior.validate()?;
        Ok(prior)
    }

    /// Prior centered at zero with unit variance.
    pub fn standard(p: usize) -> Self {
        Self {
            mu0: DVector::zeros(p),
            sigma2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu0.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("prior means must be finite".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prior variance must be positive, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub prior_kind: PriorKind,
    pub v_sampling: VSampling,
    pub wishart_df: WishartDf,
    pub expansion: ExpansionMode,
    pub seed: u64,
    pub n_chains: usize,
    /// Number of row blocks for the parallel latent update. Part of the
    /// reproducibility contract: results depend on it, not on thread count.
    pub row_blocks: usize,
    /// Store every saved draw, not only running summaries.
    pub keep_draws: bool,
    /// Rerun with δ frozen at the first-stage median graph.
    pub two_stage: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 3000,
            burn_in: 1500,
            thin: 1,
            prior_kind: PriorKind::SpikeSlab,
            v_sampling: VSampling::GaussianApprox,
            wishart_df: WishartDf::Standard,
            expansion: ExpansionMode::Exact,
            seed: 1,
            n_chains: 1,
            row_blocks: 8,
            keep_draws: false,
            two_stage: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.thin == 0 || self.n_chains == 0 || self.row_blocks == 0 {
            return Err(Error::Config(
                "n_iter, thin, chains and row_blocks must be positive".into(),
            ));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.n_iter
            )));
        }
        Ok(())
    }

    /// Number of draws a chain will save.
    pub fn n_saved(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }

    pub(crate) fn is_saved(&self, iter: usize) -> bool {
        iter >= self.burn_in && (iter - self.burn_in).is_multiple_of(self.thin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saved_draw_count() {
        let cfg = ChainConfig {
            n_iter: 10,
            burn_in: 5,
            thin: 1,
            ..Default::default()
        };
        assert_eq!(cfg.n_saved(), 5);
        assert_eq!((0..10).filter(|&t| cfg.is_saved(t)).count(), 5);
        let cfg = ChainConfig {
            n_iter: 10,
            burn_in: 3,
            thin: 3,
            ..Default::default()
        };
        assert_eq!(cfg.n_saved(), (0..10).filter(|&t| cfg.is_saved(t)).count());
    }

    #[test]
    fn invalid_configs() {
        let cfg = ChainConfig {
            n_iter: 10,
            burn_in: 10,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let h = SpikeSlabHyper {
            v0: 1.0,
            v1: 0.5,
            ..Default::default()
        };
        assert!(h.validate().is_err());
        assert!(MarginalPrior::new(DVector::from_element(2, f64::NAN), 1.0).is_err());
    }
}
