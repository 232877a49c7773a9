//! Parameter expansion for the correlation update.
//!
//! The correlation matrix is updated through an expanded covariance
//! Σ = A R A with working scales A. A is drawn from its conditional given R,
//! the standardized residuals are mapped into the expanded space, Σ is
//! redrawn there, and the result is projected back to a correlation matrix.
//!
//! In [`ExpansionMode::Exact`] the move is a marginal-augmentation step on the
//! joint state: the new scales σ' are carried back into the binary latent
//! columns and class means (multiplied by a_j / σ'_j) and into the continuous
//! scales Λ (multiplied by σ'_j / a_j). For that map to leave the posterior
//! invariant, the Σ target picks up the factor
//!
//! ```text
//! g(σ) = Π_{binary j} Π_c σ_j⁻¹ N(a_j μ_cj / σ_j; μ0_cj, σ_c²) · Π_{continuous j} σ_j
//! ```
//!
//! from the prior of μ and the flat prior of Λ. Under the uniform prior the
//! conjugate Wishart draw becomes an independence proposal accepted with
//! probability min(1, g(σ') / g(a)); under the spike-and-slab prior g enters
//! the column-wise slice samplers directly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::config::{ChainConfig, ExpansionMode, PriorKind, SpikeSlabHyper, WishartDf};
use super::omega::sweep_columns;
use super::state::ModelState;
use crate::data::MixedDataset;
use crate::distributions::{sample_inverse_gamma, sample_wishart};
use crate::error::Result;
use crate::linalg::{spd_inverse, to_correlation};

/// Working quantities of one expanded update.
#[derive(Clone, Debug)]
pub struct SamplerWorkspace {
    /// Working scales a_j.
    pub d: DVector<f64>,
    /// Expanded residuals W_i = A Λ⁻¹ (Z_i − μ_{y_i}).
    pub w: DMatrix<f64>,
    /// Σ_i W_i W_iᵀ.
    pub s: DMatrix<f64>,
}

/// Draw working scales from their conditional given R and form the expanded
/// residuals. Under the uniform prior d_j² ~ InvGamma((p+1)/2, r^{jj}/2);
/// under the spike-and-slab prior d_j² ~ InvGamma((p+1)/2, 1/2).
pub fn expand<R: Rng + ?Sized>(
    z: &DMatrix<f64>,
    mu: &DMatrix<f64>,
    y: &[usize],
    r: &DMatrix<f64>,
    lambda: &DVector<f64>,
    prior_kind: PriorKind,
    rng: &mut R,
) -> Result<SamplerWorkspace> {
    let p = r.nrows();
    let shape = (p as f64 + 1.0) / 2.0;
    let mut d = DVector::zeros(p);
    match prior_kind {
        PriorKind::MarginalUniform => {
            let k = spd_inverse(r, "correlation matrix")?;
            for j in 0..p {
                d[j] = sample_inverse_gamma(shape, k[(j, j)] / 2.0, rng)?.sqrt();
            }
        }
        PriorKind::SpikeSlab => {
            for j in 0..p {
                d[j] = sample_inverse_gamma(shape, 0.5, rng)?.sqrt();
            }
        }
    }
    Ok(expand_with_scales(z, mu, y, lambda, d))
}

/// Expanded residuals and their cross-product for given working scales.
pub fn expand_with_scales(
    z: &DMatrix<f64>,
    mu: &DMatrix<f64>,
    y: &[usize],
    lambda: &DVector<f64>,
    d: DVector<f64>,
) -> SamplerWorkspace {
    let (n, p) = (z.nrows(), z.ncols());
    let w = DMatrix::from_fn(n, p, |i, j| d[j] * (z[(i, j)] - mu[(y[i], j)]) / lambda[j]);
    let s = w.transpose() * &w;
    SamplerWorkspace { d, w, s }
}

/// Conjugate draw Ω ~ Wishart(df, (I + S)⁻¹) under the uniform prior.
pub fn update_omega_uniform<R: Rng + ?Sized>(
    ws: &SamplerWorkspace,
    n: usize,
    df: WishartDf,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = ws.s.nrows();
    let dof = match df {
        WishartDf::Standard => (n + p + 1) as f64,
        WishartDf::PlusTwo => (n + p + 2) as f64,
    };
    let mut post = ws.s.clone();
    for j in 0..p {
        post[(j, j)] += 1.0;
    }
    let scale = spd_inverse(&post, "I + S")?;
    sample_wishart(dof, &scale, rng)
}

/// Correlation matrix and standard deviations of Ω⁻¹.
pub fn project_back(omega: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let sigma = spd_inverse(omega, "expanded precision")?;
    Ok(to_correlation(&sigma))
}

/// The factor g(σ) of the exact expansion, evaluated on variances σ².
#[derive(Clone, Debug)]
pub(crate) struct ScaleTarget {
    binary: Vec<usize>,
    continuous: Vec<usize>,
    /// a_j μ_cj for binary j.
    scaled_mu: DMatrix<f64>,
    mu0: DMatrix<f64>,
    inv_sigma2: Vec<f64>,
}

impl ScaleTarget {
    pub(crate) fn new(
        data: &MixedDataset,
        mu: &DMatrix<f64>,
        mu0: &DMatrix<f64>,
        sigma2: &[f64],
        a: &DVector<f64>,
    ) -> Self {
        let p = data.p();
        let binary: Vec<usize> = (0..p).filter(|&j| data.is_binary(j)).collect();
        Self {
            continuous: data.continuous_indices(),
            scaled_mu: DMatrix::from_fn(mu.nrows(), p, |c, j| a[j] * mu[(c, j)]),
            mu0: mu0.clone(),
            inv_sigma2: sigma2.iter().map(|s| 1.0 / s).collect(),
            binary,
        }
    }

    pub(crate) fn log_g(&self, var: impl Fn(usize) -> f64) -> f64 {
        let classes = self.scaled_mu.nrows() as f64;
        let mut total = 0.0;
        for &j in &self.binary {
            let v = var(j);
            let sd = v.sqrt();
            total -= 0.5 * classes * v.ln();
            for c in 0..self.scaled_mu.nrows() {
                let t = self.scaled_mu[(c, j)] / sd - self.mu0[(c, j)];
                total -= 0.5 * t * t * self.inv_sigma2[c];
            }
        }
        for &j in &self.continuous {
            total += 0.5 * var(j).ln();
        }
        total
    }
}

/// One full correlation update: expand, redraw the expanded precision, and
/// project back, carrying the new scales into Z, μ and Λ in exact mode.
///
/// Returns the updated inverse correlation matrix R⁻¹.
pub(crate) fn correlation_step<R: Rng + ?Sized>(
    state: &mut ModelState,
    data: &MixedDataset,
    mu0: &DMatrix<f64>,
    cfg: &ChainConfig,
    hyper: &SpikeSlabHyper,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let n = state.z.nrows();
    let p = state.z.ncols();
    let ws = expand(
        &state.z,
        &state.mu,
        &state.y,
        &state.corr.r,
        &state.corr.lambda,
        cfg.prior_kind,
        rng,
    )?;
    let target = match cfg.expansion {
        ExpansionMode::Exact => Some(ScaleTarget::new(data, &state.mu, mu0, &state.sigma2, &ws.d)),
        ExpansionMode::Plain => None,
    };
    let (omega, sigma) = match cfg.prior_kind {
        PriorKind::MarginalUniform => {
            let omega = update_omega_uniform(&ws, n, cfg.wishart_df, rng)?;
            let sigma = spd_inverse(&omega, "expanded precision")?;
            if let Some(t) = &target {
                let log_ratio = t.log_g(|j| sigma[(j, j)]) - t.log_g(|j| ws.d[j] * ws.d[j]);
                let u: f64 = rng.gen();
                if log_ratio < 0.0 && u.ln() >= log_ratio {
                    // Rejected: the state is unchanged.
                    return spd_inverse(&state.corr.r, "correlation matrix");
                }
            }
            (omega, sigma)
        }
        PriorKind::SpikeSlab => {
            let k = spd_inverse(&state.corr.r, "correlation matrix")?;
            let d = &ws.d;
            let mut omega = DMatrix::from_fn(p, p, |j, l| k[(j, l)] / (d[j] * d[l]));
            let mut sigma = DMatrix::from_fn(p, p, |j, l| state.corr.r[(j, l)] * d[j] * d[l]);
            sweep_columns(
                &mut omega,
                &mut sigma,
                &ws.s,
                n,
                &state.corr.delta,
                hyper,
                cfg.v_sampling,
                target.as_ref(),
                rng,
            )?;
            (omega, sigma)
        }
    };
    let (r, sd) = to_correlation(&sigma);
    if target.is_some() {
        for j in 0..p {
            let a = ws.d[j];
            if data.is_binary(j) {
                let f = a / sd[j];
                state.z.column_mut(j).scale_mut(f);
                state.mu.column_mut(j).scale_mut(f);
            } else {
                state.corr.lambda[j] *= sd[j] / a;
            }
        }
    }
    state.corr.r = r;
    Ok(DMatrix::from_fn(p, p, |j, l| sd[j] * sd[l] * omega[(j, l)]))
}
