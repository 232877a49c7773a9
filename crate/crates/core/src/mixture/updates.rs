//! Mixture-specific conditional updates: class assignments, class fractions
//! and class-mean prior variances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use statrs::distribution::{ContinuousCDF, Gamma};

use crate::distributions::{ess_sample, sample_inverse_gamma, std_normal};
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::model::CorrelationState;

/// Smallest scale allowed in the σ_θ² draw. Keeps the inverse gamma proper
/// when every θ_c coincides with μ_θ.
const MIN_THETA_SPREAD: f64 = 1e-8;

/// Upper truncation point of σ_θ². With flat hyperpriors an empty class lets
/// its θ_c and σ_θ² drift off together without bound; the cap only binds in
/// that case (class fractions below e^{-100} are already indistinguishable
/// from zero).
const MAX_SIGMA2_THETA: f64 = 1e4;

/// Class probabilities of every row, `∝ π_c φ(Z_i; μ_c, ΛRΛ)`.
///
/// `pi = None` drops the π_c factor. Rows come out normalized and are
/// computed in log space.
pub fn assignment_probabilities(
    z: &DMatrix<f64>,
    mu: &DMatrix<f64>,
    corr: &CorrelationState,
    pi: Option<&DVector<f64>>,
) -> Result<DMatrix<f64>> {
    let k = spd_inverse(&corr.latent_covariance(), "latent covariance")?;
    let classes = mu.nrows();
    let mu_t = mu.transpose();
    let k_mu = &k * &mu_t;
    let half_quad: Vec<f64> = (0..classes).map(|c| 0.5 * mu_t.column(c).dot(&k_mu.column(c))).collect();
    let log_pi: Vec<f64> = match pi {
        Some(pi) => pi.iter().map(|v| v.ln()).collect(),
        None => vec![0.0; classes],
    };
    let mut out = DMatrix::zeros(z.nrows(), classes);
    let mut logw = vec![0.0; classes];
    for i in 0..z.nrows() {
        let zi = z.row(i).transpose();
        // The term z'Kz/2 is common to all classes and cancels.
        for c in 0..classes {
            logw[c] = log_pi[c] + zi.dot(&k_mu.column(c)) - half_quad[c];
        }
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Sampler(format!("every class has zero mass for row {i}")));
        }
        let total: f64 = logw.iter().map(|w| (w - max).exp()).sum();
        for c in 0..classes {
            out[(i, c)] = (logw[c] - max).exp() / total;
        }
    }
    Ok(out)
}

/// Redraw the class of every unlabeled row from `probs`; labeled rows keep
/// their class.
pub fn update_assignments<R: Rng + ?Sized>(
    probs: &DMatrix<f64>,
    labeled: &[bool],
    y: &mut [usize],
    rng: &mut R,
) {
    for (i, yi) in y.iter_mut().enumerate() {
        if labeled[i] {
            continue;
        }
        *yi = sample_class(probs.row(i).iter().copied(), rng);
    }
}

pub(crate) fn sample_class<R: Rng + ?Sized>(
    weights: impl Iterator<Item = f64> + Clone,
    rng: &mut R,
) -> usize {
    let total: f64 = weights.clone().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (c, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = c;
        }
        if u < acc {
            return c;
        }
    }
    last
}

/// Over-parameterized class-fraction state: `π = softmax(θ)` with
/// `θ ~ N(μ_θ, σ_θ² I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsmfState {
    pub theta: DVector<f64>,
    pub mu_theta: f64,
    pub sigma2_theta: f64,
}

impl CsmfState {
    /// θ drawn from N(0, 1), μ_θ = 0, σ_θ² = 1.
    pub fn random<R: Rng + ?Sized>(classes: usize, rng: &mut R) -> Self {
        Self {
            theta: DVector::from_fn(classes, |_, _| std_normal(rng)),
            mu_theta: 0.0,
            sigma2_theta: 1.0,
        }
    }

    /// θ = log of `fractions` (floored at 1e-3 and centred), with μ_θ = 0 and
    /// σ_θ² the spread of θ, floored at 0.1.
    pub fn from_fractions(fractions: &[f64]) -> Self {
        let logs: Vec<f64> = fractions.iter().map(|&f| f.max(1e-3).ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let theta = DVector::from_iterator(logs.len(), logs.iter().map(|l| l - mean));
        let spread = theta.norm_squared() / theta.len() as f64;
        Self {
            theta,
            mu_theta: 0.0,
            sigma2_theta: spread.max(0.1),
        }
    }

    pub fn pi(&self) -> DVector<f64> {
        softmax(&self.theta)
    }
}

pub fn softmax(theta: &DVector<f64>) -> DVector<f64> {
    let max = theta.max();
    let e = theta.map(|t| (t - max).exp());
    let s = e.sum();
    e / s
}

/// One Gibbs pass over (μ_θ, σ_θ², θ) given class counts.
///
/// μ_θ and σ_θ² come from their conditionals under flat priors, in that
/// order; θ then takes one elliptical slice step targeting
/// `∏ π_c^{n_c} · N(θ; μ_θ, σ_θ² I)`.
pub fn update_csmf<R: Rng + ?Sized>(state: &mut CsmfState, counts: &[usize], rng: &mut R) -> Result<()> {
    let classes = state.theta.len();
    if counts.len() != classes || classes < 2 {
        return Err(Error::InvalidParameter(format!(
            "{} counts for {classes} classes (at least two needed)",
            counts.len()
        )));
    }
    let c = classes as f64;
    let mean = state.theta.mean();
    state.mu_theta = mean + (state.sigma2_theta / c).sqrt() * std_normal(rng);
    let spread = (state.theta.iter().map(|t| (t - state.mu_theta).powi(2)).sum::<f64>() / c)
        .max(MIN_THETA_SPREAD);
    let nu = c - 1.0;
    state.sigma2_theta = sample_capped_inverse_gamma(nu / 2.0, nu * spread / 2.0, MAX_SIGMA2_THETA, rng)?;
    let n: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
    let total: f64 = n.iter().sum();
    let log_lik = |t: &DVector<f64>| {
        let max = t.max();
        let lse = max + t.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        n.iter().zip(t.iter()).map(|(nc, tc)| nc * tc).sum::<f64>() - total * lse
    };
    let prior_mean = DVector::from_element(classes, state.mu_theta);
    let chol = DMatrix::from_diagonal_element(classes, classes, state.sigma2_theta.sqrt());
    state.theta = ess_sample(&state.theta, &prior_mean, &chol, log_lik, rng)
        .map_err(|e| Error::Sampler(format!("class fractions: {e}")))?;
    Ok(())
}

/// Inverse gamma draw restricted to `(0, cap]`, by inversion of the gamma
/// distribution of the reciprocal.
fn sample_capped_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, cap: f64, rng: &mut R) -> Result<f64> {
    let x = sample_inverse_gamma(shape, scale, rng)?;
    if x <= cap {
        return Ok(x);
    }
    let g = Gamma::new(shape, scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let lo = g.cdf(1.0 / cap);
    if lo > 1.0 - 1e-12 {
        return Ok(cap);
    }
    let u = lo + (1.0 - lo) * rng.gen::<f64>();
    Ok((1.0 / g.inverse_cdf(u)).min(cap))
}

/// Conjugate draw of every class-mean prior variance,
/// `InvGamma(0.001 + p/2, 0.001 + Σ_j (μ_cj − μ0_cj)²/2)`.
pub fn update_sigma2_c<R: Rng + ?Sized>(
    mu: &DMatrix<f64>,
    mu0: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let p = mu.ncols() as f64;
    (0..mu.nrows())
        .map(|c| {
            let rss: f64 = (mu.row(c) - mu0.row(c)).iter().map(|d| d * d).sum();
            sample_inverse_gamma(0.001 + p / 2.0, 0.001 + rss / 2.0, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EdgeMask;
    use crate::rng::RngStream;

    fn identity_corr(p: usize) -> CorrelationState {
        CorrelationState {
            r: DMatrix::identity(p, p),
            lambda: DVector::from_element(p, 1.0),
            delta: EdgeMask::empty(p),
            fixed_edges: EdgeMask::empty(p),
        }
    }

    #[test]
    fn two_term_normal_ratio() {
        let z = DMatrix::from_element(1, 1, 2.0);
        let mu = DMatrix::from_column_slice(2, 1, &[0.0, 2.0]);
        let pi = DVector::from_element(2, 0.5);
        let probs = assignment_probabilities(&z, &mu, &identity_corr(1), Some(&pi)).unwrap();
        let phi = |x: f64| (-0.5 * x * x).exp();
        let expected = phi(0.0) / (phi(2.0) + phi(0.0));
        assert!((probs[(0, 1)] - expected).abs() < 1e-12);
        assert!((probs[(0, 1)] - 0.881).abs() < 1e-3);
    }

    #[test]
    fn equal_means_give_equal_odds() {
        let z = DMatrix::from_row_slice(2, 2, &[0.3, -1.0, 2.0, 0.1]);
        let mu = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let probs = assignment_probabilities(&z, &mu, &identity_corr(2), None).unwrap();
        assert!(probs.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn far_rows_do_not_underflow() {
        let z = DMatrix::from_element(1, 1, 1e3);
        let mu = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let probs = assignment_probabilities(&z, &mu, &identity_corr(1), None).unwrap();
        assert!((probs[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_fraction_wins() {
        let z = DMatrix::from_element(1, 1, 0.0);
        let mu = DMatrix::from_column_slice(3, 1, &[0.0, 0.1, -0.1]);
        let pi = DVector::from_row_slice(&[1.0 - 2e-12, 1e-12, 1e-12]);
        let probs = assignment_probabilities(&z, &mu, &identity_corr(1), Some(&pi)).unwrap();
        assert!(probs[(0, 0)] > 1.0 - 1e-11);
    }

    #[test]
    fn labeled_rows_keep_their_class() {
        let probs = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let mut y = vec![0, 0];
        let mut rng = RngStream::new(1, 0);
        update_assignments(&probs, &[true, false], &mut y, &mut rng);
        assert_eq!(y, vec![0, 1]);
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let t = DVector::from_row_slice(&[0.3, -1.2, 2.0]);
        let a = softmax(&t);
        let b = softmax(&t.add_scalar(17.5));
        assert!((a - b).amax() < 1e-15);
    }

    fn mean_pi(counts: &[usize], seed: u64) -> DVector<f64> {
        let mut rng = RngStream::new(seed, 0);
        let mut s = CsmfState::random(counts.len(), &mut rng);
        let mut acc = DVector::zeros(counts.len());
        let (burn, keep) = (2000, 20000);
        for t in 0..burn + keep {
            update_csmf(&mut s, counts, &mut rng).unwrap();
            if t >= burn {
                acc += s.pi();
            }
        }
        acc / keep as f64
    }

    #[test]
    fn balanced_counts_give_uniform_fractions() {
        let m = mean_pi(&[50, 50, 50, 50], 3);
        assert!(m.iter().all(|v| (v - 0.25).abs() < 0.02), "{m}");
    }

    #[test]
    fn concentrated_counts_concentrate_pi() {
        let m = mean_pi(&[100, 0, 0], 4);
        assert!(m[0] > 0.9, "{m}");
    }

    #[test]
    fn zero_residual_variance_concentrates_low() {
        let mu = DMatrix::zeros(1, 40);
        let mut rng = RngStream::new(8, 0);
        let draws: Vec<f64> = (0..2000).map(|_| update_sigma2_c(&mu, &mu, &mut rng).unwrap()[0]).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        // InvGamma(20.001, 0.001) has mean 0.001 / 19.001.
        assert!((mean / (0.001 / 19.001) - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn residual_sum_of_squares_four_matches_quantile() {
        // p = 2 and RSS = 4 give InvGamma(1.001, 2.001); 1/X is Gamma(1.001, rate 2.001).
        let mu = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        let mu0 = DMatrix::zeros(1, 2);
        let mut rng = RngStream::new(9, 0);
        let mut draws: Vec<f64> = (0..100_000)
            .map(|_| update_sigma2_c(&mu, &mu0, &mut rng).unwrap()[0])
            .collect();
        draws.sort_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        let expected = 1.0 / Gamma::new(1.001, 2.001).unwrap().inverse_cdf(0.5);
        assert!((median / expected - 1.0).abs() < 0.02, "{median} vs {expected}");
    }
}
